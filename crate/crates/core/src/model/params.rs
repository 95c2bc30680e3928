use crate::error::{LmpoError, Result};

use super::lattice::{Lattice, LatticeKind};

/// A two-qubit coupling: one value on every lattice bond, or an explicit
/// symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Default for Coupling {
    fn default() -> Self {
        Coupling::Uniform(0.0)
    }
}

impl Coupling {
    pub fn is_zero(&self) -> bool {
        match self {
            Coupling::Uniform(v) => *v == 0.0,
            Coupling::Matrix(m) => m.iter().flatten().all(|&v| v == 0.0),
        }
    }

    fn value(&self, a: usize, b: usize) -> f64 {
        match self {
            Coupling::Uniform(v) => *v,
            Coupling::Matrix(m) => m[a][b],
        }
    }

    fn validate(&self, name: &str, n: usize) -> Result<()> {
        if let Coupling::Matrix(m) = self {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(LmpoError::InvalidParameter(format!("{name} must be a {n}×{n} matrix")));
            }
            for i in 0..n {
                if m[i][i] != 0.0 {
                    return Err(LmpoError::InvalidParameter(format!("{name}[{i},{i}] must be zero")));
                }
                for j in 0..i {
                    if m[i][j] != m[j][i] {
                        return Err(LmpoError::InvalidParameter(format!("{name} is not symmetric at ({i},{j})")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Hamiltonian and dissipator coefficients in the rotating frame.
///
/// Fields are per qubit (angular frequencies for `h_*`, rates for `g_*`).
/// `g_0` relaxes toward Z = +1, `g_1` toward Z = −1, `g_2` dephases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub h_x: Vec<f64>,
    pub h_y: Vec<f64>,
    pub h_z: Vec<f64>,
    pub j: Coupling,
    pub j_z: Coupling,
    pub g_0: Vec<f64>,
    pub g_1: Vec<f64>,
    pub g_2: Vec<f64>,
}

/// Coefficients of one coupled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondCoupling {
    pub a: usize,
    pub b: usize,
    pub j: f64,
    pub j_z: f64,
}

impl ModelParams {
    /// All coefficients zero for `n` qubits.
    pub fn zeros(n: usize) -> Self {
        ModelParams {
            h_x: vec![0.0; n],
            h_y: vec![0.0; n],
            h_z: vec![0.0; n],
            j: Coupling::default(),
            j_z: Coupling::default(),
            g_0: vec![0.0; n],
            g_1: vec![0.0; n],
            g_2: vec![0.0; n],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.h_x.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        for (name, v) in [("h_y", &self.h_y), ("h_z", &self.h_z), ("g_0", &self.g_0), ("g_1", &self.g_1), ("g_2", &self.g_2)] {
            if v.len() != n {
                return Err(LmpoError::InvalidParameter(format!("{name} has {} entries, expected {n}", v.len())));
            }
        }
        for (name, v) in [("g_0", &self.g_0), ("g_1", &self.g_1), ("g_2", &self.g_2)] {
            if let Some(i) = v.iter().position(|&g| !(g >= 0.0)) {
                return Err(LmpoError::InvalidParameter(format!("{name}[{i}] = {} must be non-negative", v[i])));
            }
        }
        let all = self.h_x.iter().chain(&self.h_y).chain(&self.h_z);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(LmpoError::InvalidParameter("field coefficients must be finite".into()));
        }
        self.j.validate("J", n)?;
        self.j_z.validate("J_z", n)
    }

    /// Non-zero couplings, checked against the lattice.
    ///
    /// Uniform values apply to every lattice bond. Matrix entries off the
    /// bond set are an error except on custom lattices, where they are
    /// accepted as additional long-range couplings.
    pub fn bond_couplings(&self, lattice: &Lattice) -> Result<Vec<BondCoupling>> {
        self.validate()?;
        let n = self.n_qubits();
        if lattice.n_qubits != n {
            return Err(LmpoError::InvalidParameter(format!(
                "parameters for {n} qubits on a lattice of {}",
                lattice.n_qubits
            )));
        }
        let mut pairs: Vec<(usize, usize)> = lattice.bonds.clone();
        for c in [&self.j, &self.j_z] {
            if let Coupling::Matrix(m) = c {
                for a in 0..n {
                    for b in a + 1..n {
                        if m[a][b] != 0.0 && !lattice.has_bond(a, b) {
                            if lattice.kind != LatticeKind::Custom {
                                return Err(LmpoError::InvalidParameter(format!(
                                    "coupling between ({a}, {b}) which is not a bond of the {} lattice",
                                    lattice.kind
                                )));
                            }
                            pairs.push((a, b));
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(pairs
            .into_iter()
            .map(|(a, b)| BondCoupling { a, b, j: self.j.value(a, b), j_z: self.j_z.value(a, b) })
            .filter(|c| c.j != 0.0 || c.j_z != 0.0)
            .collect())
    }

    /// Stable text form used for hashing.
    pub fn canonical_text(&self) -> String {
        fn vec(v: &[f64]) -> String {
            v.iter().map(|x| format!("{:e}", x)).collect::<Vec<_>>().join(",")
        }
        fn coupling(c: &Coupling) -> String {
            match c {
                Coupling::Uniform(v) => format!("u{:e}", v),
                Coupling::Matrix(m) => format!("m[{}]", m.iter().map(|r| vec(r)).collect::<Vec<_>>().join(";")),
            }
        }
        format!(
            "h_x={}\nh_y={}\nh_z={}\nJ={}\nJ_z={}\ng_0={}\ng_1={}\ng_2={}\n",
            vec(&self.h_x),
            vec(&self.h_y),
            vec(&self.h_z),
            coupling(&self.j),
            coupling(&self.j_z),
            vec(&self.g_0),
            vec(&self.g_1),
            vec(&self.g_2)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_coupling_follows_lattice() {
        let mut p = ModelParams::zeros(4);
        p.j = Coupling::Uniform(2.0);
        let bonds = p.bond_couplings(&Lattice::chain(4)).unwrap();
        assert_eq!(bonds.len(), 3);
        assert!(bonds.iter().all(|b| b.j == 2.0 && b.j_z == 0.0));
    }

    #[test]
    fn matrix_off_lattice_is_rejected() {
        let mut p = ModelParams::zeros(3);
        let mut m = vec![vec![0.0; 3]; 3];
        m[0][2] = 1.0;
        m[2][0] = 1.0;
        p.j = Coupling::Matrix(m);
        assert!(p.bond_couplings(&Lattice::chain(3)).is_err());
        let custom = Lattice::custom(3, &[(0, 1)], vec![0, 1, 2]).unwrap();
        assert_eq!(p.bond_couplings(&custom).unwrap().len(), 1);
    }

    #[test]
    fn rejects_negative_rates_and_asymmetry() {
        let mut p = ModelParams::zeros(2);
        p.g_1[1] = -0.1;
        assert!(p.validate().is_err());
        let mut p = ModelParams::zeros(2);
        p.j = Coupling::Matrix(vec![vec![0.0, 1.0], vec![0.5, 0.0]]);
        assert!(p.validate().is_err());
    }
}
