use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{LmpoError, Result};
use crate::linalg::C64;
use crate::model::Lattice;
use crate::pauli::Pauli;
use crate::tensor_core::VectorizedState;

use super::{osee_center, renyi2, Environments};

/// Whole-state quantities recorded alongside local observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Global {
    Trace,
    S2,
    OseeCenter,
}

impl Global {
    pub const ALL: [Global; 3] = [Global::Trace, Global::S2, Global::OseeCenter];

    pub fn name(self) -> &'static str {
        match self {
            Global::Trace => "trace",
            Global::S2 => "s2",
            Global::OseeCenter => "osee_center",
        }
    }
}

impl fmt::Display for Global {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Global {
    type Err = LmpoError;

    fn from_str(s: &str) -> Result<Self> {
        Global::ALL
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| LmpoError::InvalidParameter(format!("unknown global quantity {s:?}")))
    }
}

/// Which observables to record, by qubit label.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableRequest {
    pub one_q: Vec<(usize, Pauli)>,
    pub two_q: Vec<(usize, usize, Pauli, Pauli)>,
    pub globals: Vec<Global>,
    /// Track the largest single-qubit difference across mirror pairs.
    pub mirror_check: bool,
}

impl ObservableRequest {
    /// X, Y, Z on every qubit plus every global quantity.
    pub fn local(n: usize) -> Self {
        ObservableRequest {
            one_q: (0..n).flat_map(|q| Pauli::XYZ.map(|a| (q, a))).collect(),
            two_q: Vec::new(),
            globals: Global::ALL.to_vec(),
            mirror_check: true,
        }
    }

    /// Cartesian products of index and component lists.
    pub fn from_lists(
        one_q_indices: &[usize],
        one_q_components: &[Pauli],
        two_q_pairs: &[(usize, usize)],
        two_q_components: &[(Pauli, Pauli)],
    ) -> Self {
        ObservableRequest {
            one_q: one_q_indices.iter().flat_map(|&q| one_q_components.iter().map(move |&a| (q, a))).collect(),
            two_q: two_q_pairs
                .iter()
                .flat_map(|&(i, j)| two_q_components.iter().map(move |&(a, b)| (i, j, a, b)))
                .collect(),
            globals: Global::ALL.to_vec(),
            mirror_check: true,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        for &(q, a) in &self.one_q {
            if q >= n || a == Pauli::I {
                return Err(LmpoError::InvalidParameter(format!("bad one-qubit observable {a}{q}")));
            }
        }
        for &(i, j, a, b) in &self.two_q {
            if i >= n || j >= n || i == j || a == Pauli::I || b == Pauli::I {
                return Err(LmpoError::InvalidParameter(format!("bad two-qubit observable {a}{i}{b}{j}")));
            }
        }
        Ok(())
    }
}

/// Real values of one observable with the imaginary residue kept beside them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    pub value: Vec<f64>,
    pub imag: Vec<f64>,
}

impl Series {
    fn push(&mut self, z: C64) {
        self.value.push(z.re);
        self.imag.push(z.im);
    }
}

/// Time series of requested observables, keyed by qubit label.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub one_q: BTreeMap<(usize, Pauli), Series>,
    pub two_q: BTreeMap<(usize, usize, Pauli, Pauli), Series>,
    pub globals: BTreeMap<Global, Vec<f64>>,
    /// Largest |imaginary part| over all local values at each time.
    pub max_imag: Vec<f64>,
    /// Largest |⟨σ_p⟩ − ⟨σ_q⟩| over mirror pairs; empty without mirror pairs.
    pub mirror_asymmetry: Vec<f64>,
    pub max_bond_dim: Vec<usize>,
    request: ObservableRequest,
}

impl TrajectoryRecord {
    pub fn new(request: &ObservableRequest) -> Self {
        TrajectoryRecord {
            times: Vec::new(),
            one_q: request.one_q.iter().map(|&k| (k, Series::default())).collect(),
            two_q: request.two_q.iter().map(|&k| (k, Series::default())).collect(),
            globals: request.globals.iter().map(|&g| (g, Vec::new())).collect(),
            max_imag: Vec::new(),
            mirror_asymmetry: Vec::new(),
            max_bond_dim: Vec::new(),
            request: request.clone(),
        }
    }

    pub fn request(&self) -> &ObservableRequest {
        &self.request
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Evaluate every requested quantity on `state` (laid out along `lattice`).
    pub fn record(&mut self, t: f64, state: &VectorizedState, lattice: &Lattice) -> Result<()> {
        if state.len() != lattice.n_qubits {
            return Err(LmpoError::Structure("state and lattice sizes differ".into()));
        }
        self.request.validate(lattice.n_qubits)?;
        if self.times.last().is_some_and(|&last| t <= last) {
            return Err(LmpoError::InvalidParameter(format!("record time {t} does not increase")));
        }
        let env = Environments::new(state);
        let mut worst_imag: f64 = 0.0;

        for (&(q, a), series) in self.one_q.iter_mut() {
            let z = env.one(lattice.position(q), a);
            worst_imag = worst_imag.max(z.im.abs());
            series.push(z);
        }

        // Group two-point requests by their left position and axis.
        let mut groups: BTreeMap<(usize, Pauli), Vec<((usize, usize, Pauli, Pauli), usize, Pauli)>> = BTreeMap::new();
        for &key in self.two_q.keys() {
            let (i, j, a, b) = key;
            let (pi, pj) = (lattice.position(i), lattice.position(j));
            let (left, right) = if pi < pj { ((pi, a), (pj, b)) } else { ((pj, b), (pi, a)) };
            groups.entry(left).or_default().push((key, right.0, right.1));
        }
        for ((pi, a), members) in groups {
            let targets: Vec<(usize, Pauli)> = members.iter().map(|&(_, pj, b)| (pj, b)).collect();
            for (z, (key, _, _)) in env.two_many(pi, a, &targets).into_iter().zip(&members) {
                worst_imag = worst_imag.max(z.im.abs());
                self.two_q.get_mut(key).expect("requested key").push(z);
            }
        }

        for (&g, series) in self.globals.iter_mut() {
            series.push(match g {
                Global::Trace => env.trace().re,
                Global::S2 => renyi2(state)?,
                Global::OseeCenter => osee_center(state)?,
            });
        }

        let pairs = lattice.mirror_pairs();
        if self.request.mirror_check && !pairs.is_empty() {
            let mut worst: f64 = 0.0;
            for (p, q) in pairs {
                for a in Pauli::XYZ {
                    let d = env.one(lattice.position(p), a).re - env.one(lattice.position(q), a).re;
                    worst = worst.max(d.abs());
                }
            }
            self.mirror_asymmetry.push(worst);
        }

        self.max_imag.push(worst_imag);
        self.max_bond_dim.push(state.max_bond_dim());
        self.times.push(t);
        Ok(())
    }

    /// True once the mirror asymmetry has exceeded `threshold`.
    pub fn symmetry_flagged(&self, threshold: f64) -> bool {
        self.mirror_asymmetry.iter().any(|&d| d > threshold)
    }

    /// First recorded time at which the mirror asymmetry exceeds `threshold`.
    pub fn symmetry_break_time(&self, threshold: f64) -> Option<f64> {
        self.mirror_asymmetry.iter().position(|&d| d > threshold).map(|k| self.times[k])
    }

    pub fn one(&self, qubit: usize, axis: Pauli) -> Option<&Series> {
        self.one_q.get(&(qubit, axis))
    }

    pub fn two(&self, i: usize, j: usize, a: Pauli, b: Pauli) -> Option<&Series> {
        self.two_q.get(&(i, j, a, b))
    }

    pub fn global(&self, g: Global) -> Option<&[f64]> {
        self.globals.get(&g).map(Vec::as_slice)
    }

    /// Append `other`, dropping its first row when it repeats the last time here.
    pub fn extend(&mut self, other: &TrajectoryRecord) -> Result<()> {
        if other.request != self.request {
            return Err(LmpoError::InvalidParameter("records of different requests".into()));
        }
        let skip = match (self.times.last(), other.times.first()) {
            (Some(&a), Some(&b)) if (a - b).abs() <= 1e-12 * a.abs().max(1.0) => 1,
            (Some(&a), Some(&b)) if b < a => {
                return Err(LmpoError::InvalidParameter("appended record starts before this one ends".into()))
            }
            _ => 0,
        };
        self.times.extend_from_slice(&other.times[skip..]);
        for (k, s) in self.one_q.iter_mut() {
            let o = &other.one_q[k];
            s.value.extend_from_slice(&o.value[skip..]);
            s.imag.extend_from_slice(&o.imag[skip..]);
        }
        for (k, s) in self.two_q.iter_mut() {
            let o = &other.two_q[k];
            s.value.extend_from_slice(&o.value[skip..]);
            s.imag.extend_from_slice(&o.imag[skip..]);
        }
        for (k, s) in self.globals.iter_mut() {
            s.extend_from_slice(&other.globals[k][skip..]);
        }
        self.max_imag.extend_from_slice(&other.max_imag[skip..]);
        if !other.mirror_asymmetry.is_empty() {
            self.mirror_asymmetry.extend_from_slice(&other.mirror_asymmetry[skip..]);
        }
        self.max_bond_dim.extend_from_slice(&other.max_bond_dim[skip..]);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{graph_state_on, pauli_product_on, PauliSpec};

    #[test]
    fn records_by_qubit_label() {
        let lat = Lattice::ring(5).unwrap();
        let specs: Vec<PauliSpec> = ["+z", "-z", "+x", "-y", "+y"].iter().map(|s| s.parse().unwrap()).collect();
        let state = pauli_product_on(&lat, &specs).unwrap();
        let req = ObservableRequest::from_lists(&[0, 1, 3], &Pauli::XYZ, &[(0, 3), (4, 1)], &[(Pauli::Z, Pauli::Y)]);
        let mut rec = TrajectoryRecord::new(&req);
        rec.record(0.0, &state, &lat).unwrap();
        assert!((rec.one(1, Pauli::Z).unwrap().value[0] + 1.0).abs() < 1e-14);
        assert!((rec.one(3, Pauli::Y).unwrap().value[0] + 1.0).abs() < 1e-14);
        assert!((rec.two(0, 3, Pauli::Z, Pauli::Y).unwrap().value[0] + 1.0).abs() < 1e-14);
        // qubit 4 is a Y eigenstate, so its Z vanishes
        assert!(rec.two(4, 1, Pauli::Z, Pauli::Y).unwrap().value[0].abs() < 1e-14);
        assert!(rec.record(0.0, &state, &lat).is_err(), "time must increase");
    }

    #[test]
    fn two_point_values_match_direct_contraction() {
        let lat = Lattice::ring(6).unwrap();
        let state = graph_state_on(&lat, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]).unwrap();
        let pairs: Vec<(usize, usize)> = (0..6).flat_map(|i| (0..6).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        let comps: Vec<(Pauli, Pauli)> = Pauli::XYZ.iter().flat_map(|&a| Pauli::XYZ.map(|b| (a, b))).collect();
        let req = ObservableRequest::from_lists(&[], &[], &pairs, &comps);
        let mut rec = TrajectoryRecord::new(&req);
        rec.record(0.0, &state, &lat).unwrap();
        for (&(i, j, a, b), s) in &rec.two_q {
            let direct =
                super::super::expect_2q(&state, lat.position(i), lat.position(j), a, b).unwrap();
            assert!((s.value[0] - direct).abs() < 1e-13);
        }
        // stabilizer X_1 Z_0 Z_2 is three-body; two-point X_1 Z_0 is zero
        assert!(rec.two(1, 0, Pauli::X, Pauli::Z).unwrap().value[0].abs() < 1e-13);
    }

    #[test]
    fn mirror_asymmetry_on_plaquettes() {
        let lat = Lattice::plaquette(8).unwrap();
        let mut specs = vec!["+z".parse::<PauliSpec>().unwrap(); 8];
        let req = ObservableRequest::local(8);
        let mut rec = TrajectoryRecord::new(&req);
        rec.record(0.0, &pauli_product_on(&lat, &specs).unwrap(), &lat).unwrap();
        specs[3] = "-z".parse().unwrap();
        rec.record(1.0, &pauli_product_on(&lat, &specs).unwrap(), &lat).unwrap();
        assert!(rec.mirror_asymmetry[0] < 1e-14 && (rec.mirror_asymmetry[1] - 2.0).abs() < 1e-14);
        assert_eq!(rec.symmetry_break_time(5e-3), Some(1.0));
    }
}
