use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{LmpoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LatticeKind {
    Chain,
    Ring,
    Strip,
    Cylinder,
    Plaquette,
    Custom,
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LatticeKind::Chain => "chain",
            LatticeKind::Ring => "ring",
            LatticeKind::Strip => "strip",
            LatticeKind::Cylinder => "cylinder",
            LatticeKind::Plaquette => "plaquette",
            LatticeKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for LatticeKind {
    type Err = LmpoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chain" => Ok(LatticeKind::Chain),
            "ring" => Ok(LatticeKind::Ring),
            "strip" => Ok(LatticeKind::Strip),
            "cylinder" => Ok(LatticeKind::Cylinder),
            "plaquette" => Ok(LatticeKind::Plaquette),
            "custom" => Ok(LatticeKind::Custom),
            other => Err(LmpoError::InvalidParameter(format!("unknown lattice kind {other:?}"))),
        }
    }
}

/// Qubit connectivity plus the order in which qubits are laid out along the MPS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub n_qubits: usize,
    pub kind: LatticeKind,
    pub l_x: usize,
    pub l_y: usize,
    /// Unordered pairs stored as (low, high), sorted.
    pub bonds: Vec<(usize, usize)>,
    /// `mpo_path[k]` is the qubit at MPS position `k`.
    pub mpo_path: Vec<usize>,
    position: Vec<usize>,
}

/// Build one of the standard lattices.
///
/// `l_x = 0` means a one-dimensional lattice of `n_qubits` sites. A chain with
/// `periodic_x` is a ring and a strip with `periodic_y` is a cylinder.
pub fn build_lattice(
    kind: LatticeKind,
    n_qubits: usize,
    l_x: usize,
    l_y: usize,
    periodic_x: bool,
    periodic_y: bool,
) -> Result<Lattice> {
    if n_qubits == 0 {
        return Err(LmpoError::InvalidParameter("a lattice needs at least one qubit".into()));
    }
    let l_y = l_y.max(1);
    let l_x = if l_x == 0 { n_qubits / l_y } else { l_x };
    if periodic_x && l_y > 1 {
        return Err(LmpoError::InvalidParameter("periodic_x requires l_y = 1".into()));
    }
    match kind {
        LatticeKind::Plaquette => Lattice::plaquette(n_qubits),
        LatticeKind::Custom => {
            Err(LmpoError::InvalidParameter("custom lattices are built with Lattice::custom".into()))
        }
        LatticeKind::Chain | LatticeKind::Ring if l_y == 1 => {
            if l_x != n_qubits {
                return Err(LmpoError::InvalidParameter(format!("l_x = {l_x} does not match N = {n_qubits}")));
            }
            if kind == LatticeKind::Ring || periodic_x {
                Lattice::ring(n_qubits)
            } else {
                Ok(Lattice::chain(n_qubits))
            }
        }
        _ => {
            if l_x * l_y != n_qubits {
                return Err(LmpoError::InvalidParameter(format!("l_x·l_y = {} but N = {n_qubits}", l_x * l_y)));
            }
            let periodic_y = periodic_y || kind == LatticeKind::Cylinder;
            Lattice::grid(l_x, l_y, periodic_y)
        }
    }
}

impl Lattice {
    fn assemble(
        n_qubits: usize,
        kind: LatticeKind,
        l_x: usize,
        l_y: usize,
        bonds: impl IntoIterator<Item = (usize, usize)>,
        mpo_path: Vec<usize>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in bonds {
            if a == b {
                return Err(LmpoError::InvalidParameter(format!("self-bond on qubit {a}")));
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(LmpoError::InvalidParameter(format!("bond ({a}, {b}) outside 0..{n_qubits}")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        if mpo_path.len() != n_qubits {
            return Err(LmpoError::InvalidParameter("mpo_path must list every qubit once".into()));
        }
        let mut position = vec![usize::MAX; n_qubits];
        for (k, &q) in mpo_path.iter().enumerate() {
            if q >= n_qubits || position[q] != usize::MAX {
                return Err(LmpoError::InvalidParameter("mpo_path must be a permutation of the qubits".into()));
            }
            position[q] = k;
        }
        Ok(Lattice { n_qubits, kind, l_x, l_y, bonds: set.into_iter().collect(), mpo_path, position })
    }

    pub fn chain(n: usize) -> Self {
        Self::assemble(n, LatticeKind::Chain, n, 1, (1..n).map(|i| (i - 1, i)), (0..n).collect())
            .expect("chain bonds are valid")
    }

    /// A ring laid out along the folded path 0, N−1, 1, N−2, … so that
    /// every bond spans at most two positions.
    pub fn ring(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(LmpoError::InvalidParameter(format!("a ring needs at least 3 qubits, got {n}")));
        }
        let mut path = Vec::with_capacity(n);
        let (mut lo, mut hi) = (0, n - 1);
        while lo <= hi {
            path.push(lo);
            if lo != hi {
                path.push(hi);
            }
            lo += 1;
            if hi == 0 {
                break;
            }
            hi -= 1;
        }
        let bonds = (0..n).map(|i| (i, (i + 1) % n));
        Self::assemble(n, LatticeKind::Ring, n, 1, bonds, path)
    }

    /// Rectangular l_x × l_y grid with qubit `x·l_y + y`; periodic along y
    /// makes it a cylinder, whose columns are laid out folded.
    fn grid(l_x: usize, l_y: usize, periodic_y: bool) -> Result<Self> {
        let n = l_x * l_y;
        let id = |x: usize, y: usize| x * l_y + y;
        let mut bonds = Vec::new();
        for x in 0..l_x {
            for y in 0..l_y {
                if x + 1 < l_x {
                    bonds.push((id(x, y), id(x + 1, y)));
                }
                if y + 1 < l_y {
                    bonds.push((id(x, y), id(x, y + 1)));
                }
            }
            if periodic_y && l_y > 2 {
                bonds.push((id(x, 0), id(x, l_y - 1)));
            }
        }
        let kind = if periodic_y { LatticeKind::Cylinder } else { LatticeKind::Strip };
        let path = if periodic_y {
            let mut column = Vec::with_capacity(l_y);
            let (mut lo, mut hi) = (0, l_y - 1);
            while lo < hi {
                column.push(lo);
                column.push(hi);
                lo += 1;
                hi -= 1;
            }
            if lo == hi {
                column.push(lo);
            }
            (0..l_x).flat_map(|x| column.iter().map(move |&y| id(x, y))).collect()
        } else {
            (0..n).collect()
        };
        Self::assemble(n, kind, l_x, l_y, bonds, path)
    }

    /// A ring of N−2 qubits with edge qubits 0 and N−1 attached at opposite points.
    ///
    /// Qubit 1 is the ring site next to qubit 0 and N−2 the one next to N−1.
    /// The two arms are 2, 4, 6, … and 3, 5, 7, …, so labels already follow
    /// the zigzag order and each bond spans at most two positions. Mirror
    /// pairs are (2k, 2k+1).
    pub fn plaquette(n: usize) -> Result<Self> {
        if n < 6 || n % 2 != 0 {
            return Err(LmpoError::InvalidParameter(format!(
                "a plaquette needs an even ring of at least 4 sites (N even, N ≥ 6), got N = {n}"
            )));
        }
        let mut bonds = vec![(0, 1), (1, 2), (1, 3)];
        let mut k = 2;
        while k + 2 <= n - 4 {
            bonds.push((k, k + 2));
            bonds.push((k + 1, k + 3));
            k += 2;
        }
        bonds.extend([(n - 4, n - 2), (n - 3, n - 2), (n - 2, n - 1)]);
        Self::assemble(n, LatticeKind::Plaquette, n, 1, bonds, (0..n).collect())
    }

    /// Arbitrary bonds laid out along an explicit path.
    pub fn custom(n: usize, bonds: &[(usize, usize)], mpo_path: Vec<usize>) -> Result<Self> {
        Self::assemble(n, LatticeKind::Custom, n, 1, bonds.iter().copied(), mpo_path)
    }

    /// MPS position of a qubit.
    pub fn position(&self, qubit: usize) -> usize {
        self.position[qubit]
    }

    pub fn has_bond(&self, a: usize, b: usize) -> bool {
        self.bonds.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn degree(&self, qubit: usize) -> usize {
        self.bonds.iter().filter(|&&(a, b)| a == qubit || b == qubit).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_qubits).map(|q| self.degree(q)).collect()
    }

    /// Largest separation along the path between two bonded qubits.
    pub fn max_path_range(&self) -> usize {
        self.bonds
            .iter()
            .map(|&(a, b)| self.position(a).abs_diff(self.position(b)))
            .max()
            .unwrap_or(0)
    }

    /// Upper/lower arm pairs that coincide by reflection symmetry (plaquettes only).
    pub fn mirror_pairs(&self) -> Vec<(usize, usize)> {
        if self.kind != LatticeKind::Plaquette {
            return Vec::new();
        }
        (1..=(self.n_qubits - 4) / 2).map(|k| (2 * k, 2 * k + 1)).collect()
    }

    /// Two-coloring by breadth-first search from each component's lowest qubit.
    /// `None` when the graph has an odd cycle.
    pub fn sublattice(&self) -> Option<Vec<u8>> {
        let mut adj = vec![Vec::new(); self.n_qubits];
        for &(a, b) in &self.bonds {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut color = vec![u8::MAX; self.n_qubits];
        for start in 0..self.n_qubits {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(q) = queue.pop_front() {
                for &r in &adj[q] {
                    if color[r] == u8::MAX {
                        color[r] = 1 - color[q];
                        queue.push_back(r);
                    } else if color[r] == color[q] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }
}
