use std::fmt;

use crate::error::{LmpoError, Result};
use crate::linalg::{self, C64, ZERO};
use crate::model::LiouvillianMPO;
use crate::pauli::kron;
use crate::tensor_core::{Gate, OperatorMPO};

/// Accuracy order of the splitting scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrotterOrder {
    Second = 2,
    Third = 3,
    Fourth = 4,
}

impl TrotterOrder {
    pub fn value(self) -> u8 {
        self as u8
    }

    /// Composition weights of the symmetric second-order step; they sum to 1.
    fn weights(self) -> Vec<C64> {
        match self {
            TrotterOrder::Second => vec![C64::new(1.0, 0.0)],
            TrotterOrder::Third => {
                let a = C64::new(0.5, 0.5 / 3f64.sqrt());
                vec![a, a.conj()]
            }
            TrotterOrder::Fourth => {
                let root = C64::from_polar(2f64.powf(1.0 / 3.0), 2.0 * std::f64::consts::PI / 3.0);
                let g = C64::new(1.0, 0.0) / (C64::new(2.0, 0.0) - root);
                vec![g, C64::new(1.0, 0.0) - 2.0 * g, g]
            }
        }
    }
}

impl TryFrom<u8> for TrotterOrder {
    type Error = LmpoError;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            2 => Ok(TrotterOrder::Second),
            3 => Ok(TrotterOrder::Third),
            4 => Ok(TrotterOrder::Fourth),
            _ => Err(LmpoError::Unsupported(format!("Trotter order {v}; possible values are 2, 3, 4"))),
        }
    }
}

impl fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Time stepping and truncation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    pub tau: f64,
    pub order: TrotterOrder,
    /// Largest discarded fraction of the squared Schmidt weight per bond.
    pub cutoff: f64,
    pub max_dim: usize,
    /// Hermitize every this many steps; 0 never.
    pub hermitize_every: usize,
    pub force_trace: bool,
    pub output_every: usize,
    /// Abort when a recorded expectation value has a larger imaginary part.
    pub breakdown_imag: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            tau: 0.01,
            order: TrotterOrder::Fourth,
            cutoff: 1e-16,
            max_dim: 400,
            hermitize_every: 10,
            force_trace: true,
            output_every: 1,
            breakdown_imag: 1e-2,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(LmpoError::InvalidParameter(format!("time step {} must be positive", self.tau)));
        }
        if !(self.cutoff >= 0.0) {
            return Err(LmpoError::InvalidParameter(format!("cutoff {} must be non-negative", self.cutoff)));
        }
        if self.max_dim == 0 {
            return Err(LmpoError::InvalidParameter("max_dim must be positive".into()));
        }
        if self.output_every == 0 {
            return Err(LmpoError::InvalidParameter("output_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// One factor of a step: the exponential of one layer's generator.
#[derive(Debug, Clone)]
pub struct Substep {
    pub mpo: OperatorMPO,
    /// Complex time this factor advances its layer by.
    pub coefficient: C64,
    pub layer: usize,
}

/// The ordered factors of one time step.
///
/// The generator is split into layers of commuting local terms. Each layer's
/// coefficients add up to `tau`.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    pub substeps: Vec<Substep>,
    pub tau: f64,
    pub order: TrotterOrder,
    pub layers: usize,
}

/// A local piece of the generator with the gate span it occupies.
struct Piece {
    first: usize,
    second: usize,
    matrix: Vec<C64>,
}

fn pieces(gen: &LiouvillianMPO) -> Vec<Piece> {
    let n = gen.len();
    let mut degree = vec![0usize; n];
    for b in gen.bond_terms() {
        degree[b.first] += 1;
        degree[b.second] += 1;
    }
    let mut local = vec![None; n];
    for s in gen.site_terms() {
        local[s.position] = Some(s.matrix);
    }
    let id = crate::pauli::Pauli::I;
    let eye4: Vec<C64> = crate::pauli::left_mult(&id.matrix()).to_vec();
    let mut out = Vec::new();
    for b in gen.bond_terms() {
        let mut m = b.matrix.clone();
        for (pos, left) in [(b.first, true), (b.second, false)] {
            if let Some(site) = local[pos] {
                let share: Vec<C64> = site.iter().map(|z| z / degree[pos] as f64).collect();
                let lifted = if left { kron(4, &share, 4, &eye4) } else { kron(4, &eye4, 4, &share) };
                m.iter_mut().zip(&lifted).for_each(|(a, b)| *a += b);
            }
        }
        out.push(Piece { first: b.first, second: b.second, matrix: m });
    }
    for (pos, site) in local.iter().enumerate() {
        if let (Some(site), 0) = (site, degree[pos]) {
            out.push(Piece { first: pos, second: pos, matrix: site.to_vec() });
        }
    }
    out.sort_by_key(|p| (p.first, p.second));
    out
}

/// Interval coloring: pieces in one layer occupy disjoint position spans.
fn assign_layers(pieces: &[Piece]) -> (Vec<usize>, usize) {
    let mut ends: Vec<usize> = Vec::new();
    let mut layer = Vec::with_capacity(pieces.len());
    for p in pieces {
        match ends.iter().position(|&e| e < p.first) {
            Some(l) => {
                ends[l] = p.second;
                layer.push(l);
            }
            None => {
                ends.push(p.second);
                layer.push(ends.len() - 1);
            }
        }
    }
    (layer, ends.len())
}

/// Symmetric second-order sequence of (layer, weight) for weight `c`.
fn strang(layers: usize, c: C64) -> Vec<(usize, C64)> {
    let last = layers - 1;
    let half = c * 0.5;
    let mut seq: Vec<(usize, C64)> = (0..last).map(|l| (l, half)).collect();
    seq.push((last, c));
    seq.extend((0..last).rev().map(|l| (l, half)));
    seq
}

/// Build the factors of one `cfg.tau` step of `gen` at `cfg.order`.
///
/// Bond exponentials carry each endpoint's single-site term divided by the
/// number of bonds at that site. Orders 3 and 4 compose the symmetric
/// second-order step with complex weights, adjacent factors on the same
/// layer are merged.
pub fn make_propagators(gen: &LiouvillianMPO, cfg: &StepperConfig) -> Result<PropagatorSet> {
    cfg.validate()?;
    let n = gen.len();
    let pieces = pieces(gen);
    let (layer_of, layers) = assign_layers(&pieces);
    if layers == 0 {
        return Ok(PropagatorSet {
            substeps: vec![Substep { mpo: OperatorMPO::identity(n), coefficient: C64::new(cfg.tau, 0.0), layer: 0 }],
            tau: cfg.tau,
            order: cfg.order,
            layers: 0,
        });
    }
    let mut seq: Vec<(usize, C64)> = Vec::new();
    for w in cfg.order.weights() {
        for (l, c) in strang(layers, w * cfg.tau) {
            match seq.last_mut() {
                Some((prev, acc)) if *prev == l => *acc += c,
                _ => seq.push((l, c)),
            }
        }
    }
    let mut substeps = Vec::with_capacity(seq.len());
    for (l, c) in seq {
        let gates: Vec<Gate> = pieces
            .iter()
            .zip(&layer_of)
            .filter(|(_, &pl)| pl == l)
            .map(|(p, _)| {
                let scaled: Vec<C64> = p.matrix.iter().map(|z| z * c).collect();
                if p.first == p.second {
                    Gate::One { position: p.first, matrix: linalg::expm(4, &scaled) }
                } else {
                    Gate::Two { first: p.first, second: p.second, matrix: linalg::expm(16, &scaled) }
                }
            })
            .collect();
        substeps.push(Substep { mpo: OperatorMPO::from_gates(n, &gates)?, coefficient: c, layer: l });
    }
    debug_assert!(substeps.iter().all(|s| s.coefficient != ZERO));
    Ok(PropagatorSet { substeps, tau: cfg.tau, order: cfg.order, layers })
}
