//! Parameter files: `key = value` lines mirroring the solver's Python parameters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use lmpo_core::evolution::{StepperConfig, TrotterOrder};
use lmpo_core::model::{build_lattice, Coupling, Lattice, LatticeKind, ModelParams};
use lmpo_core::observables::{Global, ObservableRequest};
use lmpo_core::pauli::Pauli;
use lmpo_core::states::PauliSpec;
use lmpo_core::LmpoError;
use sha2::{Digest, Sha256};

/// Above this size, two-qubit output over all pairs needs `b_allow_all_pairs`.
pub const ALL_PAIRS_LIMIT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line, when the error is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: Option<usize>, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Which engine the spec is for. The dense oracle accepts any N ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Mpo,
    Oracle,
}

/// A per-qubit coefficient: one value for every qubit or a full vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Uniform(f64),
    PerQubit(Vec<f64>),
}

impl Field {
    pub fn values(&self, n: usize) -> Vec<f64> {
        match self {
            Field::Uniform(v) => vec![*v; n],
            Field::PerQubit(v) => v.clone(),
        }
    }
}

/// A pair coefficient: uniform on the lattice bonds, or explicit entries.
#[derive(Debug, Clone, PartialEq)]
pub enum PairField {
    Uniform(f64),
    /// Upper-triangle entries keyed by (low, high).
    Entries(BTreeMap<(usize, usize), f64>),
}

impl PairField {
    fn is_zero(&self) -> bool {
        match self {
            PairField::Uniform(v) => *v == 0.0,
            PairField::Entries(m) => m.values().all(|&v| v == 0.0),
        }
    }

    fn coupling(&self, n: usize) -> Coupling {
        match self {
            PairField::Uniform(v) => Coupling::Uniform(*v),
            PairField::Entries(m) => {
                let mut full = vec![vec![0.0; n]; n];
                for (&(a, b), &v) in m {
                    full[a][b] = v;
                    full[b][a] = v;
                }
                Coupling::Matrix(full)
            }
        }
    }
}

/// One simulation, with every parameter named as in the solver's input.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub n: usize,
    pub t_final: f64,
    pub tau: f64,
    pub t_init: f64,
    pub output_files_prefix: String,
    pub b_unique_id: bool,
    pub h_x: Field,
    pub h_y: Field,
    pub h_z: Field,
    pub j: PairField,
    pub j_z: PairField,
    pub g_0: Field,
    pub g_1: Field,
    pub g_2: Field,
    /// `None` is the default `+z` on every qubit.
    pub init_pauli_state: Option<Vec<PauliSpec>>,
    pub init_graph_state: Vec<(usize, usize)>,
    pub load_files_prefix: String,
    pub l_x: usize,
    pub l_y: usize,
    pub b_periodic_x: bool,
    pub b_periodic_y: bool,
    /// Named lattice overriding the one implied by `l_x`, `l_y` and periodicity.
    pub lattice: Option<LatticeKind>,
    pub trotter_order: TrotterOrder,
    pub max_dim_rho: usize,
    pub cut_off_rho: f64,
    pub b_force_rho_trace: bool,
    pub force_rho_hermitian_step: usize,
    pub b_initial_rho_compression: bool,
    pub b_save_final_state: bool,
    pub output_step: usize,
    pub one_q_indices: Vec<usize>,
    pub one_q_components: Vec<Pauli>,
    pub two_q_indices: Vec<(usize, usize)>,
    pub two_q_components: Vec<(Pauli, Pauli)>,
    pub b_allow_all_pairs: bool,
}

impl RunSpec {
    /// Defaults for every optional parameter.
    pub fn new(n: usize, t_final: f64, tau: f64) -> Self {
        RunSpec {
            n,
            t_final,
            tau,
            t_init: 0.0,
            output_files_prefix: "lindblad".into(),
            b_unique_id: false,
            h_x: Field::Uniform(0.0),
            h_y: Field::Uniform(0.0),
            h_z: Field::Uniform(0.0),
            j: PairField::Uniform(0.0),
            j_z: PairField::Uniform(0.0),
            g_0: Field::Uniform(0.0),
            g_1: Field::Uniform(0.0),
            g_2: Field::Uniform(0.0),
            init_pauli_state: None,
            init_graph_state: Vec::new(),
            load_files_prefix: String::new(),
            l_x: 0,
            l_y: 1,
            b_periodic_x: false,
            b_periodic_y: false,
            lattice: None,
            trotter_order: TrotterOrder::Fourth,
            max_dim_rho: 400,
            cut_off_rho: 1e-16,
            b_force_rho_trace: true,
            force_rho_hermitian_step: 4,
            b_initial_rho_compression: true,
            b_save_final_state: false,
            output_step: 1,
            one_q_indices: Vec::new(),
            one_q_components: vec![Pauli::Z],
            two_q_indices: Vec::new(),
            two_q_components: vec![(Pauli::Z, Pauli::Z)],
            b_allow_all_pairs: false,
        }
    }
}

const KEYS: &[&str] = &[
    "N",
    "t_final",
    "tau",
    "t_init",
    "output_files_prefix",
    "b_unique_id",
    "h_x",
    "h_y",
    "h_z",
    "J",
    "J_z",
    "g_0",
    "g_1",
    "g_2",
    "init_pauli_state",
    "init_graph_state",
    "load_files_prefix",
    "l_x",
    "l_y",
    "b_periodic_x",
    "b_periodic_y",
    "lattice",
    "trotter_order",
    "max_dim_rho",
    "cut_off_rho",
    "b_force_rho_trace",
    "force_rho_hermitian_step",
    "b_initial_rho_compression",
    "b_save_final_state",
    "output_step",
    "1q_indices",
    "1q_components",
    "2q_indices",
    "2q_components",
    "b_allow_all_pairs",
];

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

fn items(value: &str) -> Vec<&str> {
    let v = value.trim();
    let v = v.strip_prefix('[').and_then(|v| v.strip_suffix(']')).unwrap_or(v);
    if v.trim().is_empty() {
        return Vec::new();
    }
    v.split(',').map(|s| unquote(s)).collect()
}

struct Cursor {
    line: usize,
}

impl Cursor {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        err(Some(self.line), message)
    }

    fn real(&self, key: &str, v: &str) -> Result<f64, ParseError> {
        match unquote(v).parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => self.fail(format!("{key}: expected a real number, got {v:?}")),
        }
    }

    fn count(&self, key: &str, v: &str) -> Result<usize, ParseError> {
        unquote(v).parse().or_else(|_| self.fail(format!("{key}: expected a non-negative integer, got {v:?}")))
    }

    fn flag(&self, key: &str, v: &str) -> Result<bool, ParseError> {
        match unquote(v).to_ascii_lowercase().as_str() {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => self.fail(format!("{key}: expected true or false, got {v:?}")),
        }
    }

    fn field(&self, key: &str, v: &str) -> Result<Field, ParseError> {
        let parts = items(v);
        if parts.is_empty() {
            return self.fail(format!("{key}: missing value"));
        }
        if parts.len() == 1 && !v.contains(',') {
            return Ok(Field::Uniform(self.real(key, parts[0])?));
        }
        Ok(Field::PerQubit(parts.iter().map(|p| self.real(key, p)).collect::<Result<_, _>>()?))
    }

    fn indices(&self, key: &str, v: &str) -> Result<Vec<usize>, ParseError> {
        items(v).iter().map(|p| self.count(key, p)).collect()
    }

    fn pairs(&self, key: &str, v: &str) -> Result<Vec<(usize, usize)>, ParseError> {
        let compact: String = v.chars().filter(|c| !c.is_whitespace()).collect();
        let body = compact.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(&compact);
        if body.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut rest = body;
        loop {
            let Some(inner) = rest.strip_prefix('(') else {
                return self.fail(format!("{key}: expected pairs like (0,1),(1,2)"));
            };
            let Some(close) = inner.find(')') else {
                return self.fail(format!("{key}: unclosed pair"));
            };
            let Some((a, b)) = inner[..close].split_once(',') else {
                return self.fail(format!("{key}: a pair needs two indices"));
            };
            out.push((self.count(key, a)?, self.count(key, b)?));
            rest = &inner[close + 1..];
            if rest.is_empty() {
                return Ok(out);
            }
            rest = match rest.strip_prefix(',') {
                Some(r) => r,
                None => return self.fail(format!("{key}: pairs must be separated by commas")),
            };
        }
    }

    fn pauli(&self, key: &str, s: &str) -> Result<Pauli, ParseError> {
        match s.parse::<Pauli>() {
            Ok(p) if p != Pauli::I => Ok(p),
            _ => self.fail(format!("{key}: {s:?} is not one of X, Y, Z")),
        }
    }

    fn components_1q(&self, key: &str, v: &str) -> Result<Vec<Pauli>, ParseError> {
        items(v).iter().map(|s| self.pauli(key, s)).collect()
    }

    fn components_2q(&self, key: &str, v: &str) -> Result<Vec<(Pauli, Pauli)>, ParseError> {
        items(v)
            .iter()
            .map(|s| {
                let chars: Vec<char> = s.chars().collect();
                if chars.len() != 2 {
                    return self.fail(format!("{key}: {s:?} is not a two-letter Pauli string"));
                }
                Ok((self.pauli(key, &chars[0].to_string())?, self.pauli(key, &chars[1].to_string())?))
            })
            .collect()
    }

    fn pauli_states(&self, key: &str, v: &str) -> Result<Vec<PauliSpec>, ParseError> {
        items(v)
            .iter()
            .map(|s| s.parse::<PauliSpec>().or_else(|e| self.fail(format!("{key}: {e}"))))
            .collect()
    }
}

/// `J[i,j]` or `J_z[i,j]`.
fn matrix_key(key: &str) -> Option<(&str, &str)> {
    let open = key.find('[')?;
    let name = key[..open].trim();
    let inner = key[open + 1..].strip_suffix(']')?;
    matches!(name, "J" | "J_z").then_some((name, inner))
}

/// Parse a parameter file for the tensor-network engine.
pub fn parse_runspec(text: &str) -> Result<RunSpec, ParseError> {
    parse_runspec_for(text, Engine::Mpo)
}

/// Parse a parameter file, checking the qubit-count bound of `engine`.
pub fn parse_runspec_for(text: &str, engine: Engine) -> Result<RunSpec, ParseError> {
    let mut spec = RunSpec::new(0, 0.0, 0.0);
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut entries: BTreeMap<&str, BTreeMap<(usize, usize), (f64, usize)>> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let cur = Cursor { line: idx + 1 };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return cur.fail(format!("expected `key = value`, got {body:?}"));
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some((name, inner)) = matrix_key(key) {
            let Some((a, b)) = inner.split_once(',') else {
                return cur.fail(format!("{key}: expected two indices"));
            };
            let (a, b) = (cur.count(key, a.trim())?, cur.count(key, b.trim())?);
            if a == b {
                return cur.fail(format!("{key}: a coupling needs two distinct qubits"));
            }
            let name = if name == "J" { "J" } else { "J_z" };
            let v = cur.real(key, value)?;
            if let Some((_, first)) = entries.entry(name).or_default().insert((a.min(b), a.max(b)), (v, cur.line)) {
                return cur.fail(format!("{name}[{a},{b}] already set on line {first}"));
            }
            continue;
        }
        let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
            return cur.fail(format!("unknown parameter {key:?}"));
        };
        if let Some(first) = seen.insert(known, cur.line) {
            return cur.fail(format!("{key} already set on line {first}"));
        }
        match known {
            "N" => spec.n = cur.count(key, value)?,
            "t_final" => spec.t_final = cur.real(key, value)?,
            "tau" => spec.tau = cur.real(key, value)?,
            "t_init" => spec.t_init = cur.real(key, value)?,
            "output_files_prefix" => spec.output_files_prefix = unquote(value).to_string(),
            "b_unique_id" => spec.b_unique_id = cur.flag(key, value)?,
            "h_x" => spec.h_x = cur.field(key, value)?,
            "h_y" => spec.h_y = cur.field(key, value)?,
            "h_z" => spec.h_z = cur.field(key, value)?,
            "J" => spec.j = PairField::Uniform(cur.real(key, value)?),
            "J_z" => spec.j_z = PairField::Uniform(cur.real(key, value)?),
            "g_0" => spec.g_0 = cur.field(key, value)?,
            "g_1" => spec.g_1 = cur.field(key, value)?,
            "g_2" => spec.g_2 = cur.field(key, value)?,
            "init_pauli_state" => spec.init_pauli_state = Some(cur.pauli_states(key, value)?),
            "init_graph_state" => spec.init_graph_state = cur.pairs(key, value)?,
            "load_files_prefix" => spec.load_files_prefix = unquote(value).to_string(),
            "l_x" => spec.l_x = cur.count(key, value)?,
            "l_y" => spec.l_y = cur.count(key, value)?,
            "b_periodic_x" => spec.b_periodic_x = cur.flag(key, value)?,
            "b_periodic_y" => spec.b_periodic_y = cur.flag(key, value)?,
            "lattice" => {
                spec.lattice = Some(unquote(value).parse().or_else(|e: LmpoError| cur.fail(format!("{key}: {e}")))?)
            }
            "trotter_order" => {
                let v = cur.count(key, value)?;
                spec.trotter_order = u8::try_from(v)
                    .ok()
                    .and_then(|v| TrotterOrder::try_from(v).ok())
                    .map_or_else(|| cur.fail(format!("trotter_order = {v} out of range; possible values are 2, 3, 4")), Ok)?;
            }
            "max_dim_rho" => spec.max_dim_rho = cur.count(key, value)?,
            "cut_off_rho" => spec.cut_off_rho = cur.real(key, value)?,
            "b_force_rho_trace" => spec.b_force_rho_trace = cur.flag(key, value)?,
            "force_rho_hermitian_step" => spec.force_rho_hermitian_step = cur.count(key, value)?,
            "b_initial_rho_compression" => spec.b_initial_rho_compression = cur.flag(key, value)?,
            "b_save_final_state" => spec.b_save_final_state = cur.flag(key, value)?,
            "output_step" => spec.output_step = cur.count(key, value)?,
            "1q_indices" => spec.one_q_indices = cur.indices(key, value)?,
            "1q_components" => spec.one_q_components = cur.components_1q(key, value)?,
            "2q_indices" => spec.two_q_indices = cur.pairs(key, value)?,
            "2q_components" => spec.two_q_components = cur.components_2q(key, value)?,
            "b_allow_all_pairs" => spec.b_allow_all_pairs = cur.flag(key, value)?,
            _ => unreachable!("every key in KEYS is handled"),
        }
    }
    for (name, map) in entries {
        if let Some(&line) = seen.get(name) {
            return err(Some(line), format!("{name} is given both as a scalar and as matrix entries"));
        }
        let field = PairField::Entries(map.into_iter().map(|(k, (v, _))| (k, v)).collect());
        if name == "J" {
            spec.j = field;
        } else {
            spec.j_z = field;
        }
    }
    for required in ["N", "t_final", "tau"] {
        if !seen.contains_key(required) {
            return err(None, format!("missing required parameter {required}"));
        }
    }
    spec.validate(engine)?;
    Ok(spec)
}

fn real_text(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn field_text(f: &Field) -> String {
    match f {
        Field::Uniform(v) => real_text(*v),
        Field::PerQubit(v) => v.iter().map(|x| real_text(*x)).collect::<Vec<_>>().join(", "),
    }
}

fn pairs_text(p: &[(usize, usize)]) -> String {
    p.iter().map(|(a, b)| format!("({a},{b})")).collect::<Vec<_>>().join(", ")
}

impl RunSpec {
    /// Canonical parameter file; [`parse_runspec`] reads it back to an equal spec.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("N", self.n.to_string());
        put("t_final", real_text(self.t_final));
        put("tau", real_text(self.tau));
        put("t_init", real_text(self.t_init));
        put("output_files_prefix", self.output_files_prefix.clone());
        put("b_unique_id", self.b_unique_id.to_string());
        put("h_x", field_text(&self.h_x));
        put("h_y", field_text(&self.h_y));
        put("h_z", field_text(&self.h_z));
        for (name, f) in [("J", &self.j), ("J_z", &self.j_z)] {
            match f {
                PairField::Uniform(v) => put(name, real_text(*v)),
                PairField::Entries(m) => {
                    for (&(a, b), &v) in m {
                        put(&format!("{name}[{a},{b}]"), real_text(v));
                    }
                }
            }
        }
        put("g_0", field_text(&self.g_0));
        put("g_1", field_text(&self.g_1));
        put("g_2", field_text(&self.g_2));
        if let Some(specs) = &self.init_pauli_state {
            put("init_pauli_state", specs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "));
        }
        put("init_graph_state", pairs_text(&self.init_graph_state));
        put("load_files_prefix", self.load_files_prefix.clone());
        put("l_x", self.l_x.to_string());
        put("l_y", self.l_y.to_string());
        put("b_periodic_x", self.b_periodic_x.to_string());
        put("b_periodic_y", self.b_periodic_y.to_string());
        if let Some(kind) = self.lattice {
            put("lattice", kind.to_string());
        }
        put("trotter_order", self.trotter_order.to_string());
        put("max_dim_rho", self.max_dim_rho.to_string());
        put("cut_off_rho", real_text(self.cut_off_rho));
        put("b_force_rho_trace", self.b_force_rho_trace.to_string());
        put("force_rho_hermitian_step", self.force_rho_hermitian_step.to_string());
        put("b_initial_rho_compression", self.b_initial_rho_compression.to_string());
        put("b_save_final_state", self.b_save_final_state.to_string());
        put("output_step", self.output_step.to_string());
        put("1q_indices", self.one_q_indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", "));
        put("1q_components", self.one_q_components.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "));
        put("2q_indices", pairs_text(&self.two_q_indices));
        put("2q_components", self.two_q_components.iter().map(|(a, b)| format!("{a}{b}")).collect::<Vec<_>>().join(", "));
        put("b_allow_all_pairs", self.b_allow_all_pairs.to_string());
        out
    }

    /// 12 hex digits of the digest of the canonical form, ignoring the output prefix.
    pub fn unique_id(&self) -> String {
        let mut canon = self.clone();
        canon.output_files_prefix.clear();
        canon.b_unique_id = false;
        let digest = Sha256::digest(canon.emit().as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    /// `<prefix>[.<uid>].N=<n>`: the stem of every file the run writes.
    pub fn file_stem(&self) -> String {
        let uid = if self.b_unique_id { format!(".{}", self.unique_id()) } else { String::new() };
        format!("{}{uid}.N={}", self.output_files_prefix, self.n)
    }

    /// Range and consistency checks that need no lattice.
    pub fn validate(&self, engine: Engine) -> Result<(), ParseError> {
        let n = self.n;
        let bad = |m: String| err::<()>(None, m);
        match engine {
            Engine::Mpo if n <= 2 => return bad(format!("N = {n}: this solver requires N > 2")),
            Engine::Oracle if n == 0 => return bad("N must be at least 1".into()),
            _ => {}
        }
        if !(self.tau > 0.0) {
            return bad(format!("tau = {} must be positive", self.tau));
        }
        if self.t_init > self.t_final {
            return bad(format!("t_init = {} exceeds t_final = {}", self.t_init, self.t_final));
        }
        if let Err(e) = lmpo_core::evolution::step_count(self.t_init, self.t_final, self.tau) {
            return bad(e.to_string());
        }
        for (name, f) in [
            ("h_x", &self.h_x),
            ("h_y", &self.h_y),
            ("h_z", &self.h_z),
            ("g_0", &self.g_0),
            ("g_1", &self.g_1),
            ("g_2", &self.g_2),
        ] {
            if let Field::PerQubit(v) = f {
                if v.len() != n {
                    return bad(format!("{name} has {} entries for N = {n}", v.len()));
                }
            }
            if name.starts_with('g') && f.values(n).iter().any(|&g| g < 0.0) {
                return bad(format!("{name} must be non-negative"));
            }
        }
        for (name, f) in [("J", &self.j), ("J_z", &self.j_z)] {
            if let PairField::Entries(m) = f {
                if let Some(&(a, b)) = m.keys().find(|&&(_, b)| b >= n) {
                    return bad(format!("{name}[{a},{b}] is outside 0..{n}"));
                }
            }
        }
        let is_matrix = |f: &PairField| matches!(f, PairField::Entries(_));
        if (is_matrix(&self.j) && !is_matrix(&self.j_z) && !self.j_z.is_zero())
            || (is_matrix(&self.j_z) && !is_matrix(&self.j) && !self.j.is_zero())
        {
            return bad("when one of J, J_z is a matrix the other must be a matrix or 0".into());
        }
        if self.max_dim_rho == 0 {
            return bad("max_dim_rho must be positive".into());
        }
        if !(self.cut_off_rho >= 0.0) {
            return bad("cut_off_rho must be non-negative".into());
        }
        let pauli_given = self.init_pauli_state.as_ref().is_some_and(|v| !v.is_empty());
        if !self.load_files_prefix.is_empty() && (pauli_given || !self.init_graph_state.is_empty()) {
            return bad("a loaded initial state excludes init_pauli_state and init_graph_state".into());
        }
        if !self.init_graph_state.is_empty() && pauli_given {
            return bad("init_graph_state excludes init_pauli_state".into());
        }
        if let Some(v) = &self.init_pauli_state {
            if self.load_files_prefix.is_empty() && self.init_graph_state.is_empty() && v.len() != 1 && v.len() != n {
                return bad(format!("init_pauli_state has {} entries for N = {n}", v.len()));
            }
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &self.init_graph_state {
            if a >= n || b >= n || a == b || !seen.insert((a.min(b), a.max(b))) {
                return bad(format!("init_graph_state pair ({a},{b}) is invalid or repeated"));
            }
        }
        if let Some(&q) = self.one_q_indices.iter().find(|&&q| q >= n) {
            return bad(format!("1q_indices entry {q} is outside 0..{n}"));
        }
        if let Some(&(a, b)) = self.two_q_indices.iter().find(|&&(a, b)| a >= n || b >= n || a == b) {
            return bad(format!("2q_indices pair ({a},{b}) is invalid"));
        }
        Ok(())
    }

    /// Qubits whose single-qubit observables are written.
    pub fn one_q_qubits(&self) -> Vec<usize> {
        if self.one_q_indices.is_empty() {
            (0..self.n).collect()
        } else {
            self.one_q_indices.clone()
        }
    }

    /// Pairs whose two-qubit observables are written.
    pub fn two_q_pairs(&self) -> Vec<(usize, usize)> {
        if self.two_q_indices.is_empty() {
            (0..self.n).flat_map(|i| (i + 1..self.n).map(move |j| (i, j))).collect()
        } else {
            self.two_q_indices.clone()
        }
    }

    /// Everything the run records, refusing quadratic output on large lattices.
    pub fn request(&self) -> lmpo_core::Result<ObservableRequest> {
        if self.output_step == 0 {
            return Ok(ObservableRequest { globals: Vec::new(), mirror_check: false, ..Default::default() });
        }
        if self.two_q_indices.is_empty() && !self.two_q_components.is_empty() && self.n > ALL_PAIRS_LIMIT && !self.b_allow_all_pairs {
            return Err(LmpoError::ResourceGuard(format!(
                "two-qubit output over all {} pairs of N = {} qubits; list 2q_indices or set b_allow_all_pairs",
                self.n * (self.n - 1) / 2,
                self.n
            )));
        }
        let mut req = ObservableRequest::from_lists(
            &self.one_q_qubits(),
            &self.one_q_components,
            &self.two_q_pairs(),
            &self.two_q_components,
        );
        req.globals = Global::ALL.to_vec();
        Ok(req)
    }

    pub fn lattice(&self) -> lmpo_core::Result<Lattice> {
        let n = self.n;
        let matrix_bonds = || -> Vec<(usize, usize)> {
            let mut bonds = BTreeSet::new();
            for f in [&self.j, &self.j_z] {
                if let PairField::Entries(m) = f {
                    bonds.extend(m.iter().filter(|(_, &v)| v != 0.0).map(|(&k, _)| k));
                }
            }
            bonds.into_iter().collect()
        };
        let has_matrix = matches!(self.j, PairField::Entries(_)) || matches!(self.j_z, PairField::Entries(_));
        match self.lattice {
            Some(LatticeKind::Custom) => Lattice::custom(n, &matrix_bonds(), (0..n).collect()),
            Some(kind) => build_lattice(kind, n, self.l_x, self.l_y, self.b_periodic_x, self.b_periodic_y),
            None if has_matrix => Lattice::custom(n, &matrix_bonds(), (0..n).collect()),
            None => {
                let kind = match (self.l_y > 1, self.b_periodic_x, self.b_periodic_y) {
                    (false, true, _) => LatticeKind::Ring,
                    (false, false, _) => LatticeKind::Chain,
                    (true, _, true) => LatticeKind::Cylinder,
                    (true, _, false) => LatticeKind::Strip,
                };
                build_lattice(kind, n, self.l_x, self.l_y, self.b_periodic_x, self.b_periodic_y)
            }
        }
    }

    pub fn model_params(&self) -> ModelParams {
        let n = self.n;
        ModelParams {
            h_x: self.h_x.values(n),
            h_y: self.h_y.values(n),
            h_z: self.h_z.values(n),
            j: self.j.coupling(n),
            j_z: self.j_z.coupling(n),
            g_0: self.g_0.values(n),
            g_1: self.g_1.values(n),
            g_2: self.g_2.values(n),
        }
    }

    pub fn stepper_config(&self) -> lmpo_core::Result<StepperConfig> {
        let steps = lmpo_core::evolution::step_count(self.t_init, self.t_final, self.tau)?;
        Ok(StepperConfig {
            tau: self.tau,
            order: self.trotter_order,
            cutoff: self.cut_off_rho,
            max_dim: self.max_dim_rho,
            hermitize_every: self.force_rho_hermitian_step,
            force_trace: self.b_force_rho_trace,
            output_every: if self.output_step == 0 { steps.max(1) } else { self.output_step },
            ..StepperConfig::default()
        })
    }

    /// Pauli product states by qubit; the default is `+z` everywhere.
    pub fn pauli_states(&self) -> Vec<PauliSpec> {
        match &self.init_pauli_state {
            Some(v) if !v.is_empty() => v.clone(),
            _ => vec![PauliSpec::new(Pauli::Z, 1).expect("+z is a Pauli state")],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_example_parses() {
        let s = parse_runspec("N = 9\ntau = 0.02\nt_final = 5\nh_x = 6.2831853,0,0,0,0,0,0,0,0\nJ = 6.2831853").unwrap();
        assert_eq!(s.n, 9);
        assert_eq!(s.h_x.values(9)[0], 6.2831853);
        assert_eq!(s.j, PairField::Uniform(6.2831853));
        assert_eq!(s.lattice().unwrap().kind, LatticeKind::Chain);
        assert_eq!(s.trotter_order, TrotterOrder::Fourth);
        assert_eq!(s.max_dim_rho, 400);
        assert_eq!(s.cut_off_rho, 1e-16);
        assert_eq!(s.force_rho_hermitian_step, 4);
        assert_eq!(s.pauli_states()[0].to_string(), "+z");
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(parse_runspec("").unwrap_err().message.contains("N"));
        let e = parse_runspec("N = 4\nt_final = 1\ntau = 0.1\ntrotter_order = 5").unwrap_err();
        assert_eq!(e.line, Some(4));
        assert!(e.message.contains("2, 3, 4"));
        let e = parse_runspec("N = 4\n\nfoo = 1").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_runspec("N = 4\nN = 5").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = parse_runspec("N = 4\nt_final = 1\ntau = x").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_runspec("N=4\nt_final=1\ntau=0.1\nJ[0,1]=1\nJ[1,0]=2").unwrap_err();
        assert_eq!(e.line, Some(5));
    }

    #[test]
    fn small_systems_only_for_the_oracle() {
        let text = "N = 2\nt_final = 1\ntau = 0.1";
        assert!(parse_runspec(text).is_err());
        assert_eq!(parse_runspec_for(text, Engine::Oracle).unwrap().n, 2);
    }

    #[test]
    fn matrix_couplings_and_lists() {
        let text = "N=4\nt_final=1\ntau=0.25\nJ[0,1]=1\nJ[2,1]=0.5\nJ_z=0\n\
                    init_pauli_state = +x, -z, '+y', +z\n2q_indices = (0,1), (1, 3)\n2q_components = XX, zy\n\
                    1q_components = [X, Z]   # comment";
        let s = parse_runspec(text).unwrap();
        let lat = s.lattice().unwrap();
        assert_eq!(lat.bonds, vec![(0, 1), (1, 2)]);
        assert_eq!(s.two_q_pairs(), vec![(0, 1), (1, 3)]);
        assert_eq!(s.two_q_components, vec![(Pauli::X, Pauli::X), (Pauli::Z, Pauli::Y)]);
        assert_eq!(s.one_q_components, vec![Pauli::X, Pauli::Z]);
        assert_eq!(s.pauli_states().len(), 4);
        assert_eq!(parse_runspec(&s.emit()).unwrap(), s);
        assert!(parse_runspec("N=4\nt_final=1\ntau=0.25\nJ[0,1]=1\nJ_z=2").is_err());
        assert!(parse_runspec("N=4\nt_final=1\ntau=0.25\nJ[0,1]=1\nJ=2").is_err());
    }

    #[test]
    fn unique_id_ignores_prefix() {
        let mut a = RunSpec::new(4, 1.0, 0.1);
        let mut b = a.clone();
        b.output_files_prefix = "elsewhere/run".into();
        assert_eq!(a.unique_id(), b.unique_id());
        assert_eq!(a.unique_id().len(), 12);
        a.h_x = Field::Uniform(1.0);
        assert_ne!(a.unique_id(), b.unique_id());
        a.b_unique_id = true;
        assert_eq!(a.file_stem(), format!("lindblad.{}.N=4", a.unique_id()));
    }

    #[test]
    fn all_pairs_guard() {
        let mut s = RunSpec::new(40, 1.0, 0.1);
        assert!(matches!(s.request(), Err(LmpoError::ResourceGuard(_))));
        s.two_q_indices = vec![(0, 1)];
        assert_eq!(s.request().unwrap().two_q.len(), 1);
        s.two_q_indices.clear();
        s.b_allow_all_pairs = true;
        assert_eq!(s.request().unwrap().two_q.len(), 780);
    }
}
