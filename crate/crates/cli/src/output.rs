//! Whitespace-delimited data files with a single `#` header line.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use lmpo_core::observables::TrajectoryRecord;

/// Environment variable naming the directory for files being written.
pub const SCRATCH_ENV: &str = "LMPO_SCRATCH_DIR";

pub const HEADER_1Q: &str = "# t qubit component value imag";
pub const HEADER_2Q: &str = "# t qubit_1 qubit_2 component value imag";
pub const HEADER_GLOBAL: &str = "# t quantity value imag";

fn num(x: f64) -> String {
    // Adding zero turns -0 into 0.
    format!("{:.16e}", x + 0.0)
}

pub fn one_q_table(rec: &TrajectoryRecord) -> String {
    let mut out = format!("{HEADER_1Q}\n");
    for (k, &t) in rec.times.iter().enumerate() {
        for (&(q, a), s) in &rec.one_q {
            let _ = writeln!(out, "{t} {q} {a} {} {}", num(s.value[k]), num(s.imag[k]));
        }
    }
    out
}

pub fn two_q_table(rec: &TrajectoryRecord) -> String {
    let mut out = format!("{HEADER_2Q}\n");
    for (k, &t) in rec.times.iter().enumerate() {
        for (&(i, j, a, b), s) in &rec.two_q {
            let _ = writeln!(out, "{t} {i} {j} {a}{b} {} {}", num(s.value[k]), num(s.imag[k]));
        }
    }
    out
}

/// Global quantities plus the per-time diagnostics: largest imaginary part,
/// bond dimension and, on mirror-symmetric lattices, the arm asymmetry.
pub fn global_table(rec: &TrajectoryRecord) -> String {
    let mut out = format!("{HEADER_GLOBAL}\n");
    if rec.globals.is_empty() {
        return out;
    }
    for (k, &t) in rec.times.iter().enumerate() {
        for (g, v) in &rec.globals {
            let _ = writeln!(out, "{t} {g} {} {}", num(v[k]), num(0.0));
        }
        let _ = writeln!(out, "{t} max_imag {} {}", num(rec.max_imag[k]), num(0.0));
        let _ = writeln!(out, "{t} max_bond_dim {} {}", num(rec.max_bond_dim[k] as f64), num(0.0));
        if let Some(d) = rec.mirror_asymmetry.get(k) {
            let _ = writeln!(out, "{t} mirror_asymmetry {} {}", num(*d), num(0.0));
        }
    }
    out
}

/// Rows of a data file split into whitespace-separated fields, header dropped.
pub fn read_table(path: &Path) -> io::Result<Vec<Vec<String>>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect())
}

static COUNTER: AtomicU64 = AtomicU64::new(0);

/// Write `contents` to `path` through a temporary file, so concurrent writers
/// of the same path never interleave.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let scratch: PathBuf = match std::env::var_os(SCRATCH_ENV) {
        Some(d) if !d.is_empty() => PathBuf::from(d),
        _ => path.parent().map(Path::to_path_buf).filter(|d| !d.as_os_str().is_empty()).unwrap_or_else(|| ".".into()),
    };
    fs::create_dir_all(&scratch)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = scratch.join(format!(
        ".{name}.{}.{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, contents)?;
    if fs::rename(&tmp, path).is_err() {
        // Scratch on another filesystem.
        let result = fs::copy(&tmp, path).map(|_| ());
        fs::remove_file(&tmp).ok();
        result?;
    }
    Ok(())
}
