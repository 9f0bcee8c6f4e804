//! File output: CSV at 17 significant digits and JSON, both written to a
//! temporary file in the target directory and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::analysis::study::StudyRow;
use crate::coupling::{AtcDiagnostics, AtcResult, ControlPair, Mismatch};
use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, ForceSpec};
use crate::operators::BandedSystem;

/// `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to `path` via a temporary sibling and a rename, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| AtcError::Io(e.error))?;
    Ok(())
}

pub fn write_json_atomic<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn require_finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(AtcError::Singular(format!("non-finite value in {what}")))
    }
}

/// `atom_index,u_atc,u_a_op,u_c_op`; the last two are blank outside their
/// subdomains.
pub fn solution_csv(result: &AtcResult) -> Result<String> {
    require_finite(result.u_atc.values().iter().copied(), "u_atc")?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["atom_index", "u_atc", "u_a_op", "u_c_op"])?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    for (i, u) in result.u_atc.iter() {
        w.write_record([i.to_string(), fmt17(u), opt(result.u_a_op.get(i)), opt(result.u_c_op.get(i))])?;
    }
    into_string(w)
}

/// The study table with columns in `StudyRow` order.
pub fn sweep_csv(rows: &[StudyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "N",
        "K",
        "L",
        "gamma",
        "p",
        "err_atc",
        "err_model",
        "bound_rhs",
        "q_norm_est",
        "mismatch",
        "eps_scaled_err",
    ])?;
    for r in rows {
        let reals = [r.gamma, r.err_atc, r.err_model, r.bound_rhs, r.q_norm_est, r.mismatch, r.eps_scaled_err];
        require_finite(reals, "sweep row")?;
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.l.to_string(),
            fmt17(r.gamma),
            r.p.map(fmt17).unwrap_or_default(),
            fmt17(r.err_atc),
            fmt17(r.err_model),
            fmt17(r.bound_rhs),
            fmt17(r.q_norm_est),
            fmt17(r.mismatch),
            fmt17(r.eps_scaled_err),
        ])?;
    }
    into_string(w)
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| AtcError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| AtcError::Config(e.to_string()))
}

/// `row col value` lines in global atom indices, preceded by a `#` header.
pub fn triplet_dump(system: &BandedSystem) -> String {
    let w = system.window();
    let mut out = format!("# banded system on atoms [{}, {}], size {}\n", w.lo(), w.hi(), system.size());
    for (r, c, v) in system.triplets() {
        let _ = writeln!(out, "{r} {c} {}", fmt17(v));
    }
    out
}

/// One load value per atom, `N + 1` rows. Accepts a single column or
/// `atom_index,value` rows; a non-numeric first row is a header.
pub fn read_force_table(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| AtcError::InvalidForce(format!("cannot read force table {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let field = record.get(record.len().saturating_sub(1)).unwrap_or_default();
        match field.parse::<f64>() {
            Ok(v) => {
                if record.len() == 2 {
                    let idx = record[0].parse::<usize>().ok();
                    if idx != Some(values.len()) {
                        return Err(AtcError::InvalidForce(format!(
                            "force table row {} has atom index '{}', expected {}",
                            row + 1,
                            &record[0],
                            values.len()
                        )));
                    }
                }
                values.push(v);
            }
            Err(_) if row == 0 => continue,
            Err(_) => return Err(AtcError::InvalidForce(format!("force table row {}: bad value '{field}'", row + 1))),
        }
    }
    Ok(values)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionNorms {
    pub u_atc_l2: f64,
    pub u_atc_max: f64,
    pub u_a_op_l2: f64,
    pub u_c_op_l2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub k1: f64,
    pub k2: f64,
    pub gamma: f64,
    pub force: ForceSpec,
    pub controls: ControlPair,
    pub objective: f64,
    pub mismatch: Mismatch,
    pub norms: SolutionNorms,
    pub diagnostics: Option<AtcDiagnostics>,
}

impl SolveSummary {
    pub fn new(chain: &ChainModel, force: &ForceSpec, result: &AtcResult) -> Self {
        Self {
            n: chain.n(),
            k: result.decomp.k(),
            l: result.decomp.l(),
            k1: chain.k1(),
            k2: chain.k2(),
            gamma: result.decomp.gamma(),
            force: force.clone(),
            controls: result.controls,
            objective: result.objective(),
            mismatch: result.mismatch,
            norms: SolutionNorms {
                u_atc_l2: result.u_atc.l2_norm(),
                u_atc_max: result.u_atc.max_abs(),
                u_a_op_l2: result.u_a_op.l2_norm(),
                u_c_op_l2: result.u_c_op.l2_norm(),
            },
            diagnostics: result.diagnostics.clone(),
        }
    }
}
