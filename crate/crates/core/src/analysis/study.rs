//! Error studies against the fully atomistic reference and the
//! `ε = 1/N` convergence sweep.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::qnorm::q_norm_from_system;
use crate::coupling::{assemble_reduced_system, compose_atc, solve_controls, trace};
use crate::error::{AtcError, Result};
use crate::lattice::{build_chain, distance_over, ChainModel, Decomposition, ForceSpec, DEFAULT_ASSUMPTION_CONSTANT};
use crate::solvers::{modeling_error_bound, solve_continuum_subproblem, solve_full_atomistic, ModelingDomain};

/// Relative slack on computed inequalities, for rounding only.
pub const INEQUALITY_SLACK: f64 = 1e-10;

fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + INEQUALITY_SLACK) + f64::MIN_POSITIVE
}

/// One row of the study table; columns in CSV order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub gamma: f64,
    pub p: Option<f64>,
    /// `‖ũᵃ - u_atc‖` over `Ω`.
    pub err_atc: f64,
    /// `‖ũᵃ - uᶜ‖` over `Ω_c`, with `uᶜ` the continuum solve from the exact trace at `K`.
    pub err_model: f64,
    /// `(1 + ‖Q‖) err_model`.
    pub bound_rhs: f64,
    pub q_norm_est: f64,
    pub mismatch: f64,
    /// `√ε err_atc` with `ε = 1/N`.
    pub eps_scaled_err: f64,
}

/// All terms of the error split, each computed independently.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorStudy {
    pub row: StudyRow,
    /// `‖ũᵃ - uᶜ‖` over `[L+1, N-1]`.
    pub consistency: f64,
    /// `‖r(ũᵃ) - θ_op‖_*`.
    pub approximation: f64,
    /// `‖ũᵃ - uᶜ‖` over the overlap.
    pub overlap_model_error: f64,
    /// `consistency + ‖Q‖ approximation`.
    pub split_bound: f64,
    /// Sharp modeling-error bound on `Ω_c`.
    pub model_bound: f64,
    pub trace_lemma_holds: bool,
    pub split_holds: bool,
    pub model_bound_holds: bool,
}

impl ErrorStudy {
    /// Every inequality of the chain `err_atc ≤ split_bound ≤ bound_rhs`,
    /// the trace lemma and the modeling bound hold.
    pub fn all_hold(&self) -> bool {
        self.trace_lemma_holds
            && self.split_holds
            && holds(self.split_bound, self.row.bound_rhs)
            && self.model_bound_holds
    }
}

pub fn error_study(chain: &ChainModel, decomp: &Decomposition) -> Result<ErrorStudy> {
    let reference = solve_full_atomistic(chain)?;
    let system = assemble_reduced_system(chain, decomp)?;
    let controls = solve_controls(&system)?;
    let result = compose_atc(chain, decomp, &controls)?;
    let q = q_norm_from_system(&system)?;

    let exact = trace(&reference, decomp)?;
    let u_c = solve_continuum_subproblem(chain, decomp, exact.theta_c_k)?;

    let err_atc = distance_over(&reference, &result.u_atc, decomp.global())?;
    let err_model = distance_over(&reference, &u_c, decomp.continuum())?;
    let consistency = distance_over(&reference, &u_c, decomp.continuum_only())?;
    let overlap_model_error = distance_over(&reference, &u_c, decomp.overlap())?;
    let delta = crate::coupling::ControlPair::from_vector(&(exact.to_vector() - controls.to_vector()));
    let approximation = system.star_norm(&delta);
    let split_bound = consistency + q.q_norm * approximation;
    let bound_rhs = (1.0 + q.q_norm) * err_model;
    let model_bound = modeling_error_bound(chain, &reference, ModelingDomain::Continuum(*decomp))?.bound;
    let eps = 1.0 / chain.n() as f64;

    Ok(ErrorStudy {
        row: StudyRow {
            n: chain.n(),
            k: decomp.k(),
            l: decomp.l(),
            gamma: decomp.gamma(),
            p: None,
            err_atc,
            err_model,
            bound_rhs,
            q_norm_est: q.q_norm,
            mismatch: result.mismatch.total,
            eps_scaled_err: eps.sqrt() * err_atc,
        },
        consistency,
        approximation,
        overlap_model_error,
        split_bound,
        model_bound,
        trace_lemma_holds: holds(approximation, overlap_model_error),
        split_holds: holds(err_atc, split_bound),
        model_bound_holds: holds(err_model, model_bound),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub p: f64,
    pub gamma: f64,
    pub c: f64,
    pub force: ForceSpec,
    pub k1: f64,
    pub k2: f64,
    /// Multiply the load by `ε² = N⁻²` so that `ũᵃ_i ≈ U(iε)` stays bounded.
    pub scale_load: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ns: vec![100, 400, 1600, 6400],
            p: 2.0,
            gamma: 0.5,
            c: DEFAULT_ASSUMPTION_CONSTANT,
            force: ForceSpec::Sine { mode: 2.0, phase: std::f64::consts::FRAC_PI_2 },
            k1: 1.0,
            k2: -1.0 / 6.0,
            scale_load: true,
        }
    }
}

/// `L = ⌈c N^{1/p}⌉`, `K = ⌈(1 - γ) L⌉`.
pub fn sweep_interfaces(n: usize, p: f64, gamma: f64, c: f64) -> (usize, usize) {
    let ceil = |x: f64| (x * (1.0 - 1e-12)).ceil() as usize;
    let l = ceil(c * (n as f64).powf(1.0 / p));
    (ceil((1.0 - gamma) * l as f64), l)
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<StudyRow>,
    pub studies: Vec<ErrorStudy>,
    pub skipped: Vec<SkippedRow>,
    /// Least-squares slope of `log eps_scaled_err` against `log ε`.
    pub eps_slope: Option<f64>,
    /// Slope of `log ‖Q‖` against `log N`.
    pub q_slope: Option<f64>,
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_sweep(config: &SweepConfig) -> Result<SweepResult> {
    if !(config.p > 1.0) || !(config.gamma > 0.0 && config.gamma < 1.0) || !(config.c > 0.0) {
        return Err(AtcError::Config(format!(
            "sweep needs p > 1, 0 < gamma < 1, c > 0 (got p = {}, gamma = {}, c = {})",
            config.p, config.gamma, config.c
        )));
    }
    let outcomes: Vec<Result<std::result::Result<ErrorStudy, SkippedRow>>> = config
        .ns
        .par_iter()
        .map(|&n| {
            let (k, l) = sweep_interfaces(n, config.p, config.gamma, config.c);
            let decomp = match Decomposition::new(n, k, l) {
                Ok(d) => d,
                Err(e) => return Ok(Err(SkippedRow { n, reason: e.to_string() })),
            };
            let mut chain = build_chain(n, config.k1, config.k2, &config.force)?;
            if config.scale_load {
                chain = chain.with_scaled_force((n as f64).powi(-2));
            }
            let mut study = error_study(&chain, &decomp)?;
            study.row.p = Some(config.p);
            Ok(Ok(study))
        })
        .collect();

    let mut studies = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome? {
            Ok(s) => studies.push(s),
            Err(s) => skipped.push(s),
        }
    }
    let eps_points: Vec<(f64, f64)> = studies.iter().map(|s| (1.0 / s.row.n as f64, s.row.eps_scaled_err)).collect();
    let q_points: Vec<(f64, f64)> = studies.iter().map(|s| (s.row.n as f64, s.row.q_norm_est)).collect();
    Ok(SweepResult {
        rows: studies.iter().map(|s| s.row.clone()).collect(),
        eps_slope: loglog_slope(&eps_points),
        q_slope: loglog_slope(&q_points),
        studies,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::decompose;

    #[test]
    fn unloaded_study_is_zero() {
        let chain = build_chain(100, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let s = error_study(&chain, &decompose(&chain, 10, 20).unwrap()).unwrap();
        assert_eq!((s.row.err_atc, s.row.err_model, s.row.mismatch), (0.0, 0.0, 0.0));
        assert!(s.all_hold());
    }

    #[test]
    fn split_chain_holds_for_sine_load() {
        let chain = build_chain(200, 1.0, -1.0 / 6.0, &ForceSpec::sine(1.0)).unwrap();
        let s = error_study(&chain, &decompose(&chain, 14, 28).unwrap()).unwrap();
        assert!(s.row.err_atc > 0.0);
        assert!(s.all_hold(), "{s:?}");
    }

    #[test]
    fn interface_rule() {
        assert_eq!(sweep_interfaces(100, 2.0, 0.5, 2.0), (10, 20));
        assert_eq!(sweep_interfaces(6400, 2.0, 0.5, 2.0), (80, 160));
        assert_eq!(sweep_interfaces(1000, 2.0, 0.5, 2.0), (32, 64));
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [1.0f64, 2.0, 4.0, 8.0].iter().map(|&x| (x, 3.0 * x.powf(1.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&pts[..1]), None);
    }

    #[test]
    fn infeasible_rows_are_skipped() {
        let config = SweepConfig { ns: vec![10, 100], force: ForceSpec::Zero, ..SweepConfig::default() };
        let r = convergence_sweep(&config).unwrap();
        assert_eq!(r.skipped.len(), 1);
        assert_eq!(r.skipped[0].n, 10);
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].err_atc, 0.0);
    }
}
