//! The invariant battery behind `atc verify`.

use serde::Serialize;

use crate::analysis::modes::{characteristic_polynomial, characteristic_roots, reconstruction_residual};
use crate::analysis::oracle::fd_newton_minimize;
use crate::analysis::patch::patch_test;
use crate::analysis::quadratic::overlap_quadratic_form;
use crate::analysis::stability::verify_stability;
use crate::analysis::study::error_study;
use crate::coupling::{assemble_reduced_system, solve_atc, solve_atc_consistent};
use crate::error::{AtcError, Result};
use crate::lattice::{distance_over, ChainModel, Decomposition, DisplacementField, DomainTag};
use crate::operators::operator_difference;
use crate::solvers::{modeling_error_bound, solve_full_atomistic, solve_full_continuum, ModelingDomain};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scorecard {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub stability_samples: usize,
    pub seed: u64,
    pub patch_strain: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { stability_samples: 200, seed: 0x5eed, patch_strain: 0.01 }
    }
}

fn check(name: &str, measured: f64, tolerance: f64, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, measured, tolerance, detail: detail.into() }
}

/// Numerical failures inside one check become a failed check, not an abort.
fn guarded(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e: AtcError| check(name, f64::NAN, f64::NAN, false, e.to_string()))
}

pub fn run_verification(chain: &ChainModel, decomp: &Decomposition, opts: &VerifyOptions) -> Result<Scorecard> {
    let reference = solve_full_atomistic(chain)?;
    let mut checks = Vec::new();

    checks.push(guarded("operator_identity", || {
        let quartic = DisplacementField::from_fn(chain.domain(), DomainTag::Global, |i| (i as f64).powi(4));
        let a = operator_difference(chain, &reference)?;
        let b = operator_difference(chain, &quartic)?;
        let worst = a.max_scaled_diff.max(b.max_scaled_diff);
        Ok(check("operator_identity", worst, a.tolerance_eps, a.passed && b.passed, "eps units of stencil scale"))
    }));

    checks.push(guarded("gram_positive_definite", || {
        let s = assemble_reduced_system(chain, decomp)?;
        let detail = format!("condition {:.3e}", s.condition);
        Ok(check("gram_positive_definite", s.eigenvalues[0], 0.0, s.eigenvalues[0] > 0.0, detail))
    }));

    checks.push(guarded("stability", || {
        let r = verify_stability(chain, decomp, opts.stability_samples, opts.seed)?;
        let detail = format!(
            "continuum violations {}, atomistic constant {:.4} (sup {:.4})",
            r.continuum_violations, r.atomistic_constant, r.atomistic_constant_sup
        );
        Ok(check("stability", r.continuum_max_ratio, 1.0, r.passed(), detail))
    }));

    let study = error_study(chain, decomp);
    checks.push(guarded("trace_lemma", || {
        let s = study.as_ref().map_err(|e| AtcError::Singular(e.to_string()))?;
        Ok(check(
            "trace_lemma",
            s.approximation,
            s.overlap_model_error,
            s.trace_lemma_holds,
            "‖r(ũᵃ) - θ_op‖_* ≤ ‖ũᵃ - uᶜ‖_Ωo",
        ))
    }));
    checks.push(guarded("error_split", || {
        let s = study.as_ref().map_err(|e| AtcError::Singular(e.to_string()))?;
        let detail = format!("split {:.6e}, (1 + ‖Q‖) err_model {:.6e}", s.split_bound, s.row.bound_rhs);
        Ok(check("error_split", s.row.err_atc, s.split_bound, s.all_hold(), detail))
    }));

    checks.push(guarded("modeling_bound", || {
        let continuum = solve_full_continuum(chain)?;
        let err = distance_over(&reference, &continuum, chain.domain())?;
        let bound = modeling_error_bound(chain, &reference, ModelingDomain::Global)?.bound;
        let tol = bound * (1.0 + super::study::INEQUALITY_SLACK);
        Ok(check("modeling_bound", err, bound, err <= tol, "global ‖ũᵃ - ũᶜ‖ against the sharp bound"))
    }));

    checks.push(guarded("characteristic_roots", || {
        let r = characteristic_roots(chain.k1(), chain.k2())?;
        let residual = characteristic_polynomial(chain.k1(), chain.k2(), r.lambda4).abs();
        let product = (r.lambda3 * r.lambda4 - 1.0).abs();
        let ok = residual <= 1e-12 && product <= 1e-12 && r.lambda4 > 0.0 && r.lambda4 < 1.0;
        Ok(check("characteristic_roots", residual.max(product), 1e-12, ok, format!("lambda4 = {:.12}", r.lambda4)))
    }));

    checks.push(guarded("mode_decomposition", || {
        let worst = [[1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [0.3, -0.7]]
            .iter()
            .map(|&t| reconstruction_residual(chain, decomp, t))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0f64, f64::max);
        Ok(check("mode_decomposition", worst, 1e-10, worst <= 1e-10, "max reconstruction residual"))
    }));

    checks.push(guarded("overlap_quadratic_form", || {
        let f = overlap_quadratic_form(decomp);
        let g2 = decomp.gamma().powi(2) / 24.0;
        let ok = f.relative_difference <= 1e-12 && f.lambda_min_limit >= g2;
        let detail = format!("lambda_min_limit {:.6e} >= gamma^2/24 = {g2:.6e}", f.lambda_min_limit);
        Ok(check("overlap_quadratic_form", f.relative_difference, 1e-12, ok, detail))
    }));

    checks.push(guarded("atomistic_consistency", || {
        let r = solve_atc_consistent(chain, decomp)?;
        let err = distance_over(&r.u_atc, &reference, chain.domain())?;
        let rel = err / reference.l2_norm().max(1e-14);
        Ok(check("atomistic_consistency", rel, 1e-10, rel <= 1e-10, "atomistic operator on both regions"))
    }));

    checks.push(guarded("oracle_equivalence", || {
        let oracle = fd_newton_minimize(chain, decomp)?;
        let reduced = solve_atc(chain, decomp)?;
        let diff = (oracle.controls.to_vector() - reduced.controls.to_vector()).amax();
        Ok(check("oracle_equivalence", diff, 1e-8, diff <= 1e-8, format!("{} Newton iterations", oracle.iterations)))
    }));

    checks.push(guarded("patch_test", || {
        let r = patch_test(chain, decomp, opts.patch_strain)?;
        Ok(check("patch_test", r.max_deviation, r.tolerance, r.passed, format!("mismatch {:.3e}", r.mismatch)))
    }));

    let passed = checks.iter().all(|c| c.passed);
    Ok(Scorecard { n: chain.n(), k: decomp.k(), l: decomp.l(), checks, passed })
}
