//! Independent minimizer of the reduced objective
//! `θ ↦ ½‖uᵃ(θᵃ) - uᶜ(θᶜ)‖²` over the overlap.
//!
//! Every objective value comes from fresh subproblem solves, and the
//! gradient and Hessian come from central differences. No gram matrix or
//! lifting is reused, so agreement with the reduced-space solve is a real
//! cross-check.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::coupling::{mismatch_norm, ControlPair};
use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition};
use crate::solvers::{solve_atomistic_subproblem, solve_continuum_subproblem};

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub controls: ControlPair,
    pub objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

pub const ORACLE_MAX_ITERATIONS: usize = 8;

/// The reduced objective by direct state solves.
pub fn reduced_objective(chain: &ChainModel, decomp: &Decomposition, theta: &ControlPair) -> Result<f64> {
    let u_a = solve_atomistic_subproblem(chain, decomp, theta.theta_a())?;
    let u_c = solve_continuum_subproblem(chain, decomp, theta.theta_c_k)?;
    Ok(0.5 * mismatch_norm(&u_a, &u_c, decomp)?.total)
}

/// Finite-difference Newton iteration from the origin. The step `h` is
/// large because central differences of a quadratic are exact for any step,
/// and a large step keeps rounding out of the difference quotients.
pub fn fd_newton_minimize(chain: &ChainModel, decomp: &Decomposition) -> Result<OracleResult> {
    let h = 1.0;
    let mut evaluations = 0;
    let mut eval = |v: Vector3<f64>| {
        evaluations += 1;
        reduced_objective(chain, decomp, &ControlPair::from_vector(&v))
    };
    let mut theta = Vector3::zeros();
    let mut iterations = 0;
    while iterations < ORACLE_MAX_ITERATIONS {
        iterations += 1;
        let e = |i: usize| Vector3::ith(i, h);
        let mut grad = Vector3::zeros();
        let mut hess = Matrix3::zeros();
        let f0 = eval(theta)?;
        for i in 0..3 {
            let fp = eval(theta + e(i))?;
            let fm = eval(theta - e(i))?;
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in 0..i {
                let fpp = eval(theta + e(i) + e(j))?;
                let fpm = eval(theta + e(i) - e(j))?;
                let fmp = eval(theta - e(i) + e(j))?;
                let fmm = eval(theta - e(i) - e(j))?;
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        let step = hess.lu().solve(&grad).ok_or_else(|| AtcError::Singular("finite-difference Hessian".into()))?;
        theta -= step;
        if step.amax() <= 1e-13 * (1.0 + theta.amax()) {
            break;
        }
    }
    let controls = ControlPair::from_vector(&theta);
    let objective = reduced_objective(chain, decomp, &controls)?;
    Ok(OracleResult { controls, objective, iterations, evaluations: evaluations + 1 })
}
