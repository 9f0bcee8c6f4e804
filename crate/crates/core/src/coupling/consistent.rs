//! Coupling with the atomistic operator on both subdomains.
//!
//! The continuum region keeps its two-atom boundaries `{K, K+1}` and
//! `{N-1, N}` and is governed by `A` instead of `C`. With four controls the
//! minimum mismatch is zero and the coupled field is the global atomistic
//! solution, which makes this variant a consistency check on the coupling
//! machinery.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::lattice::{ChainModel, Decomposition, DisplacementField, DomainTag};
use crate::operators::AtomisticBoundary;
use crate::solvers::{solve_atomistic_subproblem, solve_atomistic_window};

use super::{lift_atomistic, normal_equations_solve};

#[derive(Debug, Clone)]
pub struct ConsistentResult {
    /// `(θᵃ_{L-1}, θᵃ_L, θᶜ_K, θᶜ_{K+1})`.
    pub controls: [f64; 4],
    pub u_a_op: DisplacementField,
    /// On `[K, N]`.
    pub u_c_op: DisplacementField,
    pub u_atc: DisplacementField,
    /// `‖u_a_op - u_c_op‖²` over the overlap.
    pub mismatch: f64,
}

fn solve_atomistic_continuum(chain: &ChainModel, decomp: &Decomposition, left: [f64; 2]) -> Result<DisplacementField> {
    let bc = AtomisticBoundary { left, right: chain.boundary().right };
    solve_atomistic_window(chain, decomp.two_node_continuum_interior(), &bc, DomainTag::Continuum)
}

pub fn solve_atc_consistent(chain: &ChainModel, decomp: &Decomposition) -> Result<ConsistentResult> {
    let overlap = decomp.overlap();
    let unloaded = chain.unloaded();
    let a0 = solve_atomistic_subproblem(chain, decomp, [0.0, 0.0])?;
    let c0 = solve_atomistic_continuum(chain, decomp, [0.0, 0.0])?;
    let lifts = [
        (lift_atomistic(chain, decomp, [1.0, 0.0])?, 1.0),
        (lift_atomistic(chain, decomp, [0.0, 1.0])?, 1.0),
        (solve_atomistic_continuum(&unloaded, decomp, [1.0, 0.0])?, -1.0),
        (solve_atomistic_continuum(&unloaded, decomp, [0.0, 1.0])?, -1.0),
    ];
    let rows = overlap.len();
    let w = DMatrix::from_fn(rows, 4, |r, j| {
        let (v, sign) = &lifts[j];
        sign * v[overlap.lo() + r]
    });
    let d = DVector::from_iterator(rows, overlap.iter().map(|i| a0[i] - c0[i]));
    let theta = normal_equations_solve(&w, &d)?;
    let controls = [theta[0], theta[1], theta[2], theta[3]];

    let u_a_op = solve_atomistic_subproblem(chain, decomp, [controls[0], controls[1]])?;
    let u_c_op = solve_atomistic_continuum(chain, decomp, [controls[2], controls[3]])?;
    let mismatch = overlap.iter().map(|i| (u_a_op[i] - u_c_op[i]).powi(2)).sum();
    let l = decomp.l();
    let u_atc =
        DisplacementField::from_fn(decomp.global(), DomainTag::Global, |i| if i <= l { u_a_op[i] } else { u_c_op[i] });
    Ok(ConsistentResult { controls, u_a_op, u_c_op, u_atc, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, distance_over, ForceSpec};
    use crate::solvers::solve_full_atomistic;

    #[test]
    fn reproduces_global_atomistic_solution() {
        let chain = build_chain(300, 1.0, -1.0 / 6.0, &ForceSpec::sine(3.0)).unwrap();
        let d = decompose(&chain, 20, 40).unwrap();
        let reference = solve_full_atomistic(&chain).unwrap();
        let r = solve_atc_consistent(&chain, &d).unwrap();
        let err = distance_over(&r.u_atc, &reference, d.global()).unwrap();
        assert!(err / reference.l2_norm() < 1e-10, "relative error {}", err / reference.l2_norm());
        let exact = [reference[39], reference[40], reference[20], reference[21]];
        for (c, e) in r.controls.iter().zip(exact) {
            assert!((c - e).abs() < 1e-10 * reference.max_abs());
        }
    }

    #[test]
    fn unloaded_is_zero() {
        let chain = build_chain(50, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 10, 20).unwrap();
        let r = solve_atc_consistent(&chain, &d).unwrap();
        assert_eq!(r.u_atc.max_abs(), 0.0);
    }
}
