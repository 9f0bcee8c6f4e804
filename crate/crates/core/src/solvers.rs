//! Banded Cholesky solves, the full atomistic/continuum reference problems,
//! subdomain problems with virtual boundary data, and the continuum
//! modeling-error bound.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition, DisplacementField, DomainTag, IndexRange};
use crate::operators::{
    assemble_atomistic, assemble_continuum, delta1_squared, AtomisticBoundary, BandedSystem, ContinuumBoundary,
};

/// Relative residual threshold for accepting a solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Refinement steps after the initial solve; each uses a compensated residual.
pub const REFINEMENT_STEPS: usize = 3;

/// Lower-triangular banded Cholesky factor, `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    /// `bands[d][r] = L[r][r - d]`.
    bands: Vec<Vec<f64>>,
}

impl BandedCholesky {
    pub fn factor(system: &BandedSystem) -> Result<Self> {
        let n = system.size();
        let p = system.half_bandwidth();
        let mut l = vec![vec![0.0; n]; p + 1];
        for j in 0..n {
            for i in j..(j + p + 1).min(n) {
                let d = i - j;
                let mut sum = system.entry(i, j);
                for k in i.saturating_sub(p)..j {
                    sum -= l[i - k][i] * l[j - k][j];
                }
                if d == 0 {
                    if !(sum > 0.0) {
                        return Err(AtcError::NotPositiveDefinite { pivot: j, value: sum });
                    }
                    l[0][j] = sum.sqrt();
                } else {
                    l[d][i] = sum / l[0][j];
                }
            }
        }
        Ok(Self { bands: l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let p = self.bands.len() - 1;
        let mut y = rhs.to_vec();
        for i in 0..n {
            for k in i.saturating_sub(p)..i {
                y[i] -= self.bands[i - k][i] * y[k];
            }
            y[i] /= self.bands[0][i];
        }
        for i in (0..n).rev() {
            for k in i + 1..(i + p + 1).min(n) {
                y[i] -= self.bands[k - i][k] * y[k];
            }
            y[i] /= self.bands[0][i];
        }
        y
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solution over the system's window.
    pub solution: DisplacementField,
    pub residual_inf: f64,
    pub factorization_ok: bool,
}

/// Solves an SPD banded system with iterative refinement and checks the
/// residual against `tol (1 + max|b| + ‖M‖∞ max|x|)`.
pub fn solve_banded(system: &BandedSystem) -> Result<SolveReport> {
    let chol = BandedCholesky::factor(system)?;
    let mut x = chol.solve(system.rhs());
    let mut residual = system.residual_compensated(&x);
    for _ in 0..REFINEMENT_STEPS {
        let d = chol.solve(&residual);
        let x_max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let d_max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += di);
        residual = system.residual_compensated(&x);
        if d_max <= f64::EPSILON * x_max {
            break;
        }
    }
    let residual_inf = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let rhs_max = system.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x_max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = RESIDUAL_TOLERANCE * (1.0 + rhs_max + system.norm_inf() * x_max);
    if !(residual_inf <= threshold) {
        return Err(AtcError::ResidualTooLarge { residual: residual_inf, threshold });
    }
    Ok(SolveReport {
        solution: DisplacementField::new(system.offset(), x, DomainTag::Global)?,
        residual_inf,
        factorization_ok: true,
    })
}

/// Glues boundary values around an interior solution.
fn extend(lo: usize, left: &[f64], interior: &DisplacementField, right: &[f64], tag: DomainTag) -> DisplacementField {
    let mut values = Vec::with_capacity(left.len() + interior.values().len() + right.len());
    values.extend_from_slice(left);
    values.extend_from_slice(interior.values());
    values.extend_from_slice(right);
    DisplacementField::new(lo, values, tag).expect("nonempty")
}

/// Solves `A u = f` on `window` with two prescribed atoms on each side and
/// returns the field over `[lo - 2, hi + 2]`.
pub fn solve_atomistic_window(
    chain: &ChainModel,
    window: IndexRange,
    bc: &AtomisticBoundary,
    tag: DomainTag,
) -> Result<DisplacementField> {
    let report = solve_banded(&assemble_atomistic(chain, window, bc)?)?;
    Ok(extend(window.lo() - 2, &bc.left, &report.solution, &bc.right, tag))
}

/// Solves `C u = f` on `window` with one prescribed atom on each side and
/// returns the field over `[lo - 1, hi + 1]`.
pub fn solve_continuum_window(
    chain: &ChainModel,
    window: IndexRange,
    bc: &ContinuumBoundary,
    tag: DomainTag,
) -> Result<DisplacementField> {
    let report = solve_banded(&assemble_continuum(chain, window, bc)?)?;
    Ok(extend(window.lo() - 1, &[bc.left], &report.solution, &[bc.right], tag))
}

/// The fully atomistic reference solution `ũᵃ` on `[0, N]`.
pub fn solve_full_atomistic(chain: &ChainModel) -> Result<DisplacementField> {
    let b = chain.boundary();
    let bc = AtomisticBoundary { left: b.left, right: b.right };
    solve_atomistic_window(chain, chain.interior(), &bc, DomainTag::Global)
}

/// The fully continuum solution `ũᶜ` on `[0, N]`; `u_0` and `u_N` are carried
/// along from the outer boundary data.
pub fn solve_full_continuum(chain: &ChainModel) -> Result<DisplacementField> {
    let b = chain.boundary();
    let bc = ContinuumBoundary { left: b.left[1], right: b.right[0] };
    let inner = solve_continuum_window(chain, chain.interior(), &bc, DomainTag::Global)?;
    Ok(extend(0, &[b.left[0]], &inner, &[b.right[1]], DomainTag::Global))
}

/// Atomistic state on `[0, L]`: outer data on `{0, 1}`, `theta_a` on
/// `{L-1, L}`.
pub fn solve_atomistic_subproblem(
    chain: &ChainModel,
    decomp: &Decomposition,
    theta_a: [f64; 2],
) -> Result<DisplacementField> {
    let bc = AtomisticBoundary { left: chain.boundary().left, right: theta_a };
    solve_atomistic_window(chain, decomp.atomistic_interior(), &bc, DomainTag::Atomistic)
}

/// Continuum state on `[K, N-1]`: `theta_c` at `K`, outer data at `N-1`.
pub fn solve_continuum_subproblem(
    chain: &ChainModel,
    decomp: &Decomposition,
    theta_c: f64,
) -> Result<DisplacementField> {
    let bc = ContinuumBoundary { left: theta_c, right: chain.boundary().right[0] };
    solve_continuum_window(chain, decomp.continuum_interior(), &bc, DomainTag::Continuum)
}

/// Where the modeling-error bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelingDomain {
    /// All of `Ω`, Dirichlet atoms `1` and `N-1`.
    Global,
    /// `Ω_c`, Dirichlet atoms `K` and `N-1`.
    Continuum(Decomposition),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelingErrorBound {
    /// `|k2| / λ_min(C) · ‖Δ₁²u‖`.
    pub bound: f64,
    /// `c₀ N_dom² ‖Δ₁²u‖` with `c₀ = |k2| / (4 k_c)`.
    pub asymptotic_bound: f64,
    /// `|k2| / λ_min(C)`.
    pub exact_constant: f64,
    pub unknowns: usize,
    pub fourth_difference_norm: f64,
}

/// Upper bound on `‖ũᵃ - uᶜ‖` from the smallest eigenvalue
/// `4 k_c sin²(π / (2(n+1)))` of the continuum operator on `n` unknowns.
///
/// `u_ref` must be the global atomistic solution (it is read on `[0, N]`).
pub fn modeling_error_bound(
    chain: &ChainModel,
    u_ref: &DisplacementField,
    domain: ModelingDomain,
) -> Result<ModelingErrorBound> {
    let (window, extent) = match domain {
        ModelingDomain::Global => (chain.interior(), chain.n()),
        ModelingDomain::Continuum(d) => (d.continuum_interior(), d.n() - d.k()),
    };
    let n = window.len();
    if n == 0 {
        return Err(AtcError::DomainTooSmall("no unknowns for the modeling bound".into()));
    }
    let norm = window.iter().map(|i| delta1_squared(u_ref, i).map(|v| v * v)).sum::<Result<f64>>()?.sqrt();
    let kc = chain.kc();
    let k2 = chain.k2().abs();
    let lambda_min = 4.0 * kc * (PI / (2.0 * (n as f64 + 1.0))).sin().powi(2);
    let exact_constant = k2 / lambda_min;
    let c0 = k2 / (4.0 * kc);
    Ok(ModelingErrorBound {
        bound: exact_constant * norm,
        asymptotic_bound: c0 * (extent as f64).powi(2) * norm,
        exact_constant,
        unknowns: n,
        fourth_difference_norm: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, ForceSpec, OuterBoundary};

    const K2: f64 = -1.0 / 6.0;

    #[test]
    fn two_unknown_system() {
        // [[5/3, -1], [-1, 5/3]] u = (1, 0)
        let chain = build_chain(5, 1.0, K2, &ForceSpec::Point { site: 2, magnitude: 1.0 }).unwrap();
        let u = solve_full_atomistic(&chain).unwrap();
        assert!((u[2] - 15.0 / 16.0).abs() < 1e-15);
        assert!((u[3] - 9.0 / 16.0).abs() < 1e-15);
        assert_eq!([u[0], u[1], u[4], u[5]], [0.0; 4]);
    }

    #[test]
    fn one_unknown_window() {
        let chain = build_chain(5, 1.0, K2, &ForceSpec::Point { site: 2, magnitude: 1.0 }).unwrap();
        let window = IndexRange::new(2, 2).unwrap();
        let u = solve_atomistic_window(&chain, window, &Default::default(), DomainTag::Global).unwrap();
        assert_eq!(u.range(), IndexRange::new(0, 4).unwrap());
        assert!((u[2] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_load_gives_zero() {
        let chain = build_chain(50, 1.0, K2, &ForceSpec::Zero).unwrap();
        assert_eq!(solve_full_atomistic(&chain).unwrap().max_abs(), 0.0);
        assert_eq!(solve_full_continuum(&chain).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn point_load_is_symmetric() {
        let chain = build_chain(6, 1.0, K2, &ForceSpec::Point { site: 3, magnitude: 1.0 }).unwrap();
        let u = solve_full_atomistic(&chain).unwrap();
        assert!((u[2] - u[4]).abs() < 1e-15);
        let dense = crate::operators::assemble_atomistic_dense(&chain, chain.interior(), &Default::default())
            .unwrap()
            .solve()
            .unwrap();
        for (k, i) in (2..=4).enumerate() {
            assert!((u[i] - dense[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn continuum_point_load_by_hand() {
        // kc = 1/3, unknowns 2..4: (1/3)[[2,-1,0],[-1,2,-1],[0,-1,2]] u = (0,1,0)
        // gives u = 3 * (1/2, 1, 1/2).
        let chain = build_chain(6, 1.0, K2, &ForceSpec::Point { site: 3, magnitude: 1.0 }).unwrap();
        let u = solve_full_continuum(&chain).unwrap();
        assert!((u[2] - 1.5).abs() < 1e-14);
        assert!((u[3] - 3.0).abs() < 1e-14);
        assert!((u[4] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn continuum_is_harmonic_between_boundaries() {
        let chain = build_chain(20, 1.0, K2, &ForceSpec::Zero)
            .unwrap()
            .with_outer_boundary(OuterBoundary { left: [0.0, 2.0], right: [-4.0, 0.0] });
        let u = solve_full_continuum(&chain).unwrap();
        for i in 1..=19 {
            let exact = 2.0 + (i as f64 - 1.0) * (-6.0 / 18.0);
            assert!((u[i] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_system_returns_rhs() {
        // kc = 1/2, so the one-unknown continuum matrix is [1].
        let chain = build_chain(6, 1.0, -0.125, &ForceSpec::Point { site: 3, magnitude: 0.7 }).unwrap();
        let sys = assemble_continuum(&chain, IndexRange::new(3, 3).unwrap(), &ContinuumBoundary::default()).unwrap();
        assert_eq!(sys.entry(0, 0), 1.0);
        let r = solve_banded(&sys).unwrap();
        assert_eq!(r.solution.values(), &[0.7]);
    }

    #[test]
    fn reports_non_positive_pivot() {
        let sys = BandedSystem::from_bands(3, vec![vec![2.0, -1.0, 2.0], vec![0.0, 1.0, 1.0]], vec![1.0; 3]).unwrap();
        assert!(matches!(BandedCholesky::factor(&sys), Err(AtcError::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn subproblem_reproduces_restriction() {
        let chain = build_chain(60, 1.0, K2, &ForceSpec::sine(1.0)).unwrap();
        let d = decompose(&chain, 12, 24).unwrap();
        let global = solve_full_atomistic(&chain).unwrap();
        let sub = solve_atomistic_subproblem(&chain, &d, [global[23], global[24]]).unwrap();
        for i in 0..=24 {
            assert!((sub[i] - global[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn continuum_subproblem_linear_profile() {
        let chain = build_chain(100, 1.0, K2, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 10, 20).unwrap();
        let u = solve_continuum_subproblem(&chain, &d, 2.5).unwrap();
        assert_eq!(u.range(), d.continuum());
        for i in 10..=99 {
            let exact = 2.5 * (99 - i) as f64 / 89.0;
            assert!((u[i] - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn sharp_prefactor_three_unknowns() {
        let chain = build_chain(6, 1.0, K2, &ForceSpec::Point { site: 3, magnitude: 1.0 }).unwrap();
        let u = solve_full_atomistic(&chain).unwrap();
        let b = modeling_error_bound(&chain, &u, ModelingDomain::Global).unwrap();
        assert_eq!(b.unknowns, 3);
        let sin2 = (2.0 - 2f64.sqrt()) / 4.0;
        let expected = (1.0 / 6.0) / (4.0 / 3.0 * sin2);
        assert!((b.exact_constant - expected).abs() < 1e-12);
        assert!((b.exact_constant - 0.853_553).abs() < 1e-6);
        assert!(b.asymptotic_bound >= b.bound);
    }
}
