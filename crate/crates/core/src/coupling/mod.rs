//! Optimization-based coupling: virtual Dirichlet controls on `Γa⁺ = {L-1, L}`
//! and `Γc⁻ = {K}`, chosen to minimize the mismatch
//! `½‖uᵃ - uᶜ‖²` over the overlap `[K, L]`.
//!
//! The states are eliminated through the splitting `u = v(θ) + u⁰`, which
//! leaves a 3×3 least-squares problem in the controls.

mod consistent;

pub use consistent::{solve_atc_consistent, ConsistentResult};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::Serialize;

use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition, DisplacementField, DomainTag, IndexRange};
use crate::solvers::{solve_atomistic_subproblem, solve_continuum_subproblem};

/// Above this gram condition number the solve proceeds with a warning.
pub const GRAM_CONDITION_WARNING: f64 = 1e12;

/// Virtual controls `(θᵃ_{L-1}, θᵃ_L | θᶜ_K)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ControlPair {
    pub theta_a_lm1: f64,
    pub theta_a_l: f64,
    pub theta_c_k: f64,
}

impl ControlPair {
    pub fn new(theta_a_lm1: f64, theta_a_l: f64, theta_c_k: f64) -> Self {
        Self { theta_a_lm1, theta_a_l, theta_c_k }
    }

    pub fn theta_a(&self) -> [f64; 2] {
        [self.theta_a_lm1, self.theta_a_l]
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.theta_a_lm1, self.theta_a_l, self.theta_c_k)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// `u^{a,0}` on `Ω_a` and `u^{c,0}` on `Ω_c`: the subproblem solutions with
/// zero data on the artificial boundaries. The outer boundary data of the
/// chain is carried here, so the patch test needs no special casing.
#[derive(Debug, Clone)]
pub struct HomogeneousStates {
    pub atomistic: DisplacementField,
    pub continuum: DisplacementField,
}

pub fn homogeneous_states(chain: &ChainModel, decomp: &Decomposition) -> Result<HomogeneousStates> {
    Ok(HomogeneousStates {
        atomistic: solve_atomistic_subproblem(chain, decomp, [0.0, 0.0])?,
        continuum: solve_continuum_subproblem(chain, decomp, 0.0)?,
    })
}

/// `vᵃ(θᵃ)`: zero load, zero data on `{0, 1}`, `θᵃ` on `{L-1, L}`.
pub fn lift_atomistic(chain: &ChainModel, decomp: &Decomposition, theta_a: [f64; 2]) -> Result<DisplacementField> {
    solve_atomistic_subproblem(&chain.unloaded(), decomp, theta_a)
}

/// `vᶜ(θᶜ)_i = θᶜ (N̄ - i) / (N̄ - K)` on `[K, N̄]`.
pub fn lift_continuum(decomp: &Decomposition, theta_c: f64) -> DisplacementField {
    let n_bar = decomp.n_bar() as f64;
    let span = n_bar - decomp.k() as f64;
    DisplacementField::from_fn(decomp.continuum(), DomainTag::Continuum, |i| theta_c * (n_bar - i as f64) / span)
}

/// Squared overlap mismatch and its split into the continuum control node
/// `K`, the overlap interior `[K+1, L-2]` and the atomistic control pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mismatch {
    pub total: f64,
    pub continuum_node: f64,
    pub interior: f64,
    pub atomistic_nodes: f64,
}

pub fn mismatch_norm(u_a: &DisplacementField, u_c: &DisplacementField, decomp: &Decomposition) -> Result<Mismatch> {
    u_a.require(decomp.overlap())?;
    u_c.require(decomp.overlap())?;
    let sq = |range: IndexRange| range.iter().map(|i| (u_a[i] - u_c[i]).powi(2)).sum::<f64>();
    Ok(Mismatch {
        total: sq(decomp.overlap()),
        continuum_node: sq(decomp.continuum_left()),
        interior: sq(decomp.overlap_interior()),
        atomistic_nodes: sq(decomp.atomistic_right()),
    })
}

/// Least-squares solve of `min ½‖Wθ + d‖²` through the normal equations,
/// followed by one correction step with the exact gradient.
pub(crate) fn normal_equations_solve(w: &DMatrix<f64>, d: &DVector<f64>) -> Result<DVector<f64>> {
    let gram = w.tr_mul(w);
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| AtcError::GramNotPositiveDefinite { min_eigenvalue: gram.symmetric_eigenvalues().min() })?;
    let mut theta = chol.solve(&(-w.tr_mul(d)));
    let gradient = w.tr_mul(&(w * &theta + d));
    theta -= chol.solve(&gradient);
    Ok(theta)
}

fn overlap_column(u: &DisplacementField, decomp: &Decomposition, scale: f64) -> Vec<f64> {
    decomp.overlap().iter().map(|i| scale * u[i]).collect()
}

/// The reduced Euler-Lagrange system `G θ = b` with `G_ij = (w_i, w_j)` and
/// `b_i = -(u^{a,0} - u^{c,0}, w_i)` over the overlap, where
/// `w = (vᵃ(e₁), vᵃ(e₂), -vᶜ(e₃))`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub decomp: Decomposition,
    pub gram: Matrix3<f64>,
    pub rhs: Vector3<f64>,
    /// `vᵃ(e₁)`, `vᵃ(e₂)` on `Ω_a` and `vᶜ(e₃)` on `Ω_c`.
    pub basis_liftings: [DisplacementField; 3],
    pub homogeneous: HomogeneousStates,
    /// Ascending.
    pub eigenvalues: [f64; 3],
    pub condition: f64,
    pub warnings: Vec<String>,
    w: DMatrix<f64>,
    d: DVector<f64>,
}

pub fn assemble_reduced_system(chain: &ChainModel, decomp: &Decomposition) -> Result<ReducedSystem> {
    let homogeneous = homogeneous_states(chain, decomp)?;
    let (e1, e2) =
        rayon::join(|| lift_atomistic(chain, decomp, [1.0, 0.0]), || lift_atomistic(chain, decomp, [0.0, 1.0]));
    let (e1, e2) = (e1?, e2?);
    let e3 = lift_continuum(decomp, 1.0);

    let rows = decomp.overlap().len();
    let mut columns = overlap_column(&e1, decomp, 1.0);
    columns.extend(overlap_column(&e2, decomp, 1.0));
    columns.extend(overlap_column(&e3, decomp, -1.0));
    let w = DMatrix::from_vec(rows, 3, columns);
    let d = DVector::from_iterator(
        rows,
        decomp.overlap().iter().map(|i| homogeneous.atomistic[i] - homogeneous.continuum[i]),
    );

    let mut gram = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            gram[(i, j)] = w.column(i).dot(&w.column(j));
        }
        rhs[i] = -w.column(i).dot(&d);
    }

    let mut eig: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    if !(eig[0] > 0.0) {
        return Err(AtcError::GramNotPositiveDefinite { min_eigenvalue: eig[0] });
    }
    let condition = eig[2] / eig[0];
    let mut warnings = Vec::new();
    if condition > GRAM_CONDITION_WARNING {
        warnings.push(format!("gram condition number {condition:.3e} exceeds {GRAM_CONDITION_WARNING:e}"));
    }

    Ok(ReducedSystem {
        decomp: *decomp,
        gram,
        rhs,
        basis_liftings: [e1, e2, e3],
        homogeneous,
        eigenvalues: [eig[0], eig[1], eig[2]],
        condition,
        warnings,
        w,
        d,
    })
}

impl ReducedSystem {
    /// Overlap residual `Wθ + d = uᵃ(θ) - uᶜ(θ)` on `[K, L]`.
    fn residual(&self, theta: &ControlPair) -> DVector<f64> {
        &self.w * DVector::from_column_slice(theta.to_vector().as_slice()) + &self.d
    }

    /// `½‖uᵃ(θ) - uᶜ(θ)‖²` over the overlap.
    pub fn objective(&self, theta: &ControlPair) -> f64 {
        0.5 * self.residual(theta).norm_squared()
    }

    pub fn gradient(&self, theta: &ControlPair) -> Vector3<f64> {
        let g = self.w.tr_mul(&self.residual(theta));
        Vector3::new(g[0], g[1], g[2])
    }

    /// Gram-induced norm `‖θ‖_* = √⟨θ, θ⟩`.
    pub fn star_norm(&self, theta: &ControlPair) -> f64 {
        let v = theta.to_vector();
        v.dot(&(self.gram * v)).max(0.0).sqrt()
    }

    /// States by superposition of the stored liftings.
    pub fn states(&self, theta: &ControlPair) -> Result<(DisplacementField, DisplacementField)> {
        let [e1, e2, e3] = &self.basis_liftings;
        let u_a = self.homogeneous.atomistic.add_scaled(theta.theta_a_lm1, e1)?.add_scaled(theta.theta_a_l, e2)?;
        let u_c = self.homogeneous.continuum.add_scaled(theta.theta_c_k, e3)?;
        Ok((u_a, u_c))
    }
}

/// Solves the 3×3 Euler-Lagrange system.
pub fn solve_controls(system: &ReducedSystem) -> Result<ControlPair> {
    let theta = normal_equations_solve(&system.w, &system.d)?;
    let controls = ControlPair::new(theta[0], theta[1], theta[2]);
    if !controls.is_finite() {
        return Err(AtcError::Singular("non-finite controls".into()));
    }
    Ok(controls)
}

#[derive(Debug, Clone, Serialize)]
pub struct AtcDiagnostics {
    pub gram_condition: f64,
    pub gram_eigenvalues: [f64; 3],
    /// Max-norm of the reduced gradient at the returned controls.
    pub gradient_inf: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AtcResult {
    pub decomp: Decomposition,
    pub controls: ControlPair,
    /// On `Ω_a = [0, L]`.
    pub u_a_op: DisplacementField,
    /// On `Ω_c = [K, N-1]`.
    pub u_c_op: DisplacementField,
    /// On `[0, N]`: `u_a_op` on `Ω_a`, `u_c_op` on `[L+1, N-1]`, outer data at `N`.
    pub u_atc: DisplacementField,
    /// `‖u_a_op - u_c_op‖²` over the overlap.
    pub mismatch: Mismatch,
    pub diagnostics: Option<AtcDiagnostics>,
}

impl AtcResult {
    /// `½ mismatch`, the objective value.
    pub fn objective(&self) -> f64 {
        0.5 * self.mismatch.total
    }
}

/// Solves both subproblems for the given controls and glues the AtC field.
pub fn compose_atc(chain: &ChainModel, decomp: &Decomposition, controls: &ControlPair) -> Result<AtcResult> {
    let u_a_op = solve_atomistic_subproblem(chain, decomp, controls.theta_a())?;
    let u_c_op = solve_continuum_subproblem(chain, decomp, controls.theta_c_k)?;
    let mismatch = mismatch_norm(&u_a_op, &u_c_op, decomp)?;
    let u_atc = glue(chain, decomp, &u_a_op, &u_c_op);
    Ok(AtcResult { decomp: *decomp, controls: *controls, u_a_op, u_c_op, u_atc, mismatch, diagnostics: None })
}

fn glue(
    chain: &ChainModel,
    decomp: &Decomposition,
    u_a: &DisplacementField,
    u_c: &DisplacementField,
) -> DisplacementField {
    let l = decomp.l();
    DisplacementField::from_fn(decomp.global(), DomainTag::Global, |i| {
        if i <= l {
            u_a[i]
        } else if i < decomp.n() {
            u_c[i]
        } else {
            chain.boundary().right[1]
        }
    })
}

/// `r(u) = (u_{L-1}, u_L | u_K)`.
pub fn trace(u: &DisplacementField, decomp: &Decomposition) -> Result<ControlPair> {
    let (k, l) = (decomp.k() as i64, decomp.l() as i64);
    Ok(ControlPair::new(u.at(l - 1)?, u.at(l)?, u.at(k)?))
}

/// Full pipeline: homogeneous states, reduced system, controls, states.
pub fn solve_atc(chain: &ChainModel, decomp: &Decomposition) -> Result<AtcResult> {
    let system = assemble_reduced_system(chain, decomp)?;
    let controls = solve_controls(&system)?;
    let mut result = compose_atc(chain, decomp, &controls)?;
    result.diagnostics = Some(AtcDiagnostics {
        gram_condition: system.condition,
        gram_eigenvalues: system.eigenvalues,
        gradient_inf: system.gradient(&controls).amax(),
        warnings: system.warnings.clone(),
    });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, distance_over, ForceSpec, OuterBoundary};
    use crate::solvers::solve_full_atomistic;

    const K2: f64 = -1.0 / 6.0;

    fn setup(n: usize, k: usize, l: usize, force: ForceSpec) -> (ChainModel, Decomposition) {
        let chain = build_chain(n, 1.0, K2, &force).unwrap();
        let d = decompose(&chain, k, l).unwrap();
        (chain, d)
    }

    #[test]
    fn unloaded_problem_is_trivial() {
        let (chain, d) = setup(100, 10, 20, ForceSpec::Zero);
        let system = assemble_reduced_system(&chain, &d).unwrap();
        assert_eq!(system.rhs, Vector3::zeros());
        let r = solve_atc(&chain, &d).unwrap();
        assert_eq!(r.controls, ControlPair::default());
        assert_eq!(r.u_atc.max_abs(), 0.0);
        assert_eq!(r.mismatch.total, 0.0);
    }

    #[test]
    fn continuum_lifting_closed_form() {
        let d = Decomposition::new(100, 10, 20).unwrap();
        let v = lift_continuum(&d, 1.0);
        assert_eq!(v[10], 1.0);
        assert_eq!(v[99], 0.0);
        assert!((v[54] - 45.0 / 89.0).abs() < 1e-15);
        assert_eq!(lift_continuum(&d, 0.0).max_abs(), 0.0);
    }

    #[test]
    fn linear_atomistic_lifting() {
        let (chain, d) = setup(100, 10, 20, ForceSpec::sine(1.0));
        // i/L solves the unloaded stencil; it needs Γa⁻ data (0, 1/L).
        let lin = chain.unloaded().with_outer_boundary(OuterBoundary { left: [0.0, 1.0 / 20.0], right: [0.0; 2] });
        let u = solve_atomistic_subproblem(&lin, &d, [19.0 / 20.0, 1.0]).unwrap();
        for i in 0..=20 {
            assert!((u[i] - i as f64 / 20.0).abs() < 1e-14);
        }
        assert_eq!(lift_atomistic(&chain, &d, [0.0, 0.0]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn mismatch_counting_and_split() {
        let d = Decomposition::new(100, 10, 20).unwrap();
        let a = DisplacementField::from_fn(d.atomistic(), DomainTag::Atomistic, |i| i as f64 + 1.0);
        let c = DisplacementField::from_fn(d.continuum(), DomainTag::Continuum, |i| i as f64);
        let m = mismatch_norm(&a, &c, &d).unwrap();
        assert_eq!(m.total, 11.0);
        assert_eq!(m.continuum_node + m.interior + m.atomistic_nodes, m.total);
        assert_eq!((m.continuum_node, m.interior, m.atomistic_nodes), (1.0, 8.0, 2.0));
        assert!(mismatch_norm(&a, &c.restrict(IndexRange::new(12, 30).unwrap()).unwrap(), &d).is_err());
    }

    #[test]
    fn gram_is_symmetric_positive_definite() {
        for (n, k, l) in [(40, 10, 20), (100, 2, 6), (1000, 30, 60), (200, 14, 28)] {
            let (chain, d) = setup(n, k, l, ForceSpec::sine(1.0));
            let s = assemble_reduced_system(&chain, &d).unwrap();
            assert_eq!(s.gram, s.gram.transpose());
            assert!(s.eigenvalues[0] > 0.0);
        }
    }

    #[test]
    fn controls_zero_the_gradient() {
        let (chain, d) = setup(40, 10, 20, ForceSpec::sine(1.0));
        let s = assemble_reduced_system(&chain, &d).unwrap();
        let theta = solve_controls(&s).unwrap();
        let scale = 1.0 + s.objective(&theta);
        let h = 1e-6;
        for j in 0..3 {
            let mut plus = theta.to_vector();
            let mut minus = theta.to_vector();
            plus[j] += h;
            minus[j] -= h;
            let fd = (s.objective(&ControlPair::from_vector(&plus)) - s.objective(&ControlPair::from_vector(&minus)))
                / (2.0 * h);
            assert!(fd.abs() <= 1e-8 * scale, "fd gradient {fd}");
        }
    }

    #[test]
    fn superposition_matches_direct_states() {
        let (chain, d) = setup(60, 12, 24, ForceSpec::Point { site: 30, magnitude: 1.0 });
        let s = assemble_reduced_system(&chain, &d).unwrap();
        let theta = ControlPair::new(0.3, -0.2, 0.7);
        let (ua, uc) = s.states(&theta).unwrap();
        let direct = compose_atc(&chain, &d, &theta).unwrap();
        assert!(distance_over(&ua, &direct.u_a_op, d.atomistic()).unwrap() < 1e-12);
        assert!(distance_over(&uc, &direct.u_c_op, d.continuum()).unwrap() < 1e-12);
        assert!((2.0 * s.objective(&theta) - direct.mismatch.total).abs() < 1e-12 * direct.mismatch.total);
    }

    #[test]
    fn exact_traces_reproduce_reference_on_atomistic_region() {
        let (chain, d) = setup(80, 10, 20, ForceSpec::sine(1.0));
        let reference = solve_full_atomistic(&chain).unwrap();
        let r = compose_atc(&chain, &d, &trace(&reference, &d).unwrap()).unwrap();
        assert!(distance_over(&r.u_atc, &reference, d.atomistic()).unwrap() < 1e-12);
        assert!(distance_over(&r.u_atc, &r.u_c_op, d.continuum_only()).unwrap() == 0.0);
    }

    #[test]
    fn trace_reads_interface_atoms() {
        let d = Decomposition::new(100, 10, 20).unwrap();
        let u = DisplacementField::from_fn(d.global(), DomainTag::Global, |i| i as f64);
        assert_eq!(trace(&u, &d).unwrap(), ControlPair::new(19.0, 20.0, 10.0));
        let short = u.restrict(IndexRange::new(11, 30).unwrap()).unwrap();
        assert!(trace(&short, &d).is_err());
    }

    #[test]
    fn patch_test_small() {
        let f = 0.01;
        let (chain, d) = setup(100, 10, 20, ForceSpec::Zero);
        let chain = chain.with_outer_boundary(OuterBoundary::uniform_strain(100, f));
        let r = solve_atc(&chain, &d).unwrap();
        for (i, v) in r.u_atc.iter() {
            assert!((v - i as f64 * f).abs() < 1e-12 * 2.0);
        }
        assert!(r.mismatch.total < 1e-20);
    }
}
