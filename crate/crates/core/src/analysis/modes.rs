//! Characteristic roots of the atomistic stencil and the exact mode
//! decompositions of the atomistic lifting `vᵃ(θᵃ)`.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use serde::Serialize;

use crate::coupling::lift_atomistic;
use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition, DisplacementField, DomainTag};
use crate::operators::AtomisticBoundary;
use crate::solvers::solve_atomistic_window;

/// Reciprocal condition number below which `T_L` is flagged.
pub const T_RCOND_FLAG: f64 = 1e-12;

/// Determinant magnitude below which the two-mode system is rejected.
pub const ALPHA_DET_MIN: f64 = 1e-14;

/// `p(σ) = -k2 σ⁴ - k1 σ³ + (2k1 + 2k2) σ² - k1 σ - k2`.
pub fn characteristic_polynomial(k1: f64, k2: f64, sigma: f64) -> f64 {
    (((-k2 * sigma - k1) * sigma + 2.0 * k1 + 2.0 * k2) * sigma - k1) * sigma - k2
}

/// The non-unit roots of `p`; `λ₄ < 1 < λ₃` and `λ₃ λ₄ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicRoots {
    pub lambda3: f64,
    pub lambda4: f64,
}

pub fn characteristic_roots(k1: f64, k2: f64) -> Result<CharacteristicRoots> {
    if !(k1 > 0.0 && k2 < 0.0 && k1 + 4.0 * k2 > 0.0) {
        return Err(AtcError::InvalidModel(format!("no decaying root for k1 = {k1}, k2 = {k2}")));
    }
    let disc = k1 * k1 + 4.0 * k1 * k2;
    assert!(disc > 0.0, "k1 (k1 + 4 k2) > 0 under the stability conditions");
    let b = k1 + 2.0 * k2;
    let s = disc.sqrt();
    // b - s cancels for small |k2|; use b² - s² = 4 k2² instead.
    let lambda4 = if b > 0.0 { (-2.0 * k2) / (b + s) } else { (b - s) / (-2.0 * k2) };
    let lambda3 = (b + s) / (-2.0 * k2);
    Ok(CharacteristicRoots { lambda3, lambda4 })
}

/// `T_L` from the boundary conditions of `vᵃ` in the basis
/// `{n/L, (L-n)/L, λⁿ, λ^{L-n}}`: rows are the values at `0, 1, L-1, L`.
pub fn t_matrix(l: usize, lambda: f64) -> Matrix4<f64> {
    let lf = l as f64;
    let basis = |n: f64| [n / lf, (lf - n) / lf, lambda.powf(n), lambda.powf(lf - n)];
    let rows = [basis(0.0), basis(1.0), basis(lf - 1.0), basis(lf)];
    Matrix4::from_fn(|r, c| rows[r][c])
}

/// Limit of `T_L` as `L → ∞`.
pub fn t_limit(lambda: f64) -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 1.0, 0.0, //
        0.0, 1.0, lambda, 0.0, //
        1.0, 0.0, 0.0, lambda, //
        1.0, 0.0, 0.0, 1.0,
    )
}

/// Spectral norm of `m⁻¹`, or `None` if `m` is singular.
pub fn inverse_norm(m: &Matrix4<f64>) -> Option<f64> {
    let sv = m.singular_values();
    let min = sv.min();
    (min > 0.0).then(|| 1.0 / min)
}

/// Coefficients `β` of `vᵃ(θᵃ)` in the basis of [`t_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoefficients {
    pub beta: [f64; 4],
    pub lambda: f64,
    pub l: usize,
    /// Reciprocal 2-norm condition number of `T_L`.
    pub rcond: f64,
    pub near_singular: bool,
}

impl ModeCoefficients {
    pub fn value(&self, n: usize) -> f64 {
        let (lf, nf) = (self.l as f64, n as f64);
        let [b1, b2, b3, b4] = self.beta;
        b1 * nf / lf + b2 * (lf - nf) / lf + b3 * self.lambda.powf(nf) + b4 * self.lambda.powf(lf - nf)
    }

    /// The reconstructed field on `[0, L]`.
    pub fn field(&self) -> DisplacementField {
        DisplacementField::from_fn(
            crate::lattice::IndexRange::new(0, self.l).expect("L > 0"),
            DomainTag::Atomistic,
            |n| self.value(n),
        )
    }
}

pub fn mode_decomposition(chain: &ChainModel, decomp: &Decomposition, theta_a: [f64; 2]) -> Result<ModeCoefficients> {
    let lambda = characteristic_roots(chain.k1(), chain.k2())?.lambda4;
    let t = t_matrix(decomp.l(), lambda);
    let sv = t.singular_values();
    let rcond = sv.min() / sv.max();
    let beta = t
        .lu()
        .solve(&Vector4::new(0.0, 0.0, theta_a[0], theta_a[1]))
        .ok_or_else(|| AtcError::Singular(format!("T_L is singular for L = {}", decomp.l())))?;
    Ok(ModeCoefficients {
        beta: [beta[0], beta[1], beta[2], beta[3]],
        lambda,
        l: decomp.l(),
        rcond,
        near_singular: rcond < T_RCOND_FLAG,
    })
}

/// `max_n |vᵃ(θᵃ)_n - Σ β_j v^j_n|` against the numeric lifting.
pub fn reconstruction_residual(chain: &ChainModel, decomp: &Decomposition, theta_a: [f64; 2]) -> Result<f64> {
    let modes = mode_decomposition(chain, decomp, theta_a)?;
    let lifted = lift_atomistic(chain, decomp, theta_a)?;
    Ok(lifted.iter().fold(0.0, |m, (n, v)| m.max((v - modes.value(n)).abs())))
}

/// Coefficients of the linear and scaled exponential modes
/// `v¹_i = α₁ i/L`, `v²_i = α₂ λ^{L-i} √(L-K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub determinant: f64,
}

pub fn alpha_coefficients(decomp: &Decomposition, lambda: f64, theta_a: [f64; 2]) -> Result<AlphaCoefficients> {
    let lf = decomp.l() as f64;
    let s = (decomp.overlap_width() as f64).sqrt();
    let m = Matrix2::new(1.0 - 1.0 / lf, lambda * s, 1.0, s);
    let determinant = m.determinant();
    if determinant.abs() < ALPHA_DET_MIN {
        return Err(AtcError::Singular(format!("two-mode system determinant {determinant:e}")));
    }
    let a = m
        .lu()
        .solve(&Vector2::new(theta_a[0], theta_a[1]))
        .ok_or_else(|| AtcError::Singular("two-mode system".into()))?;
    Ok(AlphaCoefficients { alpha1: a[0], alpha2: a[1], determinant })
}

/// `vᵃ = v¹ + v² + v³ + v⁴`, where `v³` and `v⁴` are the zero-load
/// corrections that cancel `v²` and `v¹` on `{0, 1}`.
#[derive(Debug, Clone)]
pub struct FourModeSplit {
    pub alpha: AlphaCoefficients,
    pub v1: DisplacementField,
    pub v2: DisplacementField,
    pub v3: DisplacementField,
    pub v4: DisplacementField,
}

impl FourModeSplit {
    pub fn sum(&self) -> DisplacementField {
        DisplacementField::from_fn(self.v1.range(), DomainTag::Atomistic, |i| {
            self.v1[i] + self.v2[i] + self.v3[i] + self.v4[i]
        })
    }
}

pub fn four_mode_split(chain: &ChainModel, decomp: &Decomposition, theta_a: [f64; 2]) -> Result<FourModeSplit> {
    let lambda = characteristic_roots(chain.k1(), chain.k2())?.lambda4;
    let alpha = alpha_coefficients(decomp, lambda, theta_a)?;
    let (l, lf) = (decomp.l(), decomp.l() as f64);
    let s = (decomp.overlap_width() as f64).sqrt();
    let range = decomp.atomistic();
    let v1 = DisplacementField::from_fn(range, DomainTag::Atomistic, |i| alpha.alpha1 * i as f64 / lf);
    let v2 =
        DisplacementField::from_fn(range, DomainTag::Atomistic, |i| alpha.alpha2 * lambda.powi((l - i) as i32) * s);
    let unloaded = chain.unloaded();
    let correction = |v: &DisplacementField| {
        let bc = AtomisticBoundary { left: [-v[0], -v[1]], right: [0.0, 0.0] };
        solve_atomistic_window(&unloaded, decomp.atomistic_interior(), &bc, DomainTag::Atomistic)
    };
    let v3 = correction(&v2)?;
    let v4 = correction(&v1)?;
    Ok(FourModeSplit { alpha, v1, v2, v3, v4 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, distance_over, ForceSpec};

    #[test]
    fn roots_for_reference_springs() {
        let r = characteristic_roots(1.0, -1.0 / 6.0).unwrap();
        assert!((r.lambda4 - (2.0 - 3f64.sqrt())).abs() < 1e-15);
        assert!((r.lambda4 - 3.0 * (2.0 / 3.0 - (1.0f64 / 3.0).sqrt())).abs() < 1e-14);
        assert!((r.lambda3 * r.lambda4 - 1.0).abs() < 1e-12);
        assert!(characteristic_polynomial(1.0, -1.0 / 6.0, r.lambda4).abs() < 1e-12);
        assert!(characteristic_polynomial(1.0, -1.0 / 6.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn nearest_neighbor_limit() {
        let r = characteristic_roots(1.0, -1e-9).unwrap();
        assert!(r.lambda4 > 0.0 && r.lambda4 < 2e-9);
    }

    #[test]
    fn alpha_pure_modes() {
        let d = Decomposition::new(100, 10, 20).unwrap();
        let lambda = characteristic_roots(1.0, -1.0 / 6.0).unwrap().lambda4;
        let a = alpha_coefficients(&d, lambda, [19.0 / 20.0, 1.0]).unwrap();
        assert!((a.alpha1 - 1.0).abs() < 1e-14 && a.alpha2.abs() < 1e-14);
        let s = 10f64.sqrt();
        let a = alpha_coefficients(&d, lambda, [lambda * s, s]).unwrap();
        assert!(a.alpha1.abs() < 1e-14 && (a.alpha2 - 1.0).abs() < 1e-14);
        let expected_det = (19.0 / 20.0 - lambda) * s;
        assert!((a.determinant - expected_det).abs() < 1e-14);
    }

    #[test]
    fn modes_reconstruct_lifting() {
        let chain = build_chain(100, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 10, 20).unwrap();
        assert!(reconstruction_residual(&chain, &d, [1.0, 1.0]).unwrap() <= 1e-10);
        let zero = mode_decomposition(&chain, &d, [0.0, 0.0]).unwrap();
        assert_eq!(zero.beta, [0.0; 4]);
        assert!(!zero.near_singular);
    }

    #[test]
    fn four_modes_sum_to_lifting() {
        let chain = build_chain(200, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 14, 28).unwrap();
        let split = four_mode_split(&chain, &d, [0.4, -1.3]).unwrap();
        let lifted = lift_atomistic(&chain, &d, [0.4, -1.3]).unwrap();
        assert!(distance_over(&split.sum(), &lifted, d.atomistic()).unwrap() < 1e-12);
    }

    #[test]
    fn t_inverse_norm_converges() {
        let lambda = 2.0 - 3f64.sqrt();
        let limit = inverse_norm(&t_limit(lambda)).unwrap();
        let gaps: Vec<f64> =
            [10, 20, 40, 80].iter().map(|&l| (inverse_norm(&t_matrix(l, lambda)).unwrap() - limit).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
        assert!(gaps[3] < 0.1);
    }
}
