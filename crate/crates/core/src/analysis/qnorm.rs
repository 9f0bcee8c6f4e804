//! The norm of the linear part `Q` of the control-to-AtC map, measured
//! against the gram-induced control norm.
//!
//! `Q` acts on a 3-dimensional space, so `‖Q‖²` is the largest eigenvalue
//! of the pencil `G_full μ = σ G_o μ`.

use nalgebra::Matrix3;
use serde::Serialize;

use crate::coupling::{assemble_reduced_system, ControlPair, ReducedSystem};
use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition, DisplacementField, DomainTag};

#[derive(Debug, Clone, Serialize)]
pub struct QNorm {
    pub q_norm: f64,
    /// `γ⁻¹ √(N / (L - K))`.
    pub predicted_scale: f64,
    /// `q_norm / predicted_scale`.
    pub ratio: f64,
    pub gram_overlap: [[f64; 3]; 3],
    pub gram_full: [[f64; 3]; 3],
}

/// `Q(μ)` on `[0, N]`: `vᵃ(μᵃ)` on `Ω_a`, `vᶜ(μᶜ)` on `[L+1, N-1]`, zero at `N`.
pub fn apply_q(system: &ReducedSystem, mu: &ControlPair) -> DisplacementField {
    let d = &system.decomp;
    let [e1, e2, e3] = &system.basis_liftings;
    DisplacementField::from_fn(d.global(), DomainTag::Global, |i| {
        if i <= d.l() {
            mu.theta_a_lm1 * e1[i] + mu.theta_a_l * e2[i]
        } else if i < d.n() {
            mu.theta_c_k * e3[i]
        } else {
            0.0
        }
    })
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|r| [0, 1, 2].map(|c| m[(r, c)]))
}

pub fn q_norm_from_system(system: &ReducedSystem) -> Result<QNorm> {
    let d = &system.decomp;
    let basis = [ControlPair::new(1.0, 0.0, 0.0), ControlPair::new(0.0, 1.0, 0.0), ControlPair::new(0.0, 0.0, 1.0)]
        .map(|e| apply_q(system, &e));
    let full = Matrix3::from_fn(|r, c| basis[r].values().iter().zip(basis[c].values()).map(|(a, b)| a * b).sum());
    let go = system.gram;
    let chol = go.cholesky().ok_or(AtcError::GramNotPositiveDefinite { min_eigenvalue: system.eigenvalues[0] })?;
    let l_inv = chol.l().try_inverse().ok_or_else(|| AtcError::Singular("gram Cholesky factor".into()))?;
    let m = l_inv * full * l_inv.transpose();
    let m = 0.5 * (m + m.transpose());
    let sigma = m.symmetric_eigenvalues().max();
    let q_norm = sigma.max(0.0).sqrt();
    let predicted_scale = (d.n() as f64 / d.overlap_width() as f64).sqrt() / d.gamma();
    Ok(QNorm {
        q_norm,
        predicted_scale,
        ratio: q_norm / predicted_scale,
        gram_overlap: to_array(&go),
        gram_full: to_array(&full),
    })
}

/// Exact `‖Q‖`. Only the springs of `chain` matter.
pub fn estimate_q_norm(chain: &ChainModel, decomp: &Decomposition) -> Result<QNorm> {
    q_norm_from_system(&assemble_reduced_system(&chain.unloaded(), decomp)?)
}
