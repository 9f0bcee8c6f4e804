//! Stability of the control liftings: `‖vᶜ(θᶜ)‖² ≤ (N-K) θᶜ²` exactly and
//! `‖vᵃ(θᵃ)‖² ≤ C L ‖θᵃ‖²` with an empirical constant `C`.

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coupling::{lift_atomistic, lift_continuum};
use crate::error::{AtcError, Result};
use crate::lattice::{ChainModel, Decomposition};

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub samples: usize,
    pub continuum_violations: usize,
    /// Largest `‖vᶜ‖² / ((N-K) θᶜ²)` seen; at most 1.
    pub continuum_max_ratio: f64,
    /// Largest sampled `‖vᵃ‖² / (L ‖θᵃ‖²)`.
    pub atomistic_constant: f64,
    /// Supremum of the same ratio over all `θᵃ`.
    pub atomistic_constant_sup: f64,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.continuum_violations == 0 && self.atomistic_constant.is_finite()
    }
}

pub fn verify_stability(
    chain: &ChainModel,
    decomp: &Decomposition,
    n_samples: usize,
    seed: u64,
) -> Result<StabilityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e1 = lift_atomistic(chain, decomp, [1.0, 0.0])?;
    let e2 = lift_atomistic(chain, decomp, [0.0, 1.0])?;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let g = Matrix2::new(
        dot(e1.values(), e1.values()),
        dot(e1.values(), e2.values()),
        dot(e2.values(), e1.values()),
        dot(e2.values(), e2.values()),
    );
    let lf = decomp.l() as f64;
    let atomistic_constant_sup = g.symmetric_eigenvalues().max() / lf;
    let width = (decomp.n() - decomp.k()) as f64;

    let mut report = StabilityReport {
        samples: n_samples,
        continuum_violations: 0,
        continuum_max_ratio: 0.0,
        atomistic_constant: 0.0,
        atomistic_constant_sup,
    };
    for _ in 0..n_samples {
        let theta_c: f64 = rng.gen_range(-1.0..1.0);
        let vc = lift_continuum(decomp, theta_c);
        let norm_c = vc.l2_norm().powi(2);
        let bound_c = width * theta_c * theta_c;
        if norm_c > bound_c {
            report.continuum_violations += 1;
        }
        if bound_c > 0.0 {
            report.continuum_max_ratio = report.continuum_max_ratio.max(norm_c / bound_c);
        }

        let theta_a: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let va = lift_atomistic(chain, decomp, theta_a)?;
        let theta_sq = theta_a[0] * theta_a[0] + theta_a[1] * theta_a[1];
        if theta_sq > 0.0 {
            report.atomistic_constant = report.atomistic_constant.max(va.l2_norm().powi(2) / (lf * theta_sq));
        }
    }
    if report.continuum_violations > 0 {
        return Err(AtcError::BoundViolated(format!(
            "continuum stability bound violated in {} of {n_samples} samples",
            report.continuum_violations
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, ForceSpec};

    #[test]
    fn unit_continuum_control_series() {
        let d = Decomposition::new(100, 10, 20).unwrap();
        let m = (d.n_bar() - d.k()) as f64;
        let norm = lift_continuum(&d, 1.0).l2_norm().powi(2);
        assert!((norm - (m + 1.0) * (2.0 * m + 1.0) / (6.0 * m)).abs() < 1e-12);
        assert!(norm <= m + 1.0);
    }

    #[test]
    fn sampled_constant_below_supremum() {
        let chain = build_chain(100, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let d = decompose(&chain, 10, 20).unwrap();
        let r = verify_stability(&chain, &d, 200, 7).unwrap();
        assert_eq!(r.continuum_violations, 0);
        assert!(r.continuum_max_ratio <= 1.0);
        assert!(r.atomistic_constant <= r.atomistic_constant_sup * (1.0 + 1e-12));
        assert!(r.atomistic_constant > 0.0);
    }
}
