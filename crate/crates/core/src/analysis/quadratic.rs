//! The quadratic form `‖vᶜ - v¹‖²` over the overlap in the linear-mode
//! amplitudes `(α_c, α₁)`, its closed forms and its `N → ∞` limit.

use serde::Serialize;

use crate::lattice::Decomposition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl FormCoefficients {
    /// Smallest eigenvalue of `[[a, -c], [-c, b]]`.
    pub fn lambda_min(&self) -> f64 {
        let mean = 0.5 * (self.a + self.b);
        let half_gap = 0.5 * (self.a - self.b);
        mean - half_gap.hypot(self.c)
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.b - self.c * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapQuadraticForm {
    /// `1 + L - K`.
    pub beta: f64,
    pub gamma: f64,
    /// `Ã, B̃, C̃` by direct summation over `K..=L`.
    pub summed: FormCoefficients,
    /// `A, B, C` from the closed forms in `K, L, N̄`; `Ã = β A` etc.
    pub closed: FormCoefficients,
    /// `A, B, C` rewritten with `K = (1 - γ) L`.
    pub gamma_form: FormCoefficients,
    pub limit: FormCoefficients,
    /// Largest relative difference between `summed / β` and `closed`.
    pub relative_difference: f64,
    pub lambda_min: f64,
    pub lambda_min_limit: f64,
}

/// `A∞ = 1`, `B∞ = 1 - γ + γ²/3`, `C∞ = 1 - γ/2`.
pub fn limit_coefficients(gamma: f64) -> FormCoefficients {
    FormCoefficients { a: 1.0, b: 1.0 - gamma + gamma * gamma / 3.0, c: 1.0 - 0.5 * gamma }
}

pub fn overlap_quadratic_form(decomp: &Decomposition) -> OverlapQuadraticForm {
    let (k, l, nb) = (decomp.k() as f64, decomp.l() as f64, decomp.n_bar() as f64);
    let gamma = decomp.gamma();
    let beta = 1.0 + l - k;

    let mut summed = FormCoefficients { a: 0.0, b: 0.0, c: 0.0 };
    for i in decomp.overlap().iter() {
        let vc = (nb - i as f64) / (nb - k);
        let v1 = i as f64 / l;
        summed.a += vc * vc;
        summed.b += v1 * v1;
        summed.c += vc * v1;
    }

    let closed = FormCoefficients {
        a: (6.0 * nb * nb + 2.0 * l * l + 2.0 * k * k - 6.0 * k * nb - 6.0 * l * nb + 2.0 * k * l + l - k)
            / (6.0 * (k - nb).powi(2)),
        b: (2.0 * l * l + 2.0 * k * k + 2.0 * k * l + l - k) / (6.0 * l * l),
        c: (2.0 * l * l + 2.0 * k * k + 2.0 * k * l - 3.0 * k * nb - 3.0 * l * nb + l - k) / (6.0 * l * (k - nb)),
    };

    let q = 1.0 - gamma + gamma * gamma / 3.0;
    let denom = nb - (1.0 - gamma) * l;
    let gamma_form = FormCoefficients {
        a: (nb * nb + l * l * q + gamma * l / 6.0 - l * nb * (2.0 - gamma)) / (denom * denom),
        b: (l * q + gamma / 6.0) / l,
        c: (nb * (1.0 - 0.5 * gamma) - gamma / 6.0 - l * q) / denom,
    };

    let rel = |s: f64, c: f64| ((s / beta - c) / c).abs();
    let relative_difference = rel(summed.a, closed.a).max(rel(summed.b, closed.b)).max(rel(summed.c, closed.c));
    let limit = limit_coefficients(gamma);
    OverlapQuadraticForm {
        beta,
        gamma,
        summed,
        closed,
        gamma_form,
        limit,
        relative_difference,
        lambda_min: closed.lambda_min(),
        lambda_min_limit: limit.lambda_min(),
    }
}
