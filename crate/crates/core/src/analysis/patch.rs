//! Patch test: a uniform strain under zero load must be reproduced exactly.

use serde::Serialize;

use crate::coupling::solve_atc;
use crate::error::Result;
use crate::lattice::{ChainModel, Decomposition, OuterBoundary};

#[derive(Debug, Clone, Serialize)]
pub struct PatchReport {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub strain: f64,
    /// `max_i |u_atc_i - i F|`.
    pub max_deviation: f64,
    /// Squared overlap mismatch at the optimum.
    pub mismatch: f64,
    /// `1e-12 (1 + N F)`.
    pub tolerance: f64,
    pub passed: bool,
}

pub const PATCH_TOLERANCE: f64 = 1e-12;

/// Runs the coupled solve on the unloaded chain with outer data
/// `(0, F, (N-1)F, NF)`; any load on `chain` is ignored.
pub fn patch_test(chain: &ChainModel, decomp: &Decomposition, strain: f64) -> Result<PatchReport> {
    let n = chain.n();
    let strained = chain.unloaded().with_outer_boundary(OuterBoundary::uniform_strain(n, strain));
    let result = solve_atc(&strained, decomp)?;
    let max_deviation = result.u_atc.iter().fold(0.0f64, |m, (i, v)| m.max((v - i as f64 * strain).abs()));
    let tolerance = PATCH_TOLERANCE * (1.0 + n as f64 * strain.abs());
    let mismatch = result.mismatch.total;
    Ok(PatchReport {
        n,
        k: decomp.k(),
        l: decomp.l(),
        strain,
        max_deviation,
        mismatch,
        tolerance,
        passed: max_deviation <= tolerance && mismatch <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_chain, decompose, ForceSpec};

    #[test]
    fn zero_strain_is_trivial() {
        let chain = build_chain(100, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let r = patch_test(&chain, &decompose(&chain, 10, 20).unwrap(), 0.0).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn uniform_strain_reproduced() {
        let chain = build_chain(1000, 1.0, -1.0 / 6.0, &ForceSpec::Zero).unwrap();
        let r = patch_test(&chain, &decompose(&chain, 30, 60).unwrap(), 0.01).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
