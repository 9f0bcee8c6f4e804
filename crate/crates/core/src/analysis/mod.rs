//! Verification instruments: patch test, `‖Q‖`, the closed-form mode and
//! quadratic-form oracles, stability constants, error studies and sweeps.

pub mod modes;
pub mod oracle;
pub mod patch;
pub mod qnorm;
pub mod quadratic;
pub mod scorecard;
pub mod stability;
pub mod study;

pub use modes::{
    alpha_coefficients, characteristic_polynomial, characteristic_roots, four_mode_split, mode_decomposition,
    reconstruction_residual, t_limit, t_matrix, AlphaCoefficients, CharacteristicRoots, FourModeSplit,
    ModeCoefficients,
};
pub use oracle::{fd_newton_minimize, OracleResult};
pub use patch::{patch_test, PatchReport};
pub use qnorm::{apply_q, estimate_q_norm, q_norm_from_system, QNorm};
pub use quadratic::{limit_coefficients, overlap_quadratic_form, FormCoefficients, OverlapQuadraticForm};
pub use scorecard::{run_verification, Check, Scorecard, VerifyOptions};
pub use stability::{verify_stability, StabilityReport};
pub use study::{
    convergence_sweep, error_study, loglog_slope, sweep_interfaces, ErrorStudy, StudyRow, SweepConfig, SweepResult,
};
