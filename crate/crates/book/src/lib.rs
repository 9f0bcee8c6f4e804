//! Runs the code listings of the guide in `book/` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}
#[doc = include_str!("../../../book/src/decomposition.md")]
pub mod decomposition {}
#[doc = include_str!("../../../book/src/coupling.md")]
pub mod coupling {}
#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}
#[doc = include_str!("../../../book/src/verification.md")]
pub mod verification {}
#[doc = include_str!("../../../book/src/error_analysis.md")]
pub mod error_analysis {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
