//! Numerical probes for diffeological spaces, `Lip^k` curves in dual pairs
//! and jet-based tangent structures on finite-dimensional models.
//!
//! Every probe returns a [`Verdict`]: PASS backed by multi-scale agreement,
//! FAIL with a [`Witness`], or INCONCLUSIVE with the residuals that blocked a
//! decision. The guide in `book/` walks through the concepts; its code blocks
//! run as doc-tests of this crate.

pub mod config;
pub mod convenient;
pub mod diffeology;
pub mod directional;
pub mod divided;
pub mod error;
pub mod expr;
pub mod fd;
pub mod gallery;
pub mod jet;
pub mod linalg;
pub mod random;
pub mod report;
pub mod smooth;
pub mod tangent;
pub mod verdict;

pub use config::ProbeConfig;
pub use directional::directional_derivative;
pub use divided::{delta_k, NodeTuple};
pub use error::{Error, Result};
pub use expr::{Expr, Unary};
pub use fd::{fd_jet, FdJet};
pub use jet::{compose_jets, taylor_eval, Jet, PolyPath, K_MAX};
pub use smooth::{smoothness_probe, BoxDomain};
pub use verdict::{Diagnostic, Status, Verdict, Witness};

/// The guide's chapters, compiled as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/expressions.md")]
    mod expressions {}
    #[doc = include_str!("../../../book/src/jets.md")]
    mod jets {}
    #[doc = include_str!("../../../book/src/smoothness.md")]
    mod smoothness {}
    #[doc = include_str!("../../../book/src/diffeologies.md")]
    mod diffeologies {}
    #[doc = include_str!("../../../book/src/tangent.md")]
    mod tangent {}
    #[doc = include_str!("../../../book/src/convenient.md")]
    mod convenient {}
}
