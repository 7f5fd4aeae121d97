//! Achievable rate regions, outer bounds and capacity regions for the
//! discrete memoryless cognitive interference channel with unidirectional
//! destination cooperation.
//!
//! The channel has three transmitters: sender 1 (`X1`), the cognitive
//! sender 2 (`X2`, which knows both messages) and destination 2 (`X3`, which
//! relays toward destination 1). Destination 1 observes `Y1`, destination 2
//! observes `Y2`.
//!
//! | module | computes |
//! |--------|----------|
//! | [`prob`] | dense joint pmfs, marginals, entropies and mutual informations in bits |
//! | [`channel`] | the transition tensor, structural classes, pinning `X3` |
//! | [`polytope`] | Fourier-Motzkin projection and planar rate regions |
//! | [`inner`] | the rate-splitting/binning/compress-forward inner bound |
//! | [`outer`] | the converse outer bound and its support-function estimate |
//! | [`capacity`] | capacity regions of the degraded Z class and the semi-deterministic high-interference class |
//!
//! Every region that ranges over "all distributions" is computed from finite
//! samples and is therefore an estimate from below of the exact set. See the
//! `examples/` directory for one runnable walkthrough per capability.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod inner;
pub mod outer;
pub mod polytope;
pub mod prob;
pub mod search;

pub use channel::{classify, pin_x3, ChannelSpec, ClassReport, StructuralClass};
pub use error::{Error, Result};
pub use polytope::{hull_union, region_contains, support, HalfPlane, LinearSystem, Region2D};
pub use prob::{joint_from_factors, validate_pmf, ConditionalFactor, JointPmf, Var};

/// Variable labels shared by every joint distribution in the crate.
pub mod labels {
    pub const X1: &str = "x1";
    pub const X2: &str = "x2";
    pub const X3: &str = "x3";
    pub const Y1: &str = "y1";
    pub const Y2: &str = "y2";
    pub const U1P: &str = "u1p";
    pub const U1: &str = "u1";
    pub const V1: &str = "v1";
    pub const U2P: &str = "u2p";
    pub const U2: &str = "u2";
    pub const V12: &str = "v12";
    pub const V2: &str = "v2";
    pub const YHAT2: &str = "yhat2";
}
