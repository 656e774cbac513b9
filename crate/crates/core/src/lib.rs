//! Ratio-dependent systems of `n` predators competing for one prey, where
//! each predator responds to an exponentially fading memory `q` of the
//! prey density:
//!
//! ```text
//! x'   = r x g(x) - sum_i y_i p_i(y_i / x)
//! y_i' = y_i p_i(y_i / q) - d_i y_i
//! q'   = alpha (x - q)
//! ```
//!
//! The crate computes the positive equilibrium in closed form, the
//! Jacobians with and without memory, sign-stability and Routh-Hurwitz
//! tests, the `H(alpha)` cubic that detects delay-induced instability, and
//! integrates trajectories.
//!
//! ```
//! use predmem::{presets, stability};
//!
//! let params = presets::holling_two_predator(13.0, Some(1.0));
//! let report = stability::analyze(&params).unwrap();
//! assert!(report.delay_robustness.unwrap().holds);
//! ```

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod error;
pub mod linearize;
pub mod model;
pub mod oracle;
pub mod presets;
pub mod sample;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
pub use linearize::{build_a11, build_jacobians, linearize, JacobianLabels, JacobianPair};
pub use model::{
    Equilibrium, FunctionalResponse, GrowthLaw, ModelParams, NullclineGrid, NullclineMesh,
    Predator, ResponseKind, State,
};
pub use simulate::{integrate, memory_consistency_check, Trajectory};
