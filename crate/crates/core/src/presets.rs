//! Built-in parameter sets.

use crate::model::{FunctionalResponse, GrowthLaw, ModelParams, Predator};

/// Name under which [`holling_two_predator`] is exposed by the CLI and API.
pub const EXAMPLE_PRESET: &str = "paper-example";

/// Two Holling predators on a logistic prey: `K = 0.1`, `m = (16, 18)`,
/// `a = (4, 2)`, `d = (8, 12)`.
///
/// Both equilibrium ratios are `1/4`, the predation load is 5 and the
/// positive equilibrium exists exactly for `r > 5`.
pub fn holling_two_predator(r: f64, alpha: Option<f64>) -> ModelParams {
    ModelParams::new(
        r,
        GrowthLaw::logistic(0.1),
        vec![
            Predator::new(FunctionalResponse::holling(16.0, 4.0), 8.0),
            Predator::new(FunctionalResponse::holling(18.0, 2.0), 12.0),
        ],
        alpha,
    )
    .expect("preset parameters are valid for r > 0, alpha > 0")
}

/// Looks up a preset by name, with the given `r` and `alpha`.
pub fn by_name(name: &str, r: f64, alpha: Option<f64>) -> Option<ModelParams> {
    match name {
        EXAMPLE_PRESET => Some(holling_two_predator(r, alpha)),
        _ => None,
    }
}

pub fn names() -> &'static [&'static str] {
    &[EXAMPLE_PRESET]
}
