use thiserror::Error;

use crate::simulate::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Predator `index` (0-based) cannot survive: m <= d.
    #[error("survival condition m > d violated for predator {}: m = {m}, d = {d}", index + 1)]
    NoSurvival { index: usize, m: f64, d: f64 },

    /// r <= sum of d_i u_i*, so x* = K (1 - load / r) is not in (0, K).
    #[error("no positive equilibrium: r = {r} does not exceed the predation load {load}")]
    NoPositiveEquilibrium { r: f64, load: f64 },

    #[error("singular state: {0}")]
    Singular(String),

    #[error("state outside the open positive orthant: {0}")]
    NonPositiveState(String),

    #[error("operation requires n = {expected} predators, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("memory rate alpha is required for the delayed system")]
    MissingAlpha,

    #[error("not applicable: {0}")]
    Inapplicable(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Adaptive step fell below the underflow bound; `partial` holds every
    /// state accepted so far.
    #[error("step size underflow at t = {t} (h = {h}): problem is stiff or blows up")]
    StepSizeUnderflow {
        t: f64,
        h: f64,
        partial: Box<Trajectory>,
    },

    #[error("component {component} fell below the positivity floor at t = {t}")]
    PositivityLost {
        t: f64,
        component: usize,
        partial: Box<Trajectory>,
    },
}

impl Error {
    /// Short machine-readable code used by the CLI and the HTTP API.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid_params",
            Error::NoSurvival { .. } => "no_survival",
            Error::NoPositiveEquilibrium { .. } => "no_positive_equilibrium",
            Error::Singular(_) => "singular_state",
            Error::NonPositiveState(_) => "non_positive_state",
            Error::UnsupportedDimension { .. } => "unsupported_dimension",
            Error::MissingAlpha => "missing_alpha",
            Error::Inapplicable(_) => "inapplicable",
            Error::Numeric(_) => "numeric_failure",
            Error::StepSizeUnderflow { .. } => "step_size_underflow",
            Error::PositivityLost { .. } => "positivity_lost",
        }
    }

    /// The model condition whose violation produced this error, if any.
    pub fn violated_condition(&self) -> Option<&'static str> {
        match self {
            Error::NoSurvival { .. } => Some("m_i > d_i (predator survival)"),
            Error::NoPositiveEquilibrium { .. } => {
                Some("r > sum_i d_i u_i* (positive interior equilibrium, 0 < x* < K)")
            }
            Error::NonPositiveState(_) | Error::PositivityLost { .. } => {
                Some("state in the open positive orthant")
            }
            Error::Singular(_) => Some("x > 0 and q > 0 (ratio y/x defined)"),
            Error::MissingAlpha => Some("alpha > 0 (memory rate)"),
            Error::UnsupportedDimension { .. } => Some("n = 2 predators"),
            _ => None,
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_) | Error::StepSizeUnderflow { .. } | Error::PositivityLost { .. }
        )
    }
}
