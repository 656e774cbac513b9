//! Stability machinery: characteristic polynomials, eigenvalues, the
//! closed-form conditions, the quartic Hurwitz test and the `H(alpha)`
//! cubic for two predators, the general-n identity, and scans.

mod conditions;
mod eigen;
mod poly;
mod quartic;
mod report;
mod scan;
mod schur;

pub use conditions::{
    check_main3, check_sign_stability, check_strategy_threshold, has_delayed_sign_pattern,
    ivlev_bound, ivlev_bound_of_ratio, ivlev_direct_bound, ivlev_direct_bound_of_ratio, AlleeZone,
    DelayRobustness, SignStability, StrategyFlag,
};
pub use eigen::{cluster, eigenvalues, roots, spectral_abscissa, Stability, MARGINAL_BAND};
pub use poly::{char_poly, Polynomial, MAX_CHAR_POLY_DIM};
pub use quartic::{
    h_cubic, h_cubic_interpolated, hurwitz_quartic, quartic_coeffs, quartic_coeffs_at, HCubic,
    HurwitzFlags, QuarticCoeffs,
};
pub use report::{
    analyze, classify, sweep, sweep_to_csv, EquilibriumClass, StabilityReport, SweepParam, SweepRow,
};
pub use scan::{alpha_scan, log_grid, AlphaScan, SwitchPoint};
pub use schur::{
    char_poly_delayed_schur, char_poly_delayed_schur_at, classify_general_n,
    coefficients_one_signed, AlphaCertificate, GeneralNReport,
};
