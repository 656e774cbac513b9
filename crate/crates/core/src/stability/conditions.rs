//! Closed-form stability conditions stated on the named Jacobian entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearize::{JacobianLabels, JacobianPair};
use crate::model::{ModelParams, ResponseKind};

/// Sufficient conditions for sign-stability of the undelayed Jacobian `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignStability {
    /// `a11 <= 0`.
    pub a11_nonpositive: bool,
    /// `p_i'(u_i*) < 0` for each predator.
    pub derivative_negative: Vec<bool>,
    /// `-d_i - u_i* p_i'(u_i*) < 0` for each predator.
    pub row_negative: Vec<bool>,
    /// Conjunction of all of the above; `A` is sign-stable when true.
    pub holds: bool,
}

pub fn check_sign_stability(jac: &JacobianPair) -> SignStability {
    let l = &jac.labels;
    let a11_nonpositive = l.a11 <= 0.0;
    // u_i* > 0, so sign(u p') = sign(p').
    let derivative_negative: Vec<bool> = l.a_diag.iter().map(|&v| v < 0.0).collect();
    let row_negative: Vec<bool> = l.a_row.iter().map(|&v| v < 0.0).collect();
    let holds = a11_nonpositive
        && derivative_negative.iter().all(|&b| b)
        && row_negative.iter().all(|&b| b);
    SignStability {
        a11_nonpositive,
        derivative_negative,
        row_negative,
        holds,
    }
}

/// Where the equilibrium sits relative to the Allée-effect zone, by the
/// sign of `a11`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlleeZone {
    /// `a11 > 0`: prey growth still increases with prey density.
    Inside,
    /// `a11 < 0`.
    Outside,
    /// `a11 = 0`.
    Boundary,
}

impl AlleeZone {
    pub fn from_a11(a11: f64) -> Self {
        if a11 > 0.0 {
            AlleeZone::Inside
        } else if a11 < 0.0 {
            AlleeZone::Outside
        } else {
            AlleeZone::Boundary
        }
    }
}

/// True when `A_d` (n = 2) has the sign pattern
/// `[[-/0, -, -, 0], [0, -, 0, +], [0, 0, -, +], [alpha, 0, 0, -alpha]]`.
pub fn has_delayed_sign_pattern(labels: &JacobianLabels) -> bool {
    labels.n() == 2
        && labels.a11 <= 0.0
        && labels.a_diag.iter().all(|&v| v < 0.0)
        && labels.a_row.iter().all(|&v| v < 0.0)
        && labels.a_col.iter().all(|&v| v > 0.0)
}

/// Conditions under which the memory cannot destabilise `E_d*` for any
/// `alpha > 0` (n = 2): for each predator `i`,
/// `a11^2 > a_ii^2 > -a_1i a_i,q` where `a_ii` is the predator diagonal,
/// `a_1i` its prey-row entry and `a_i,q` its memory-column entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayRobustness {
    /// False when `A_d` violates the required sign pattern.
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// One flag per predator.
    pub predators: Vec<bool>,
    pub holds: bool,
}

fn predator_pair_condition(l: &JacobianLabels, i: usize) -> bool {
    let a11_sq = l.a11 * l.a11;
    let aii_sq = l.a_diag[i] * l.a_diag[i];
    a11_sq > aii_sq && aii_sq > -l.a_row[i] * l.a_col[i]
}

pub fn check_main3(jac: &JacobianPair) -> Result<DelayRobustness> {
    let l = &jac.labels;
    if l.n() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            got: l.n(),
        });
    }
    if !has_delayed_sign_pattern(l) {
        let reason = if l.a11 > 0.0 {
            format!("a11 = {} > 0 breaks the delayed sign pattern", l.a11)
        } else {
            "predator entries break the delayed sign pattern".to_string()
        };
        return Ok(DelayRobustness {
            applicable: false,
            reason: Some(reason),
            predators: vec![],
            holds: false,
        });
    }
    let predators: Vec<bool> = (0..2).map(|i| predator_pair_condition(l, i)).collect();
    let holds = predators.iter().all(|&b| b);
    Ok(DelayRobustness {
        applicable: true,
        reason: None,
        predators,
        holds,
    })
}

/// Closed-form Ivlev half-saturation bound written in `x = m / (m - d)`:
/// `(1 - 1/x - ln(x)/x) / ln(x)^2`.
///
/// Strictly decreasing on `x > 1` with limit `1/2` as `x -> 1+`. It sits
/// below the direct threshold [`ivlev_direct_bound_of_ratio`] by the factor
/// `x`, so exceeding it does not by itself give `a_ii^2 > -a_1i a_i,q`.
pub fn ivlev_bound_of_ratio(x: f64) -> f64 {
    let l = x.ln();
    (1.0 - 1.0 / x - l / x) / (l * l)
}

/// [`ivlev_bound_of_ratio`] in terms of `(m, d)`:
/// `(d/m - (m-d)/m ln(m/(m-d))) / ln(m/(m-d))^2`.
pub fn ivlev_bound(m: f64, d: f64) -> f64 {
    let l = -(-d / m).ln_1p();
    (d / m - (m - d) / m * l) / (l * l)
}

/// Exact Ivlev threshold on `a` for `a_ii^2 > -a_1i a_i,q`, obtained by
/// substituting the Ivlev entries `a_ii = -(m-d) L`, `a_1i = -d + (m-d) L`,
/// `a_i,q = (m-d)/a` with `L = ln x`: `(x - 1 - ln x) / ln(x)^2`.
///
/// Increasing on `x > 1`, tends to `1/2` as `x -> 1+`.
pub fn ivlev_direct_bound_of_ratio(x: f64) -> f64 {
    let e = x - 1.0;
    let l = e.ln_1p();
    (e - l) / (l * l)
}

pub fn ivlev_direct_bound(m: f64, d: f64) -> f64 {
    let e = d / (m - d);
    let l = -(-d / m).ln_1p();
    (e - l) / (l * l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyFlag {
    pub kind: ResponseKind,
    pub a: f64,
    /// Holling: 1. Ivlev: the closed-form bound [`ivlev_bound`].
    pub bound: f64,
    /// `a > bound`.
    pub above_bound: bool,
    /// Ivlev only: the uniform flag `a > 1/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub above_half: Option<bool>,
    /// The exact threshold on `a` implied by the Jacobian entries.
    pub direct_bound: f64,
    /// `a_ii^2 > -a_1i a_i,q` evaluated directly from the entries.
    pub direct: bool,
}

/// Per-predator half-saturation thresholds (r-strategist vs K-strategist).
///
/// The entries used by the direct check depend only on `(m, a, d)`, not on
/// `r` or `K`.
pub fn check_strategy_threshold(params: &ModelParams) -> Result<Vec<StrategyFlag>> {
    params
        .predators
        .iter()
        .map(|p| {
            let resp = p.response;
            let u = resp.equilibrium_ratio(p.d)?;
            let dp = resp.derivative_unchecked(u);
            let diag = u * dp;
            let row = -p.d - u * dp;
            let col = -u * u * dp;
            let direct = diag * diag > -row * col;
            Ok(match resp.kind {
                ResponseKind::Holling => StrategyFlag {
                    kind: resp.kind,
                    a: resp.a,
                    bound: 1.0,
                    above_bound: resp.a > 1.0,
                    above_half: None,
                    direct_bound: 1.0,
                    direct,
                },
                ResponseKind::Ivlev => {
                    let bound = ivlev_bound(resp.m, p.d);
                    StrategyFlag {
                        kind: resp.kind,
                        a: resp.a,
                        bound,
                        above_bound: resp.a > bound,
                        above_half: Some(resp.a > 0.5),
                        direct_bound: ivlev_direct_bound(resp.m, p.d),
                        direct,
                    }
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize;
    use crate::model::{FunctionalResponse, GrowthLaw, Predator};
    use crate::presets;

    fn jac(r: f64) -> JacobianPair {
        linearize(&presets::holling_two_predator(r, Some(1.0)))
            .unwrap()
            .1
    }

    #[test]
    fn sign_stability_boundary_at_eight() {
        assert!(check_sign_stability(&jac(8.0)).holds);
        let below = check_sign_stability(&jac(7.9));
        assert!(!below.a11_nonpositive);
        assert!(below.derivative_negative.iter().all(|&b| b));
        assert!(below.row_negative.iter().all(|&b| b));
        assert!(!below.holds);
    }

    #[test]
    fn delay_robustness_on_the_example() {
        let at13 = check_main3(&jac(13.0)).unwrap();
        assert!(at13.applicable && at13.holds);
        let at12 = check_main3(&jac(12.0)).unwrap();
        assert!(at12.applicable && !at12.holds);
        let at7 = check_main3(&jac(7.0)).unwrap();
        assert!(!at7.applicable);
        assert!(at7.reason.unwrap().contains("a11"));
    }

    #[test]
    fn allee_zone_by_sign() {
        assert_eq!(AlleeZone::from_a11(jac(7.0).labels.a11), AlleeZone::Inside);
        assert_eq!(
            AlleeZone::from_a11(jac(8.0).labels.a11),
            AlleeZone::Boundary
        );
        assert_eq!(
            AlleeZone::from_a11(jac(13.0).labels.a11),
            AlleeZone::Outside
        );
    }

    #[test]
    fn holling_threshold_and_boundary_identity() {
        let flags = check_strategy_threshold(&presets::holling_two_predator(13.0, None)).unwrap();
        assert!(flags.iter().all(|f| f.above_bound && f.direct));

        // a = 1: a_ii^2 = (d(m-d)/m)^2 equals (d^2/m)((m-d)^2/(a m)).
        let (m, d) = (16.0_f64, 8.0_f64);
        let diag = -d * (m - d) / m;
        let rhs = (d * d / m) * ((m - d) * (m - d) / m);
        assert!((diag * diag - rhs).abs() <= 1e-12 * rhs);
    }

    fn ivlev_params(a: f64) -> ModelParams {
        ModelParams::new(
            30.0,
            GrowthLaw::logistic(1.0),
            vec![Predator::new(FunctionalResponse::ivlev(16.0, a), 8.0)],
            None,
        )
        .unwrap()
    }

    #[test]
    fn ivlev_closed_form_bound_value() {
        let ln2 = std::f64::consts::LN_2;
        let b = ivlev_bound(16.0, 8.0);
        assert!((b - (0.5 - 0.5 * ln2) / (ln2 * ln2)).abs() < 1e-14);
        assert!((b - 0.3193).abs() < 1e-4);
        assert!((ivlev_bound_of_ratio(2.0) - b).abs() < 1e-14);
        let f = &check_strategy_threshold(&ivlev_params(0.35)).unwrap()[0];
        assert!(f.above_bound);
        assert_eq!(f.above_half, Some(false));
        let f = &check_strategy_threshold(&ivlev_params(0.30)).unwrap()[0];
        assert!(!f.above_bound);
    }

    #[test]
    fn ivlev_direct_bound_matches_entry_check() {
        let t = ivlev_direct_bound(16.0, 8.0);
        assert!((t - ivlev_direct_bound_of_ratio(2.0)).abs() < 1e-14);
        assert!((t - 2.0 * ivlev_bound(16.0, 8.0)).abs() < 1e-14);
        for a in [t * 0.99, t * 1.01] {
            let f = &check_strategy_threshold(&ivlev_params(a)).unwrap()[0];
            assert_eq!(f.direct, a > t, "a = {a}");
        }
    }

    #[test]
    fn closed_form_bound_is_decreasing_towards_half() {
        let mut prev = 0.5;
        for k in 1..400 {
            let x = 1.0 + 1e-3 * 1.03_f64.powi(k);
            let b = ivlev_bound_of_ratio(x);
            assert!(b < prev, "x = {x}: {b} >= {prev}");
            prev = b;
        }
        assert!((ivlev_bound_of_ratio(1.0 + 1e-4) - 0.5).abs() < 1e-4);
    }
}
