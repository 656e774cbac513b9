//! Characteristic polynomial of `A_d` for any number of predators, assembled
//! from that of `A` through a Schur-complement factorisation:
//!
//! `det(A_d - lambda E) = -(alpha det(A - lambda E) + lambda prod_i (a_ii - lambda))`
//!
//! where the product runs over the whole diagonal of `A`.

use serde::{Deserialize, Serialize};

use super::eigen::{eigenvalues, spectral_abscissa, Stability};
use super::poly::{char_poly, Polynomial};
use crate::error::{Error, Result};
use crate::linearize::JacobianPair;

pub fn char_poly_delayed_schur(jac: &JacobianPair) -> Result<Polynomial> {
    let alpha = jac.alpha.ok_or(Error::MissingAlpha)?;
    char_poly_delayed_schur_at(jac, alpha)
}

pub fn char_poly_delayed_schur_at(jac: &JacobianPair, alpha: f64) -> Result<Polynomial> {
    let pa = char_poly(&jac.a)?;
    let diag: Vec<f64> = jac.a.diagonal().iter().copied().collect();
    let lambda_prod = &Polynomial::linear(0.0, 1.0) * &Polynomial::product_of_shifted(&diag);
    Ok(-&(&pa.scale(alpha) + &lambda_prod))
}

/// True when every coefficient is nonzero and all share one sign.
pub fn coefficients_one_signed(p: &Polynomial) -> bool {
    let c = p.coeffs();
    c.iter().all(|&v| v > 0.0) || c.iter().all(|&v| v < 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCertificate {
    pub alpha: f64,
    pub coefficients_one_signed: bool,
    pub spectral_abscissa: f64,
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralNReport {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small: Option<AlphaCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub large: Option<AlphaCertificate>,
}

fn certify(jac: &JacobianPair, alpha: f64) -> Result<AlphaCertificate> {
    let p = char_poly_delayed_schur_at(jac, alpha)?;
    let ev = eigenvalues(&jac.labels.delayed_matrix(alpha))?;
    let abscissa = spectral_abscissa(&ev);
    Ok(AlphaCertificate {
        alpha,
        coefficients_one_signed: coefficients_one_signed(&p),
        spectral_abscissa: abscissa,
        stability: Stability::from_abscissa(abscissa),
    })
}

/// Checks, for arbitrary `n`, that the characteristic coefficients of `A_d`
/// are one-signed and certifies stability at the two supplied memory rates.
///
/// Requires `a11 < 0` and, for every predator, `u p' < 0` and
/// `-d - u p' < 0`; otherwise the report is marked inapplicable.
pub fn classify_general_n(
    jac: &JacobianPair,
    alpha_small: f64,
    alpha_large: f64,
) -> Result<GeneralNReport> {
    let l = &jac.labels;
    let reason = if !(l.a11 < 0.0) {
        Some(format!("a11 = {} is not negative", l.a11))
    } else if l.a_diag.iter().any(|&v| !(v < 0.0)) {
        Some("a predator has p'(u*) >= 0".to_string())
    } else if l.a_row.iter().any(|&v| !(v < 0.0)) {
        Some("a predator has -d - u* p'(u*) >= 0".to_string())
    } else {
        None
    };
    if let Some(reason) = reason {
        return Ok(GeneralNReport {
            applicable: false,
            reason: Some(reason),
            small: None,
            large: None,
        });
    }
    for a in [alpha_small, alpha_large] {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive, got {a}")));
        }
    }
    Ok(GeneralNReport {
        applicable: true,
        reason: None,
        small: Some(certify(jac, alpha_small)?),
        large: Some(certify(jac, alpha_large)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize;
    use crate::presets;

    #[test]
    fn example_identity_matches_factored_form() {
        let (r, alpha) = (13.0, 1.0);
        let (_, jac) = linearize(&presets::holling_two_predator(r, Some(alpha))).unwrap();
        let got = char_poly_delayed_schur(&jac).unwrap();
        // (-4 - l)((8 - r - l)(-4 - l)(-alpha - l) - 12 alpha)
        let lin = |c: f64| Polynomial::linear(c, -1.0);
        let inner =
            &(&(&lin(8.0 - r) * &lin(-4.0)) * &lin(-alpha)) - &Polynomial::constant(12.0 * alpha);
        let want = &lin(-4.0) * &inner;
        assert!(got.max_rel_diff(&want, 1.0) < 1e-12, "{got:?}");
    }

    #[test]
    fn zero_alpha_limit() {
        let (_, jac) = linearize(&presets::holling_two_predator(9.0, Some(1.0))).unwrap();
        let p = char_poly_delayed_schur_at(&jac, 0.0).unwrap();
        let diag: Vec<f64> = jac.a.diagonal().iter().copied().collect();
        let want = -&(&Polynomial::linear(0.0, 1.0) * &Polynomial::product_of_shifted(&diag));
        assert!(p.max_rel_diff(&want, 1.0) < 1e-14);
    }

    #[test]
    fn example_stable_at_both_ends() {
        let (_, jac) = linearize(&presets::holling_two_predator(13.0, Some(1.0))).unwrap();
        let rep = classify_general_n(&jac, 1e-3, 1e3).unwrap();
        assert!(rep.applicable);
        for c in [rep.small.unwrap(), rep.large.unwrap()] {
            assert!(c.coefficients_one_signed);
            assert_eq!(c.stability, Stability::Stable);
        }
    }

    #[test]
    fn inapplicable_inside_allee_zone() {
        let (_, jac) = linearize(&presets::holling_two_predator(7.0, Some(1.0))).unwrap();
        let rep = classify_general_n(&jac, 1e-3, 1e3).unwrap();
        assert!(!rep.applicable);
        assert!(rep.small.is_none());
    }
}
