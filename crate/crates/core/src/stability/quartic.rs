//! Quartic characteristic polynomial of `A_d` (n = 2), its Routh-Hurwitz
//! test, and the Hurwitz expression as a cubic in the memory rate.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::poly::char_poly;
use crate::error::{Error, Result};
use crate::linearize::JacobianPair;

/// `D(lambda) = lambda^4 + a3 lambda^3 + a2 lambda^2 + a1 lambda + a0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
}

impl QuarticCoeffs {
    /// `a3 (a1 a2 - a0 a3) - a1^2`.
    pub fn hurwitz_expression(&self) -> f64 {
        let Self { a3, a2, a1, a0 } = *self;
        a3 * (a1 * a2 - a0 * a3) - a1 * a1
    }

    /// Squared frequency of a purely imaginary root pair, `a1 / a3`.
    pub fn imaginary_frequency_sq(&self) -> f64 {
        self.a1 / self.a3
    }

    pub fn polynomial(&self) -> super::Polynomial {
        super::Polynomial::new(vec![self.a0, self.a1, self.a2, self.a3, 1.0])
    }
}

fn require_two(jac: &JacobianPair) -> Result<()> {
    if jac.n() == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension {
            expected: 2,
            got: jac.n(),
        })
    }
}

/// Coefficients of the monic characteristic polynomial of `A_d`.
pub fn quartic_coeffs(jac: &JacobianPair) -> Result<QuarticCoeffs> {
    require_two(jac)?;
    let a_d = jac.a_d.as_ref().ok_or(Error::MissingAlpha)?;
    let p = char_poly(a_d)?.monic();
    let c = p.coeffs();
    if c.len() != 5 {
        return Err(Error::Numeric(format!(
            "characteristic polynomial of a 4x4 matrix has degree {}",
            p.degree()
        )));
    }
    Ok(QuarticCoeffs {
        a3: c[3],
        a2: c[2],
        a1: c[1],
        a0: c[0],
    })
}

/// [`quartic_coeffs`] for the same entries at another memory rate.
pub fn quartic_coeffs_at(jac: &JacobianPair, alpha: f64) -> Result<QuarticCoeffs> {
    quartic_coeffs(&jac.with_alpha(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurwitzFlags {
    /// All of `a3, a2, a1, a0` positive.
    pub necessary: bool,
    /// `necessary` and `a3 (a1 a2 - a0 a3) - a1^2 > 0`: every root has a
    /// negative real part.
    pub sufficient: bool,
    pub h: f64,
}

pub fn hurwitz_quartic(c: &QuarticCoeffs) -> HurwitzFlags {
    let necessary = c.a3 > 0.0 && c.a2 > 0.0 && c.a1 > 0.0 && c.a0 > 0.0;
    let h = c.hurwitz_expression();
    HurwitzFlags {
        necessary,
        sufficient: necessary && h > 0.0,
        h,
    }
}

/// `H(alpha) = A3t alpha^3 + A2t alpha^2 + A1t alpha + A0t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HCubic {
    #[serde(rename = "A3t")]
    pub a3t: f64,
    #[serde(rename = "A2t")]
    pub a2t: f64,
    #[serde(rename = "A1t")]
    pub a1t: f64,
    #[serde(rename = "A0t")]
    pub a0t: f64,
}

impl HCubic {
    pub fn eval(&self, alpha: f64) -> f64 {
        ((self.a3t * alpha + self.a2t) * alpha + self.a1t) * alpha + self.a0t
    }

    /// Sum of the absolute values of the terms at `alpha`.
    pub fn scale(&self, alpha: f64) -> f64 {
        let a = alpha.abs();
        ((self.a3t.abs() * a + self.a2t.abs()) * a + self.a1t.abs()) * a + self.a0t.abs()
    }
}

/// Coefficients of `H` in closed form from the Jacobian entries.
///
/// The quartic coefficients are affine in `alpha`:
/// `a3 = s + alpha`, `a2 = e2 + s alpha`, `a1 = -e3 + w alpha`, `a0 = g alpha`
/// with `s = -tr`, `e2`, `e3` the elementary symmetric functions of the
/// diagonal, `w = e2 - a12 a24 - a13 a34` and
/// `g = -e3 + a22 a13 a34 + a33 a12 a24`. Expanding `H` and regrouping the
/// extreme coefficients gives
///
/// ```text
/// A0t = e3 (a11 + a22)(a22 + a33)(a33 + a11)
/// A3t = -(a11 + a22)(a22 + a33)(a33 + a11)
///       + a12 a24 (a11 + a22) + a13 a34 (a11 + a33)
/// ```
///
/// which are products and sums of one-signed terms under the delayed sign
/// pattern, so their signs survive round-off whatever the magnitudes.
pub fn h_cubic(jac: &JacobianPair) -> Result<HCubic> {
    require_two(jac)?;
    let l = &jac.labels;
    let (a11, a22, a33) = (l.a11, l.a_diag[0], l.a_diag[1]);
    let (c2, c3) = (l.a_row[0] * l.a_col[0], l.a_row[1] * l.a_col[1]);
    let s = -(a11 + a22 + a33);
    let e2 = a11 * a22 + a11 * a33 + a22 * a33;
    let e3 = a11 * a22 * a33;
    let w = e2 - c2 - c3;
    let g = -e3 + a22 * c3 + a33 * c2;
    let pairs = (a11 + a22) * (a22 + a33) * (a33 + a11);
    Ok(HCubic {
        a0t: e3 * pairs,
        a1t: s * w * e2 - s * s * e3 - e2 * e3 - g * s * s + 2.0 * e3 * w,
        a2t: s * s * w + w * e2 - s * e3 - 2.0 * g * s - w * w,
        a3t: -pairs + c2 * (a11 + a22) + c3 * (a11 + a33),
    })
}

/// `H` recovered by sampling the Hurwitz expression at four memory rates
/// and solving the Vandermonde system. Kept as an independent check on
/// [`h_cubic`].
pub fn h_cubic_interpolated(jac: &JacobianPair) -> Result<HCubic> {
    require_two(jac)?;
    let mut v = Matrix4::zeros();
    let mut h = Vector4::zeros();
    for (i, &alpha) in [1.0f64, 2.0, 3.0, 4.0].iter().enumerate() {
        for j in 0..4 {
            v[(i, j)] = alpha.powi(j as i32);
        }
        h[i] = quartic_coeffs_at(jac, alpha)?.hurwitz_expression();
    }
    let c = v
        .lu()
        .solve(&h)
        .ok_or_else(|| Error::Numeric("singular interpolation system".into()))?;
    Ok(HCubic {
        a0t: c[0],
        a1t: c[1],
        a2t: c[2],
        a3t: c[3],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize;
    use crate::presets;

    fn jac(r: f64, alpha: f64) -> JacobianPair {
        linearize(&presets::holling_two_predator(r, Some(alpha)))
            .unwrap()
            .1
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn example_coefficients() {
        let c = quartic_coeffs(&jac(13.0, 1.0)).unwrap();
        for (got, want) in [(c.a3, 14.0), (c.a2, 69.0), (c.a1, 148.0), (c.a0, 128.0)] {
            assert!(close(got, want, 1e-12), "{c:?}");
        }
        let c = quartic_coeffs(&jac(7.0, 1.0)).unwrap();
        for (got, want) in [(c.a3, 8.0), (c.a2, 15.0), (c.a1, 4.0), (c.a0, 32.0)] {
            assert!(close(got, want, 1e-12), "{c:?}");
        }
    }

    #[test]
    fn constant_term_is_sixteen_alpha_r_minus_five() {
        for r in [5.5, 7.0, 9.0, 13.0] {
            for alpha in [0.2, 1.0, 10.0] {
                let c = quartic_coeffs(&jac(r, alpha)).unwrap();
                assert!(close(c.a0, 16.0 * alpha * (r - 5.0), 1e-12));
            }
        }
    }

    #[test]
    fn hurwitz_hand_cases() {
        let ok = hurwitz_quartic(&QuarticCoeffs {
            a3: 14.0,
            a2: 69.0,
            a1: 148.0,
            a0: 128.0,
        });
        assert!(ok.necessary && ok.sufficient);
        assert_eq!(ok.h, 95976.0);

        let bad = hurwitz_quartic(&QuarticCoeffs {
            a3: 8.0,
            a2: 15.0,
            a1: 4.0,
            a0: 32.0,
        });
        assert!(bad.necessary && !bad.sufficient);
        assert_eq!(bad.h, -1584.0);

        let unit = hurwitz_quartic(&QuarticCoeffs {
            a3: 1.0,
            a2: 1.0,
            a1: 1.0,
            a0: 1.0,
        });
        assert!(!unit.sufficient);
    }

    #[test]
    fn cubic_reproduces_direct_evaluation() {
        let j = jac(13.0, 1.0);
        let h = h_cubic(&j).unwrap();
        assert!(close(h.eval(1.0), 95976.0, 1e-9));
        let direct = quartic_coeffs_at(&j, 5.0).unwrap().hurwitz_expression();
        assert!(close(h.eval(5.0), direct, 1e-9));

        let h7 = h_cubic(&jac(7.0, 1.0)).unwrap();
        assert!(close(h7.eval(1.0), -1584.0, 1e-9));
        assert!(close(h7.eval(10.0), 117648.0, 1e-9));
    }

    #[test]
    fn closed_form_matches_interpolation() {
        let mut rng = crate::sample::rng(3);
        for _ in 0..500 {
            let l =
                crate::sample::pattern_labels(&mut rng, 2, crate::sample::PreyDiagonal::Negative);
            let j = JacobianPair::from_labels(l, None);
            let (a, b) = (h_cubic(&j).unwrap(), h_cubic_interpolated(&j).unwrap());
            for alpha in [0.5, 1.0, 7.0] {
                let tol = 1e-8 * a.scale(alpha);
                assert!(
                    (a.eval(alpha) - b.eval(alpha)).abs() <= tol,
                    "{a:?} vs {b:?}"
                );
            }
        }
    }

    #[test]
    fn unsupported_dimension() {
        use crate::model::{FunctionalResponse, GrowthLaw, ModelParams, Predator};
        let p = ModelParams::new(
            3.0,
            GrowthLaw::logistic(1.0),
            vec![Predator::new(FunctionalResponse::holling(2.0, 1.0), 1.0)],
            Some(1.0),
        )
        .unwrap();
        let (_, j) = linearize(&p).unwrap();
        assert!(matches!(
            quartic_coeffs(&j),
            Err(Error::UnsupportedDimension {
                expected: 2,
                got: 1
            })
        ));
        assert!(h_cubic(&j).is_err());
    }
}
