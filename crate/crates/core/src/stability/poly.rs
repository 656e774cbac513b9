//! Real polynomials and characteristic polynomials of real matrices.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest matrix accepted by [`char_poly`].
pub const MAX_CHAR_POLY_DIM: usize = 64;

/// Real polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, dropping leading coefficients that are below
    /// `1e-14` of the largest one.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= 1e-14 * max) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// Exact construction, no trimming.
    pub(crate) fn raw(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self::raw(vec![c])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Self::raw(vec![c0, c1])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `sum |c_k| |z|^k`, the natural scale for residuals at `z`.
    pub fn magnitude_at(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * r + c.abs())
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        Polynomial::raw(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::raw(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Divides by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        self.scale(1.0 / self.leading())
    }

    /// Product of `(c_i - x)` over the given values.
    pub fn product_of_shifted(values: &[f64]) -> Polynomial {
        values.iter().fold(Polynomial::constant(1.0), |acc, &c| {
            &acc * &Polynomial::linear(c, -1.0)
        })
    }

    /// Largest coefficient-wise relative difference, each difference scaled
    /// by the larger of the two coefficients (and by `floor` when both are
    /// tiny).
    pub fn max_rel_diff(&self, other: &Polynomial, floor: f64) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(0.0);
                let b = other.coeffs.get(k).copied().unwrap_or(0.0);
                (a - b).abs() / a.abs().max(b.abs()).max(floor)
            })
            .fold(0.0, f64::max)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::raw(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::raw(out)
    }
}

/// `det(M - lambda E)` as a polynomial in `lambda`, leading coefficient
/// `(-1)^dim`. Use [`Polynomial::monic`] for `det(lambda E - M)`.
///
/// `M` is reduced to upper Hessenberg form by orthogonal similarity, then
/// the determinant is expanded with the Hessenberg recurrence
///
/// `p_k = (h_kk - lambda) p_{k-1} + sum_{i<k} (-1)^{k-i} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_{i-1}`.
pub fn char_poly(m: &DMatrix<f64>) -> Result<Polynomial> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Domain(format!(
            "characteristic polynomial needs a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if n > MAX_CHAR_POLY_DIM {
        return Err(Error::Domain(format!(
            "matrix dimension {n} exceeds {MAX_CHAR_POLY_DIM}"
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let h = if n > 2 {
        m.clone().hessenberg().h()
    } else {
        m.clone()
    };

    // p[k] = det of the leading k x k block of (H - lambda E).
    let mut p: Vec<Polynomial> = Vec::with_capacity(n + 1);
    p.push(Polynomial::constant(1.0));
    for k in 0..n {
        let mut next = &Polynomial::linear(h[(k, k)], -1.0) * &p[k];
        let mut sub = 1.0;
        for i in (0..k).rev() {
            // Each step further from the diagonal flips the cofactor sign.
            sub *= -h[(i + 1, i)];
            if sub == 0.0 {
                break;
            }
            next = &next + &p[i].scale(h[(i, k)] * sub);
        }
        p.push(next);
    }
    Ok(Polynomial::raw(p.pop().unwrap().coeffs))
}
