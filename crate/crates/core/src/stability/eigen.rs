//! Eigenvalues of real matrices and roots of real polynomials.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Half-width of the band around zero in which the spectral abscissa is
/// reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn from_abscissa(abscissa: f64) -> Self {
        if abscissa < -MARGINAL_BAND {
            Stability::Stable
        } else if abscissa > MARGINAL_BAND {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn is_stable(self) -> bool {
        self == Stability::Stable
    }
}

fn sort_roots(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All eigenvalues of a square real matrix, via a real Schur decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Domain(
            "eigenvalues need a non-empty square matrix".into(),
        ));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::Numeric(format!(
            "Schur iteration did not converge for a {n}x{n} matrix"
        ))
    })?;
    let mut ev: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    sort_roots(&mut ev);
    Ok(ev)
}

pub fn spectral_abscissa(ev: &[Complex64]) -> f64 {
    ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Parlett-Reinsch diagonal balancing (radix 2) in place.
fn balance(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, rr) = (c, r);
            while cc < rr / 2.0 {
                cc *= 4.0;
                f *= 2.0;
            }
            while cc >= rr * 2.0 {
                cc /= 4.0;
                f /= 2.0;
            }
            if (c * f + r / f) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Taylor coefficient `p^{(j)}(c) / j!` together with the sum of the
/// absolute values of its terms.
fn taylor_coeff(p: &Polynomial, c: Complex64, j: usize) -> (Complex64, f64) {
    let mut val = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    let r = c.norm();
    for (i, &a) in p.coeffs().iter().enumerate().skip(j) {
        let b = binomial(i, j);
        val += a * b * c.powu((i - j) as u32);
        mag += (a * b).abs() * r.powi((i - j) as i32);
    }
    (val, mag)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All roots of `p`, counted with multiplicity.
///
/// Roots come from the eigenvalues of the balanced companion matrix. Simple
/// roots are polished by Newton steps. A tight group of computed roots is
/// replaced by copies of its centroid when the first `k - 1` Taylor
/// coefficients vanish there to rounding level (a `k`-fold root).
/// Fails when a root's residual exceeds `1e-9` of the polynomial's scale.
pub fn roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let deg = p.degree();
    if deg == 0 {
        return Err(Error::Domain("roots of a constant polynomial".into()));
    }
    let monic = p.monic();
    let c = monic.coeffs();
    let mut comp = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i];
    }
    balance(&mut comp);
    let mut z = eigenvalues(&comp)?;

    // Group roots within a loose radius, then test each group.
    let mut group = vec![usize::MAX; deg];
    let mut next = 0;
    for i in 0..deg {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = next;
        let mut stack = vec![i];
        while let Some(a) = stack.pop() {
            for b in 0..deg {
                if group[b] == usize::MAX && (z[a] - z[b]).norm() < 1e-2 * (1.0 + z[a].norm()) {
                    group[b] = next;
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    let dp = monic.derivative();
    for g in 0..next {
        let members: Vec<usize> = (0..deg).filter(|&i| group[i] == g).collect();
        let k = members.len();
        if k == 1 {
            let i = members[0];
            let mut r = z[i];
            for _ in 0..3 {
                let d = dp.eval_complex(r);
                if d.norm() == 0.0 {
                    break;
                }
                let cand = r - monic.eval_complex(r) / d;
                if monic.eval_complex(cand).norm() < monic.eval_complex(r).norm() {
                    r = cand;
                } else {
                    break;
                }
            }
            z[i] = r;
            continue;
        }
        let centroid = members.iter().map(|&i| z[i]).sum::<Complex64>() / k as f64;
        let multiple = (0..k).all(|j| {
            let (v, mag) = taylor_coeff(&monic, centroid, j);
            v.norm() <= 64.0 * f64::EPSILON * mag.max(f64::MIN_POSITIVE)
        });
        if multiple {
            // Real polynomial: a multiple root off the axis pairs with its
            // conjugate, a centroid this close to the axis is real.
            let c = if centroid.im.abs() <= 1e-9 * (1.0 + centroid.re.abs()) {
                Complex64::new(centroid.re, 0.0)
            } else {
                centroid
            };
            for &i in &members {
                z[i] = c;
            }
        }
    }

    for r in &z {
        let res = monic.eval_complex(*r).norm();
        let scale = monic.magnitude_at(*r);
        if !(res <= 1e-9 * scale) {
            return Err(Error::Numeric(format!(
                "root {r} has residual {res:e} (scale {scale:e})"
            )));
        }
    }
    sort_roots(&mut z);
    Ok(z)
}

/// Groups roots closer than `tol * (1 + |z|)` and reports each group's mean
/// with its size.
pub fn cluster(roots: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize, Complex64)> = Vec::new();
    for &z in roots {
        match out
            .iter_mut()
            .find(|(c, _, _)| (*c - z).norm() <= tol * (1.0 + z.norm()))
        {
            Some((c, k, sum)) => {
                *k += 1;
                *sum += z;
                *c = *sum / *k as f64;
            }
            None => out.push((z, 1, z)),
        }
    }
    out.into_iter().map(|(c, k, _)| (c, k)).collect()
}
