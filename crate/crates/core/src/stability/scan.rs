//! Scans over the memory rate for stability switches.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::{eigenvalues, spectral_abscissa, Stability};
use super::quartic::{h_cubic, quartic_coeffs_at, HCubic};
use crate::error::{Error, Result};
use crate::linearize::{linearize, JacobianPair};
use crate::model::ModelParams;

/// A root of `H(alpha)`: a candidate Hopf point where a root pair of the
/// quartic crosses the imaginary axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchPoint {
    pub alpha: f64,
    pub h: f64,
    /// `a1 / a3` at the switch.
    pub a1_over_a3: f64,
    /// `sqrt(a1 / a3)` when positive.
    pub omega: Option<f64>,
    /// Eigenvalue of `A_d` nearest to `i omega`.
    pub nearest_eigenvalue: Option<Complex64>,
    /// Stability just below and just above the switch on the scan grid.
    pub stability_before: Stability,
    pub stability_after: Stability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaScan {
    pub cubic: HCubic,
    pub alphas: Vec<f64>,
    pub h_values: Vec<f64>,
    pub abscissae: Vec<f64>,
    pub stability: Vec<Stability>,
    pub switch_points: Vec<SwitchPoint>,
}

impl AlphaScan {
    /// CSV with columns `alpha,H,abscissa,stable`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
        w.write_record(["alpha", "H", "abscissa", "stable"])
            .map_err(io)?;
        for i in 0..self.alphas.len() {
            w.write_record([
                self.alphas[i].to_string(),
                self.h_values[i].to_string(),
                self.abscissae[i].to_string(),
                self.stability[i].is_stable().to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == points - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Bisection on a bracketing interval until it stops shrinking.
fn refine_root(h: &HCubic, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = h.eval(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = h.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if h.eval(lo).abs() <= h.eval(hi).abs() {
        lo
    } else {
        hi
    }
}

fn switch_at(jac: &JacobianPair, cubic: &HCubic, alpha: f64) -> Result<SwitchPoint> {
    let c = quartic_coeffs_at(jac, alpha)?;
    let ratio = c.imaginary_frequency_sq();
    let omega = (ratio > 0.0).then(|| ratio.sqrt());
    let nearest = match omega {
        Some(w) => {
            let target = Complex64::new(0.0, w);
            eigenvalues(&jac.labels.delayed_matrix(alpha))?
                .into_iter()
                .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        }
        None => None,
    };
    Ok(SwitchPoint {
        alpha,
        h: cubic.eval(alpha),
        a1_over_a3: ratio,
        omega,
        nearest_eigenvalue: nearest,
        stability_before: Stability::Marginal,
        stability_after: Stability::Marginal,
    })
}

/// Evaluates `H(alpha)` and the spectral abscissa of `A_d(alpha)` on a log
/// grid over `[lo, hi]`, then brackets and refines every sign change of `H`.
pub fn alpha_scan(params: &ModelParams, lo: f64, hi: f64, points: usize) -> Result<AlphaScan> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if points < 2 {
        return Err(Error::Domain("alpha scan needs at least 2 points".into()));
    }
    let (_, jac) = linearize(params)?;
    let cubic = h_cubic(&jac)?;
    let alphas = log_grid(lo, hi, points);
    let mut h_values = Vec::with_capacity(points);
    let mut abscissae = Vec::with_capacity(points);
    let mut stability = Vec::with_capacity(points);
    for &alpha in &alphas {
        h_values.push(cubic.eval(alpha));
        let s = spectral_abscissa(&eigenvalues(&jac.labels.delayed_matrix(alpha))?);
        abscissae.push(s);
        stability.push(Stability::from_abscissa(s));
    }

    let mut switch_points = Vec::new();
    for i in 0..points - 1 {
        let (h0, h1) = (h_values[i], h_values[i + 1]);
        let root = if h0 == 0.0 {
            Some(alphas[i])
        } else if h0 * h1 < 0.0 {
            Some(refine_root(&cubic, alphas[i], alphas[i + 1]))
        } else {
            None
        };
        if let Some(alpha) = root {
            let mut sp = switch_at(&jac, &cubic, alpha)?;
            sp.stability_before = stability[i];
            sp.stability_after = stability[i + 1];
            switch_points.push(sp);
        }
    }
    if h_values[points - 1] == 0.0 {
        let mut sp = switch_at(&jac, &cubic, alphas[points - 1])?;
        sp.stability_before = stability[points - 1];
        sp.stability_after = stability[points - 1];
        switch_points.push(sp);
    }

    Ok(AlphaScan {
        cubic,
        alphas,
        h_values,
        abscissae,
        stability,
        switch_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn grid_endpoints() {
        let g = log_grid(0.01, 100.0, 5);
        assert_eq!(g.len(), 5);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[4], 100.0);
        assert!((g[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn robust_example_has_no_switch() {
        let scan = alpha_scan(&presets::holling_two_predator(13.0, None), 0.01, 100.0, 50).unwrap();
        assert!(scan.switch_points.is_empty());
        assert!(scan.stability.iter().all(|s| s.is_stable()));
        assert!(scan.h_values.iter().all(|&h| h > 0.0));
    }

    #[test]
    fn allee_example_switches_between_one_and_ten() {
        let scan = alpha_scan(&presets::holling_two_predator(7.0, None), 0.01, 100.0, 100).unwrap();
        let inside: Vec<_> = scan
            .switch_points
            .iter()
            .filter(|s| s.alpha > 1.0 && s.alpha < 10.0)
            .collect();
        assert!(!inside.is_empty());
        for sp in inside {
            let w = sp.omega.unwrap();
            let z = sp.nearest_eigenvalue.unwrap();
            assert!(z.re.abs() < 1e-6, "{sp:?}");
            assert!((z.im - w).abs() < 1e-6, "{sp:?}");
            assert!(sp.h.abs() < 1e-9 * scan.cubic.scale(sp.alpha));
        }
        let csv = scan.to_csv().unwrap();
        assert!(csv.starts_with("alpha,H,abscissa,stable\n"));
        assert_eq!(csv.lines().count(), 101);
    }

    #[test]
    fn bad_ranges() {
        let p = presets::holling_two_predator(13.0, None);
        assert!(alpha_scan(&p, 0.0, 1.0, 10).is_err());
        assert!(alpha_scan(&p, 1.0, 0.5, 10).is_err());
        assert!(alpha_scan(&p, 1.0, 2.0, 1).is_err());
    }
}
