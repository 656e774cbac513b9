//! Independent brute-force cross-checks, and the `verify` suite that runs
//! them against the production code.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linearize::{linearize, rows, JacobianLabels, JacobianPair};
use crate::model::{ModelParams, ResponseKind, State};
use crate::presets;
use crate::sample::{self, PreyDiagonal};
use crate::stability::{
    char_poly, char_poly_delayed_schur, eigenvalues, h_cubic, hurwitz_quartic, quartic_coeffs,
    spectral_abscissa, Polynomial, QuarticCoeffs, Stability,
};

pub const MAX_BRUTEFORCE_DIM: usize = 8;

/// `det(M - lambda E)` by Laplace expansion along the first row, with
/// polynomial entries. Exponential cost; refuses dimensions above 8.
pub fn charpoly_bruteforce(m: &DMatrix<f64>) -> Result<Polynomial> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Domain("need a non-empty square matrix".into()));
    }
    if n > MAX_BRUTEFORCE_DIM {
        return Err(Error::Domain(format!(
            "cofactor expansion refuses dimension {n} > {MAX_BRUTEFORCE_DIM}"
        )));
    }
    let entries: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Polynomial::linear(m[(i, j)], -1.0)
                    } else {
                        Polynomial::constant(m[(i, j)])
                    }
                })
                .collect()
        })
        .collect();
    let cols: Vec<usize> = (0..n).collect();
    Ok(Polynomial::new(
        laplace(&entries, 0, &cols).coeffs().to_vec(),
    ))
}

fn laplace(e: &[Vec<Polynomial>], row: usize, cols: &[usize]) -> Polynomial {
    if cols.len() == 1 {
        return e[row][cols[0]].clone();
    }
    let mut acc = Polynomial::constant(0.0);
    for (k, &c) in cols.iter().enumerate() {
        if e[row][c].coeffs().iter().all(|&v| v == 0.0) {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = &e[row][c] * &laplace(e, row + 1, &rest);
        acc = if k % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// The four quartic coefficients as expanded closed forms in the
/// entries `a11, a22 = a_diag[0], a33 = a_diag[1], a12 = a_row[0],
/// a13 = a_row[1], a24 = a_col[0], a34 = a_col[1]`.
pub fn printed_quartic_formulas(l: &JacobianLabels, alpha: f64) -> Result<QuarticCoeffs> {
    if l.n() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            got: l.n(),
        });
    }
    let (a11, a22, a33) = (l.a11, l.a_diag[0], l.a_diag[1]);
    let (a12, a13, a24, a34) = (l.a_row[0], l.a_row[1], l.a_col[0], l.a_col[1]);
    Ok(QuarticCoeffs {
        a3: -a11 - a22 - a33 + alpha,
        a2: a11 * a22 + a11 * a33 + a22 * a33 - alpha * (a11 + a22 + a33),
        a1: -a11 * a22 * a33 + alpha * (a11 * a22 + a11 * a33 + a22 * a33)
            - alpha * (a12 * a24 + a13 * a34),
        a0: alpha * (-a11 * a22 * a33 + a22 * a13 * a34 + a33 * a12 * a24),
    })
}

/// Central differences of an arbitrary vector field, with step `h`
/// relative to each component (absolute for zero components).
pub fn finite_difference(f: impl Fn(&[f64], &mut [f64]), z: &[f64], h: f64) -> DMatrix<f64> {
    let n = z.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut zp = z.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let step = if z[j] == 0.0 { h } else { h * z[j].abs() };
        zp[j] = z[j] + step;
        f(&zp, &mut fp);
        zp[j] = z[j] - step;
        f(&zp, &mut fm);
        zp[j] = z[j];
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    jac
}

/// Central-difference Jacobian of the model right-hand side at `point`:
/// the memory system when `point` carries `q`, otherwise the system
/// without memory.
pub fn finite_difference_jacobian(
    params: &ModelParams,
    point: &State,
    h: f64,
) -> Result<DMatrix<f64>> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::Domain(format!(
            "step h must lie in [1e-8, 1e-4], got {h}"
        )));
    }
    point.check_positive()?;
    let z = point.to_vec();
    if point.q.is_some() {
        params.alpha.ok_or(Error::MissingAlpha)?;
        Ok(finite_difference(
            |z, o| params.rhs_delayed_into(z, o),
            &z,
            h,
        ))
    } else {
        Ok(finite_difference(
            |z, o| params.rhs_undelayed_into(z, o),
            &z,
            h,
        ))
    }
}

/// Classification by the eigenvalues of `M`, computed through the roots of
/// its characteristic polynomial (cofactor expansion for small matrices).
pub fn eigen_stability_oracle(m: &DMatrix<f64>) -> Result<Stability> {
    let p = if m.nrows() <= MAX_BRUTEFORCE_DIM {
        charpoly_bruteforce(m)?
    } else {
        char_poly(m)?
    };
    let z = crate::stability::roots(&p)?;
    Ok(Stability::from_abscissa(spectral_abscissa(&z)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub cases: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Threshold on `max_rel_error`.
    pub tolerance: f64,
    pub passed: bool,
    /// Input of the case with the largest relative error.
    pub worst_case: Value,
}

struct Tracker {
    name: String,
    tolerance: f64,
    cases: usize,
    max_abs: f64,
    max_rel: f64,
    worst: Value,
}

impl Tracker {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            cases: 0,
            max_abs: 0.0,
            max_rel: 0.0,
            worst: Value::Null,
        }
    }

    fn record(&mut self, abs: f64, rel: f64, case: impl FnOnce() -> Value) {
        self.cases += 1;
        self.max_abs = self.max_abs.max(abs);
        // NaN errors count as failures.
        let rel = if rel.is_nan() { f64::INFINITY } else { rel };
        if rel > self.max_rel || self.worst.is_null() {
            self.max_rel = self.max_rel.max(rel);
            self.worst = case();
        }
    }

    fn finish(self) -> OracleReport {
        OracleReport {
            passed: self.max_rel <= self.tolerance,
            name: self.name,
            cases: self.cases,
            max_abs_error: self.max_abs,
            max_rel_error: self.max_rel,
            tolerance: self.tolerance,
            worst_case: self.worst,
        }
    }
}

fn poly_abs_diff(a: &Polynomial, b: &Polynomial) -> f64 {
    let n = a.coeffs().len().max(b.coeffs().len());
    (0..n)
        .map(|k| {
            let x = a.coeffs().get(k).copied().unwrap_or(0.0);
            let y = b.coeffs().get(k).copied().unwrap_or(0.0);
            (x - y).abs()
        })
        .fold(0.0, f64::max)
}

fn quartic_vec(c: &QuarticCoeffs) -> [f64; 4] {
    [c.a3, c.a2, c.a1, c.a0]
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

/// Largest entry difference, scaled by the larger entry (at least 1).
pub fn matrix_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> (f64, f64) {
    a.iter().zip(b.iter()).fold((0.0, 0.0), |(ma, mr), (x, y)| {
        let d = (x - y).abs();
        (
            f64::max(ma, d),
            f64::max(mr, d / x.abs().max(y.abs()).max(1.0)),
        )
    })
}

pub fn check_charpoly(seed: u64, cases: usize) -> OracleReport {
    use rand::Rng;
    let mut rng = sample::rng(seed);
    let mut t = Tracker::new("char_poly vs cofactor expansion (random 6x6)", 1e-9);
    for _ in 0..cases {
        let m = DMatrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        let fast = char_poly(&m);
        let slow = charpoly_bruteforce(&m).expect("6 <= 8");
        let (abs, r) = match &fast {
            Ok(p) => (poly_abs_diff(p, &slow), p.max_rel_diff(&slow, 1.0)),
            Err(_) => (f64::INFINITY, f64::INFINITY),
        };
        t.record(abs, r, || json!({ "matrix": rows(&m) }));
    }
    t.finish()
}

pub fn check_schur_identity(seed: u64, per_n: usize) -> OracleReport {
    let mut rng = sample::rng(seed);
    let mut t = Tracker::new(
        "delayed char poly identity vs cofactor expansion (n = 1..6)",
        1e-9,
    );
    for n in 1..=6 {
        for _ in 0..per_n {
            let labels = sample::pattern_labels(&mut rng, n, PreyDiagonal::NonPositive);
            let alpha = sample::alpha(&mut rng);
            let jac = JacobianPair::from_labels(labels, Some(alpha));
            let ident = char_poly_delayed_schur(&jac).expect("alpha present");
            let brute =
                charpoly_bruteforce(jac.a_d.as_ref().expect("alpha present")).expect("n + 2 <= 8");
            t.record(
                poly_abs_diff(&ident, &brute),
                ident.max_rel_diff(&brute, 1.0),
                || json!({ "labels": jac.labels, "alpha": alpha }),
            );
        }
    }
    t.finish()
}

pub fn check_printed_quartic(seed: u64, cases: usize) -> OracleReport {
    let mut rng = sample::rng(seed);
    let mut t = Tracker::new("quartic coefficients vs expanded closed forms", 1e-9);
    for _ in 0..cases {
        let labels = sample::pattern_labels(&mut rng, 2, PreyDiagonal::NonPositive);
        let alpha = sample::alpha(&mut rng);
        let jac = JacobianPair::from_labels(labels, Some(alpha));
        let got = quartic_coeffs(&jac).map(|c| quartic_vec(&c));
        let want = quartic_vec(&printed_quartic_formulas(&jac.labels, alpha).expect("n = 2"));
        let (abs, r) = match got {
            Ok(g) => g.iter().zip(&want).fold((0.0, 0.0), |(a, b), (x, y)| {
                (
                    f64::max(a, (x - y).abs()),
                    f64::max(b, (x - y).abs() / x.abs().max(y.abs()).max(1.0)),
                )
            }),
            Err(_) => (f64::INFINITY, f64::INFINITY),
        };
        t.record(abs, r, || json!({ "labels": jac.labels, "alpha": alpha }));
    }
    t.finish()
}

pub fn check_constant_term_is_determinant(seed: u64, cases: usize) -> OracleReport {
    let mut rng = sample::rng(seed);
    let mut t = Tracker::new("closed-form a0 vs det(A_d)", 1e-9);
    for _ in 0..cases {
        let labels = sample::pattern_labels(&mut rng, 2, PreyDiagonal::NonPositive);
        let alpha = sample::alpha(&mut rng);
        let a0 = printed_quartic_formulas(&labels, alpha).expect("n = 2").a0;
        let det = labels.delayed_matrix(alpha).determinant();
        t.record(
            (a0 - det).abs(),
            (a0 - det).abs() / a0.abs().max(det.abs()).max(1.0),
            || json!({ "labels": labels, "alpha": alpha }),
        );
    }
    t.finish()
}

pub fn check_finite_difference(seed: u64, kind: ResponseKind, cases: usize) -> OracleReport {
    let mut rng = sample::rng(seed);
    let name = format!("finite-difference Jacobians ({kind:?})");
    let mut t = Tracker::new(name, 1e-6);
    for _ in 0..cases {
        let n = 1 + (t.cases % 3);
        let p = sample::params(&mut rng, kind, n);
        let (eq, jac) = linearize(&p).expect("sampled with an equilibrium");
        let fd_a = finite_difference_jacobian(&p, &eq.state(), 1e-6).expect("valid point");
        let fd_ad = finite_difference_jacobian(&p, &eq.delayed_state(), 1e-6).expect("valid point");
        let (a1, r1) = matrix_rel_diff(&jac.a, &fd_a);
        let (a2, r2) = matrix_rel_diff(jac.a_d.as_ref().expect("alpha sampled"), &fd_ad);
        t.record(a1.max(a2), r1.max(r2), || {
            serde_json::to_value(&p).unwrap_or(Value::Null)
        });
    }
    t.finish()
}

/// Counts disagreements between the quartic Hurwitz test and the
/// eigenvalues of `A_d`, ignoring cases inside the marginal band.
pub fn check_hurwitz_vs_eigen(seed: u64, cases: usize) -> OracleReport {
    let mut rng = sample::rng(seed);
    let mut t = Tracker::new("Hurwitz test vs eigenvalues of A_d", 0.0);
    for _ in 0..cases {
        let labels = sample::pattern_labels(&mut rng, 2, PreyDiagonal::NonPositive);
        let alpha = sample::alpha(&mut rng);
        let jac = JacobianPair::from_labels(labels, Some(alpha));
        let verdict = quartic_coeffs(&jac).map(|c| hurwitz_quartic(&c).sufficient);
        let ev = eigenvalues(jac.a_d.as_ref().expect("alpha present"));
        let miss = match (verdict, ev) {
            (Ok(hurwitz), Ok(ev)) => match Stability::from_abscissa(spectral_abscissa(&ev)) {
                Stability::Marginal => 0.0,
                s => f64::from(u8::from(s.is_stable() != hurwitz)),
            },
            _ => 1.0,
        };
        t.record(
            miss,
            miss,
            || json!({ "labels": jac.labels, "alpha": alpha }),
        );
    }
    t.finish()
}

/// Hand-derived values for the two-predator example preset.
pub fn check_example() -> Vec<OracleReport> {
    let mut out = Vec::new();

    let mut t = Tracker::new("example equilibrium at r = 13", 1e-12);
    let eq = presets::holling_two_predator(13.0, None).equilibrium();
    match eq {
        Ok(eq) => {
            let s = 1.0 - 5.0 / 13.0;
            for (got, want) in [
                (eq.x_star, 0.1 * s),
                (eq.y_star[0], s / 40.0),
                (eq.y_star[1], s / 40.0),
            ] {
                let e = (got - want).abs();
                t.record(e, e / want, || json!({ "got": got, "want": want }));
            }
        }
        Err(e) => t.record(f64::INFINITY, f64::INFINITY, || json!(e.to_string())),
    }
    out.push(t.finish());

    let mut t = Tracker::new("example Jacobians at r = 13, alpha = 1", 1e-12);
    if let Ok((_, jac)) = linearize(&presets::holling_two_predator(13.0, Some(1.0))) {
        let a = DMatrix::from_row_slice(3, 3, &[-5., -4., -8., 1., -4., 0., 1., 0., -4.]);
        let ad = DMatrix::from_row_slice(
            4,
            4,
            &[
                -5., -4., -8., 0., 0., -4., 0., 1., 0., 0., -4., 1., 1., 0., 0., -1.,
            ],
        );
        let (x, y) = matrix_rel_diff(&jac.a, &a);
        t.record(x, y, || json!({ "A": rows(&jac.a) }));
        if let Some(jad) = &jac.a_d {
            let (x, y) = matrix_rel_diff(jad, &ad);
            t.record(x, y, || json!({ "A_d": rows(jad) }));
        }
    }
    out.push(t.finish());

    let mut t = Tracker::new("example quartic and H values", 1e-9);
    let cases: [(f64, f64, [f64; 4], f64); 3] = [
        (13.0, 1.0, [14., 69., 148., 128.], 95976.0),
        (7.0, 1.0, [8., 15., 4., 32.], -1584.0),
        (7.0, 10.0, [17., 78., 184., 320.], 117648.0),
    ];
    for (r, alpha, want, h_want) in cases {
        let ctx = || json!({ "r": r, "alpha": alpha });
        let Ok((_, jac)) = linearize(&presets::holling_two_predator(r, Some(alpha))) else {
            t.record(f64::INFINITY, f64::INFINITY, ctx);
            continue;
        };
        match (quartic_coeffs(&jac), h_cubic(&jac)) {
            (Ok(c), Ok(h)) => {
                for (g, w) in quartic_vec(&c).iter().zip(want) {
                    t.record((g - w).abs(), rel(*g, w), ctx);
                }
                let hv = h.eval(alpha);
                t.record((hv - h_want).abs(), rel(hv, h_want), ctx);
            }
            _ => t.record(f64::INFINITY, f64::INFINITY, ctx),
        }
    }
    out.push(t.finish());

    let mut t = Tracker::new(
        "example stability of A_d (r = 7: alpha = 1 unstable, 10 stable)",
        0.0,
    );
    for (alpha, want) in [(1.0, Stability::Unstable), (10.0, Stability::Stable)] {
        let jac = linearize(&presets::holling_two_predator(7.0, Some(alpha))).map(|x| x.1);
        let got = jac.and_then(|j| eigen_stability_oracle(j.a_d.as_ref().expect("alpha set")));
        let miss = f64::from(u8::from(got.as_ref().ok() != Some(&want)));
        t.record(
            miss,
            miss,
            || json!({ "alpha": alpha, "got": format!("{got:?}") }),
        );
    }
    out.push(t.finish());
    out
}

/// Every oracle comparison at its default sample size.
pub fn verify_suite(seed: u64) -> Vec<OracleReport> {
    let mut out = check_example();
    out.push(check_charpoly(seed, 200));
    out.push(check_schur_identity(seed + 1, 100));
    out.push(check_printed_quartic(seed + 2, 1000));
    out.push(check_constant_term_is_determinant(seed + 3, 1000));
    out.push(check_finite_difference(
        seed + 4,
        ResponseKind::Holling,
        100,
    ));
    out.push(check_finite_difference(seed + 5, ResponseKind::Ivlev, 100));
    out.push(check_hurwitz_vs_eigen(seed + 6, 1000));
    out
}
