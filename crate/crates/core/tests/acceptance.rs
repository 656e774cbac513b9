//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to fail; the run exits
//! non-zero if any other criterion fails or a known failure starts passing.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use predmem::linearize::linearize;
use predmem::model::{FunctionalResponse, ResponseKind};
use predmem::oracle;
use predmem::presets::holling_two_predator;
use predmem::sample::{self, PreyDiagonal};
use predmem::simulate::{integrate, memory_consistency_check, uniform_times};
use predmem::stability::{
    alpha_scan, char_poly, char_poly_delayed_schur, eigenvalues, h_cubic, ivlev_bound,
    ivlev_bound_of_ratio, ivlev_direct_bound, log_grid, quartic_coeffs, spectral_abscissa, sweep,
    EquilibriumClass, Polynomial, Stability, SweepParam,
};
use predmem::{Error, JacobianPair, State};
use rand::Rng;

type Check = Result<(), String>;
type Criterion = (u32, &'static str, fn() -> Check);

/// Criteria that cannot all hold; see the message printed for each.
const KNOWN_FAILURES: &[u32] = &[7];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

fn criterion_1() -> Check {
    let eq = holling_two_predator(13.0, None)
        .equilibrium()
        .map_err(|e| e.to_string())?;
    let s = 1.0 - 5.0 / 13.0;
    for (name, got, want) in [
        ("x*", eq.x_star, 0.1 * s),
        ("y1*", eq.y_star[0], s / 40.0),
        ("y2*", eq.y_star[1], s / 40.0),
        ("q*", eq.q_star, 0.1 * s),
    ] {
        ensure(rel(got, want) <= 1e-12, || {
            format!("{name} = {got}, want {want}")
        })?;
    }
    Ok(())
}

fn criterion_2() -> Check {
    let (_, jac) = linearize(&holling_two_predator(13.0, Some(1.0))).map_err(|e| e.to_string())?;
    let a = DMatrix::from_row_slice(3, 3, &[-5., -4., -8., 1., -4., 0., 1., 0., -4.]);
    let ad = DMatrix::from_row_slice(
        4,
        4,
        &[
            -5., -4., -8., 0., 0., -4., 0., 1., 0., 0., -4., 1., 1., 0., 0., -1.,
        ],
    );
    let da = (&jac.a - &a).abs().max();
    ensure(da <= 1e-12, || format!("A off by {da}: {}", jac.a))?;
    let jad = jac.a_d.ok_or("A_d missing")?;
    let dd = (&jad - &ad).abs().max();
    ensure(dd <= 1e-12, || format!("A_d off by {dd}: {jad}"))
}

fn lin(c0: f64) -> Polynomial {
    Polynomial::linear(c0, -1.0)
}

fn criterion_3() -> Check {
    for r in [6.0, 7.0, 8.0, 13.0] {
        let (_, jac) = linearize(&holling_two_predator(r, None)).map_err(|e| e.to_string())?;
        let got = char_poly(&jac.a).map_err(|e| e.to_string())?;
        // (-4 - l)(l^2 + (r - 4) l + 4 (r - 5))
        let want = &lin(-4.0) * &Polynomial::new(vec![4.0 * (r - 5.0), r - 4.0, 1.0]);
        let d = got.max_rel_diff(&want, 1.0);
        ensure(d <= 1e-10, || {
            format!("char_poly(A) at r = {r}: rel diff {d}")
        })?;
        for alpha in [0.2, 1.0, 10.0] {
            let (_, jac) =
                linearize(&holling_two_predator(r, Some(alpha))).map_err(|e| e.to_string())?;
            let got = char_poly_delayed_schur(&jac).map_err(|e| e.to_string())?;
            // (-4 - l)((8 - r - l)(-4 - l)(-alpha - l) - 12 alpha)
            let cubic = &(&lin(8.0 - r) * &lin(-4.0)) * &lin(-alpha);
            let want = &lin(-4.0) * &(&cubic - &Polynomial::constant(12.0 * alpha));
            let d = got.max_rel_diff(&want, 1.0);
            ensure(d <= 1e-10, || {
                format!("delayed identity at r = {r}, alpha = {alpha}: rel diff {d}")
            })?;
        }
    }
    Ok(())
}

fn criterion_4() -> Check {
    let base = holling_two_predator(13.0, None);
    let mut rows = sweep(&base, SweepParam::R, 4.0, 14.0, 101).map_err(|e| e.to_string())?;
    for r in [4.9, 5.1, 7.9, 8.1, 11.9, 12.1] {
        rows.extend(sweep(&base, SweepParam::R, r, r, 1).map_err(|e| e.to_string())?);
    }
    for row in &rows {
        let r = row.value;
        let none = row.class == EquilibriumClass::None;
        ensure(none == (r <= 5.0), || {
            format!("r = {r}: no-equilibrium flag {none}")
        })?;
        ensure(row.stable_a == (r > 5.0), || {
            format!("r = {r}: A stable = {}", row.stable_a)
        })?;
        ensure(row.sign_stable == (r >= 8.0), || {
            format!("r = {r}: sign-stability conditions = {}", row.sign_stable)
        })?;
        ensure(row.delay_robust == (r > 12.0), || {
            format!("r = {r}: delay-robust conditions = {}", row.delay_robust)
        })?;
    }
    Ok(())
}

fn criterion_5() -> Check {
    let (_, jac) = linearize(&holling_two_predator(13.0, None)).map_err(|e| e.to_string())?;
    let h = h_cubic(&jac).map_err(|e| e.to_string())?;
    for alpha in log_grid(0.01, 100.0, 200) {
        let hv = h.eval(alpha);
        ensure(hv > 0.0, || format!("H({alpha}) = {hv}"))?;
        let s = spectral_abscissa(
            &eigenvalues(&jac.labels.delayed_matrix(alpha)).map_err(|e| e.to_string())?,
        );
        ensure(s < 0.0, || {
            format!("abscissa of A_d at alpha = {alpha} is {s}")
        })?;
    }
    let h1 = h.eval(1.0);
    ensure(rel(h1, 95976.0) <= 1e-6, || format!("H(1) = {h1}"))
}

fn criterion_6() -> Check {
    let params = holling_two_predator(7.0, None);
    let (_, jac) = linearize(&params).map_err(|e| e.to_string())?;
    let h = h_cubic(&jac).map_err(|e| e.to_string())?;
    ensure(rel(h.eval(1.0), -1584.0) <= 1e-9, || {
        format!("H(1) = {}", h.eval(1.0))
    })?;
    ensure(rel(h.eval(10.0), 117648.0) <= 1e-9, || {
        format!("H(10) = {}", h.eval(10.0))
    })?;
    for (alpha, want) in [(1.0, Stability::Unstable), (10.0, Stability::Stable)] {
        let s = spectral_abscissa(
            &eigenvalues(&jac.labels.delayed_matrix(alpha)).map_err(|e| e.to_string())?,
        );
        ensure(Stability::from_abscissa(s) == want, || {
            format!("A_d at alpha = {alpha}: abscissa {s}, want {want:?}")
        })?;
    }
    let scan = alpha_scan(&params, 0.01, 100.0, 200).map_err(|e| e.to_string())?;
    let inside: Vec<_> = scan
        .switch_points
        .iter()
        .filter(|s| s.alpha > 1.0 && s.alpha < 10.0)
        .collect();
    ensure(!inside.is_empty(), || "no switch point in (1, 10)".into())?;
    for sp in inside {
        let omega = sp
            .omega
            .ok_or_else(|| format!("a1/a3 = {} <= 0", sp.a1_over_a3))?;
        let z = sp.nearest_eigenvalue.ok_or("no eigenvalue reported")?;
        ensure(
            z.re.abs() < 1e-6 && (z.im.abs() - omega).abs() < 1e-6,
            || {
                format!(
                    "switch at alpha = {}: eigenvalue {z}, omega {omega}",
                    sp.alpha
                )
            },
        )?;
    }
    Ok(())
}

const PROPERTY_SAMPLES: usize = 10_000;

fn criterion_7() -> Check {
    let mut rng = sample::rng(7);
    let mut failures = Vec::new();

    // Coefficient positivity for a11 <= 0.
    let mut bad = 0;
    for _ in 0..PROPERTY_SAMPLES {
        let l = sample::pattern_labels(&mut rng, 2, PreyDiagonal::NonPositive);
        let jac = JacobianPair::from_labels(l, Some(sample::alpha(&mut rng)));
        let c = quartic_coeffs(&jac).map_err(|e| e.to_string())?;
        if !(c.a3 > 0.0 && c.a2 > 0.0 && c.a1 > 0.0 && c.a0 > 0.0) {
            bad += 1;
        }
    }
    if bad > 0 {
        failures.push(format!(
            "quartic coefficients not all positive in {bad} cases"
        ));
    }

    // Leading and constant coefficients of H for a11 < 0.
    let mut bad = 0;
    for _ in 0..PROPERTY_SAMPLES {
        let l = sample::pattern_labels(&mut rng, 2, PreyDiagonal::Negative);
        let h = h_cubic(&JacobianPair::from_labels(l, None)).map_err(|e| e.to_string())?;
        if !(h.a3t > 0.0 && h.a0t > 0.0) {
            bad += 1;
        }
    }
    if bad > 0 {
        failures.push(format!("A3t or A0t not positive in {bad} cases"));
    }

    // Delay-robust inequalities imply A1t, A2t > 0 and stability for all alpha.
    let grid = log_grid(1e-3, 1e3, 13);
    let (mut bad_coef, mut bad_stab) = (0, 0);
    for _ in 0..PROPERTY_SAMPLES {
        let l = sample::robust_pattern_labels(&mut rng);
        let jac = JacobianPair::from_labels(l, None);
        let h = h_cubic(&jac).map_err(|e| e.to_string())?;
        if !(h.a1t > 0.0 && h.a2t > 0.0) {
            bad_coef += 1;
        }
        for &alpha in &grid {
            let ev = eigenvalues(&jac.labels.delayed_matrix(alpha)).map_err(|e| e.to_string())?;
            if Stability::from_abscissa(spectral_abscissa(&ev)) != Stability::Stable {
                bad_stab += 1;
                break;
            }
        }
    }
    if bad_coef > 0 {
        failures.push(format!(
            "A1t or A2t not positive in {bad_coef} robust cases"
        ));
    }
    if bad_stab > 0 {
        failures.push(format!(
            "A_d not strictly stable on the alpha grid in {bad_stab} robust cases"
        ));
    }

    // Holling boundary at a = 1: a_ii^2 = -a_1i a_iq exactly.
    let mut worst: f64 = 0.0;
    for _ in 0..PROPERTY_SAMPLES {
        let m = rng.gen_range(0.5..30.0);
        let d = m * rng.gen_range(0.05..0.95);
        let resp = FunctionalResponse::holling(m, 1.0);
        let u = resp.equilibrium_ratio(d).map_err(|e| e.to_string())?;
        let dp = resp.derivative(u).map_err(|e| e.to_string())?;
        let (diag, row, col) = (u * dp, -d - u * dp, -u * u * dp);
        worst = worst.max(rel(diag * diag, -row * col));
    }
    if worst > 1e-12 {
        failures.push(format!("Holling a = 1 boundary identity off by {worst:e}"));
    }

    // Ivlev closed-form bound: decreasing in x = m/(m-d) with supremum 1/2.
    let xs: Vec<f64> = (1..=4000).map(|i| 1.0 + 1e-4 * 1.003f64.powi(i)).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| ivlev_bound_of_ratio(x)).collect();
    if !vals.windows(2).all(|w| w[1] < w[0]) || vals.iter().any(|&v| v >= 0.5) {
        failures.push("Ivlev bound not strictly decreasing below 1/2".into());
    }
    if (ivlev_bound_of_ratio(1.0 + 1e-5) - 0.5).abs() > 1e-4 {
        failures.push("Ivlev bound does not approach 1/2 as x -> 1+".into());
    }

    // Ivlev closed-form bound against the direct entry condition.
    let (mut disagree, mut exact_disagree, mut example) = (0, 0, None);
    for _ in 0..PROPERTY_SAMPLES {
        let m = rng.gen_range(0.5..30.0);
        let d = m * rng.gen_range(0.05..0.95);
        let a = rng.gen_range(0.05..3.0);
        let resp = FunctionalResponse::ivlev(m, a);
        let u = resp.equilibrium_ratio(d).map_err(|e| e.to_string())?;
        let dp = resp.derivative(u).map_err(|e| e.to_string())?;
        let direct = (u * dp).powi(2) > -(-d - u * dp) * (-u * u * dp);
        if (a > ivlev_bound(m, d)) != direct {
            disagree += 1;
            example.get_or_insert((m, d, a));
        }
        if (a > ivlev_direct_bound(m, d)) != direct {
            exact_disagree += 1;
        }
    }
    if exact_disagree > 0 {
        failures.push(format!(
            "exact Ivlev threshold disagrees with the entries in {exact_disagree} cases"
        ));
    }
    if disagree > 0 {
        let (m, d, a) = example.expect("recorded with the first disagreement");
        failures.push(format!(
            "Ivlev closed-form bound disagrees with the direct check in {disagree}/{PROPERTY_SAMPLES} cases, \
             e.g. m = {m:.3}, d = {d:.3}, a = {a:.3}: bound {:.4}, exact threshold {:.4} \
             (the bound is smaller by the factor m/(m-d), so the two cannot agree)",
            ivlev_bound(m, d),
            ivlev_direct_bound(m, d)
        ));
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_8() -> Check {
    let rep = oracle::check_schur_identity(8, 100);
    ensure(rep.passed && rep.cases == 600, || {
        format!(
            "max rel error {:e} over {} cases; worst {}",
            rep.max_rel_error, rep.cases, rep.worst_case
        )
    })
}

fn criterion_9() -> Check {
    let rep = oracle::check_hurwitz_vs_eigen(9, 1000);
    ensure(rep.passed, || {
        format!(
            "{} disagreement(s) outside the marginal band; e.g. {}",
            rep.max_abs_error, rep.worst_case
        )
    })
}

fn criterion_10() -> Check {
    // Convergence for the delay-robust case.
    let p = holling_two_predator(13.0, Some(1.0));
    let e = p.equilibrium().map_err(|e| e.to_string())?.delayed_state();
    let tr = integrate(
        &p,
        &e.perturbed(0.1),
        200.0,
        1e-10,
        1e-13,
        &uniform_times(200.0, 1.0),
    )
    .map_err(|e| e.to_string())?;
    let dist = tr.last().expect("non-empty").distance(&e);
    ensure(dist < 1e-4, || {
        format!("r = 13: distance at t = 200 is {dist}")
    })?;

    // Departure for the unstable case. The trajectory heads for the
    // extinction corner, so the positivity floor may end the run early; the
    // states accepted until then are judged.
    let p7 = holling_two_predator(7.0, Some(1.0));
    let e7 = p7.equilibrium().map_err(|e| e.to_string())?.delayed_state();
    let s0 = e7.perturbed(0.01);
    let d0 = s0.distance(&e7);
    let states: Vec<State> =
        match integrate(&p7, &s0, 200.0, 1e-10, 1e-13, &uniform_times(200.0, 0.5)) {
            Ok(tr) => tr.states,
            Err(Error::PositivityLost { partial, .. }) => partial.states,
            Err(e) => return Err(e.to_string()),
        };
    let grown = states.iter().map(|s| s.distance(&e7)).fold(0.0, f64::max);
    ensure(grown > 10.0 * d0, || {
        format!("r = 7: distance grew from {d0} to only {grown}")
    })?;

    // Memory consistency with second-order refinement.
    let s0 = e.perturbed(0.1);
    let residual = |dt: f64| -> Result<f64, String> {
        let tr = integrate(&p, &s0, 50.0, 1e-12, 1e-13, &uniform_times(50.0, dt))
            .map_err(|e| e.to_string())?;
        memory_consistency_check(&tr).map_err(|e| e.to_string())
    };
    let (r1, r2) = (residual(0.01)?, residual(0.005)?);
    ensure(r1 < 1e-3, || format!("memory residual {r1} at step 0.01"))?;
    let ratio = r1 / r2;
    ensure((3.5..=4.5).contains(&ratio), || {
        format!("halving the step changed the residual by {ratio} ({r1:e} -> {r2:e})")
    })
}

fn criterion_11() -> Check {
    for (seed, kind) in [(11, ResponseKind::Holling), (12, ResponseKind::Ivlev)] {
        let rep = oracle::check_finite_difference(seed, kind, 100);
        ensure(rep.passed && rep.cases == 100, || {
            format!(
                "{kind:?}: max rel error {:e}; worst {}",
                rep.max_rel_error, rep.worst_case
            )
        })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "equilibrium exactness", criterion_1),
        (2, "Jacobian exactness", criterion_2),
        (3, "characteristic polynomials", criterion_3),
        (4, "thresholds over r in [4, 14]", criterion_4),
        (5, "delay-robust case r = 13", criterion_5),
        (6, "delay-induced instability r = 7", criterion_6),
        (7, "random property suites", criterion_7),
        (8, "general-n delayed identity", criterion_8),
        (9, "Hurwitz vs eigenvalues", criterion_9),
        (10, "simulation", criterion_10),
        (11, "finite-difference Jacobians", criterion_11),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        match outcome {
            Ok(()) => {
                println!("PASS [{id:>2}] {name} ({secs:.2}s)");
                if known {
                    println!("     criterion {id} was expected to fail but passed");
                    unexpected += 1;
                }
            }
            Err(msg) => {
                let tag = if known { " (known)" } else { "" };
                println!("FAIL [{id:>2}] {name}{tag} ({secs:.2}s): {msg}");
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
