//! Seeded random generators for parameter sets and sign-pattern matrices.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linearize::JacobianLabels;
use crate::model::{
    predation_load, FunctionalResponse, GrowthLaw, ModelParams, Predator, ResponseKind,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Random response of the given kind with `m > d`, plus its `d`.
pub fn predator<R: Rng>(rng: &mut R, kind: ResponseKind) -> Predator {
    let m = log_uniform(rng, 0.5, 30.0);
    let d = m * rng.gen_range(0.05..0.95);
    let a = log_uniform(rng, 0.1, 10.0);
    let response = match kind {
        ResponseKind::Holling => FunctionalResponse::holling(m, a),
        ResponseKind::Ivlev => FunctionalResponse::ivlev(m, a),
    };
    Predator::new(response, d)
}

/// Random parameter set with `n` predators of one kind that admits a
/// positive equilibrium. `alpha` is log-uniform on `[0.01, 100]`.
pub fn params<R: Rng>(rng: &mut R, kind: ResponseKind, n: usize) -> ModelParams {
    let predators: Vec<Predator> = (0..n).map(|_| predator(rng, kind)).collect();
    let u: Vec<f64> = predators
        .iter()
        .map(|p| {
            p.response
                .equilibrium_ratio(p.d)
                .expect("m > d by construction")
        })
        .collect();
    let load = predation_load(&predators, &u);
    let r = load * (1.0 + log_uniform(rng, 0.05, 5.0));
    let k = log_uniform(rng, 0.05, 20.0);
    let alpha = log_uniform(rng, 0.01, 100.0);
    ModelParams::new(r, GrowthLaw::logistic(k), predators, Some(alpha))
        .expect("sampled parameters are valid")
}

/// Sign requirement on the prey diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreyDiagonal {
    Negative,
    NonPositive,
}

/// Entries conforming to the delayed sign pattern: `a11 <= 0`, predator
/// diagonals and row entries negative, column entries positive. With
/// `NonPositive`, one draw in eight has `a11 = 0` exactly.
pub fn pattern_labels<R: Rng>(rng: &mut R, n: usize, prey: PreyDiagonal) -> JacobianLabels {
    let mag = |rng: &mut R| log_uniform(rng, 0.01, 100.0);
    let a11 = if prey == PreyDiagonal::NonPositive && rng.gen_ratio(1, 8) {
        0.0
    } else {
        -mag(rng)
    };
    JacobianLabels {
        a11,
        a_diag: (0..n).map(|_| -mag(rng)).collect(),
        a_row: (0..n).map(|_| -mag(rng)).collect(),
        a_col: (0..n).map(|_| mag(rng)).collect(),
    }
}

/// Two-predator pattern entries that also satisfy
/// `a11^2 > a_ii^2 > -a_row_i a_col_i` for both predators.
pub fn robust_pattern_labels<R: Rng>(rng: &mut R) -> JacobianLabels {
    let a_diag: Vec<f64> = (0..2).map(|_| -log_uniform(rng, 0.01, 100.0)).collect();
    let biggest = a_diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a11 = -biggest * (1.0 + log_uniform(rng, 1e-3, 10.0));
    let a_col: Vec<f64> = (0..2).map(|_| log_uniform(rng, 0.01, 100.0)).collect();
    let a_row = a_diag
        .iter()
        .zip(&a_col)
        .map(|(dg, c)| -rng.gen_range(0.01..0.999) * dg * dg / c)
        .collect();
    JacobianLabels {
        a11,
        a_diag,
        a_row,
        a_col,
    }
}

pub fn alpha<R: Rng>(rng: &mut R) -> f64 {
    log_uniform(rng, 1e-3, 1e3)
}
