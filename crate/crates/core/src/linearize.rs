//! Jacobians at the positive equilibrium, in closed form.
//!
//! Index 0 is the prey, `1..=n` the predators and `n + 1` the memory
//! variable `q` (delayed matrix only).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::Result;
use crate::model::{predation_load, Equilibrium, ModelParams};

/// Named scalars shared by `A` and `A_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianLabels {
    pub a11: f64,
    /// `u_i* p_i'(u_i*)`, always negative.
    pub a_diag: Vec<f64>,
    /// `-d_i - u_i* p_i'(u_i*)`.
    pub a_row: Vec<f64>,
    /// `-(u_i*)^2 p_i'(u_i*)`, always positive.
    pub a_col: Vec<f64>,
}

impl JacobianLabels {
    pub fn n(&self) -> usize {
        self.a_diag.len()
    }

    /// Arrow matrix `A` of the system without memory.
    pub fn undelayed_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a[(0, 0)] = self.a11;
        for i in 0..n {
            a[(0, i + 1)] = self.a_row[i];
            a[(i + 1, 0)] = self.a_col[i];
            a[(i + 1, i + 1)] = self.a_diag[i];
        }
        a
    }

    /// `A_d` for memory rate `alpha`: predators couple to `q` instead of `x`.
    pub fn delayed_matrix(&self, alpha: f64) -> DMatrix<f64> {
        let n = self.n();
        let mut a = DMatrix::zeros(n + 2, n + 2);
        a[(0, 0)] = self.a11;
        for i in 0..n {
            a[(0, i + 1)] = self.a_row[i];
            a[(i + 1, i + 1)] = self.a_diag[i];
            a[(i + 1, n + 1)] = self.a_col[i];
        }
        a[(n + 1, 0)] = alpha;
        a[(n + 1, n + 1)] = -alpha;
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianPair {
    pub a: DMatrix<f64>,
    /// Absent when the parameters carry no memory rate.
    pub a_d: Option<DMatrix<f64>>,
    pub labels: JacobianLabels,
    pub alpha: Option<f64>,
}

impl JacobianPair {
    pub fn n(&self) -> usize {
        self.labels.n()
    }

    /// Builds both matrices from named entries alone.
    pub fn from_labels(labels: JacobianLabels, alpha: Option<f64>) -> JacobianPair {
        JacobianPair {
            a: labels.undelayed_matrix(),
            a_d: alpha.map(|al| labels.delayed_matrix(al)),
            labels,
            alpha,
        }
    }

    /// Same entries, different memory rate.
    pub fn with_alpha(&self, alpha: f64) -> JacobianPair {
        JacobianPair {
            a: self.a.clone(),
            a_d: Some(self.labels.delayed_matrix(alpha)),
            labels: self.labels.clone(),
            alpha: Some(alpha),
        }
    }
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

#[derive(Serialize)]
struct JacobianDoc<'a> {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "A_d")]
    a_d: Option<Vec<Vec<f64>>>,
    labels: &'a JacobianLabels,
    alpha: Option<f64>,
}

impl Serialize for JacobianPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JacobianDoc {
            a: rows(&self.a),
            a_d: self.a_d.as_ref().map(rows),
            labels: &self.labels,
            alpha: self.alpha,
        }
        .serialize(s)
    }
}

/// Diagonal prey entry of both Jacobians:
/// `r g(x*) + r x* g'(x*) + sum_i (u_i*)^2 p_i'(u_i*)`.
pub fn build_a11(params: &ModelParams, eq: &Equilibrium) -> f64 {
    let load = predation_load(&params.predators, &eq.u_star);
    let slope = params.growth.equilibrium_slope(params.r, eq.x_star, load);
    let predation: f64 = params
        .predators
        .iter()
        .zip(&eq.u_star)
        .map(|(p, &u)| u * u * p.response.derivative_unchecked(u))
        .sum();
    slope + predation
}

pub fn build_labels(params: &ModelParams, eq: &Equilibrium) -> JacobianLabels {
    let n = params.n();
    let mut labels = JacobianLabels {
        a11: build_a11(params, eq),
        a_diag: Vec::with_capacity(n),
        a_row: Vec::with_capacity(n),
        a_col: Vec::with_capacity(n),
    };
    for (p, &u) in params.predators.iter().zip(&eq.u_star) {
        let dp = p.response.derivative_unchecked(u);
        labels.a_diag.push(u * dp);
        labels.a_row.push(-p.d - u * dp);
        labels.a_col.push(-u * u * dp);
    }
    labels
}

pub fn build_jacobians(params: &ModelParams, eq: &Equilibrium) -> JacobianPair {
    let labels = build_labels(params, eq);
    JacobianPair {
        a: labels.undelayed_matrix(),
        a_d: params.alpha.map(|alpha| labels.delayed_matrix(alpha)),
        labels,
        alpha: params.alpha,
    }
}

/// Equilibrium and Jacobians in one call.
pub fn linearize(params: &ModelParams) -> Result<(Equilibrium, JacobianPair)> {
    let eq = params.equilibrium()?;
    let jac = build_jacobians(params, &eq);
    Ok((eq, jac))
}
