//! Growth laws, ratio-dependent functional responses, model parameters,
//! right-hand sides and the positive interior equilibrium.
//!
//! Every functional response is evaluated on the predator-to-prey ratio
//! `u = y / x`, so ratio dependence is structural: the equilibrium condition
//! `p_i(u_i*) = d_i` is one-dimensional per predator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this exponent `exp(-1 / (a u))` is treated as zero in the Ivlev
/// response and `p(u)` is replaced by its saturation limit `m`.
const IVLEV_EXP_CUTOFF: f64 = 700.0;

/// Per-capita prey growth `g(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthLaw {
    /// `g(x) = 1 - x / K`.
    Logistic { k: f64 },
}

impl GrowthLaw {
    pub fn logistic(k: f64) -> Self {
        GrowthLaw::Logistic { k }
    }

    pub fn carrying_capacity(&self) -> f64 {
        match *self {
            GrowthLaw::Logistic { k } => k,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            GrowthLaw::Logistic { k } => 1.0 - x / k,
        }
    }

    pub fn derivative(&self, _x: f64) -> f64 {
        match *self {
            GrowthLaw::Logistic { k } => -1.0 / k,
        }
    }

    /// Solves `r g(x) = load` for `x` in `(0, K)`.
    ///
    /// `load` is the per-capita predation at equilibrium, `sum_i d_i u_i*`.
    pub fn equilibrium_prey(&self, r: f64, load: f64) -> Option<f64> {
        if r <= load {
            return None;
        }
        match *self {
            GrowthLaw::Logistic { k } => Some(k * (1.0 - load / r)),
        }
    }

    /// `r g(x*) + r x* g'(x*)` at an equilibrium where `r g(x*) = load`.
    ///
    /// For the logistic law `r x*/K = r - load`, so the sum collapses to
    /// `2 load - r`. This keeps the value exact when it is zero.
    pub fn equilibrium_slope(&self, r: f64, _x_star: f64, load: f64) -> f64 {
        match *self {
            GrowthLaw::Logistic { .. } => 2.0 * load - r,
        }
    }
}

/// Bracketed bisection for `r g(x) = load` on `(0, K)`.
///
/// Works for any law with `(K - x) g(x) > 0`; the logistic law has a closed
/// form, this is the generic fallback.
pub fn bisect_prey_equilibrium(growth: &GrowthLaw, r: f64, load: f64) -> Option<f64> {
    let k = growth.carrying_capacity();
    let f = |x: f64| r * growth.value(x) - load;
    let (mut lo, mut hi) = (0.0_f64, k);
    if f(lo) <= 0.0 {
        return None;
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseKind {
    /// `p(u) = m / (a u + 1)`.
    Holling,
    /// `p(u) = m (1 - exp(-1 / (a u)))`.
    Ivlev,
}

/// Ratio-dependent per-capita birth rate of one predator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalResponse {
    pub kind: ResponseKind,
    /// Maximal birth rate.
    pub m: f64,
    /// Half-saturation constant.
    pub a: f64,
}

fn check_ratio(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "ratio u = y/x must be positive and finite, got {u}"
        )))
    }
}

impl FunctionalResponse {
    pub fn holling(m: f64, a: f64) -> Self {
        Self {
            kind: ResponseKind::Holling,
            m,
            a,
        }
    }

    pub fn ivlev(m: f64, a: f64) -> Self {
        Self {
            kind: ResponseKind::Ivlev,
            m,
            a,
        }
    }

    /// `p(u)`, in `(0, m)` for every `u > 0`.
    pub fn value(&self, u: f64) -> Result<f64> {
        check_ratio(u)?;
        Ok(self.value_unchecked(u))
    }

    pub(crate) fn value_unchecked(&self, u: f64) -> f64 {
        let Self { kind, m, a } = *self;
        match kind {
            ResponseKind::Holling => m / (a * u + 1.0),
            ResponseKind::Ivlev => {
                let z = 1.0 / (a * u);
                if z > IVLEV_EXP_CUTOFF {
                    m
                } else {
                    -m * (-z).exp_m1()
                }
            }
        }
    }

    /// `dp/du`, strictly negative.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        check_ratio(u)?;
        Ok(self.derivative_unchecked(u))
    }

    pub(crate) fn derivative_unchecked(&self, u: f64) -> f64 {
        let Self { kind, m, a } = *self;
        match kind {
            ResponseKind::Holling => {
                let s = a * u + 1.0;
                -m * a / (s * s)
            }
            ResponseKind::Ivlev => {
                let z = 1.0 / (a * u);
                // 1 / (a u^2) = a z^2
                -m * (-z).exp() * a * z * z
            }
        }
    }

    /// The unique `u* > 0` with `p(u*) = d`.
    pub fn equilibrium_ratio(&self, d: f64) -> Result<f64> {
        let Self { kind, m, a } = *self;
        if !(m > d) {
            return Err(Error::NoSurvival { index: 0, m, d });
        }
        if !(d > 0.0) {
            return Err(Error::Domain(format!(
                "death rate must be positive, got {d}"
            )));
        }
        Ok(match kind {
            ResponseKind::Holling => (m - d) / (a * d),
            ResponseKind::Ivlev => {
                // ln(m / (m - d)) = -ln(1 - d/m)
                let log_ratio = -(-d / m).ln_1p();
                1.0 / (a * log_ratio)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Predator {
    pub response: FunctionalResponse,
    /// Death rate.
    pub d: f64,
}

impl Predator {
    pub fn new(response: FunctionalResponse, d: f64) -> Self {
        Self { response, d }
    }
}

/// One system instance. Construct through [`ModelParams::new`], which
/// enforces positivity and survival (`m_i > d_i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsDoc", into = "ParamsDoc")]
pub struct ModelParams {
    pub r: f64,
    pub growth: GrowthLaw,
    pub predators: Vec<Predator>,
    pub alpha: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ModelParams {
    pub fn new(
        r: f64,
        growth: GrowthLaw,
        predators: Vec<Predator>,
        alpha: Option<f64>,
    ) -> Result<Self> {
        let p = Self {
            r,
            growth,
            predators,
            alpha,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("r", self.r)?;
        positive("K", self.growth.carrying_capacity())?;
        if let Some(alpha) = self.alpha {
            positive("alpha", alpha)?;
        }
        if self.predators.is_empty() {
            return Err(Error::InvalidParams(
                "at least one predator is required".into(),
            ));
        }
        for (i, p) in self.predators.iter().enumerate() {
            let n = i + 1;
            positive(&format!("m_{n}"), p.response.m)?;
            positive(&format!("a_{n}"), p.response.a)?;
            positive(&format!("d_{n}"), p.d)?;
            if !(p.response.m > p.d) {
                return Err(Error::NoSurvival {
                    index: i,
                    m: p.response.m,
                    d: p.d,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.predators.len()
    }

    pub fn k(&self) -> f64 {
        self.growth.carrying_capacity()
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(r, self.growth, self.predators.clone(), self.alpha)
    }

    pub fn with_alpha(&self, alpha: Option<f64>) -> Result<Self> {
        Self::new(self.r, self.growth, self.predators.clone(), alpha)
    }

    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(
            self.r,
            GrowthLaw::logistic(k),
            self.predators.clone(),
            self.alpha,
        )
    }

    fn alpha_required(&self) -> Result<f64> {
        self.alpha.ok_or(Error::MissingAlpha)
    }

    /// Equilibrium ratios `u_i*` for every predator.
    pub fn equilibrium_ratios(&self) -> Result<Vec<f64>> {
        self.predators
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.response.equilibrium_ratio(p.d).map_err(|e| match e {
                    Error::NoSurvival { m, d, .. } => Error::NoSurvival { index: i, m, d },
                    other => other,
                })
            })
            .collect()
    }

    /// Positive interior equilibrium `E*` (and `E_d*` via `q* = x*`).
    pub fn equilibrium(&self) -> Result<Equilibrium> {
        let u_star = self.equilibrium_ratios()?;
        let load = predation_load(&self.predators, &u_star);
        let x_star = self
            .growth
            .equilibrium_prey(self.r, load)
            .ok_or(Error::NoPositiveEquilibrium { r: self.r, load })?;
        let y_star = u_star.iter().map(|u| u * x_star).collect();
        Ok(Equilibrium {
            x_star,
            y_star,
            q_star: x_star,
            u_star,
        })
    }

    /// `(x', y_1', ..., y_n')` of the system without memory.
    pub fn rhs_undelayed(&self, s: &State) -> Result<Vec<f64>> {
        self.check_state(s, false)?;
        let mut z = Vec::with_capacity(self.n() + 1);
        z.push(s.x);
        z.extend_from_slice(&s.y);
        let mut out = vec![0.0; self.n() + 1];
        self.rhs_undelayed_into(&z, &mut out);
        Ok(out)
    }

    /// `(x', y_1', ..., y_n', q')` of the memory system, where the predator
    /// ratios use the weighted past prey average `q`.
    pub fn rhs_delayed(&self, s: &State) -> Result<Vec<f64>> {
        self.alpha_required()?;
        self.check_state(s, true)?;
        let mut z = Vec::with_capacity(self.n() + 2);
        z.push(s.x);
        z.extend_from_slice(&s.y);
        z.push(s.q.unwrap_or(s.x));
        let mut out = vec![0.0; self.n() + 2];
        self.rhs_delayed_into(&z, &mut out);
        Ok(out)
    }

    /// Raw right-hand side on a flat `(x, y..)` vector. No validation.
    pub fn rhs_undelayed_into(&self, z: &[f64], out: &mut [f64]) {
        let x = z[0];
        let mut dx = self.r * x * self.growth.value(x);
        for (i, p) in self.predators.iter().enumerate() {
            let y = z[i + 1];
            let birth = y * p.response.value_unchecked(y / x);
            dx -= birth;
            out[i + 1] = birth - p.d * y;
        }
        out[0] = dx;
    }

    /// Raw right-hand side on a flat `(x, y.., q)` vector. No validation.
    pub fn rhs_delayed_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n();
        let x = z[0];
        let q = z[n + 1];
        let alpha = self.alpha.unwrap_or(0.0);
        let mut dx = self.r * x * self.growth.value(x);
        for (i, p) in self.predators.iter().enumerate() {
            let y = z[i + 1];
            dx -= y * p.response.value_unchecked(y / x);
            out[i + 1] = y * p.response.value_unchecked(y / q) - p.d * y;
        }
        out[0] = dx;
        out[n + 1] = alpha * (x - q);
    }

    fn check_state(&self, s: &State, delayed: bool) -> Result<()> {
        if s.y.len() != self.n() {
            return Err(Error::InvalidParams(format!(
                "state has {} predators, parameters have {}",
                s.y.len(),
                self.n()
            )));
        }
        if !delayed && s.q.is_some() {
            return Err(Error::InvalidParams(
                "undelayed system takes no memory component q".into(),
            ));
        }
        if s.x == 0.0 {
            return Err(Error::Singular("x = 0, the ratio y/x is undefined".into()));
        }
        if delayed && s.q == Some(0.0) {
            return Err(Error::Singular("q = 0, the ratio y/q is undefined".into()));
        }
        s.check_positive()
    }

    /// `F_1(x, y) = r x g(x) - sum_i y_i p_i(y_i / x)`, the prey growth rate.
    pub fn prey_growth(&self, x: f64, y: &[f64]) -> f64 {
        let mut f = self.r * x * self.growth.value(x);
        for (p, &yi) in self.predators.iter().zip(y) {
            if yi > 0.0 {
                f -= yi * p.response.value_unchecked(yi / x);
            }
        }
        f
    }

    /// Samples the prey zero-isocline surface `F_1(x, y_1, y_2) = 0` over a
    /// rectangular `(y_1, y_2)` grid. Each cell lists every root in `(0, K)`;
    /// an empty list marks a cell with no root.
    pub fn prey_nullcline_sample(&self, grid: &NullclineGrid) -> Result<NullclineMesh> {
        if self.n() != 2 {
            return Err(Error::UnsupportedDimension {
                expected: 2,
                got: self.n(),
            });
        }
        grid.validate()?;
        let y1 = grid.axis1();
        let y2 = grid.axis2();
        let k = self.k();
        let mut cells = Vec::with_capacity(y1.len() * y2.len());
        for &a in &y1 {
            for &b in &y2 {
                let y = [a, b];
                let roots = bracket_roots(|x| self.prey_growth(x, &y), 0.0, k, NULLCLINE_SCAN);
                cells.push(NullclineCell {
                    y1: a,
                    y2: b,
                    roots,
                });
            }
        }
        Ok(NullclineMesh { y1, y2, cells })
    }
}

const NULLCLINE_SCAN: usize = 512;

/// Finds all sign changes of `f` on a uniform scan of the open interval
/// `(lo, hi)` and refines each by bisection.
fn bracket_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<f64> {
    let h = (hi - lo) / cells as f64;
    // Open interval: nudge the end points inward.
    let node = |i: usize| match i {
        0 => lo + h * 1e-9,
        i if i == cells => hi - h * 1e-9,
        i => lo + h * i as f64,
    };
    let mut roots = Vec::new();
    let mut a = node(0);
    let mut fa = f(a);
    for i in 1..=cells {
        let b = node(i);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if mid <= l || mid >= r {
                    break;
                }
                let fm = f(mid);
                if fm == 0.0 {
                    l = mid;
                    r = mid;
                    break;
                }
                if (fm < 0.0) == (fl < 0.0) {
                    l = mid;
                    fl = fm;
                } else {
                    r = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// `sum_i d_i u_i*`.
pub(crate) fn predation_load(predators: &[Predator], u_star: &[f64]) -> f64 {
    predators.iter().zip(u_star).map(|(p, u)| p.d * u).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub x_star: f64,
    pub y_star: Vec<f64>,
    /// Always equal to `x_star`.
    pub q_star: f64,
    pub u_star: Vec<f64>,
}

impl Equilibrium {
    /// `E*` as a state of the system without memory.
    pub fn state(&self) -> State {
        State::undelayed(self.x_star, self.y_star.clone())
    }

    /// `E_d* = (x*, y*, q*)`.
    pub fn delayed_state(&self) -> State {
        State::delayed(self.x_star, self.y_star.clone(), self.q_star)
    }
}

/// A phase-space point; `q` is present only for the memory system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl State {
    pub fn undelayed(x: f64, y: Vec<f64>) -> Self {
        Self { x, y, q: None }
    }

    pub fn delayed(x: f64, y: Vec<f64>, q: f64) -> Self {
        Self { x, y, q: Some(q) }
    }

    pub fn check_positive(&self) -> Result<()> {
        let bad = |v: f64| !(v > 0.0 && v.is_finite());
        if bad(self.x) {
            return Err(Error::NonPositiveState(format!("x = {}", self.x)));
        }
        if let Some(i) = self.y.iter().position(|&v| bad(v)) {
            return Err(Error::NonPositiveState(format!(
                "y_{} = {}",
                i + 1,
                self.y[i]
            )));
        }
        if let Some(q) = self.q {
            if bad(q) {
                return Err(Error::NonPositiveState(format!("q = {q}")));
            }
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.y.len() + 2);
        v.push(self.x);
        v.extend_from_slice(&self.y);
        v.extend(self.q);
        v
    }

    pub(crate) fn from_slice(z: &[f64], n: usize) -> Self {
        Self {
            x: z[0],
            y: z[1..=n].to_vec(),
            q: z.get(n + 1).copied(),
        }
    }

    /// Scales every component by `1 + rel`.
    pub fn perturbed(&self, rel: f64) -> Self {
        Self {
            x: self.x * (1.0 + rel),
            y: self.y.iter().map(|v| v * (1.0 + rel)).collect(),
            q: self.q.map(|q| q * (1.0 + rel)),
        }
    }

    pub fn distance(&self, other: &State) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullclineGrid {
    pub y1_min: f64,
    pub y1_max: f64,
    pub y2_min: f64,
    pub y2_max: f64,
    pub n1: usize,
    pub n2: usize,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl NullclineGrid {
    fn validate(&self) -> Result<()> {
        if !(self.y1_min > 0.0 && self.y2_min > 0.0) {
            return Err(Error::Domain("grid must lie in y_1, y_2 > 0".into()));
        }
        if self.y1_max < self.y1_min || self.y2_max < self.y2_min {
            return Err(Error::Domain("grid ranges must be increasing".into()));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return Err(Error::Domain(
                "grid needs at least one node per axis".into(),
            ));
        }
        Ok(())
    }

    pub fn axis1(&self) -> Vec<f64> {
        axis(self.y1_min, self.y1_max, self.n1)
    }

    pub fn axis2(&self) -> Vec<f64> {
        axis(self.y2_min, self.y2_max, self.n2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullclineCell {
    pub y1: f64,
    pub y2: f64,
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullclineMesh {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub cells: Vec<NullclineCell>,
}

// JSON schema shared by the CLI, the HTTP API and the explorer:
// {"r":…, "K":…, "alpha":…|null, "predators":[{"kind":…, "m":…, "a":…, "d":…}]}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredatorDoc {
    pub kind: ResponseKind,
    pub m: f64,
    pub a: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub r: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub predators: Vec<PredatorDoc>,
}

impl TryFrom<ParamsDoc> for ModelParams {
    type Error = Error;

    fn try_from(doc: ParamsDoc) -> Result<Self> {
        let predators = doc
            .predators
            .into_iter()
            .map(|p| {
                Predator::new(
                    FunctionalResponse {
                        kind: p.kind,
                        m: p.m,
                        a: p.a,
                    },
                    p.d,
                )
            })
            .collect();
        ModelParams::new(doc.r, GrowthLaw::logistic(doc.k), predators, doc.alpha)
    }
}

impl From<ModelParams> for ParamsDoc {
    fn from(p: ModelParams) -> Self {
        ParamsDoc {
            r: p.r,
            k: p.k(),
            alpha: p.alpha,
            predators: p
                .predators
                .iter()
                .map(|q| PredatorDoc {
                    kind: q.response.kind,
                    m: q.response.m,
                    a: q.response.a,
                    d: q.d,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn holling_value_at_equilibrium_ratio() {
        let p = FunctionalResponse::holling(16.0, 4.0);
        assert_eq!(p.value(0.25).unwrap(), 8.0);
        assert!(rel(p.value(1e-12).unwrap(), 16.0) < 1e-10);
    }

    #[test]
    fn ivlev_value_at_inverse_ln2() {
        let p = FunctionalResponse::ivlev(16.0, 1.0);
        let u = 1.0 / std::f64::consts::LN_2;
        assert!(rel(p.value(u).unwrap(), 8.0) < 1e-14);
    }

    #[test]
    fn ivlev_saturates_without_underflow() {
        let p = FunctionalResponse::ivlev(3.0, 1.0);
        assert_eq!(p.value(1e-5).unwrap(), 3.0);
        let d = p.derivative(1e-5).unwrap();
        assert!(d <= 0.0 && d.is_finite());
    }

    #[test]
    fn non_positive_ratio_is_a_domain_error() {
        let p = FunctionalResponse::holling(2.0, 1.0);
        assert!(matches!(p.value(0.0), Err(Error::Domain(_))));
        assert!(matches!(p.derivative(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn derivatives_match_hand_values() {
        assert_eq!(
            FunctionalResponse::holling(16.0, 4.0)
                .derivative(0.25)
                .unwrap(),
            -16.0
        );
        assert_eq!(
            FunctionalResponse::holling(18.0, 2.0)
                .derivative(0.25)
                .unwrap(),
            -16.0
        );
        let ln2 = std::f64::consts::LN_2;
        let d = FunctionalResponse::ivlev(16.0, 1.0)
            .derivative(1.0 / ln2)
            .unwrap();
        assert!(rel(d, -8.0 * ln2 * ln2) < 1e-14);
        assert!((d + 3.84362).abs() < 1e-5);
    }

    #[test]
    fn equilibrium_ratio_closed_forms() {
        assert_eq!(
            FunctionalResponse::holling(16.0, 4.0)
                .equilibrium_ratio(8.0)
                .unwrap(),
            0.25
        );
        assert_eq!(
            FunctionalResponse::holling(18.0, 2.0)
                .equilibrium_ratio(12.0)
                .unwrap(),
            0.25
        );
        let u = FunctionalResponse::ivlev(16.0, 1.0)
            .equilibrium_ratio(8.0)
            .unwrap();
        assert!(rel(u, 1.0 / std::f64::consts::LN_2) < 1e-14);
        assert!(matches!(
            FunctionalResponse::holling(2.0, 1.0).equilibrium_ratio(2.0),
            Err(Error::NoSurvival { .. })
        ));
    }

    #[test]
    fn example_equilibrium() {
        let p = presets::holling_two_predator(13.0, None);
        let e = p.equilibrium().unwrap();
        let f = 1.0 - 5.0 / 13.0;
        assert!(rel(e.x_star, 0.1 * f) < 1e-12);
        for y in &e.y_star {
            assert!(rel(*y, f / 40.0) < 1e-12);
        }
        assert_eq!(e.q_star, e.x_star);
        assert!(matches!(
            p.with_r(5.0).unwrap().equilibrium(),
            Err(Error::NoPositiveEquilibrium { .. })
        ));
    }

    #[test]
    fn single_predator_half_capacity() {
        let d = 1.5;
        let k = 2.0;
        let p = ModelParams::new(
            2.0 * d,
            GrowthLaw::logistic(k),
            vec![Predator::new(FunctionalResponse::holling(2.0 * d, 1.0), d)],
            None,
        )
        .unwrap();
        let e = p.equilibrium().unwrap();
        assert_eq!(e.u_star[0], 1.0);
        assert!(rel(e.x_star, k / 2.0) < 1e-12);
        assert!(rel(e.y_star[0], k / 2.0) < 1e-12);
        let f = p.rhs_undelayed(&e.state()).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn bisection_fallback_agrees_with_closed_form() {
        let g = GrowthLaw::logistic(0.1);
        for (r, load) in [(13.0, 5.0), (5.5, 5.0), (100.0, 0.3)] {
            let closed = g.equilibrium_prey(r, load).unwrap();
            let bis = bisect_prey_equilibrium(&g, r, load).unwrap();
            assert!((closed - bis).abs() < 1e-14, "{closed} vs {bis}");
        }
        assert!(bisect_prey_equilibrium(&g, 5.0, 5.0).is_none());
    }

    #[test]
    fn growth_law_sign_condition() {
        let g = GrowthLaw::logistic(0.7);
        assert_eq!(g.value(0.7), 0.0);
        for i in 0..100 {
            let x = i as f64 * 0.02;
            if x != 0.7 {
                assert!((0.7 - x) * g.value(x) > 0.0);
            }
        }
    }

    #[test]
    fn undelayed_rhs_hand_expansion() {
        let p = presets::holling_two_predator(13.0, None);
        let s = State::undelayed(0.1, vec![0.025, 0.025]);
        let f = p.rhs_undelayed(&s).unwrap();
        // x = K: prey growth vanishes, u_i = 1/4 gives p_1 = 8, p_2 = 12.
        let expect = [-(0.025 * 8.0 + 0.025 * 12.0), 0.0, 0.0];
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{f:?}");
        }
        assert!(f[0] < 0.0);
    }

    #[test]
    fn delayed_rhs_memory_component() {
        let p = presets::holling_two_predator(13.0, Some(1.0));
        let s = State::delayed(0.05, vec![0.02, 0.02], 0.08);
        let f = p.rhs_delayed(&s).unwrap();
        assert!((f[3] + 0.03).abs() < 1e-15);
        // y_1' = y_1 (16 / (4 * 0.02/0.08 + 1)) - 8 y_1 with u = y/q = 0.25
        assert!((f[1] - (0.02 * 8.0 - 8.0 * 0.02)).abs() < 1e-15);
        let prey = 13.0 * 0.05 * (1.0 - 0.5)
            - 0.02 * 16.0 / (4.0 * 0.4 + 1.0)
            - 0.02 * 18.0 / (2.0 * 0.4 + 1.0);
        assert!((f[0] - prey).abs() < 1e-15);

        let same = State::delayed(0.05, vec![0.02, 0.02], 0.05);
        assert_eq!(p.rhs_delayed(&same).unwrap()[3], 0.0);
    }

    #[test]
    fn rhs_rejects_bad_states() {
        let p = presets::holling_two_predator(13.0, Some(1.0));
        assert!(matches!(
            p.rhs_undelayed(&State::undelayed(0.0, vec![0.1, 0.1])),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            p.rhs_delayed(&State::delayed(0.1, vec![0.1, 0.1], 0.0)),
            Err(Error::Singular(_))
        ));
        assert!(matches!(
            p.rhs_undelayed(&State::undelayed(0.1, vec![-0.1, 0.1])),
            Err(Error::NonPositiveState(_))
        ));
        let no_alpha = p.with_alpha(None).unwrap();
        assert!(matches!(
            no_alpha.rhs_delayed(&State::delayed(0.1, vec![0.1, 0.1], 0.1)),
            Err(Error::MissingAlpha)
        ));
    }

    #[test]
    fn prey_only_limit() {
        let p = ModelParams::new(
            2.0,
            GrowthLaw::logistic(1.0),
            vec![Predator::new(FunctionalResponse::holling(3.0, 1.0), 1.0)],
            None,
        )
        .unwrap();
        let f = p
            .rhs_undelayed(&State::undelayed(0.3, vec![1e-14]))
            .unwrap();
        assert!((f[0] - 2.0 * 0.3 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_params() {
        let mk = |m: f64, d: f64, alpha: Option<f64>| {
            ModelParams::new(
                1.0,
                GrowthLaw::logistic(1.0),
                vec![Predator::new(FunctionalResponse::holling(m, 1.0), d)],
                alpha,
            )
        };
        assert!(matches!(mk(1.0, 1.0, None), Err(Error::NoSurvival { .. })));
        assert!(matches!(mk(2.0, -1.0, None), Err(Error::InvalidParams(_))));
        assert!(matches!(
            mk(2.0, 1.0, Some(0.0)),
            Err(Error::InvalidParams(_))
        ));
        assert!(ModelParams::new(1.0, GrowthLaw::logistic(1.0), vec![], None).is_err());
    }

    #[test]
    fn params_json_schema() {
        let json = r#"{"r":13,"K":0.1,"alpha":null,"predators":[
            {"kind":"holling","m":16,"a":4,"d":8},
            {"kind":"ivlev","m":18,"a":2,"d":12}]}"#;
        let p: ModelParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.k(), 0.1);
        assert_eq!(p.alpha, None);
        assert_eq!(p.predators[1].response.kind, ResponseKind::Ivlev);
        let back = serde_json::to_value(&p).unwrap();
        assert_eq!(back["K"], 0.1);
        assert_eq!(back["predators"][0]["kind"], "holling");

        let bad = r#"{"r":13,"K":0.1,"predators":[{"kind":"holling","m":1,"a":4,"d":8}]}"#;
        assert!(serde_json::from_str::<ModelParams>(bad).is_err());
    }

    #[test]
    fn nullcline_near_capacity_for_vanishing_predators() {
        let p = presets::holling_two_predator(10.0, None);
        let grid = NullclineGrid {
            y1_min: 1e-9,
            y1_max: 1e-9,
            y2_min: 1e-9,
            y2_max: 1e-9,
            n1: 1,
            n2: 1,
        };
        let mesh = p.prey_nullcline_sample(&grid).unwrap();
        let top = mesh.cells[0].roots.iter().cloned().fold(0.0, f64::max);
        assert!((top - 0.1).abs() < 1e-6, "{:?}", mesh.cells[0].roots);
    }

    #[test]
    fn nullcline_points_are_roots_and_contain_equilibrium() {
        let p = presets::holling_two_predator(10.0, None);
        let e = p.equilibrium().unwrap();
        let grid = NullclineGrid {
            y1_min: e.y_star[0] / 4.0,
            y1_max: e.y_star[0] * 2.0,
            y2_min: e.y_star[1] / 4.0,
            y2_max: e.y_star[1] * 2.0,
            n1: 8,
            n2: 8,
        };
        let mesh = p.prey_nullcline_sample(&grid).unwrap();
        let mut found = 0;
        for c in &mesh.cells {
            for &x in &c.roots {
                assert!(p.prey_growth(x, &[c.y1, c.y2]).abs() < 1e-10);
                found += 1;
            }
        }
        assert!(found > 0);
        // (y_1*, y_2*) is the grid node (i, j) = (3, 3) up to rounding.
        let cell = mesh
            .cells
            .iter()
            .min_by(|a, b| {
                let da = (a.y1 - e.y_star[0]).abs() + (a.y2 - e.y_star[1]).abs();
                let db = (b.y1 - e.y_star[0]).abs() + (b.y2 - e.y_star[1]).abs();
                da.total_cmp(&db)
            })
            .unwrap();
        assert!(cell.roots.iter().any(|x| (x - e.x_star).abs() < 1e-9));
    }

    #[test]
    fn nullcline_requires_two_predators() {
        let p = ModelParams::new(
            2.0,
            GrowthLaw::logistic(1.0),
            vec![Predator::new(FunctionalResponse::holling(3.0, 1.0), 1.0)],
            None,
        )
        .unwrap();
        let grid = NullclineGrid {
            y1_min: 0.1,
            y1_max: 0.2,
            y2_min: 0.1,
            y2_max: 0.2,
            n1: 2,
            n2: 2,
        };
        assert!(matches!(
            p.prey_nullcline_sample(&grid),
            Err(Error::UnsupportedDimension { .. })
        ));
    }
}
