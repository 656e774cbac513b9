//! Full stability report for one parameter set, and one-parameter sweeps
//! classifying the equilibrium.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::conditions::{
    check_main3, check_sign_stability, check_strategy_threshold, AlleeZone, DelayRobustness,
    SignStability, StrategyFlag,
};
use super::eigen::{eigenvalues, spectral_abscissa, Stability};
use super::quartic::{
    h_cubic, hurwitz_quartic, quartic_coeffs, HCubic, HurwitzFlags, QuarticCoeffs,
};
use crate::error::{Error, Result};
use crate::linearize::{build_jacobians, JacobianPair};
use crate::model::{Equilibrium, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub has_equilibrium: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<Equilibrium>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a11: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allee_zone: Option<AlleeZone>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign_stability: Option<SignStability>,
    /// Only for two predators with a memory rate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartic: Option<QuarticCoeffs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hurwitz: Option<HurwitzFlags>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_cubic: Option<HCubic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay_robustness: Option<DelayRobustness>,
    pub strategy: Vec<StrategyFlag>,
    /// Every predator above its half-saturation bound (two predators only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy_threshold: Option<bool>,
    pub eigenvalues_a: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues_ad: Option<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_abscissa_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_abscissa_ad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_a: Option<Stability>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability_ad: Option<Stability>,
}

impl StabilityReport {
    fn without_equilibrium(strategy: Vec<StrategyFlag>) -> Self {
        Self {
            has_equilibrium: false,
            equilibrium: None,
            a11: None,
            allee_zone: None,
            sign_stability: None,
            quartic: None,
            hurwitz: None,
            h_cubic: None,
            delay_robustness: None,
            strategy,
            strategy_threshold: None,
            eigenvalues_a: vec![],
            eigenvalues_ad: None,
            spectral_abscissa_a: None,
            spectral_abscissa_ad: None,
            stability_a: None,
            stability_ad: None,
        }
    }
}

/// Runs every check that applies to `params`. A missing positive equilibrium
/// is reported through `has_equilibrium`, not as an error.
pub fn analyze(params: &ModelParams) -> Result<StabilityReport> {
    let strategy = check_strategy_threshold(params)?;
    let eq = match params.equilibrium() {
        Ok(eq) => eq,
        Err(Error::NoPositiveEquilibrium { .. }) => {
            return Ok(StabilityReport::without_equilibrium(strategy))
        }
        Err(e) => return Err(e),
    };
    let jac = build_jacobians(params, &eq);
    analyze_with(params, eq, &jac, strategy)
}

fn analyze_with(
    params: &ModelParams,
    eq: Equilibrium,
    jac: &JacobianPair,
    strategy: Vec<StrategyFlag>,
) -> Result<StabilityReport> {
    let two = params.n() == 2;
    let ev_a = eigenvalues(&jac.a)?;
    let sa = spectral_abscissa(&ev_a);
    let (ev_ad, sad) = match &jac.a_d {
        Some(ad) => {
            let ev = eigenvalues(ad)?;
            let s = spectral_abscissa(&ev);
            (Some(ev), Some(s))
        }
        None => (None, None),
    };
    let quartic = if two && jac.a_d.is_some() {
        Some(quartic_coeffs(jac)?)
    } else {
        None
    };
    let strategy_threshold = two.then(|| strategy.iter().all(|f| f.above_bound));
    Ok(StabilityReport {
        has_equilibrium: true,
        equilibrium: Some(eq),
        a11: Some(jac.labels.a11),
        allee_zone: Some(AlleeZone::from_a11(jac.labels.a11)),
        sign_stability: Some(check_sign_stability(jac)),
        hurwitz: quartic.as_ref().map(hurwitz_quartic),
        quartic,
        h_cubic: if two { Some(h_cubic(jac)?) } else { None },
        delay_robustness: if two { Some(check_main3(jac)?) } else { None },
        strategy,
        strategy_threshold,
        eigenvalues_a: ev_a,
        eigenvalues_ad: ev_ad,
        spectral_abscissa_a: Some(sa),
        spectral_abscissa_ad: sad,
        stability_a: Some(Stability::from_abscissa(sa)),
        stability_ad: sad.map(Stability::from_abscissa),
    })
}

/// Coarse classification of the equilibrium, from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumClass {
    /// No positive interior equilibrium.
    None,
    /// `A` is not stable.
    Unstable,
    /// `A` is stable.
    Stable,
    /// `A` satisfies the sufficient sign-stability conditions.
    SignStable,
    /// Sign-stable and the memory cannot destabilise it for any `alpha > 0`.
    DelayRobust,
}

impl EquilibriumClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EquilibriumClass::None => "none",
            EquilibriumClass::Unstable => "unstable",
            EquilibriumClass::Stable => "stable",
            EquilibriumClass::SignStable => "sign-stable",
            EquilibriumClass::DelayRobust => "delay-robust",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    R,
    K,
    Alpha,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(SweepParam::R),
            "K" | "k" => Ok(SweepParam::K),
            "alpha" => Ok(SweepParam::Alpha),
            other => Err(Error::InvalidParams(format!(
                "unknown sweep parameter {other:?} (expected r, K or alpha)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub class: EquilibriumClass,
    pub a11: Option<f64>,
    pub abscissa_a: Option<f64>,
    pub stable_a: bool,
    pub sign_stable: bool,
    pub delay_robust: bool,
    /// Present when the parameters carry a memory rate.
    pub abscissa_ad: Option<f64>,
    pub stable_ad: Option<bool>,
}

pub fn classify(params: &ModelParams) -> Result<SweepRow> {
    let report = analyze(params)?;
    Ok(row_from_report(f64::NAN, &report))
}

fn row_from_report(value: f64, rep: &StabilityReport) -> SweepRow {
    if !rep.has_equilibrium {
        return SweepRow {
            value,
            class: EquilibriumClass::None,
            a11: None,
            abscissa_a: None,
            stable_a: false,
            sign_stable: false,
            delay_robust: false,
            abscissa_ad: None,
            stable_ad: None,
        };
    }
    let stable_a = rep.stability_a.is_some_and(Stability::is_stable);
    let sign_stable = rep.sign_stability.as_ref().is_some_and(|s| s.holds);
    let delay_robust = rep.delay_robustness.as_ref().is_some_and(|d| d.holds);
    let class = if !stable_a {
        EquilibriumClass::Unstable
    } else if !sign_stable {
        EquilibriumClass::Stable
    } else if !delay_robust {
        EquilibriumClass::SignStable
    } else {
        EquilibriumClass::DelayRobust
    };
    SweepRow {
        value,
        class,
        a11: rep.a11,
        abscissa_a: rep.spectral_abscissa_a,
        stable_a,
        sign_stable,
        delay_robust,
        abscissa_ad: rep.spectral_abscissa_ad,
        stable_ad: rep.stability_ad.map(Stability::is_stable),
    }
}

/// Evenly spaced sweep of one parameter over `[from, to]` (`steps` values,
/// end points included).
pub fn sweep(
    base: &ModelParams,
    param: SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<SweepRow>> {
    if steps == 0 {
        return Err(Error::Domain("sweep needs at least one step".into()));
    }
    (0..steps)
        .map(|i| {
            let value = if steps == 1 {
                from
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            };
            let p = match param {
                SweepParam::R => base.with_r(value)?,
                SweepParam::K => base.with_k(value)?,
                SweepParam::Alpha => base.with_alpha(Some(value))?,
            };
            Ok(row_from_report(value, &analyze(&p)?))
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow], param: SweepParam) -> Result<String> {
    let name = match param {
        SweepParam::R => "r",
        SweepParam::K => "K",
        SweepParam::Alpha => "alpha",
    };
    let io = |e: csv::Error| Error::Numeric(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        name,
        "class",
        "a11",
        "abscissa_A",
        "stable_A",
        "sign_stable",
        "delay_robust",
        "abscissa_Ad",
        "stable_Ad",
    ])
    .map_err(io)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in rows {
        w.write_record([
            row.value.to_string(),
            row.class.as_str().to_string(),
            opt(row.a11),
            opt(row.abscissa_a),
            row.stable_a.to_string(),
            row.sign_stable.to_string(),
            row.delay_robust.to_string(),
            opt(row.abscissa_ad),
            row.stable_ad.map(|b| b.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
