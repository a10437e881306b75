//! The network-independent lower bound on the probability of consensus,
//! `P(consensus) ≥ 1 − E‖X − 𝖼‖ / (τ − 𝖣/2)` for `τ > 𝖣/2`, and its closed
//! forms for uniform and triangular initial laws on a ball.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::init::InitialDistribution;
use crate::space::{Opinion, OpinionSpace};

/// `E‖X − 𝖼‖`, exact or estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectedDisagreement {
    pub value: f64,
    /// Standard error when the value is a Monte Carlo estimate.
    pub std_error: Option<f64>,
}

impl ExpectedDisagreement {
    pub fn exact(value: f64) -> Self {
        ExpectedDisagreement { value, std_error: None }
    }

    /// Analytic value when the law has one, otherwise a Monte Carlo estimate
    /// from `mc_samples` draws.
    pub fn of<R: Rng + ?Sized>(dist: &InitialDistribution, mc_samples: usize, rng: &mut R) -> Result<Self> {
        match dist.expected_disagreement_analytic() {
            Ok(v) => Ok(Self::exact(v)),
            Err(Error::NoClosedForm(_)) => {
                let est = dist.expected_disagreement_mc(dist.space().center(), mc_samples, rng)?;
                Ok(ExpectedDisagreement { value: est.mean, std_error: Some(est.std_error) })
            }
            Err(e) => Err(e),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub tau: f64,
    pub diameter: f64,
    pub center: Opinion,
    pub expected_disagreement: f64,
    pub expected_disagreement_se: Option<f64>,
    /// `None` when `tau <= diameter / 2`.
    pub raw_bound: Option<f64>,
    pub clamped_bound: f64,
    pub applicable: bool,
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bound report serializes")
    }

    pub fn csv_header() -> &'static [&'static str] {
        &[
            "tau",
            "diameter",
            "expected_disagreement",
            "expected_disagreement_se",
            "raw_bound",
            "clamped_bound",
            "applicable",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.tau.to_string(),
            self.diameter.to_string(),
            self.expected_disagreement.to_string(),
            opt(self.expected_disagreement_se),
            opt(self.raw_bound),
            self.clamped_bound.to_string(),
            self.applicable.to_string(),
        ]
    }
}

pub fn consensus_lower_bound(tau: f64, space: &OpinionSpace, expected: ExpectedDisagreement) -> Result<BoundReport> {
    if !(expected.value >= 0.0 && expected.value.is_finite()) {
        return Err(Error::invalid(format!("expected disagreement must be >= 0, got {}", expected.value)));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let half = space.diameter() / 2.0;
    let applicable = tau > half;
    let raw_bound = applicable.then(|| 1.0 - expected.value / (tau - half));
    Ok(BoundReport {
        tau,
        diameter: space.diameter(),
        center: space.center().to_vec(),
        expected_disagreement: expected.value,
        expected_disagreement_se: expected.std_error,
        raw_bound,
        clamped_bound: raw_bound.map_or(0.0, |b| b.max(0.0)),
        applicable,
    })
}

fn check_ball_args(d: usize, r: f64, tau: f64) -> Result<()> {
    if d == 0 || !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("need d >= 1 and r > 0, got d={d}, r={r}")));
    }
    if tau.partial_cmp(&r) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::invalid(format!("inapplicable: tau = {tau} <= D/2 = {r}")));
    }
    Ok(())
}

/// Uniform law on a `d`-dimensional ball of radius `r`: `1 − dr / ((d+1)(τ − r))`.
pub fn example_uniform_bound(d: usize, r: f64, tau: f64) -> Result<f64> {
    check_ball_args(d, r, tau)?;
    let d = d as f64;
    Ok(1.0 - d * r / ((d + 1.0) * (tau - r)))
}

/// Triangular law on a `d`-dimensional ball of radius `r`: `1 − dr / ((d+2)(τ − r))`.
pub fn example_triangular_bound(d: usize, r: f64, tau: f64) -> Result<f64> {
    check_ball_args(d, r, tau)?;
    let d = d as f64;
    Ok(1.0 - d * r / ((d + 2.0) * (tau - r)))
}
