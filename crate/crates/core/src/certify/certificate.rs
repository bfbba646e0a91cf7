use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::system::RateFunction;

/// Which sufficient condition a certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `μ(DF(t,x)) ≤ −c(t)`.
    OperatorMeasure,
    /// `⟨x−y, F(t,x)−F(t,y)⟩ ≤ −c(t)‖x−y‖²`.
    IntegralContractivity,
    /// `⟨x, F(t,x)⟩_T ≤ −c(t)‖x‖_T²`.
    IntegralPartial,
    /// `⟨x−y, F(t,x)−F(t,y)⟩_T ≤ −c(t)‖x−y‖_T²`.
    IntegralSemi,
    /// `μ(T DF(t,x) T†) ≤ −c(t)`.
    SemiMeasureBound,
    /// `ker T` is invariant: `T F(t,u) = 0` for `u ∈ ker T`.
    KernelInvariance,
    /// Reaction-diffusion hypotheses on `P`, `Γ` and `Df`.
    RdHypotheses,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Falsified,
}

/// The sample point achieving the worst margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Witness<T> {
    pub t: T,
    pub x: Vec<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<T>>,
}

/// Outcome of a sampled condition check.
///
/// `worst_margin ≤ 0` means every sample satisfied the inequality; a positive
/// margin comes with a witness and is a genuine counterexample. A certified
/// verdict is sampling evidence, not a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Certificate<T> {
    pub condition: Condition,
    pub rate: Option<RateFunction<T>>,
    pub samples: usize,
    pub seed: u64,
    pub worst_margin: T,
    pub witness: Option<Witness<T>>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T: Scalar> Certificate<T> {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// The constant rate this certificate vouches for, if it is certified
    /// with a constant rate.
    pub fn certified_constant_rate(&self) -> Result<T> {
        if !self.is_certified() {
            return Err(Error::InvalidParameter(format!(
                "certificate for {:?} is falsified (worst margin {})",
                self.condition, self.worst_margin
            )));
        }
        self.rate
            .as_ref()
            .and_then(RateFunction::as_constant)
            .ok_or_else(|| Error::InvalidParameter("certificate carries no constant rate".into()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

pub(crate) fn verdict_for<T: Scalar>(worst_margin: T) -> Verdict {
    if worst_margin <= T::zero() {
        Verdict::Certified
    } else {
        Verdict::Falsified
    }
}

/// Snaps a positive margin within `1e-9 · (1 + magnitude)` to zero so that
/// floating-point equality cases certify.
pub fn settle_margin<T: Scalar>(raw: T, magnitude: T) -> T {
    let tol = T::tolerance(1e-9) * (T::one() + magnitude.abs());
    if raw > T::zero() && raw <= tol {
        T::zero()
    } else {
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settle_only_absorbs_small_positive_values() {
        assert_eq!(settle_margin(1e-16, 1.0), 0.0);
        assert_eq!(settle_margin(-0.25, 1.0), -0.25);
        assert_eq!(settle_margin(0.5, 1.0), 0.5);
        assert_eq!(settle_margin(1e-8, 1e3), 0.0);
    }

    #[test]
    fn json_shape() {
        let c = Certificate::<f64> {
            condition: Condition::IntegralSemi,
            rate: Some(RateFunction::Constant(2.0)),
            samples: 3,
            seed: 7,
            worst_margin: 0.0,
            witness: Some(Witness { t: 1.0, x: vec![0.5], y: Some(vec![0.25]) }),
            verdict: Verdict::Certified,
            diagnostics: BTreeMap::new(),
            note: None,
        };
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["condition"], "integral_semi");
        assert_eq!(v["verdict"], "certified");
        assert_eq!(v["rate"], 2.0);
        assert_eq!(v["witness"]["y"][0], 0.25);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for k in ["condition", "rate", "samples", "seed", "worst_margin", "witness", "verdict"] {
            assert!(keys.contains(&k), "missing {k}");
        }
        let back: Certificate<f64> = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
