//! Threshold sensor: which jumps the controller sees at the instant they happen.

use crate::error::Result;
use crate::path_model::{EventPath, JumpLaw, Side};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Detection threshold. `Threshold(0.0)` sees every jump, `Infinite` none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensorSpec {
    Threshold(f64),
    Infinite,
}

impl SensorSpec {
    pub fn optional() -> SensorSpec {
        SensorSpec::Threshold(0.0)
    }

    pub fn predictable() -> SensorSpec {
        SensorSpec::Infinite
    }

    pub fn new(eta: f64) -> Result<SensorSpec> {
        if eta == f64::INFINITY {
            Ok(SensorSpec::Infinite)
        } else if eta >= 0.0 && eta.is_finite() {
            Ok(SensorSpec::Threshold(eta))
        } else {
            Err(crate::Error::InvalidParams(format!("eta must be >= 0, got {eta}")))
        }
    }

    pub fn detects(self, mark: f64) -> bool {
        match self {
            SensorSpec::Threshold(eta) => mark.abs() >= eta,
            SensorSpec::Infinite => false,
        }
    }

    /// Numeric view; `Infinite` maps to `f64::INFINITY` for output only.
    pub fn as_f64(self) -> f64 {
        match self {
            SensorSpec::Threshold(eta) => eta,
            SensorSpec::Infinite => f64::INFINITY,
        }
    }

    /// Short file-name friendly label.
    pub fn label(self) -> String {
        match self {
            SensorSpec::Threshold(eta) => format!("{eta}"),
            SensorSpec::Infinite => "inf".to_string(),
        }
    }
}

impl fmt::Display for SensorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Serialize for SensorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SensorSpec::Threshold(eta) => s.serialize_f64(*eta),
            SensorSpec::Infinite => s.serialize_str("predictable"),
        }
    }
}

impl<'de> Deserialize<'de> for SensorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<SensorSpec, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => SensorSpec::new(v).map_err(serde::de::Error::custom),
            Raw::Tag(t) => match t.as_str() {
                "optional" => Ok(SensorSpec::optional()),
                "predictable" | "inf" => Ok(SensorSpec::Infinite),
                other => Err(serde::de::Error::custom(format!(
                    "eta must be a number, \"optional\" or \"predictable\", got {other:?}"
                ))),
            },
        }
    }
}

/// P(|Y| < eta).
pub fn failure_prob(law: &JumpLaw, sensor: SensorSpec) -> f64 {
    match sensor {
        SensorSpec::Threshold(eta) => law.prob_abs_below(eta),
        SensorSpec::Infinite => 1.0,
    }
}

/// Information regime implied by the detection failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Predictable,
    Sensor,
    Optional,
}

impl Regime {
    pub fn of(law: &JumpLaw, sensor: SensorSpec) -> Regime {
        let p = failure_prob(law, sensor);
        if p == 0.0 {
            Regime::Optional
        } else if p == 1.0 {
            Regime::Predictable
        } else {
            Regime::Sensor
        }
    }
}

/// An event path as seen through a sensor.
#[derive(Debug, Clone)]
pub struct ObservedPath {
    pub path: EventPath,
    pub sensor: SensorSpec,
    pub detected: Vec<bool>,
}

pub fn observe(path: &EventPath, sensor: SensorSpec) -> ObservedPath {
    let detected = path.events.iter().map(|e| sensor.detects(e.mark)).collect();
    ObservedPath { path: path.clone(), sensor, detected }
}

impl ObservedPath {
    /// Observable P̃ at the instant of event `k`.
    pub fn observed_level(&self, k: usize) -> f64 {
        if self.detected[k] {
            self.path.level_after(k)
        } else {
            self.path.level_before(k)
        }
    }

    fn event_at(&self, t: f64) -> Option<usize> {
        let k = self.path.events.partition_point(|e| e.time < t);
        (k < self.path.len() && self.path.events[k].time == t).then_some(k)
    }

    /// Observable undiscounted reward at `t`.
    pub fn observed_reward(&self, t: f64, side: Side) -> Result<f64> {
        match side {
            Side::Left | Side::Right => self.path.reward_at(t, side),
            Side::At => match self.event_at(t) {
                Some(k) => {
                    self.path.reward_at(t, Side::At)?;
                    Ok(self.observed_level(k))
                }
                None => self.path.reward_at(t, Side::At),
            },
        }
    }

    /// Observable jump indicator at `t`.
    pub fn jump_indicator(&self, t: f64) -> bool {
        self.event_at(t).is_some_and(|k| self.detected[k])
    }
}

/// Discounted observable reward e^{−rt} times the observable level.
pub fn projected_reward(obs: &ObservedPath, t: f64, r: f64, side: Side) -> Result<f64> {
    Ok((-r * t).exp() * obs.observed_reward(t, side)?)
}
