//! Compound Poisson reward paths and the discounted risk clock.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Distribution of the jump marks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpLaw {
    Uniform { lo: f64, hi: f64 },
    GaussianMixture(Vec<MixtureComponent>),
    Discrete(Vec<Atom>),
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * (1.0 + libm::erf((x - mean) / (sd * std::f64::consts::SQRT_2)))
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

impl JumpLaw {
    /// Point mass at `v`.
    pub fn constant(v: f64) -> JumpLaw {
        JumpLaw::Discrete(vec![Atom { value: v, prob: 1.0 }])
    }

    /// The two-bump mixture used throughout the case study.
    pub fn illustration() -> JumpLaw {
        JumpLaw::GaussianMixture(vec![
            MixtureComponent { weight: 0.5, mean: -3.0, stddev: 2.0 },
            MixtureComponent { weight: 0.5, mean: 6.0, stddev: 2.0 },
        ])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidLaw(m.to_string()));
        match self {
            JumpLaw::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad("uniform needs finite lo < hi");
                }
            }
            JumpLaw::GaussianMixture(cs) => {
                if cs.is_empty() {
                    return bad("empty mixture");
                }
                if cs.iter().any(|c| !(c.weight >= 0.0 && c.mean.is_finite() && c.stddev > 0.0 && c.stddev.is_finite())) {
                    return bad("mixture components need weight >= 0, finite mean, stddev > 0");
                }
                let w: f64 = cs.iter().map(|c| c.weight).sum();
                if (w - 1.0).abs() > SUM_TOL {
                    return bad("mixture weights must sum to 1");
                }
            }
            JumpLaw::Discrete(atoms) => {
                if atoms.is_empty() {
                    return bad("empty discrete law");
                }
                if atoms.iter().any(|a| !(a.prob >= 0.0 && a.value.is_finite())) {
                    return bad("discrete atoms need prob >= 0 and finite value");
                }
                if atoms.iter().any(|a| a.value == 0.0 && a.prob > 0.0) {
                    return bad("discrete law puts mass on 0");
                }
                let p: f64 = atoms.iter().map(|a| a.prob).sum();
                if (p - 1.0).abs() > SUM_TOL {
                    return bad("discrete probabilities must sum to 1");
                }
            }
        }
        Ok(())
    }

    /// Draws one nonzero mark.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let y = match self {
                JumpLaw::Uniform { lo, hi } => rng.random_range(*lo..*hi),
                JumpLaw::GaussianMixture(cs) => {
                    let c = pick(cs.iter().map(|c| c.weight), cs.len(), rng);
                    let z: f64 = StandardNormal.sample(rng);
                    cs[c].mean + cs[c].stddev * z
                }
                JumpLaw::Discrete(atoms) => {
                    let k = pick(atoms.iter().map(|a| a.prob), atoms.len(), rng);
                    atoms[k].value
                }
            };
            if y != 0.0 {
                return y;
            }
        }
    }

    /// P(Y ≤ x).
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            JumpLaw::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            JumpLaw::GaussianMixture(cs) => cs.iter().map(|c| c.weight * normal_cdf(x, c.mean, c.stddev)).sum(),
            JumpLaw::Discrete(atoms) => atoms.iter().filter(|a| a.value <= x).map(|a| a.prob).sum(),
        }
    }

    /// Density for the continuous variants, `None` for discrete laws.
    pub fn pdf(&self, x: f64) -> Option<f64> {
        match self {
            JumpLaw::Uniform { lo, hi } => Some(if x >= *lo && x <= *hi { 1.0 / (hi - lo) } else { 0.0 }),
            JumpLaw::GaussianMixture(cs) => Some(cs.iter().map(|c| c.weight * normal_pdf(x, c.mean, c.stddev)).sum()),
            JumpLaw::Discrete(_) => None,
        }
    }

    /// P(|Y| < eta) for finite `eta ≥ 0`.
    pub fn prob_abs_below(&self, eta: f64) -> f64 {
        if eta <= 0.0 {
            return 0.0;
        }
        let p = match self {
            JumpLaw::Discrete(atoms) => atoms.iter().filter(|a| a.value.abs() < eta).map(|a| a.prob).sum(),
            _ => self.cdf(eta) - self.cdf(-eta),
        };
        p.clamp(0.0, 1.0)
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            JumpLaw::GaussianMixture(cs) => cs.iter().map(|c| c.weight * c.mean).sum(),
            JumpLaw::Discrete(atoms) => atoms.iter().map(|a| a.prob * a.value).sum(),
        }
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            JumpLaw::Uniform { lo, hi } => (lo * lo + lo * hi + hi * hi) / 3.0,
            JumpLaw::GaussianMixture(cs) => cs.iter().map(|c| c.weight * (c.mean * c.mean + c.stddev * c.stddev)).sum(),
            JumpLaw::Discrete(atoms) => atoms.iter().map(|a| a.prob * a.value * a.value).sum(),
        }
    }

    /// Root mean square mark, used to size grids.
    pub fn scale(&self) -> f64 {
        self.second_moment().sqrt()
    }
}

fn pick<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, n: usize, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    n - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub p_tilde: f64,
    pub r: f64,
    pub lambda: f64,
    pub c0: f64,
    pub law: JumpLaw,
}

impl ModelParams {
    /// λ = 0.5, r = 1, p̃ = −10, c₀ = −12 with the two-bump mixture.
    pub fn illustration() -> ModelParams {
        ModelParams { p_tilde: -10.0, r: 1.0, lambda: 0.5, c0: -12.0, law: JumpLaw::illustration() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::InvalidParams(format!("r must be positive, got {}", self.r)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !self.p_tilde.is_finite() || !self.c0.is_finite() {
            return Err(Error::InvalidParams("p_tilde and c0 must be finite".into()));
        }
        self.law.validate()
    }

    /// a = r/λ.
    pub fn a(&self) -> f64 {
        self.r / self.lambda
    }

    /// Truncation horizon ln(1/ε)/r.
    pub fn horizon(&self, eps_trunc: f64) -> f64 {
        (1.0 / eps_trunc).ln() / self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub mark: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    At,
    Right,
}

/// One realized trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPath {
    pub p_tilde: f64,
    pub events: Vec<Event>,
    pub horizon: f64,
    /// P̃ right after each event.
    levels: Vec<f64>,
}

impl EventPath {
    pub fn new(p_tilde: f64, events: Vec<Event>, horizon: f64) -> Result<EventPath> {
        let mut prev = 0.0;
        for e in &events {
            if e.time <= prev {
                return Err(Error::InvalidParams("event times must be positive and strictly increasing".into()));
            }
            if e.time > horizon {
                return Err(Error::InvalidParams("event after horizon".into()));
            }
            if e.mark == 0.0 || !e.mark.is_finite() {
                return Err(Error::InvalidParams("marks must be finite and nonzero".into()));
            }
            prev = e.time;
        }
        Ok(Self::from_parts(p_tilde, events, horizon))
    }

    fn from_parts(p_tilde: f64, events: Vec<Event>, horizon: f64) -> EventPath {
        let mut level = p_tilde;
        let levels = events
            .iter()
            .map(|e| {
                level += e.mark;
                level
            })
            .collect();
        EventPath { p_tilde, events, horizon, levels }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// P̃ right after event `k`.
    pub fn level_after(&self, k: usize) -> f64 {
        self.levels[k]
    }

    /// P̃ right before event `k`.
    pub fn level_before(&self, k: usize) -> f64 {
        if k == 0 {
            self.p_tilde
        } else {
            self.levels[k - 1]
        }
    }

    /// Number of events at times `< t` (left) or `≤ t` (at, right).
    pub fn count(&self, t: f64, side: Side) -> usize {
        match side {
            Side::Left => self.events.partition_point(|e| e.time < t),
            Side::At | Side::Right => self.events.partition_point(|e| e.time <= t),
        }
    }

    pub fn reward_at(&self, t: f64, side: Side) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutOfDomain { t, horizon: self.horizon });
        }
        let n = self.count(t, side);
        Ok(if n == 0 { self.p_tilde } else { self.levels[n - 1] })
    }
}

pub fn simulate_path<R: Rng + ?Sized>(params: &ModelParams, horizon: f64, rng: &mut R) -> EventPath {
    let exp = Exp::new(params.lambda).expect("lambda validated positive");
    let mut events = Vec::new();
    let mut t = 0.0;
    if horizon > 0.0 {
        loop {
            t += exp.sample(rng);
            if t > horizon {
                break;
            }
            events.push(Event { time: t, mark: params.law.sample(rng) });
        }
    }
    EventPath::from_parts(params.p_tilde, events, horizon.max(0.0))
}

/// Atoms of the discounted counting measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAtoms {
    pub atoms: Vec<(f64, f64)>,
}

impl RiskAtoms {
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

pub fn risk_atoms(path: &EventPath, r: f64) -> RiskAtoms {
    RiskAtoms { atoms: path.events.iter().map(|e| (e.time, (-r * e.time).exp())).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{sample_rng, Stream};

    fn two_events() -> EventPath {
        EventPath::new(0.0, vec![Event { time: 1.0, mark: 2.0 }, Event { time: 2.0, mark: -3.0 }], 5.0).unwrap()
    }

    #[test]
    fn reward_sides() {
        let p = two_events();
        assert_eq!(p.reward_at(0.5, Side::Left).unwrap(), 0.0);
        assert_eq!(p.reward_at(0.5, Side::At).unwrap(), 0.0);
        assert_eq!(p.reward_at(2.0, Side::At).unwrap(), -1.0);
        assert_eq!(p.reward_at(2.0, Side::Left).unwrap(), 2.0);
        assert!(p.reward_at(5.5, Side::At).is_err());
        assert!(p.reward_at(-0.1, Side::Left).is_err());
    }

    #[test]
    fn zero_horizon_is_empty() {
        let params = ModelParams::illustration();
        let p = simulate_path(&params, 0.0, &mut sample_rng(1, Stream::Scenario, 0));
        assert!(p.is_empty());
    }

    #[test]
    fn risk_weight_at_ln2() {
        let p = EventPath::new(0.0, vec![Event { time: 2f64.ln(), mark: 1.0 }], 3.0).unwrap();
        let a = risk_atoms(&p, 1.0);
        assert!((a.atoms[0].1 - 0.5).abs() < 1e-15);
        assert!(risk_atoms(&EventPath::new(0.0, vec![], 1.0).unwrap(), 1.0).atoms.is_empty());
    }

    #[test]
    fn law_validation() {
        assert!(JumpLaw::constant(0.0).validate().is_err());
        assert!(JumpLaw::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(JumpLaw::Discrete(vec![Atom { value: 1.0, prob: 0.5 }]).validate().is_err());
        assert!(JumpLaw::GaussianMixture(vec![MixtureComponent { weight: 1.0, mean: 0.0, stddev: 0.0 }]).validate().is_err());
        assert!(JumpLaw::illustration().validate().is_ok());
    }

    #[test]
    fn uniform_abs_probability() {
        let law = JumpLaw::Uniform { lo: -1.0, hi: 1.0 };
        assert!((law.prob_abs_below(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(law.prob_abs_below(0.0), 0.0);
        assert_eq!(law.prob_abs_below(3.0), 1.0);
    }

    #[test]
    fn discrete_abs_probability_is_strict() {
        let law = JumpLaw::Discrete(vec![Atom { value: -2.0, prob: 0.25 }, Atom { value: 3.0, prob: 0.75 }]);
        assert_eq!(law.prob_abs_below(2.0), 0.0);
        assert_eq!(law.prob_abs_below(2.5), 0.25);
        assert_eq!(law.prob_abs_below(3.0), 0.25);
        assert_eq!(law.prob_abs_below(3.0001), 1.0);
    }

    #[test]
    fn illustration_moments() {
        let law = JumpLaw::illustration();
        assert_eq!(law.mean(), 1.5);
        assert_eq!(law.second_moment(), 0.5 * (9.0 + 4.0) + 0.5 * (36.0 + 4.0));
    }
}
