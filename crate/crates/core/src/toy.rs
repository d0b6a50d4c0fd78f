//! Warm-up problem: maximize `E ∫ C dP̃` over `|C| ≤ 1` on `[0, 1]` with
//! uniform(−1, 1) marks and a threshold sensor.

use crate::control::toy_control;
use crate::par::{map_indexed, Execution};
use crate::path_model::{simulate_path, JumpLaw, ModelParams};
use crate::rng::{sample_rng, Stream};
use crate::sensor::SensorSpec;
use crate::stats::McEstimate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyConfig {
    pub lambda: f64,
    pub eta: SensorSpec,
    pub n_paths: usize,
    pub seed: u64,
}

fn toy_params(lambda: f64) -> ModelParams {
    ModelParams { p_tilde: 0.0, r: 1.0, lambda, c0: 0.0, law: JumpLaw::Uniform { lo: -1.0, hi: 1.0 } }
}

/// `λ(1 − η²)/2` for `η ≤ 1`, and 0 when nothing is ever detected.
pub fn toy_value_exact(lambda: f64, eta: SensorSpec) -> f64 {
    match eta {
        SensorSpec::Threshold(e) if e < 1.0 => 0.5 * lambda * (1.0 - e * e),
        _ => 0.0,
    }
}

fn estimate(cfg: &ToyConfig, exec: Execution, payoff: impl Fn(&crate::path_model::EventPath) -> f64 + Sync + Send) -> McEstimate {
    let params = toy_params(cfg.lambda);
    let xs = map_indexed(cfg.n_paths, exec, |i| payoff(&simulate_path(&params, 1.0, &mut sample_rng(cfg.seed, Stream::Toy, i as u64))));
    McEstimate::from_samples(&xs)
}

/// Monte Carlo value of the bang-bang sensor control.
pub fn toy_value_mc(cfg: &ToyConfig, exec: Execution) -> McEstimate {
    estimate(cfg, exec, |path| {
        toy_control(path, cfg.eta).iter().zip(&path.events).map(|(&c, e)| c as f64 * e.mark).sum()
    })
}

/// Monte Carlo value of a control fixed before each jump: the sign of the
/// previous mark (0 before the first one).
pub fn toy_predictable_mc(cfg: &ToyConfig, exec: Execution) -> McEstimate {
    estimate(cfg, exec, |path| {
        let mut action = 0.0;
        let mut total = 0.0;
        for e in &path.events {
            total += action * e.mark;
            action = if e.mark > 0.0 { 1.0 } else { -1.0 };
        }
        total
    })
}
