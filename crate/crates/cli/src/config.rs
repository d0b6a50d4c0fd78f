//! Run configuration: one JSON document, every section optional.

use anyhow::{Context, Result};
use ladlag::barrier::GridSpec;
use ladlag::path_model::ModelParams;
use ladlag::sensor::SensorSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelParams,
    pub etas: Vec<SensorSpec>,
    pub mc: MonteCarlo,
    pub grid: GridSpec,
    pub seed: u64,
    pub out: PathBuf,
    pub simulate: SimulateOptions,
    pub value: ValueOptions,
    pub toy: ToyOptions,
    pub selfcheck: SelfcheckOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarlo {
    pub n_samples: usize,
    pub eps_trunc: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateOptions {
    /// Index of the shared scenario path on its stream.
    pub scenario: u64,
    pub calibrate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValueOptions {
    pub n_paths: usize,
    pub calibrate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyOptions {
    pub lambda: f64,
    pub etas: Vec<SensorSpec>,
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelfcheckOptions {
    pub fubini_fixtures: usize,
    pub cs_fixtures: usize,
    pub n_paths: usize,
    /// Sensors for the projection identity.
    pub projection_etas: Vec<SensorSpec>,
    /// Sensors for the two-estimator value identity.
    pub dual_etas: Vec<SensorSpec>,
}

fn eta_list(xs: &[f64]) -> Vec<SensorSpec> {
    xs.iter().map(|&x| SensorSpec::Threshold(x)).collect()
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut etas = eta_list(&[0.0, 1.5, 3.0, 4.5, 6.0, 7.5, 9.0, 12.0]);
        etas.push(SensorSpec::Infinite);
        RunConfig {
            model: ModelParams::illustration(),
            etas,
            mc: MonteCarlo::default(),
            grid: GridSpec::default(),
            seed: 0,
            out: PathBuf::from("run"),
            simulate: SimulateOptions::default(),
            value: ValueOptions::default(),
            toy: ToyOptions::default(),
            selfcheck: SelfcheckOptions::default(),
        }
    }
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { n_samples: 100_000, eps_trunc: 1e-8 }
    }
}

impl Default for ValueOptions {
    fn default() -> Self {
        ValueOptions { n_paths: 100_000, calibrate: false }
    }
}

impl Default for ToyOptions {
    fn default() -> Self {
        ToyOptions { lambda: 0.5, etas: eta_list(&[0.0, 0.3, 0.5, 0.7, 1.0]), n_paths: 100_000 }
    }
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions {
            fubini_fixtures: 200,
            cs_fixtures: 100,
            n_paths: 20_000,
            projection_etas: eta_list(&[3.0, 6.0]),
            dual_etas: vec![SensorSpec::Threshold(0.0), SensorSpec::Threshold(3.0), SensorSpec::Threshold(6.0), SensorSpec::Infinite],
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_samples: Option<usize>,
    pub n_paths: Option<usize>,
    pub etas: Option<Vec<SensorSpec>>,
    pub calibrate: bool,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, ov: &Overrides) -> Result<RunConfig> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = ov.seed {
            cfg.seed = s;
        }
        if let Some(o) = &ov.out {
            cfg.out = o.clone();
        }
        if let Some(n) = ov.n_samples {
            cfg.mc.n_samples = n;
        }
        if let Some(n) = ov.n_paths {
            cfg.value.n_paths = n;
            cfg.toy.n_paths = n;
            cfg.selfcheck.n_paths = n;
        }
        if let Some(e) = &ov.etas {
            cfg.etas = e.clone();
        }
        if ov.calibrate {
            cfg.simulate.calibrate = true;
            cfg.value.calibrate = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        anyhow::ensure!(!self.etas.is_empty(), "etas must not be empty");
        anyhow::ensure!(self.mc.n_samples >= 2, "mc.n_samples must be at least 2");
        anyhow::ensure!(self.mc.eps_trunc > 0.0 && self.mc.eps_trunc < 1.0, "mc.eps_trunc must lie in (0, 1)");
        anyhow::ensure!(self.grid.points >= 2, "grid.points must be at least 2");
        anyhow::ensure!(self.toy.lambda > 0.0, "toy.lambda must be positive");
        Ok(())
    }

    /// Hash of everything that can change an output byte. The output
    /// directory is left out so reruns elsewhere stamp the same hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.simulate.calibrate = false;
        c.value.calibrate = false;
        sha256_json(&c)
    }
}

pub fn sha256_json<T: Serialize>(v: &T) -> String {
    let bytes = serde_json::to_vec(v).expect("config types serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// Accepts a number, `optional` or `predictable`/`inf`.
pub fn parse_eta(s: &str) -> Result<SensorSpec, String> {
    match s {
        "optional" => Ok(SensorSpec::optional()),
        "predictable" | "inf" => Ok(SensorSpec::predictable()),
        _ => {
            let x: f64 = s.parse().map_err(|_| format!("not a threshold: {s}"))?;
            SensorSpec::new(x).map_err(|e| e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"seed": 1, "sede": 2}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"mc": {"n": 5}}"#).is_err());
    }

    #[test]
    fn sentinels_parse() {
        let c: RunConfig = serde_json::from_str(r#"{"etas": [0, "optional", 3.5, "predictable"]}"#).unwrap();
        assert_eq!(c.etas, vec![SensorSpec::Threshold(0.0), SensorSpec::Threshold(0.0), SensorSpec::Threshold(3.5), SensorSpec::Infinite]);
        assert_eq!(parse_eta("inf").unwrap(), SensorSpec::Infinite);
        assert!(parse_eta("-1").is_err());
    }

    #[test]
    fn flags_win() {
        let ov = Overrides { seed: Some(9), n_samples: Some(10), ..Default::default() };
        let c = RunConfig::load(None, &ov).unwrap();
        assert_eq!((c.seed, c.mc.n_samples), (9, 10));
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let b = RunConfig { out: PathBuf::from("elsewhere"), ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }
}
