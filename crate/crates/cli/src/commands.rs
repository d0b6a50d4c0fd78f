use crate::config::{sha256_json, RunConfig};
use crate::output::{eta_file_label, write_csv, write_json, Stamp, VERSION};
use anyhow::{bail, Context, Result};
use ladlag::barrier::{BarrierTable, GridSpec};
use ladlag::calibration::{compute_constants, Constants, McConfig, SampleBank};
use ladlag::par::Execution;
use ladlag::path_model::{simulate_path, EventPath};
use ladlag::rng::{sample_rng, Stream};
use ladlag::sensor::SensorSpec;
use ladlag::study::{grid_covering, optimal_control, scenario_paths, trajectory_rows, value_sweep};
use ladlag::toy::{toy_value_exact, toy_value_mc, ToyConfig};
use log::info;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const CALIBRATION_FILE: &str = "calibration.json";

pub struct Ctx {
    pub cfg: RunConfig,
    pub exec: Execution,
    pub stamp: Stamp,
}

impl Ctx {
    pub fn new(cfg: RunConfig, exec: Execution) -> Result<Ctx> {
        std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        let stamp = Stamp { version: VERSION, config_hash: cfg.hash(), seed: cfg.seed };
        Ok(Ctx { cfg, exec, stamp })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn mc(&self) -> McConfig {
        McConfig {
            n_samples: self.cfg.mc.n_samples,
            eps_trunc: self.cfg.mc.eps_trunc,
            seed: self.cfg.seed,
            stream: Stream::Calibration,
            exec: self.exec,
        }
    }

    /// The shared scenario path that `simulate` re-observes under every sensor.
    pub fn scenario(&self) -> EventPath {
        let m = &self.cfg.model;
        let mut rng = sample_rng(self.cfg.seed, Stream::Scenario, self.cfg.simulate.scenario);
        simulate_path(m, m.horizon(self.cfg.mc.eps_trunc), &mut rng)
    }

    /// Configured grid, widened so the scenario never leaves it.
    pub fn grid(&self) -> GridSpec {
        grid_covering(&self.cfg.model, &self.cfg.grid, &[self.scenario()])
    }

    fn table_key(&self, eta: SensorSpec, grid: &GridSpec) -> String {
        sha256_json(&(&self.cfg.model, eta, grid, &self.cfg.mc, self.cfg.seed))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CachedTable {
    pub key: String,
    pub table: BarrierTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub grid: GridSpec,
    pub constants: Constants,
    pub tables: Vec<CachedTable>,
}

pub fn read_calibration(ctx: &Ctx) -> Result<Option<CalibrationFile>> {
    let path = ctx.path(CALIBRATION_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)?;
    let file = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(file))
}

pub fn calibrate(ctx: &Ctx) -> Result<CalibrationFile> {
    let grid = ctx.grid();
    info!("calibrating {} sensors on {} samples", ctx.cfg.etas.len(), ctx.cfg.mc.n_samples);
    let bank = SampleBank::build(&ctx.cfg.model, &ctx.mc())?;
    let constants = compute_constants(&bank)?;
    info!("b = {:.5} ± {:.5}", constants.b, constants.b_se);
    let mut etas = ctx.cfg.etas.clone();
    etas.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
    etas.dedup();
    let tables = etas
        .iter()
        .map(|&eta| {
            let table = BarrierTable::build(&bank, &constants, eta, &grid, ctx.exec)?;
            Ok(CachedTable { key: ctx.table_key(eta, &grid), table })
        })
        .collect::<Result<Vec<_>>>()?;
    let file = CalibrationFile { grid, constants, tables };
    write_json(&ctx.path(CALIBRATION_FILE), &ctx.stamp, &file)?;
    Ok(file)
}

/// Tables for every configured sensor, from the cache when its keys match.
pub fn tables(ctx: &Ctx, allow_compute: bool) -> Result<Vec<BarrierTable>> {
    let grid = ctx.grid();
    let cached = read_calibration(ctx)?;
    let lookup = |file: &CalibrationFile| -> Option<Vec<BarrierTable>> {
        ctx.cfg
            .etas
            .iter()
            .map(|&eta| {
                let key = ctx.table_key(eta, &grid);
                file.tables.iter().find(|t| t.key == key).map(|t| t.table.clone())
            })
            .collect()
    };
    if let Some(found) = cached.as_ref().and_then(lookup) {
        info!("using cached calibration");
        return Ok(found);
    }
    if !allow_compute {
        bail!(
            "no matching calibration in {}; run `ladlag calibrate` first or pass --calibrate",
            ctx.path(CALIBRATION_FILE).display()
        );
    }
    let file = calibrate(ctx)?;
    Ok(lookup(&file).expect("fresh calibration covers every sensor"))
}

pub fn simulate(ctx: &Ctx) -> Result<Vec<PathBuf>> {
    let tables = tables(ctx, ctx.cfg.simulate.calibrate)?;
    let path = ctx.scenario();
    info!("scenario with {} events", path.len());
    let mut written = Vec::new();
    for t in &tables {
        let run = optimal_control(&path, t, ctx.cfg.model.c0);
        let file = ctx.path(&eta_file_label(&t.eta.label()));
        write_csv(&file, &ctx.stamp, &trajectory_rows(&run))?;
        written.push(file);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct ValueCsvRow {
    eta: String,
    v_mc: f64,
    se_mc: f64,
    v_closed_form: f64,
    se_closed_form: f64,
}

pub fn value(ctx: &Ctx) -> Result<()> {
    let mut tables = tables(ctx, ctx.cfg.value.calibrate)?;
    tables.sort_by(|a, b| a.eta.as_f64().total_cmp(&b.eta.as_f64()));
    tables.dedup_by(|a, b| a.eta == b.eta);
    let m = &ctx.cfg.model;
    let paths = scenario_paths(m, ctx.cfg.value.n_paths, ctx.cfg.seed, Stream::ValueSweep, ctx.cfg.mc.eps_trunc, ctx.exec);
    let rows: Vec<ValueCsvRow> = value_sweep(m, &tables, &paths, ctx.exec)
        .into_iter()
        .map(|r| {
            info!("v({}) = {:.4} ± {:.4}", r.eta, r.v_mc.total, r.v_mc.std_err);
            ValueCsvRow {
                eta: r.eta.label(),
                v_mc: r.v_mc.total,
                se_mc: r.v_mc.std_err,
                v_closed_form: r.v_closed_form.total,
                se_closed_form: r.v_closed_form.std_err,
            }
        })
        .collect();
    write_csv(&ctx.path("values.csv"), &ctx.stamp, &rows)
}

#[derive(Debug, Serialize)]
struct ToyCsvRow {
    eta: String,
    exact: f64,
    mc_mean: f64,
    mc_se: f64,
}

pub fn toy(ctx: &Ctx) -> Result<()> {
    let o = &ctx.cfg.toy;
    let mut etas = o.etas.clone();
    etas.sort_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
    let rows: Vec<ToyCsvRow> = etas
        .iter()
        .map(|&eta| {
            let est = toy_value_mc(&ToyConfig { lambda: o.lambda, eta, n_paths: o.n_paths, seed: ctx.cfg.seed }, ctx.exec);
            ToyCsvRow { eta: eta.label(), exact: toy_value_exact(o.lambda, eta), mc_mean: est.mean, mc_se: est.std_err }
        })
        .collect();
    write_csv(&ctx.path("toy.csv"), &ctx.stamp, &rows)
}
