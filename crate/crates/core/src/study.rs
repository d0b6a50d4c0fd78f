//! End-to-end pipelines: calibrate once, then build and value controls on
//! shared scenario paths.

use crate::barrier::{BarrierTable, GridSpec};
use crate::calibration::{compute_constants, Constants, McConfig, SampleBank};
use crate::control::{barrier_path, perturbed_control, running_sup_control, BarrierPath, LadlagControl, Perturbation};
use crate::error::Result;
use crate::ext::Ext;
use crate::integral::{
    cadlag_approximation, closed_form_value, value_against_true_reward, value_of_control, value_of_path, PathValue,
    ProjectedReward, ValueReport,
};
use crate::par::{map_indexed, map_slice, Execution};
use crate::path_model::{simulate_path, EventPath, ModelParams};
use crate::rng::{sample_rng, Stream};
use crate::sensor::{observe, ObservedPath, SensorSpec};
use serde::{Deserialize, Serialize};

/// Constants plus one barrier table per sensor, all from one sample bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibrated {
    pub constants: Constants,
    pub tables: Vec<BarrierTable>,
}

impl Calibrated {
    pub fn table(&self, eta: SensorSpec) -> Option<&BarrierTable> {
        self.tables.iter().find(|t| t.eta == eta)
    }
}

pub fn calibrate(params: &ModelParams, etas: &[SensorSpec], mc: &McConfig, grid: &GridSpec) -> Result<Calibrated> {
    let bank = SampleBank::build(params, mc)?;
    let constants = compute_constants(&bank)?;
    let tables = etas
        .iter()
        .map(|&eta| BarrierTable::build(&bank, &constants, eta, grid, mc.exec))
        .collect::<Result<Vec<_>>>()?;
    Ok(Calibrated { constants, tables })
}

/// `n` independent paths on `[0, ln(1/ε)/r]`.
pub fn scenario_paths(params: &ModelParams, n: usize, seed: u64, stream: Stream, eps_trunc: f64, exec: Execution) -> Vec<EventPath> {
    let horizon = params.horizon(eps_trunc);
    map_indexed(n, exec, |i| simulate_path(params, horizon, &mut sample_rng(seed, stream, i as u64)))
}

/// Grid whose lower end also covers the lowest level visited by `paths`.
pub fn grid_covering(params: &ModelParams, grid: &GridSpec, paths: &[EventPath]) -> GridSpec {
    let default_lo = grid.p_min.unwrap_or(params.p_tilde - 10.0 * params.law.scale());
    let lowest = paths
        .iter()
        .flat_map(|p| (0..p.len()).map(move |k| p.level_after(k)))
        .fold(f64::INFINITY, f64::min);
    GridSpec { points: grid.points, p_min: Some(default_lo.min(lowest - params.law.scale())) }
}

/// Barrier and optimal control along one observed path.
#[derive(Debug, Clone)]
pub struct ControlRun {
    pub obs: ObservedPath,
    pub barrier: BarrierPath,
    pub control: LadlagControl,
}

pub fn optimal_control(path: &EventPath, table: &BarrierTable, c0: f64) -> ControlRun {
    let obs = observe(path, table.eta);
    let barrier = barrier_path(&obs, table);
    let control = running_sup_control(&barrier, c0);
    ControlRun { obs, barrier, control }
}

/// How to value a control built from a table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    Optimal,
    /// The optimal control, valued with the closed-form risk identity.
    ClosedForm,
    /// The optimal control, integrated against the true reward.
    TrueReward,
    Perturbed(Perturbation),
    /// The optimal control with right jumps delayed by `1/k`.
    Cadlag(u32),
    /// The optimal control capped at a level.
    Capped(f64),
}

pub fn path_value(params: &ModelParams, table: &BarrierTable, path: &EventPath, policy: Policy) -> f64 {
    let r = params.r;
    let run = optimal_control(path, table, params.c0);
    match policy {
        Policy::Optimal => value_of_control(&run.obs, &run.control, r).total(),
        Policy::ClosedForm => closed_form_value(path, &run.control, r),
        Policy::TrueReward => value_against_true_reward(path, &run.control, r).total(),
        Policy::Perturbed(how) => value_of_control(&run.obs, &perturbed_control(&run.barrier, params.c0, how), r).total(),
        Policy::Cadlag(k) => {
            let approx = cadlag_approximation(&run.control, k, path.horizon).expect("k >= 1");
            value_of_path(&ProjectedReward { obs: &run.obs, r }, &approx, path, r).total()
        }
        Policy::Capped(n) => value_of_control(&run.obs, &run.control.cap(n), r).total(),
    }
}

/// Per-path totals of `policy`, in path order.
pub fn policy_totals(params: &ModelParams, table: &BarrierTable, paths: &[EventPath], policy: Policy, exec: Execution) -> Vec<f64> {
    map_slice(paths, exec, |p| path_value(params, table, p, policy))
}

fn tail(params: &ModelParams, paths: &[EventPath]) -> f64 {
    let h = paths.first().map_or(0.0, |p| p.horizon);
    let c = params.c0.abs() + params.p_tilde.abs() + params.lambda * h * params.law.scale();
    (-params.r * h).exp() * (1.0 + c * c)
}

pub fn policy_value(params: &ModelParams, table: &BarrierTable, paths: &[EventPath], policy: Policy, exec: Execution) -> ValueReport {
    if policy == Policy::Optimal {
        let vals: Vec<PathValue> = map_slice(paths, exec, |p| {
            let run = optimal_control(p, table, params.c0);
            value_of_control(&run.obs, &run.control, params.r)
        });
        return ValueReport::from_paths(&vals, tail(params, paths));
    }
    ValueReport::from_totals(&policy_totals(params, table, paths, policy, exec), tail(params, paths))
}

/// One row of the value sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueRow {
    pub eta: SensorSpec,
    pub v_mc: ValueReport,
    pub v_closed_form: ValueReport,
}

pub fn value_sweep(params: &ModelParams, tables: &[BarrierTable], paths: &[EventPath], exec: Execution) -> Vec<ValueRow> {
    tables
        .iter()
        .map(|t| ValueRow {
            eta: t.eta,
            v_mc: policy_value(params, t, paths, Policy::Optimal, exec),
            v_closed_form: policy_value(params, t, paths, Policy::ClosedForm, exec),
        })
        .collect()
}

/// One instant of a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub time: f64,
    pub p_tilde: f64,
    pub p_eta: f64,
    pub barrier_at: Ext,
    pub barrier_right: Ext,
    pub c_left: f64,
    pub c_at: f64,
    pub c_right: f64,
    pub detected: bool,
}

/// Row at time 0 followed by one row per event.
pub fn trajectory_rows(run: &ControlRun) -> Vec<TrajectoryRow> {
    let path = &run.obs.path;
    let c = &run.control;
    let mut rows = vec![TrajectoryRow {
        time: 0.0,
        p_tilde: path.p_tilde,
        p_eta: path.p_tilde,
        barrier_at: run.barrier.initial,
        barrier_right: run.barrier.initial,
        c_left: c.c0,
        c_at: c.level_at(0.0),
        c_right: c.level_right(0.0),
        detected: false,
    }];
    for (k, bp) in run.barrier.points.iter().enumerate() {
        let t = bp.time;
        rows.push(TrajectoryRow {
            time: t,
            p_tilde: path.level_after(k),
            p_eta: run.obs.observed_level(k),
            barrier_at: bp.at,
            barrier_right: bp.right,
            c_left: c.level_left(t),
            c_at: c.level_at(t),
            c_right: c.level_right(t),
            detected: run.obs.detected[k],
        });
    }
    rows
}
