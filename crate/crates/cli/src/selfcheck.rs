//! Release gate: exact integral identities, table shapes and the statistical
//! identities between value estimators, each reported under its own name.

use crate::commands::{read_calibration, tables, Ctx};
use anyhow::Result;
use ladlag::barrier::{shape_check, BarrierTable};
use ladlag::fixtures::{brute_force_fubini, random_fubini_fixture, random_integrand, random_integrator, random_oscillating_integrand};
use ladlag::integral::{cs_integral, fubini_check, lower_star_integral, star_integral, value_of_control, Interval, ValueReport};
use ladlag::rng::{sample_rng, Stream};
use ladlag::sensor::SensorSpec;
use ladlag::Ext;
use ladlag::stats::combined_se;
use ladlag::study::{optimal_control, policy_value, scenario_paths, Policy};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub passed: bool,
    pub table_source: &'static str,
    pub suites: Vec<Suite>,
}

fn suite(name: impl Into<String>, failures: Vec<String>, checked: usize) -> Suite {
    let passed = failures.is_empty();
    let detail = if passed { format!("{checked} checked") } else { failures.join("; ") };
    Suite { name: name.into(), passed, detail }
}

const FIXTURE_STREAM: Stream = Stream::Custom(1);

fn fubini(ctx: &Ctx) -> Suite {
    let n = ctx.cfg.selfcheck.fubini_fixtures;
    let failures = (0..n)
        .filter_map(|i| {
            let fx = random_fubini_fixture(&mut sample_rng(ctx.cfg.seed, FIXTURE_STREAM, i as u64));
            let got = fubini_check(&fx).ok()?;
            (got != brute_force_fubini(&fx)).then(|| format!("fixture {i}: {got:?}"))
        })
        .collect();
    suite("fubini", failures, n)
}

fn cs_identity(ctx: &Ctx) -> Suite {
    let n = ctx.cfg.selfcheck.cs_fixtures;
    let failures = (0..n)
        .filter_map(|i| {
            let mut rng = sample_rng(ctx.cfg.seed, Stream::Custom(2), i as u64);
            let (phi, a) = (random_integrand(&mut rng, true), random_integrator(&mut rng, true));
            let t = (i % 7) as f64;
            let (lhs, rhs) = (cs_integral(&phi, &a, t), star_integral(&phi.left_limit_path(), &a, Interval::upto(t)));
            (lhs != rhs).then(|| format!("fixture {i}: {lhs} != {rhs}"))
        })
        .collect();
    suite("cs_identity", failures, n)
}

fn envelope_order(ctx: &Ctx) -> Suite {
    let n = ctx.cfg.selfcheck.fubini_fixtures;
    let failures = (0..n)
        .filter_map(|i| {
            let mut rng = sample_rng(ctx.cfg.seed, Stream::Custom(3), i as u64);
            let (phi, a) = (random_oscillating_integrand(&mut rng), random_integrator(&mut rng, false));
            let (lo, hi) = (lower_star_integral(&phi, &a, Interval::all()), star_integral(&phi, &a, Interval::all()));
            (lo > hi).then(|| format!("fixture {i}: {lo} > {hi}"))
        })
        .collect();
    suite("envelope_order", failures, n)
}

fn truncation(ctx: &Ctx, table: &BarrierTable) -> Suite {
    let m = &ctx.cfg.model;
    let paths = scenario_paths(m, 200, ctx.cfg.seed, Stream::Custom(4), ctx.cfg.mc.eps_trunc, ctx.exec);
    let failures = paths
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let run = optimal_control(p, table, m.c0);
            let full = value_of_control(&run.obs, &run.control, m.r);
            let capped = value_of_control(&run.obs, &run.control.cap(run.control.terminal), m.r);
            (full != capped).then(|| format!("path {i}: {full:?} vs {capped:?}"))
        })
        .collect();
    suite(format!("truncation:{}", table.eta), failures, paths.len())
}

fn shape(table: &BarrierTable) -> Suite {
    let rep = shape_check(table, 3.0);
    let mut failures = rep.violations.clone();
    if !rep.passed() && failures.is_empty() {
        failures.push("shape check failed".into());
    }
    suite(format!("barrier_shape:{}", table.eta), failures, table.grid.len())
}

fn within(a: &ValueReport, b: &ValueReport) -> Option<String> {
    let tol = 3.0 * combined_se(a.std_err, b.std_err);
    ((a.total - b.total).abs() > tol).then(|| format!("{:.4} vs {:.4} (tol {tol:.4})", a.total, b.total))
}

pub fn run(ctx: &Ctx) -> Result<Verdict> {
    let (tabs, source) = match read_calibration(ctx)? {
        Some(file) => (file.tables.into_iter().map(|t| t.table).collect::<Vec<_>>(), "cache"),
        None => (tables(ctx, true)?, "fresh"),
    };
    let find = |eta: SensorSpec| tabs.iter().find(|t| t.eta == eta);
    let mut suites = vec![fubini(ctx), cs_identity(ctx), envelope_order(ctx)];
    suites.extend(tabs.iter().map(shape));
    if let Some(t) = tabs.first() {
        suites.push(truncation(ctx, t));
    }

    let m = &ctx.cfg.model;
    let sc = &ctx.cfg.selfcheck;
    let paths = scenario_paths(m, sc.n_paths, ctx.cfg.seed, Stream::Custom(5), ctx.cfg.mc.eps_trunc, ctx.exec);
    let mut optimal = Vec::new();
    for &eta in &sc.dual_etas {
        let Some(t) = find(eta) else { continue };
        let v = policy_value(m, t, &paths, Policy::Optimal, ctx.exec);
        let cf = policy_value(m, t, &paths, Policy::ClosedForm, ctx.exec);
        suites.push(suite(format!("dual_value:{eta}"), within(&v, &cf).into_iter().collect(), paths.len()));
        optimal.push((eta, v));
    }
    for &eta in &sc.projection_etas {
        let Some(t) = find(eta) else { continue };
        let v = policy_value(m, t, &paths, Policy::Optimal, ctx.exec);
        let tr = policy_value(m, t, &paths, Policy::TrueReward, ctx.exec);
        suites.push(suite(format!("projection:{eta}"), within(&v, &tr).into_iter().collect(), paths.len()));
    }
    optimal.sort_by(|a, b| a.0.as_f64().total_cmp(&b.0.as_f64()));
    let failures = optimal
        .windows(2)
        .filter(|w| w[1].1.total > w[0].1.total + 3.0 * combined_se(w[0].1.std_err, w[1].1.std_err))
        .map(|w| format!("v({}) = {:.4} above v({}) = {:.4}", w[1].0, w[1].1.total, w[0].0, w[0].1.total))
        .collect();
    suites.push(suite("value_monotone_in_eta", failures, optimal.len()));

    let scenario = ctx.scenario();
    let failures = tabs
        .iter()
        .filter_map(|t| {
            let run = optimal_control(&scenario, t, m.c0);
            let c = &run.control;
            let below = run.barrier.points.iter().any(|b| Ext::Finite(c.level_at(b.time)) < b.at || Ext::Finite(c.level_right(b.time)) < b.right);
            (!c.is_monotone() || below).then(|| format!("control for eta {}", t.eta))
        })
        .collect();
    suites.push(suite("control_monotone", failures, tabs.len()));

    Ok(Verdict { passed: suites.iter().all(|s| s.passed), table_source: source, suites })
}
