//! Barrier functions `ℓ(p, Δ)` and their interpolation tables.
//!
//! `p` is the observable reward level and `Δ` the observable jump indicator
//! (`detected`). Above `b` every regime has the closed form `ℓ(p,1) = 0`,
//! `ℓ(p,0) = a(p − b)`. Below `b`:
//!
//! | regime      | Δ = 0                           | Δ = 1                       |
//! |-------------|---------------------------------|-----------------------------|
//! | predictable | `a(p − b)`                      | sweep over γ⁰ (never used)  |
//! | sensor      | inf of f over γ¹ ∈ (−B₁(b−p),0) | inf of f over γ⁰ ∈ (0,B₀(b−p)) |
//! | optional    | inf over γ < 0, `−∞` below mλ/r | `r/(λ+r) (p − b)`           |

use crate::calibration::{sensor_constants, Constants, SampleBank, SensorConstants, Sweep, SweepKind};
use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::par::{map_slice, Execution};
use crate::sensor::{Regime, SensorSpec};
use crate::stats::combined_se;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// A barrier level with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierEstimate {
    pub value: Ext,
    pub std_err: f64,
    /// Threshold that attains the infimum, when one was searched.
    pub gamma: Option<f64>,
}

impl BarrierEstimate {
    fn exact(v: Ext) -> BarrierEstimate {
        BarrierEstimate { value: v, std_err: 0.0, gamma: None }
    }
}

fn above_b(p: f64, detected: bool, c: &Constants) -> BarrierEstimate {
    BarrierEstimate::exact(Ext::Finite(if detected { 0.0 } else { c.linear(p) }))
}

pub fn predictable_barrier(p: f64, c: &Constants) -> f64 {
    c.linear(p)
}

/// The two sweeps a sensor regime needs.
#[derive(Debug, Clone)]
pub struct SensorSweeps {
    pub undetected: Sweep,
    pub detected: Sweep,
}

impl SensorSweeps {
    pub fn build(bank: &SampleBank, sensor: SensorSpec, exec: Execution) -> SensorSweeps {
        SensorSweeps {
            undetected: Sweep::build(bank, SweepKind::Undetected, sensor, exec),
            detected: Sweep::build(bank, SweepKind::Detected, sensor, exec),
        }
    }
}

fn searched(sweep: &Sweep, p: f64, bound: f64, extra: f64) -> Result<BarrierEstimate> {
    let m = sweep
        .infimum(p, bound, extra)
        .ok_or_else(|| Error::Estimation(format!("no admissible threshold at p = {p}")))?;
    Ok(BarrierEstimate { value: m.estimate.value, std_err: m.estimate.std_err, gamma: Some(m.gamma) })
}

pub fn sensor_barrier(
    p: f64,
    detected: bool,
    c: &Constants,
    sc: &SensorConstants,
    sweeps: &SensorSweeps,
) -> Result<BarrierEstimate> {
    if p >= c.b {
        return Ok(above_b(p, detected, c));
    }
    let gap = c.b - p;
    if detected {
        searched(&sweeps.detected, p, sc.b0_search * gap, 1.0)
    } else {
        searched(&sweeps.undetected, p, sc.b1_search * gap, 0.0)
    }
}

/// Lowest `p` at which the optional barrier for `Δ = 0` is finite.
pub fn optional_floor(c: &Constants, lambda: f64, r: f64) -> f64 {
    c.m * lambda / r
}

pub fn optional_barrier(p: f64, detected: bool, c: &Constants, lambda: f64, r: f64, sweep: &Sweep) -> Result<BarrierEstimate> {
    if p >= c.b {
        return Ok(above_b(p, detected, c));
    }
    if detected {
        // The closed form is printed with (b − p) in the source; the limit
        // argument and the sign constraint below b both require (p − b).
        return Ok(BarrierEstimate::exact(Ext::Finite(r / (lambda + r) * (p - c.b))));
    }
    if p < optional_floor(c, lambda, r) {
        return Ok(BarrierEstimate::exact(Ext::NegInf));
    }
    searched(sweep, p, f64::INFINITY, 0.0)
}

/// Grid layout below `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    /// Lower end; defaults to `p̃ − 10·sqrt(E Y²)`.
    #[serde(default)]
    pub p_min: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { points: 200, p_min: None }
    }
}

enum Engine {
    Predictable(Sweep),
    Sensor(SensorSweeps),
    Optional(Sweep),
}

/// Calibrated `ℓ(·, 0)` and `ℓ(·, 1)` on a grid, plus the closed-form regions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierTable {
    pub eta: SensorSpec,
    pub regime: Regime,
    pub constants: Constants,
    pub sensor: SensorConstants,
    pub lambda: f64,
    pub r: f64,
    pub grid: Vec<f64>,
    pub level0: Vec<Ext>,
    pub se0: Vec<f64>,
    pub level1: Vec<Ext>,
    pub se1: Vec<f64>,
    #[serde(skip)]
    warned: OnceLock<()>,
}

impl BarrierTable {
    pub fn build(bank: &SampleBank, constants: &Constants, eta: SensorSpec, grid: &GridSpec, exec: Execution) -> Result<BarrierTable> {
        if grid.points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 grid points, got {}", grid.points)));
        }
        let params = bank.params();
        let (lambda, r) = (params.lambda, params.r);
        let regime = Regime::of(&params.law, eta);
        let sc = sensor_constants(params, eta, constants.delta);
        let b = constants.b;
        let mut lo = grid.p_min.unwrap_or(params.p_tilde - 10.0 * params.law.scale());
        if regime == Regime::Optional {
            lo = lo.max(optional_floor(constants, lambda, r));
        }
        if !(lo < b) {
            lo = b - 1.0;
        }
        let n = grid.points;
        let ps: Vec<f64> = (0..n).map(|i| if i + 1 == n { b } else { lo + (b - lo) * i as f64 / (n - 1) as f64 }).collect();
        let engine = match regime {
            Regime::Predictable => Engine::Predictable(Sweep::build(bank, SweepKind::Detected, eta, exec)),
            Regime::Sensor => Engine::Sensor(SensorSweeps::build(bank, eta, exec)),
            Regime::Optional => Engine::Optional(Sweep::build(bank, SweepKind::Optional, eta, exec)),
        };
        let level = |p: f64, detected: bool| -> Result<BarrierEstimate> {
            match &engine {
                Engine::Predictable(sweep) => {
                    if p >= b || !detected {
                        Ok(if p >= b { above_b(p, detected, constants) } else { BarrierEstimate::exact(Ext::Finite(constants.linear(p))) })
                    } else {
                        searched(sweep, p, sc.b0_search * (b - p), 1.0)
                    }
                }
                Engine::Sensor(sweeps) => sensor_barrier(p, detected, constants, &sc, sweeps),
                Engine::Optional(sweep) => optional_barrier(p, detected, constants, lambda, r, sweep),
            }
        };
        let rows = map_slice(&ps, exec, |&p| Ok::<_, Error>((level(p, false)?, level(p, true)?)));
        let mut table = BarrierTable {
            eta,
            regime,
            constants: constants.clone(),
            sensor: sc.clone(),
            lambda,
            r,
            grid: ps,
            level0: Vec::with_capacity(n),
            se0: Vec::with_capacity(n),
            level1: Vec::with_capacity(n),
            se1: Vec::with_capacity(n),
            warned: OnceLock::new(),
        };
        for row in rows {
            let (e0, e1) = row?;
            table.level0.push(e0.value);
            table.se0.push(e0.std_err);
            table.level1.push(e1.value);
            table.se1.push(e1.std_err);
        }
        Ok(table)
    }

    pub fn b(&self) -> f64 {
        self.constants.b
    }

    /// `ℓ(p, Δ)`: closed forms where available, otherwise linear interpolation.
    pub fn level(&self, p: f64, detected: bool) -> Ext {
        let c = &self.constants;
        if p >= c.b {
            return above_b(p, detected, c).value;
        }
        match (self.regime, detected) {
            (Regime::Predictable, false) => return Ext::Finite(c.linear(p)),
            (Regime::Optional, true) => return Ext::Finite(self.r / (self.lambda + self.r) * (p - c.b)),
            (Regime::Optional, false) if p < optional_floor(c, self.lambda, self.r) => return Ext::NegInf,
            _ => {}
        }
        let values = if detected { &self.level1 } else { &self.level0 };
        if p <= self.grid[0] {
            if p < self.grid[0] {
                self.warned.get_or_init(|| {
                    log::warn!("barrier query p = {p} below table range [{}, {}] for eta = {}; clamping", self.grid[0], c.b, self.eta)
                });
            }
            return values[0];
        }
        let i = self.grid.partition_point(|&g| g <= p) - 1;
        if self.grid[i] == p {
            return values[i];
        }
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        match (values[i], values[i + 1]) {
            (Ext::Finite(y0), Ext::Finite(y1)) => Ext::Finite(y0 + (y1 - y0) * (p - x0) / (x1 - x0)),
            (y0, y1) => y0.min(y1),
        }
    }
}

/// Something that maps `(p, Δ)` to a barrier level.
pub trait BarrierFn {
    fn level(&self, p: f64, detected: bool) -> Ext;
}

impl BarrierFn for BarrierTable {
    fn level(&self, p: f64, detected: bool) -> Ext {
        BarrierTable::level(self, p, detected)
    }
}

impl<F: Fn(f64, bool) -> Ext> BarrierFn for F {
    fn level(&self, p: f64, detected: bool) -> Ext {
        self(p, detected)
    }
}

/// Outcome of the table shape checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub monotone: bool,
    pub concave: bool,
    pub ordered: bool,
    pub closed_form: bool,
    /// Grid points where `ℓ(p,0) < ℓ(p,1) < 0` fails without any tolerance.
    pub strict_order_failures: usize,
    pub violations: Vec<String>,
}

impl ShapeReport {
    pub fn passed(&self) -> bool {
        self.monotone && self.concave && self.ordered && self.closed_form
    }
}

/// Checks monotonicity, concavity, ordering below `b` and the closed forms at
/// and above `b`, each within `k` standard errors.
pub fn shape_check(table: &BarrierTable, k: f64) -> ShapeReport {
    let mut rep = ShapeReport { monotone: true, concave: true, ordered: true, closed_form: true, ..Default::default() };
    let b = table.b();
    let n = table.grid.len();
    for (name, vals, ses) in [("l(.,0)", &table.level0, &table.se0), ("l(.,1)", &table.level1, &table.se1)] {
        for i in 1..n {
            if table.grid[i] <= table.grid[i - 1] {
                rep.monotone = false;
                rep.violations.push(format!("grid not increasing at index {i}"));
            }
            if let (Ext::Finite(y0), Ext::Finite(y1)) = (vals[i - 1], vals[i]) {
                if y1 < y0 - k * combined_se(ses[i - 1], ses[i]) {
                    rep.monotone = false;
                    rep.violations.push(format!("monotonicity of {name} at p = {}: {y0} > {y1}", table.grid[i]));
                }
            } else if vals[i] < vals[i - 1] {
                rep.monotone = false;
                rep.violations.push(format!("monotonicity of {name} at p = {}", table.grid[i]));
            }
        }
        for i in 1..n.saturating_sub(1) {
            if let (Ext::Finite(y0), Ext::Finite(y1), Ext::Finite(y2)) = (vals[i - 1], vals[i], vals[i + 1]) {
                let h0 = table.grid[i] - table.grid[i - 1];
                let h1 = table.grid[i + 1] - table.grid[i];
                // Divided second difference scaled to the uniform-grid form.
                let w0 = 2.0 * h1 / (h0 + h1);
                let w2 = 2.0 * h0 / (h0 + h1);
                let second = w0 * y0 - 2.0 * y1 + w2 * y2;
                let band = k * ((w0 * ses[i - 1]).powi(2) + 4.0 * ses[i].powi(2) + (w2 * ses[i + 1]).powi(2)).sqrt();
                if second > band + 1e-9 * (1.0 + y1.abs()) {
                    rep.concave = false;
                    rep.violations.push(format!("concavity of {name} at p = {}: second difference {second:.4e} > {band:.4e}", table.grid[i]));
                }
            }
        }
    }
    for i in 0..n {
        let p = table.grid[i];
        let (l0, l1) = (table.level0[i], table.level1[i]);
        if p < b {
            let strict = l0 < l1 && l1 < Ext::Finite(0.0);
            if !strict {
                rep.strict_order_failures += 1;
            }
            let ok = match (l0, l1) {
                (Ext::NegInf, Ext::Finite(y1)) => y1 < k * table.se1[i],
                (Ext::Finite(y0), Ext::Finite(y1)) => {
                    y0 < y1 + k * combined_se(table.se0[i], table.se1[i]) && y1 < k * table.se1[i]
                }
                _ => false,
            };
            if !ok {
                rep.ordered = false;
                rep.violations.push(format!("ordering l(p,0) < l(p,1) < 0 at p = {p}: {l0} vs {l1}"));
            }
        }
    }
    for p in [b, b + 0.5, b + 3.0] {
        let want0 = table.constants.a * (p - b);
        if table.level(p, true) != Ext::Finite(0.0) || table.level(p, false) != Ext::Finite(want0) {
            rep.closed_form = false;
            rep.violations.push(format!("closed form above b at p = {p}"));
        }
    }
    if let Some(last) = table.grid.last() {
        if *last == b && (table.level0[n - 1] != Ext::Finite(0.0) || table.level1[n - 1] != Ext::Finite(0.0)) {
            rep.closed_form = false;
            rep.violations.push("grid value at b differs from 0".into());
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{compute_constants, McConfig};
    use crate::path_model::{JumpLaw, ModelParams};

    #[test]
    fn predictable_closed_form() {
        let params = ModelParams { p_tilde: 0.0, r: 1.0, lambda: 1.0, c0: 0.0, law: JumpLaw::constant(1.0) };
        let c = Constants::exact(&params, 1.0, 0.5);
        assert_eq!(predictable_barrier(1.0, &c), 0.0);
        assert_eq!(predictable_barrier(0.0, &c), -1.0);
        let p2 = ModelParams { lambda: 0.5, ..params };
        let c2 = Constants::exact(&p2, 1.3, 0.5);
        assert!((predictable_barrier(1.3 + 0.5, &c2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn optional_closed_forms() {
        let params = ModelParams { p_tilde: 0.0, r: 1.0, lambda: 1.0, c0: 0.0, law: JumpLaw::constant(1.0) };
        let bank = SampleBank::build(&params, &McConfig::with_samples(200, 1)).unwrap();
        let sweep = Sweep::build(&bank, SweepKind::Optional, SensorSpec::optional(), Execution::Sequential);
        let c = Constants::exact(&params, 1.0, 0.5);
        let at = |p, d| optional_barrier(p, d, &c, 1.0, 1.0, &sweep).unwrap().value;
        assert_eq!(at(-1.0, true), Ext::Finite(-1.0));
        assert_eq!(at(1.0, true), Ext::Finite(0.0));
        assert_eq!(at(0.5, false), Ext::NegInf);
        assert_eq!(at(3.0, false), Ext::Finite(2.0));
    }

    #[test]
    fn tiny_grid_rejected() {
        let params = ModelParams::illustration();
        let bank = SampleBank::build(&params, &McConfig::with_samples(50, 1)).unwrap();
        let c = compute_constants(&bank).unwrap();
        let g = GridSpec { points: 1, p_min: None };
        assert!(matches!(BarrierTable::build(&bank, &c, SensorSpec::Threshold(3.0), &g, Execution::Sequential), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn table_queries() {
        let params = ModelParams::illustration();
        let bank = SampleBank::build(&params, &McConfig::with_samples(2_000, 4)).unwrap();
        let c = compute_constants(&bank).unwrap();
        let g = GridSpec { points: 20, p_min: Some(-30.0) };
        let t = BarrierTable::build(&bank, &c, SensorSpec::Threshold(3.0), &g, Execution::Parallel).unwrap();
        assert_eq!(t.regime, Regime::Sensor);
        assert_eq!(t.level(t.grid[3], false), t.level0[3]);
        assert_eq!(t.level(t.grid[3], true), t.level1[3]);
        assert_eq!(t.level(c.b + 2.0, false), Ext::Finite(c.a * 2.0));
        assert_eq!(t.level(-100.0, false), t.level0[0]);
        let mid = 0.5 * (t.grid[4] + t.grid[5]);
        let (y0, y1) = (t.level0[4].finite().unwrap(), t.level0[5].finite().unwrap());
        assert!((t.level(mid, false).finite().unwrap() - 0.5 * (y0 + y1)).abs() < 1e-12);
        let json = serde_json::to_string(&t).unwrap();
        let back: BarrierTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back.level0, t.level0);
        assert_eq!(back.level(mid, true), t.level(mid, true));
    }
}
