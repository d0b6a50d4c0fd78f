//! Monotone controls built as `c₀ ∨` running supremum of a barrier process.

use crate::barrier::BarrierFn;
use crate::ext::Ext;
use crate::path_model::EventPath;
use crate::sensor::{ObservedPath, SensorSpec};
use serde::{Deserialize, Serialize};

/// Barrier values at one event instant and just after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierPoint {
    pub time: f64,
    pub at: Ext,
    pub right: Ext,
}

/// The realized barrier process: constant between events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPath {
    pub initial: Ext,
    pub points: Vec<BarrierPoint>,
}

pub fn barrier_path<B: BarrierFn + ?Sized>(obs: &ObservedPath, barrier: &B) -> BarrierPath {
    let path = &obs.path;
    let points = path
        .events
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let after = path.level_after(k);
            let at = if obs.detected[k] { barrier.level(after, true) } else { barrier.level(path.level_before(k), false) };
            BarrierPoint { time: e.time, at, right: barrier.level(after, false) }
        })
        .collect();
    BarrierPath { initial: barrier.level(path.p_tilde, false), points }
}

/// Control levels around one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub time: f64,
    pub left: f64,
    pub at: f64,
    pub right: f64,
}

/// Nondecreasing control with possibly both left and right jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadlagControl {
    pub c0: f64,
    pub breakpoints: Vec<ControlPoint>,
    pub terminal: f64,
}

impl LadlagControl {
    pub fn constant(c0: f64) -> LadlagControl {
        LadlagControl { c0, breakpoints: Vec::new(), terminal: c0 }
    }

    /// Builds from raw triples, dropping those without movement.
    pub fn from_points(c0: f64, points: impl IntoIterator<Item = ControlPoint>) -> LadlagControl {
        let breakpoints: Vec<ControlPoint> = points.into_iter().filter(|p| p.right > p.left).collect();
        let terminal = breakpoints.last().map_or(c0, |p| p.right);
        LadlagControl { c0, breakpoints, terminal }
    }

    fn last_before(&self, t: f64) -> f64 {
        let i = self.breakpoints.partition_point(|p| p.time < t);
        if i == 0 {
            self.c0
        } else {
            self.breakpoints[i - 1].right
        }
    }

    fn exactly(&self, t: f64) -> Option<&ControlPoint> {
        let i = self.breakpoints.partition_point(|p| p.time < t);
        self.breakpoints.get(i).filter(|p| p.time == t)
    }

    pub fn level_left(&self, t: f64) -> f64 {
        self.exactly(t).map_or_else(|| self.last_before(t), |p| p.left)
    }

    pub fn level_at(&self, t: f64) -> f64 {
        self.exactly(t).map_or_else(|| self.last_before(t), |p| p.at)
    }

    pub fn level_right(&self, t: f64) -> f64 {
        self.exactly(t).map_or_else(|| self.last_before(t), |p| p.right)
    }

    /// Nondecreasing along the full triple sequence.
    pub fn is_monotone(&self) -> bool {
        let mut prev = self.c0;
        let mut prev_t = f64::NEG_INFINITY;
        for p in &self.breakpoints {
            if !(p.time > prev_t && prev <= p.left && p.left <= p.at && p.at <= p.right) {
                return false;
            }
            prev = p.right;
            prev_t = p.time;
        }
        prev == self.terminal
    }

    /// `C ∧ n`.
    pub fn cap(&self, n: f64) -> LadlagControl {
        let c0 = self.c0.min(n);
        LadlagControl::from_points(
            c0,
            self.breakpoints.iter().map(|p| ControlPoint { time: p.time, left: p.left.min(n), at: p.at.min(n), right: p.right.min(n) }),
        )
    }

    /// Sum of all left jumps and sum of all right jumps.
    pub fn jump_totals(&self) -> (f64, f64) {
        self.breakpoints.iter().fold((0.0, 0.0), |(l, r), p| (l + p.at - p.left, r + p.right - p.at))
    }
}

pub fn running_sup_control(l: &BarrierPath, c0: f64) -> LadlagControl {
    let mut cur = Ext::Finite(c0).max(l.initial);
    let start = cur.finite().expect("running max of a finite level is finite");
    let mut points = vec![ControlPoint { time: 0.0, left: c0, at: start, right: start }];
    for bp in &l.points {
        let left = cur;
        let at = left.max(bp.at);
        let right = at.max(bp.right);
        cur = right;
        let f = |e: Ext| e.finite().expect("running max of a finite level is finite");
        points.push(ControlPoint { time: bp.time, left: f(left), at: f(at), right: f(right) });
    }
    LadlagControl::from_points(c0, points)
}

/// Bang-bang action of the warm-up problem: sign of each seen mark.
pub fn toy_control(path: &EventPath, sensor: SensorSpec) -> Vec<i8> {
    path.events
        .iter()
        .map(|e| {
            if sensor.detects(e.mark) {
                if e.mark > 0.0 {
                    1
                } else if e.mark < 0.0 {
                    -1
                } else {
                    0
                }
            } else {
                0
            }
        })
        .collect()
}

/// Suboptimal variants used to probe optimality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Every barrier value moved by the given amount.
    Shift(f64),
    /// Each event's barrier values only act at the next event.
    DelayOneEvent,
    /// Stay at `c₀` forever.
    NoTrade,
    /// Skip the adjustment at the event instant; catch up right after it.
    RightJumpOnly,
}

impl Perturbation {
    pub fn label(&self) -> String {
        match self {
            Perturbation::Shift(s) => format!("shift{s:+}"),
            Perturbation::DelayOneEvent => "delay_one_event".into(),
            Perturbation::NoTrade => "no_trade".into(),
            Perturbation::RightJumpOnly => "right_jump_only".into(),
        }
    }
}

fn shift(e: Ext, s: f64) -> Ext {
    match e {
        Ext::Finite(v) => Ext::Finite(v + s),
        other => other,
    }
}

pub fn perturbed_control(l: &BarrierPath, c0: f64, how: Perturbation) -> LadlagControl {
    match how {
        Perturbation::Shift(s) => {
            let moved = BarrierPath {
                initial: shift(l.initial, s),
                points: l.points.iter().map(|p| BarrierPoint { time: p.time, at: shift(p.at, s), right: shift(p.right, s) }).collect(),
            };
            running_sup_control(&moved, c0)
        }
        Perturbation::DelayOneEvent => {
            let mut pending = Ext::NegInf;
            let points = l
                .points
                .iter()
                .map(|p| {
                    let bp = BarrierPoint { time: p.time, at: pending, right: pending };
                    pending = p.at.max(p.right);
                    bp
                })
                .collect();
            running_sup_control(&BarrierPath { initial: l.initial, points }, c0)
        }
        Perturbation::NoTrade => LadlagControl::constant(c0),
        Perturbation::RightJumpOnly => {
            let c = running_sup_control(l, c0);
            LadlagControl::from_points(
                c0,
                c.breakpoints.iter().map(|p| {
                    if p.time == 0.0 {
                        *p
                    } else {
                        ControlPoint { at: p.left, ..*p }
                    }
                }),
            )
        }
    }
}
