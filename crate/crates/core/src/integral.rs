//! Star integrals against làdlàg increasing integrators, and value functionals.
//!
//! For an increasing `A` with left jumps `Δ⁻A_u = A_u − A_{u−}` and right
//! jumps `Δ⁺A_u = A_{u+} − A_u`,
//!
//! ```text
//! ∫ φ *dA = ∫ φ dA^c + Σ φ_u Δ⁻A_u + Σ φ*_u Δ⁺A_u
//! ```
//!
//! where `φ*_u = limsup_{s↓u} φ_s` (`φ_*` with liminf for the lower variant).
//! A right jump at `u` sits at `u+`, so it belongs to an interval exactly when
//! `lo ≤ u < hi`; a left jump at `u` belongs when `lo ≤ u ≤ hi` (closed end)
//! or `lo ≤ u < hi` (open end).

use crate::control::LadlagControl;
use crate::error::{Error, Result};
use crate::path_model::{risk_atoms, EventPath, Side};
use crate::sensor::{projected_reward, ObservedPath};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub time: f64,
    pub left: f64,
    pub at: f64,
    pub right: f64,
    /// `(liminf, limsup)` as `s ↓ time` when the right limit does not exist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<(f64, f64)>,
}

impl Knot {
    pub fn new(time: f64, left: f64, at: f64, right: f64) -> Knot {
        Knot { time, left, at, right, envelope: None }
    }

    fn upper(&self) -> f64 {
        self.envelope.map_or(self.right, |e| e.1)
    }

    fn lower(&self) -> f64 {
        self.envelope.map_or(self.right, |e| e.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interp {
    /// Constant between knots.
    Step,
    /// Affine from the right value of one knot to the left value of the next.
    Linear,
}

/// A path on `[0, ∞)` given by finitely many knots.
///
/// Before the first knot the value is `initial` (Step) or moves affinely from
/// `initial` at time 0 to the first left value (Linear). After the last knot it
/// stays at the last right value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePath {
    pub initial: f64,
    pub knots: Vec<Knot>,
    pub interp: Interp,
}

impl PiecewisePath {
    pub fn new(initial: f64, knots: Vec<Knot>, interp: Interp) -> Result<PiecewisePath> {
        for w in knots.windows(2) {
            if w[1].time <= w[0].time {
                return Err(Error::InvalidParams("knot times must be strictly increasing".into()));
            }
        }
        if knots.first().is_some_and(|k| k.time < 0.0) {
            return Err(Error::InvalidParams("knot times must be >= 0".into()));
        }
        if interp == Interp::Step {
            let mut prev = initial;
            for k in &knots {
                if k.left != prev {
                    return Err(Error::InvalidParams(format!("left limit at {} inconsistent with step path", k.time)));
                }
                prev = k.right;
            }
        }
        Ok(PiecewisePath { initial, knots, interp })
    }

    pub fn constant(v: f64) -> PiecewisePath {
        PiecewisePath { initial: v, knots: Vec::new(), interp: Interp::Step }
    }

    fn locate(&self, t: f64) -> (usize, bool) {
        let i = self.knots.partition_point(|k| k.time < t);
        (i, i < self.knots.len() && self.knots[i].time == t)
    }

    /// Value strictly between knots, `i` = index of the next knot.
    fn between(&self, i: usize, t: f64) -> f64 {
        let prev = if i == 0 { (0.0, self.initial) } else { (self.knots[i - 1].time, self.knots[i - 1].right) };
        match (self.interp, self.knots.get(i)) {
            (Interp::Linear, Some(next)) => {
                let (t0, v0) = prev;
                v0 + (next.left - v0) * (t - t0) / (next.time - t0)
            }
            _ => prev.1,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.locate(t) {
            (i, true) => self.knots[i].at,
            (i, false) => self.between(i, t),
        }
    }

    pub fn left_limit(&self, t: f64) -> f64 {
        match self.locate(t) {
            (i, true) => self.knots[i].left,
            (i, false) if t == 0.0 && i == 0 => self.initial,
            (i, false) => self.between(i, t),
        }
    }

    /// Left jumps with weight `at`, right jumps with weight `right` at every knot.
    fn jumps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.knots.iter().map(|k| (k.time, k.at - k.left, k.right - k.at))
    }

    /// `(t0, t1, slope)` of every non-flat affine stretch.
    fn slopes(&self) -> Vec<(f64, f64, f64)> {
        if self.interp == Interp::Step {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut prev = (0.0, self.initial);
        for k in &self.knots {
            if k.time > prev.0 && k.left != prev.1 {
                out.push((prev.0, k.time, (k.left - prev.1) / (k.time - prev.0)));
            }
            prev = (k.time, k.right);
        }
        out
    }

    /// Left-limit process `φ_{t−}`, as a path.
    pub fn left_limit_path(&self) -> PiecewisePath {
        let knots = self.knots.iter().map(|k| Knot { time: k.time, left: k.left, at: k.left, right: k.right, envelope: None }).collect();
        PiecewisePath { initial: self.initial, knots, interp: self.interp }
    }

    pub fn is_right_continuous(&self) -> bool {
        self.knots.iter().all(|k| k.envelope.is_none() && k.right == k.at)
    }

    /// Whether every value, limit and envelope is nondecreasing in time.
    pub fn is_nondecreasing(&self) -> bool {
        let mut prev = self.initial;
        self.knots.iter().all(|k| {
            let ok = k.envelope.is_none() && prev <= k.left && k.left <= k.at && k.at <= k.right;
            prev = k.right;
            ok
        })
    }
}

impl From<&LadlagControl> for PiecewisePath {
    fn from(c: &LadlagControl) -> PiecewisePath {
        PiecewisePath {
            initial: c.c0,
            knots: c.breakpoints.iter().map(|p| Knot::new(p.time, p.left, p.at, p.right)).collect(),
            interp: Interp::Step,
        }
    }
}

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub hi_closed: bool,
}

impl Interval {
    /// `[0, t]`.
    pub fn upto(t: f64) -> Interval {
        Interval { lo: 0.0, hi: t, hi_closed: true }
    }

    /// `[t, ∞)`.
    pub fn from(t: f64) -> Interval {
        Interval { lo: t, hi: f64::INFINITY, hi_closed: false }
    }

    /// `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi, hi_closed: false }
    }

    pub fn all() -> Interval {
        Interval::from(0.0)
    }

    fn has_left_jump(&self, u: f64) -> bool {
        self.lo <= u && (u < self.hi || (self.hi_closed && u == self.hi))
    }

    fn has_right_jump(&self, u: f64) -> bool {
        self.lo <= u && u < self.hi
    }
}

/// An integrand: point values, envelopes and Lebesgue integrals over stretches.
pub trait Integrand {
    fn at(&self, t: f64) -> f64;
    /// `φ*_t = limsup_{s↓t} φ_s`.
    fn upper(&self, t: f64) -> f64;
    /// `φ_{*t} = liminf_{s↓t} φ_s`.
    fn lower(&self, t: f64) -> f64;
    fn left(&self, t: f64) -> f64;
    /// `∫_a^b φ_s ds`.
    fn lebesgue(&self, a: f64, b: f64) -> f64;
}

impl Integrand for PiecewisePath {
    fn at(&self, t: f64) -> f64 {
        self.value(t)
    }

    fn upper(&self, t: f64) -> f64 {
        match self.locate(t) {
            (i, true) => self.knots[i].upper(),
            (i, false) => self.between(i, t),
        }
    }

    fn lower(&self, t: f64) -> f64 {
        match self.locate(t) {
            (i, true) => self.knots[i].lower(),
            (i, false) => self.between(i, t),
        }
    }

    fn left(&self, t: f64) -> f64 {
        self.left_limit(t)
    }

    fn lebesgue(&self, a: f64, b: f64) -> f64 {
        // Split at interior knots; the path is affine on each piece.
        let mut cuts = vec![a];
        cuts.extend(self.knots.iter().map(|k| k.time).filter(|&t| t > a && t < b));
        cuts.push(b);
        cuts.windows(2)
            .map(|w| {
                let (u, v) = (w[0], w[1]);
                let (i, _) = self.locate(0.5 * (u + v));
                let fu = if self.locate(u).1 { self.upper(u) } else { self.between(i, u) };
                let fv = if self.locate(v).1 { self.left_limit(v) } else { self.between(i, v) };
                0.5 * (fu + fv) * (v - u)
            })
            .sum()
    }
}

fn integrate<F: Integrand + ?Sized>(phi: &F, a: &PiecewisePath, iv: Interval, upper: bool) -> f64 {
    let mut total = 0.0;
    for (u, dl, dr) in a.jumps() {
        if dl != 0.0 && iv.has_left_jump(u) {
            total += phi.at(u) * dl;
        }
        if dr != 0.0 && iv.has_right_jump(u) {
            total += if upper { phi.upper(u) } else { phi.lower(u) } * dr;
        }
    }
    for (t0, t1, slope) in a.slopes() {
        let (s, e) = (t0.max(iv.lo), t1.min(iv.hi));
        if s < e {
            total += slope * phi.lebesgue(s, e);
        }
    }
    total
}

/// `∫ φ *dA` over `iv`.
pub fn star_integral<F: Integrand + ?Sized>(phi: &F, a: &PiecewisePath, iv: Interval) -> f64 {
    integrate(phi, a, iv, true)
}

/// `∫ φ _*dA` over `iv`.
pub fn lower_star_integral<F: Integrand + ?Sized>(phi: &F, a: &PiecewisePath, iv: Interval) -> f64 {
    integrate(phi, a, iv, false)
}

/// `∫_{[0,t]} φ CS dA`: left jumps on `(0, t]` weighted by `φ_{u−}`, right
/// jumps on `[0, t)` by `φ_u`. Assumes `A_0 = A_{0−}`.
pub fn cs_integral<F: Integrand + ?Sized>(phi: &F, a: &PiecewisePath, t: f64) -> f64 {
    let mut total = 0.0;
    for (u, dl, dr) in a.jumps() {
        if dl != 0.0 && u > 0.0 && u <= t {
            total += phi.left(u) * dl;
        }
        if dr != 0.0 && u < t {
            total += phi.at(u) * dr;
        }
    }
    for (t0, t1, slope) in a.slopes() {
        let e = t1.min(t);
        if t0 < e {
            total += slope * phi.lebesgue(t0, e);
        }
    }
    total
}

/// A two-argument integrand `φ_{s,t}` for the iterated integrals: `B` is a
/// finite sum of atoms `(t_j, β_j)` and `φ_{·,t_j}` is a path in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FubiniFixture {
    pub a: PiecewisePath,
    pub b_atoms: Vec<(f64, f64)>,
    pub phi: Vec<PiecewisePath>,
}

/// Both sides of the two interchange identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    /// `∫ ∫_{[0,s]} φ dB *dA_s`
    pub first_outer_a: f64,
    /// `∫ ∫_{[t,∞)} φ *dA dB_t`
    pub first_outer_b: f64,
    /// `∫ ∫_{[s,∞)} φ dB *dA_s`
    pub second_outer_a: f64,
    /// `∫ ∫_{[0,t]} φ *dA dB_t`
    pub second_outer_b: f64,
}

impl FubiniReport {
    pub fn holds(&self) -> bool {
        self.first_outer_a == self.first_outer_b && self.second_outer_a == self.second_outer_b
    }
}

/// `s ↦ Σ_{t_j ∈ S(s)} β_j φ_{s,t_j}`, with the envelope taken atom by atom
/// and `S` depending on whether the inner integral runs up to or from `s`.
struct InnerB<'a> {
    fx: &'a FubiniFixture,
    up_to: bool,
}

impl InnerB<'_> {
    fn sum(&self, keep: impl Fn(f64) -> bool, val: impl Fn(&PiecewisePath) -> f64) -> f64 {
        self.fx.b_atoms.iter().zip(&self.fx.phi).filter(|((t, _), _)| keep(*t)).map(|((_, beta), p)| beta * val(p)).sum()
    }
}

impl Integrand for InnerB<'_> {
    fn at(&self, s: f64) -> f64 {
        if self.up_to {
            self.sum(|t| t <= s, |p| p.value(s))
        } else {
            self.sum(|t| t >= s, |p| p.value(s))
        }
    }

    fn upper(&self, s: f64) -> f64 {
        // B is right-continuous, so atoms at s stay in [0, u] as u ↓ s and
        // drop out of [u, ∞).
        if self.up_to {
            self.sum(|t| t <= s, |p| p.upper(s))
        } else {
            self.sum(|t| t > s, |p| p.upper(s))
        }
    }

    fn lower(&self, s: f64) -> f64 {
        if self.up_to {
            self.sum(|t| t <= s, |p| p.lower(s))
        } else {
            self.sum(|t| t > s, |p| p.lower(s))
        }
    }

    fn left(&self, s: f64) -> f64 {
        if self.up_to {
            self.sum(|t| t < s, |p| p.left_limit(s))
        } else {
            self.sum(|t| t >= s, |p| p.left_limit(s))
        }
    }

    fn lebesgue(&self, _: f64, _: f64) -> f64 {
        unimplemented!("iterated fixtures use pure-jump integrators")
    }
}

/// Evaluates both orders of integration. Requires a pure-jump `A`.
pub fn fubini_check(fx: &FubiniFixture) -> Result<FubiniReport> {
    if fx.a.interp == Interp::Linear && !fx.a.slopes().is_empty() {
        return Err(Error::InvalidParams("fubini fixtures need a pure-jump integrator".into()));
    }
    if fx.b_atoms.len() != fx.phi.len() {
        return Err(Error::InvalidParams("one integrand path per atom of B".into()));
    }
    let outer_b = |iv: &dyn Fn(f64) -> Interval| -> f64 {
        fx.b_atoms.iter().zip(&fx.phi).map(|((t, beta), p)| beta * star_integral(p, &fx.a, iv(*t))).sum()
    };
    Ok(FubiniReport {
        first_outer_a: star_integral(&InnerB { fx, up_to: true }, &fx.a, Interval::all()),
        first_outer_b: outer_b(&Interval::from),
        second_outer_a: star_integral(&InnerB { fx, up_to: false }, &fx.a, Interval::all()),
        second_outer_b: outer_b(&Interval::upto),
    })
}

/// `^ΛP`: the discounted reward as seen through the sensor.
pub struct ProjectedReward<'a> {
    pub obs: &'a ObservedPath,
    pub r: f64,
}

/// `P`: the true discounted reward.
pub struct TrueReward<'a> {
    pub path: &'a EventPath,
    pub r: f64,
}

fn discounted_lebesgue(path: &EventPath, r: f64, a: f64, b: f64) -> f64 {
    // ∫_a^b P̃_s e^{−rs} ds with P̃ constant between events.
    let mut cuts = vec![a];
    cuts.extend(path.events.iter().map(|e| e.time).filter(|&t| t > a && t < b));
    cuts.push(b);
    cuts.windows(2)
        .map(|w| {
            let level = path.reward_at(0.5 * (w[0] + w[1]), Side::At).unwrap_or(path.p_tilde);
            level * ((-r * w[0]).exp() - (-r * w[1]).exp()) / r
        })
        .sum()
}

impl Integrand for ProjectedReward<'_> {
    fn at(&self, t: f64) -> f64 {
        projected_reward(self.obs, t.min(self.obs.path.horizon), self.r, Side::At).expect("t within horizon")
    }
    fn upper(&self, t: f64) -> f64 {
        projected_reward(self.obs, t.min(self.obs.path.horizon), self.r, Side::Right).expect("t within horizon")
    }
    fn lower(&self, t: f64) -> f64 {
        self.upper(t)
    }
    fn left(&self, t: f64) -> f64 {
        projected_reward(self.obs, t.min(self.obs.path.horizon), self.r, Side::Left).expect("t within horizon")
    }
    fn lebesgue(&self, a: f64, b: f64) -> f64 {
        discounted_lebesgue(&self.obs.path, self.r, a, b)
    }
}

impl Integrand for TrueReward<'_> {
    fn at(&self, t: f64) -> f64 {
        (-self.r * t).exp() * self.path.reward_at(t.min(self.path.horizon), Side::At).expect("t within horizon")
    }
    fn upper(&self, t: f64) -> f64 {
        self.at(t)
    }
    fn lower(&self, t: f64) -> f64 {
        self.at(t)
    }
    fn left(&self, t: f64) -> f64 {
        (-self.r * t).exp() * self.path.reward_at(t.min(self.path.horizon), Side::Left).expect("t within horizon")
    }
    fn lebesgue(&self, a: f64, b: f64) -> f64 {
        discounted_lebesgue(self.path, self.r, a, b)
    }
}

/// Realized reward and risk of one control on one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathValue {
    pub reward: f64,
    pub risk: f64,
}

impl PathValue {
    pub fn total(&self) -> f64 {
        self.reward - self.risk
    }
}

fn risk_term(path: &EventPath, r: f64, level_at: impl Fn(f64) -> f64) -> f64 {
    risk_atoms(path, r).atoms.iter().map(|&(t, w)| w * 0.5 * level_at(t).powi(2)).sum()
}

/// Reward `∫ φ *dC` over `[0, horizon]` and risk `½ Σ e^{−rt_k} C_{t_k}²`
/// for any integrand and any increasing path.
pub fn value_of_path<F: Integrand + ?Sized>(phi: &F, control: &PiecewisePath, path: &EventPath, r: f64) -> PathValue {
    PathValue {
        reward: star_integral(phi, control, Interval::upto(path.horizon)),
        risk: risk_term(path, r, |t| control.value(t)),
    }
}

pub fn value_of_control(obs: &ObservedPath, c: &LadlagControl, r: f64) -> PathValue {
    value_of_path(&ProjectedReward { obs, r }, &PiecewisePath::from(c), &obs.path, r)
}

/// Same control, but integrated against the true reward.
pub fn value_against_true_reward(path: &EventPath, c: &LadlagControl, r: f64) -> PathValue {
    value_of_path(&TrueReward { path, r }, &PiecewisePath::from(c), path, r)
}

/// `Σ e^{−rt_k} [C_{t_k}(C_{t_k} − c₀) − C_{t_k}²/2]`.
pub fn closed_form_value(path: &EventPath, c: &LadlagControl, r: f64) -> f64 {
    risk_atoms(path, r)
        .atoms
        .iter()
        .map(|&(t, w)| {
            let x = c.level_at(t);
            w * (x * (x - c.c0) - 0.5 * x * x)
        })
        .sum()
}

/// Right-continuous approximation: each right jump executed `1/k` later,
/// clipped to the horizon.
pub fn cadlag_approximation(c: &LadlagControl, k: u32, horizon: f64) -> Result<PiecewisePath> {
    if k < 1 {
        return Err(Error::InvalidParams("delay index k must be >= 1".into()));
    }
    let delay = 1.0 / k as f64;
    let mut moves: Vec<(f64, f64)> = Vec::new();
    for p in &c.breakpoints {
        if p.at > p.left {
            moves.push((p.time, p.at - p.left));
        }
        if p.right > p.at {
            moves.push(((p.time + delay).min(horizon), p.right - p.at));
        }
    }
    moves.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut knots: Vec<Knot> = Vec::new();
    let mut level = c.c0;
    for (t, d) in moves {
        match knots.last_mut() {
            Some(last) if last.time == t => {
                last.at += d;
                last.right += d;
            }
            _ => knots.push(Knot::new(t, level, level + d, level + d)),
        }
        level += d;
    }
    PiecewisePath::new(c.c0, knots, Interp::Step)
}

/// Aggregated value estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueReport {
    pub reward_term: f64,
    pub risk_term: f64,
    pub total: f64,
    pub std_err: f64,
    pub n_paths: usize,
    pub tail_bound: f64,
}

impl ValueReport {
    pub fn from_paths(values: &[PathValue], tail_bound: f64) -> ValueReport {
        let n = values.len() as f64;
        let reward_term = values.iter().map(|v| v.reward).sum::<f64>() / n;
        let risk_term = values.iter().map(|v| v.risk).sum::<f64>() / n;
        let totals: Vec<f64> = values.iter().map(|v| v.total()).collect();
        let est = crate::stats::McEstimate::from_samples(&totals);
        ValueReport { reward_term, risk_term, total: reward_term - risk_term, std_err: est.std_err, n_paths: values.len(), tail_bound }
    }

    pub fn from_totals(totals: &[f64], tail_bound: f64) -> ValueReport {
        let est = crate::stats::McEstimate::from_samples(totals);
        ValueReport { reward_term: est.mean, risk_term: 0.0, total: est.mean, std_err: est.std_err, n_paths: totals.len(), tail_bound }
    }
}
