//! Monte Carlo constants and hitting-time functionals.
//!
//! Every estimate is computed on a [`SampleBank`]: a frozen set of paths of
//! the centred cumulative mark sum `S_k = Y_1 + … + Y_k`, simulated once per
//! calibration and reused for every threshold, every `p` and every sensor.
//! With the bank fixed the estimators are piecewise constant in the stopping
//! thresholds, and a [`Sweep`] enumerates all pieces exactly.
//!
//! Stopping rule for thresholds `(γ⁰, γ¹)`: stop at the first event `k` with
//! `S_k ≥ γ⁰`, or with `S_k ≥ γ¹` if event `k` is detected. Candidate
//! barriers are
//!
//! ```text
//! f = [(1 − E e^{−rT}) p − E e^{−rT} S_T] / [E(R_{T−} + e^{−rT} 1{T undetected}) + Δ]
//! ```
//!
//! The denominator is estimated path by path. In expectation it equals
//! `(λ/r)(1 − E e^{−rT}) − E e^{−rT} 1{T detected}` because
//! `E R_T = (λ/r)(1 − E e^{−rT})` by optional stopping of `R_t − (λ/r)(1 − e^{−rt})`;
//! that algebraic form is reported as well, as a cross-check.

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::par::{map_indexed, Execution};
use crate::path_model::{simulate_path, ModelParams};
use crate::rng::{sample_rng, Stream};
use crate::sensor::{failure_prob, SensorSpec};
use crate::stats::{McEstimate, Moments};
use serde::{Deserialize, Serialize};

/// Denominators at or below this are treated as zero.
pub const DENOM_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: usize,
    pub eps_trunc: f64,
    pub seed: u64,
    pub stream: Stream,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { n_samples: 100_000, eps_trunc: 1e-8, seed: 0, stream: Stream::Calibration, exec: Execution::default() }
    }
}

impl McConfig {
    pub fn with_samples(n_samples: usize, seed: u64) -> McConfig {
        McConfig { n_samples, seed, ..McConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(Error::InvalidParams("n_samples must be >= 1".into()));
        }
        if !(self.eps_trunc > 0.0 && self.eps_trunc < 1.0) {
            return Err(Error::InvalidParams("eps_trunc must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Frozen paths of the centred cumulative sum, truncated at the horizon.
#[derive(Debug, Clone)]
pub struct SampleBank {
    params: ModelParams,
    horizon: f64,
    offsets: Vec<usize>,
    sums: Vec<f64>,
    marks: Vec<f64>,
    disc: Vec<f64>,
}

/// Borrowed view of one bank path.
#[derive(Debug, Clone, Copy)]
pub struct BankPath<'a> {
    /// `S_k` after each event.
    pub sums: &'a [f64],
    pub marks: &'a [f64],
    /// `e^{−r t_k}`.
    pub disc: &'a [f64],
}

impl SampleBank {
    pub fn build(params: &ModelParams, mc: &McConfig) -> Result<SampleBank> {
        params.validate()?;
        mc.validate()?;
        let horizon = params.horizon(mc.eps_trunc);
        let centred = ModelParams { p_tilde: 0.0, ..params.clone() };
        let paths = map_indexed(mc.n_samples, mc.exec, |i| {
            simulate_path(&centred, horizon, &mut sample_rng(mc.seed, mc.stream, i as u64))
        });
        let total: usize = paths.iter().map(|p| p.len()).sum();
        let mut bank = SampleBank {
            params: params.clone(),
            horizon,
            offsets: Vec::with_capacity(paths.len() + 1),
            sums: Vec::with_capacity(total),
            marks: Vec::with_capacity(total),
            disc: Vec::with_capacity(total),
        };
        bank.offsets.push(0);
        for p in &paths {
            for (k, e) in p.events.iter().enumerate() {
                bank.sums.push(p.level_after(k));
                bank.marks.push(e.mark);
                bank.disc.push((-params.r * e.time).exp());
            }
            bank.offsets.push(bank.sums.len());
        }
        Ok(bank)
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn path(&self, i: usize) -> BankPath<'_> {
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        BankPath { sums: &self.sums[a..b], marks: &self.marks[a..b], disc: &self.disc[a..b] }
    }

    /// Crude bound on the bias from dropping everything after the horizon:
    /// `e^{−rT}(1 + λ T sqrt(E Y²))`.
    pub fn tail_bound(&self) -> f64 {
        let t = self.horizon;
        (-self.params.r * t).exp() * (1.0 + self.params.lambda * t * self.params.law.scale())
    }

    fn lambda_over_r(&self) -> f64 {
        self.params.lambda / self.params.r
    }
}

/// Per-sample quantities at the first time the cumulative sum is `≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T0Sample {
    pub disc: f64,
    pub disc_sum: f64,
    /// Risk clock strictly before the stopping time.
    pub risk_before: f64,
}

pub fn sample_t0(bank: &SampleBank) -> Vec<T0Sample> {
    (0..bank.len())
        .map(|i| {
            let p = bank.path(i);
            let mut risk = 0.0;
            for k in 0..p.sums.len() {
                if p.sums[k] >= 0.0 {
                    return T0Sample { disc: p.disc[k], disc_sum: p.disc[k] * p.sums[k], risk_before: risk };
                }
                risk += p.disc[k];
            }
            T0Sample { disc: 0.0, disc_sum: 0.0, risk_before: risk }
        })
        .collect()
}

/// Model constants with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// r/λ, exact.
    pub a: f64,
    pub b: f64,
    pub b_se: f64,
    pub delta: f64,
    pub delta_se: f64,
    /// Mean jump.
    pub m: f64,
    /// (1 − δ)/E R_{T⁰}, an estimate of `a`.
    pub a_mc: f64,
    pub a_mc_se: f64,
    /// `b` from the running supremum of the pre-jump reward.
    pub b_sup: f64,
    pub b_sup_se: f64,
    pub n_samples: usize,
    pub tail_bound: f64,
}

impl Constants {
    /// Constants known in closed form, for tests and hand-built tables.
    pub fn exact(params: &ModelParams, b: f64, delta: f64) -> Constants {
        Constants {
            a: params.a(),
            b,
            b_se: 0.0,
            delta,
            delta_se: 0.0,
            m: params.law.mean(),
            a_mc: params.a(),
            a_mc_se: 0.0,
            b_sup: b,
            b_sup_se: 0.0,
            n_samples: 0,
            tail_bound: 0.0,
        }
    }

    pub fn b_estimate(&self) -> McEstimate {
        McEstimate { mean: self.b, std_err: self.b_se, n_effective: self.n_samples, tail_bound: self.tail_bound }
    }

    pub fn b_sup_estimate(&self) -> McEstimate {
        McEstimate { mean: self.b_sup, std_err: self.b_sup_se, n_effective: self.n_samples, tail_bound: self.tail_bound }
    }

    pub fn a_mc_estimate(&self) -> McEstimate {
        McEstimate { mean: self.a_mc, std_err: self.a_mc_se, n_effective: self.n_samples, tail_bound: self.tail_bound }
    }

    pub fn delta_estimate(&self) -> McEstimate {
        McEstimate { mean: self.delta, std_err: self.delta_se, n_effective: self.n_samples, tail_bound: self.tail_bound }
    }

    /// Predictable barrier level a(p − b).
    pub fn linear(&self, p: f64) -> f64 {
        self.a * (p - self.b)
    }
}

pub fn compute_constants(bank: &SampleBank) -> Result<Constants> {
    let params = bank.params();
    let t0 = sample_t0(bank);
    // [e^{−rT⁰}, e^{−rT⁰} S, R_{T⁰}, ∫(sup S_{−})⁺ dR, R_∞]
    let mut m = Moments::<5>::default();
    for (i, s) in t0.iter().enumerate() {
        let p = bank.path(i);
        let mut run_max: f64 = 0.0;
        let mut sup_int = 0.0;
        let mut total = 0.0;
        for k in 0..p.sums.len() {
            sup_int += p.disc[k] * run_max;
            total += p.disc[k];
            run_max = run_max.max(p.sums[k]);
        }
        m.push(&[s.disc, s.disc_sum, s.risk_before + s.disc, sup_int, total]);
    }
    let mean = m.mean();
    let one_minus = 1.0 - mean[0];
    if one_minus < 1e-12 {
        return Err(Error::Estimation("1 − E e^{−rT⁰} is degenerate".into()));
    }
    let b = mean[1] / one_minus;
    let b_se = m.delta_se(&[mean[1] / (one_minus * one_minus), 1.0 / one_minus, 0.0, 0.0, 0.0]);
    let delta_se = m.delta_se(&[1.0, 0.0, 0.0, 0.0, 0.0]);
    let (a_mc, a_mc_se) = if mean[2] > 0.0 {
        let a = one_minus / mean[2];
        (a, m.delta_se(&[-1.0 / mean[2], 0.0, -a / mean[2], 0.0, 0.0]))
    } else {
        (f64::NAN, f64::NAN)
    };
    let (b_sup, b_sup_se) = if mean[4] > 0.0 {
        let v = mean[3] / mean[4];
        (v, m.delta_se(&[0.0, 0.0, 0.0, 1.0 / mean[4], -v / mean[4]]))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Constants {
        a: params.a(),
        b,
        b_se,
        delta: mean[0],
        delta_se,
        m: params.law.mean(),
        a_mc,
        a_mc_se,
        b_sup,
        b_sup_se,
        n_samples: bank.len(),
        tail_bound: bank.tail_bound(),
    })
}

/// Builds a bank and estimates `b` and `δ` on it.
pub fn compute_b(params: &ModelParams, mc: &McConfig) -> Result<Constants> {
    compute_constants(&SampleBank::build(params, mc)?)
}

/// Sensor-dependent search bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConstants {
    pub eta: SensorSpec,
    pub p_eta: f64,
    pub b0: f64,
    /// Undefined when no jump is ever missed.
    pub b1: Option<f64>,
    /// Factor actually used for the γ⁰ search range.
    pub b0_search: f64,
    /// Factor actually used for the γ¹ search range; infinite when `b1` is undefined.
    #[serde(with = "crate::ext::unbounded")]
    pub b1_search: f64,
}

pub fn sensor_constants(params: &ModelParams, eta: SensorSpec, delta: f64) -> SensorConstants {
    let (l, r) = (params.lambda, params.r);
    let p = failure_prob(&params.law, eta);
    let k = r + l * (1.0 - delta);
    let b0 = 1.0 - (l * r / (l + r)) * (1.0 - p) / k;
    let b1 = (p > 0.0).then(|| (1.0 - l * p + ((l + r) * l / r) * (1.0 - delta)) / (l * p));
    // Re-deriving the bounds from the stopping argument gives p in place of
    // 1 − p above and λ + r in place of 1 below. Searching the wider of the
    // two ranges is harmless: the infimum over any superset of the optimal
    // threshold is unchanged.
    let b0_alt = 1.0 - (l * r / (l + r)) * p / k;
    let b1_alt = (p > 0.0).then(|| (l + r - l * p + ((l + r) * l / r) * (1.0 - delta)) / (l * p));
    SensorConstants {
        eta,
        p_eta: p,
        b0,
        b1,
        b0_search: b0.max(b0_alt),
        b1_search: match (b1, b1_alt) {
            (Some(x), Some(y)) => x.max(y),
            _ => f64::INFINITY,
        },
    }
}

impl SensorConstants {
    pub fn b1_checked(&self) -> Result<f64> {
        self.b1.ok_or_else(|| Error::UndefinedBound(format!("B1 needs p(eta) > 0 (eta = {})", self.eta)))
    }
}

/// Estimate of a hitting functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub value: Ext,
    pub std_err: f64,
    pub mean_disc: f64,
    pub mean_disc_sum: f64,
    /// Pathwise denominator, including Δ.
    pub denominator: f64,
    /// `(λ/r)(1 − E e^{−rT}) − E e^{−rT}1{detected} + Δ`.
    pub denominator_algebraic: f64,
    pub n: usize,
    pub tail_bound: f64,
}

// Per-sample statistic vector at the stopping index:
// [e^{−rT}, e^{−rT} S_T, R_{T−} + e^{−rT}1{undetected}, e^{−rT}1{detected}]
type Stat = [f64; 4];

fn stop_stat(p: &BankPath, k: usize, risk_before: f64, detected: bool) -> Stat {
    let d = p.disc[k];
    if detected {
        [d, d * p.sums[k], risk_before, d]
    } else {
        [d, d * p.sums[k], risk_before + d, 0.0]
    }
}

fn never(risk_total: f64) -> Stat {
    [0.0, 0.0, risk_total, 0.0]
}

fn evaluate(m: &Moments<4>, p: f64, extra: f64, lambda_over_r: f64, tail: f64) -> FunctionalEstimate {
    let mean = m.mean();
    let num = (1.0 - mean[0]) * p - mean[1];
    let den = mean[2] + extra;
    let den_alg = lambda_over_r * (1.0 - mean[0]) - mean[3] + extra;
    let (value, std_err) = if den <= DENOM_FLOOR {
        (Ext::PosInf, 0.0)
    } else {
        let f = num / den;
        (Ext::Finite(f), m.delta_se(&[-p / den, -1.0 / den, -f / den, 0.0]))
    };
    FunctionalEstimate {
        value,
        std_err,
        mean_disc: mean[0],
        mean_disc_sum: mean[1],
        denominator: den,
        denominator_algebraic: den_alg,
        n: m.n,
        tail_bound: tail,
    }
}

fn rule_stat(p: &BankPath, sensor: SensorSpec, gamma0: f64, gamma1: f64) -> Stat {
    let mut risk = 0.0;
    for k in 0..p.sums.len() {
        let det = sensor.detects(p.marks[k]);
        let s = p.sums[k];
        if s >= gamma0 || (det && s >= gamma1) {
            return stop_stat(p, k, risk, det);
        }
        risk += p.disc[k];
    }
    never(risk)
}

/// `f^η_Δ(γ⁰, γ¹, p)` evaluated path by path on the bank.
pub fn hitting_functional(
    bank: &SampleBank,
    sensor: SensorSpec,
    gamma0: f64,
    gamma1: f64,
    detected: bool,
    p: f64,
) -> FunctionalEstimate {
    let mut m = Moments::<4>::default();
    for i in 0..bank.len() {
        m.push(&rule_stat(&bank.path(i), sensor, gamma0, gamma1));
    }
    evaluate(&m, p, if detected { 1.0 } else { 0.0 }, bank.lambda_over_r(), bank.tail_bound())
}

/// `f(γ, p)` with every jump observed: stop once `S_k ≥ γ`.
pub fn optional_functional(bank: &SampleBank, gamma: f64, p: f64) -> Result<FunctionalEstimate> {
    if gamma >= 0.0 {
        return Err(Error::InvalidParams(format!("optional functional needs gamma < 0, got {gamma}")));
    }
    let mut m = Moments::<4>::default();
    for i in 0..bank.len() {
        let path = bank.path(i);
        let mut risk = 0.0;
        let mut stat = None;
        for k in 0..path.sums.len() {
            if path.sums[k] >= gamma {
                let d = path.disc[k];
                stat = Some([d, d * path.sums[k], risk, d]);
                break;
            }
            risk += path.disc[k];
        }
        m.push(&stat.unwrap_or_else(|| never(risk)));
    }
    Ok(evaluate(&m, p, 0.0, bank.lambda_over_r(), bank.tail_bound()))
}

/// Which threshold a sweep scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// γ¹ < 0 with γ⁰ = 0, scanned downwards from 0.
    Undetected,
    /// γ⁰ > 0 with γ¹ = 0, scanned upwards from 0.
    Detected,
    /// γ < 0 with every jump observed, scanned downwards from 0.
    Optional,
}

/// One interval of thresholds on which the estimator is constant.
///
/// Downward sweeps cover `(lo, hi]` (the first piece is `(lo, 0)`), the upward
/// sweep covers `(lo, hi]` with `lo ≥ 0`.
#[derive(Debug, Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub moments: Moments<4>,
}

/// All pieces of `γ ↦ f̂(γ, p)` for one sensor and one scanned threshold.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub kind: SweepKind,
    pub pieces: Vec<Piece>,
    lambda_over_r: f64,
    tail_bound: f64,
}

/// Location of the minimizing piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepMin {
    pub estimate: FunctionalEstimate,
    pub piece: usize,
    /// A threshold inside the admissible part of the minimizing piece.
    pub gamma: f64,
}

type Transition = (f64, Stat, Stat);

fn undetected_schedule(p: &BankPath, sensor: SensorSpec) -> (Stat, Vec<Transition>) {
    let mut risk = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut records: Vec<(f64, Stat)> = Vec::new();
    let mut end = None;
    for k in 0..p.sums.len() {
        let det = sensor.detects(p.marks[k]);
        let s = p.sums[k];
        if s >= 0.0 {
            end = Some(stop_stat(p, k, risk, det));
            break;
        }
        if det && s > best {
            best = s;
            records.push((s, stop_stat(p, k, risk, true)));
        }
        risk += p.disc[k];
    }
    let init = end.unwrap_or_else(|| never(risk));
    let mut cur = init;
    let mut out = Vec::with_capacity(records.len());
    for (v, st) in records.into_iter().rev() {
        out.push((v, cur, st));
        cur = st;
    }
    (init, out)
}

fn detected_schedule(p: &BankPath, sensor: SensorSpec) -> (Stat, Vec<Transition>) {
    let mut risk = 0.0;
    let mut best = 0.0;
    let mut records: Vec<(f64, Stat)> = Vec::new();
    let mut end = None;
    for k in 0..p.sums.len() {
        let det = sensor.detects(p.marks[k]);
        let s = p.sums[k];
        if det && s >= 0.0 {
            end = Some(stop_stat(p, k, risk, true));
            break;
        }
        if s > best {
            best = s;
            records.push((s, stop_stat(p, k, risk, false)));
        }
        risk += p.disc[k];
    }
    let end = end.unwrap_or_else(|| never(risk));
    let init = records.first().map_or(end, |r| r.1);
    let out = (0..records.len())
        .map(|j| (records[j].0, records[j].1, records.get(j + 1).map_or(end, |r| r.1)))
        .collect();
    (init, out)
}

fn optional_schedule(p: &BankPath) -> (Stat, Vec<Transition>) {
    let mut risk = 0.0;
    let mut best = f64::NEG_INFINITY;
    let mut records: Vec<(f64, Stat)> = Vec::new();
    let mut init = None;
    for k in 0..p.sums.len() {
        let (s, d) = (p.sums[k], p.disc[k]);
        let here = [d, d * s, risk, d];
        if s >= 0.0 {
            init = Some(here);
            break;
        }
        if s > best {
            best = s;
            records.push((s, here));
        }
        risk += d;
    }
    let init = init.unwrap_or_else(|| never(risk));
    let mut out = Vec::with_capacity(records.len());
    let mut cur = init;
    while let Some((v, st)) = records.pop() {
        out.push((v, cur, st));
        cur = st;
    }
    (init, out)
}

impl Sweep {
    pub fn build(bank: &SampleBank, kind: SweepKind, sensor: SensorSpec, exec: Execution) -> Sweep {
        let per_path = map_indexed(bank.len(), exec, |i| {
            let p = bank.path(i);
            match kind {
                SweepKind::Undetected => undetected_schedule(&p, sensor),
                SweepKind::Detected => detected_schedule(&p, sensor),
                SweepKind::Optional => optional_schedule(&p),
            }
        });
        let mut m = Moments::<4>::default();
        let mut transitions = Vec::new();
        for (init, tr) in per_path {
            m.push(&init);
            transitions.extend(tr);
        }
        let ascending = kind == SweepKind::Detected;
        if ascending {
            transitions.sort_by(|x, y| x.0.total_cmp(&y.0));
        } else {
            transitions.sort_by(|x, y| y.0.total_cmp(&x.0));
        }
        let far = if ascending { f64::INFINITY } else { f64::NEG_INFINITY };
        let edge = |i: usize| transitions.get(i).map_or(far, |t| t.0);
        let piece = |m: &Moments<4>, near: f64, other: f64| {
            let (lo, hi) = if ascending { (near, other) } else { (other, near) };
            Piece { lo, hi, moments: m.clone() }
        };
        let mut pieces = vec![piece(&m, 0.0, edge(0))];
        let mut i = 0;
        while i < transitions.len() {
            let u = transitions[i].0;
            while i < transitions.len() && transitions[i].0 == u {
                let (_, from, to) = &transitions[i];
                m.add(from, -1.0);
                m.add(to, 1.0);
                i += 1;
            }
            pieces.push(piece(&m, u, edge(i)));
        }
        Sweep { kind, pieces, lambda_over_r: bank.lambda_over_r(), tail_bound: bank.tail_bound() }
    }

    fn admissible(&self, piece: &Piece, bound: f64) -> bool {
        match self.kind {
            SweepKind::Detected => piece.lo < bound,
            _ => piece.hi > -bound,
        }
    }

    fn representative(&self, piece: &Piece, bound: f64) -> f64 {
        match self.kind {
            SweepKind::Detected => {
                let hi = piece.hi.min(bound);
                if hi.is_finite() { 0.5 * (piece.lo + hi) } else { piece.lo + 1.0 }
            }
            _ => {
                let lo = piece.lo.max(-bound);
                if lo.is_finite() { 0.5 * (lo + piece.hi) } else { piece.hi - 1.0 }
            }
        }
    }

    pub fn evaluate_piece(&self, i: usize, p: f64, extra: f64) -> FunctionalEstimate {
        evaluate(&self.pieces[i].moments, p, extra, self.lambda_over_r, self.tail_bound)
    }

    /// Exact infimum of the estimator over thresholds in the open range of
    /// width `bound` next to 0. `extra` is the Δ added to the denominator.
    pub fn infimum(&self, p: f64, bound: f64, extra: f64) -> Option<SweepMin> {
        if !(bound > 0.0) {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        for (i, piece) in self.pieces.iter().enumerate() {
            if !self.admissible(piece, bound) {
                break;
            }
            let mean = piece.moments.mean();
            let den = mean[2] + extra;
            if den <= DENOM_FLOOR {
                continue;
            }
            let f = ((1.0 - mean[0]) * p - mean[1]) / den;
            if best.is_none_or(|(b, _)| f < b) {
                best = Some((f, i));
            }
        }
        best.map(|(_, i)| SweepMin {
            estimate: self.evaluate_piece(i, p, extra),
            piece: i,
            gamma: self.representative(&self.pieces[i], bound),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path_model::{Atom, JumpLaw};

    fn unit_params(law: JumpLaw) -> ModelParams {
        ModelParams { p_tilde: 0.0, r: 1.0, lambda: 1.0, c0: 0.0, law }
    }

    #[test]
    fn b_for_unit_jumps() {
        let c = compute_b(&unit_params(JumpLaw::constant(1.0)), &McConfig::with_samples(20_000, 3)).unwrap();
        assert!((c.delta - 0.5).abs() < 3.0 * c.delta_se, "{c:?}");
        assert!((c.b - 1.0).abs() < 3.0 * c.b_se, "{c:?}");
        assert_eq!(c.a, 1.0);
    }

    #[test]
    fn b_for_negative_jumps_is_zero() {
        let c = compute_b(&unit_params(JumpLaw::constant(-1.0)), &McConfig::with_samples(2_000, 3)).unwrap();
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.b, 0.0);
    }

    #[test]
    fn sensor_constant_cases() {
        let params = unit_params(JumpLaw::constant(1.0));
        let sc = sensor_constants(&params, SensorSpec::Infinite, 0.5);
        assert_eq!(sc.p_eta, 1.0);
        assert_eq!(sc.b0, 1.0);
        assert_eq!(sc.b1, Some(1.0));
        let opt = sensor_constants(&params, SensorSpec::optional(), 0.5);
        assert!(opt.b1.is_none());
        assert!(opt.b1_checked().is_err());
        assert_eq!(opt.b1_search, f64::INFINITY);
    }

    #[test]
    fn sensor_bounds_inside_unit_failure_range() {
        let law = JumpLaw::Discrete(vec![Atom { value: -1.0, prob: 0.3 }, Atom { value: 2.0, prob: 0.7 }]);
        let params = ModelParams { law, ..ModelParams::illustration() };
        for delta in [0.0, 0.3, 0.9] {
            let sc = sensor_constants(&params, SensorSpec::Threshold(1.5), delta);
            assert!(sc.p_eta > 0.0 && sc.p_eta < 1.0);
            assert!(sc.b0 < 1.0);
            assert!(sc.b1.unwrap() > 0.0);
            assert!(sc.b0_search >= sc.b0 && sc.b1_search >= sc.b1.unwrap());
        }
    }

    #[test]
    fn unit_jump_first_arrival_functional() {
        let bank = SampleBank::build(&unit_params(JumpLaw::constant(1.0)), &McConfig::with_samples(20_000, 9)).unwrap();
        for p in [-2.0, 0.0, 0.5] {
            let f = hitting_functional(&bank, SensorSpec::Infinite, 0.0, f64::NEG_INFINITY, false, p);
            let v = f.value.finite().unwrap();
            assert!((v - (p - 1.0)).abs() < 3.0 * f.std_err + 1e-12, "p={p} v={v} se={}", f.std_err);
        }
    }

    #[test]
    fn optional_functional_with_vanishing_denominator() {
        let bank = SampleBank::build(&unit_params(JumpLaw::constant(1.0)), &McConfig::with_samples(1_000, 9)).unwrap();
        let f = optional_functional(&bank, -0.5, 0.3).unwrap();
        assert_eq!(f.value, Ext::PosInf);
        assert_eq!(f.denominator, 0.0);
        assert!(optional_functional(&bank, 0.0, 0.3).is_err());
    }

    #[test]
    fn sweep_pieces_match_direct_evaluation() {
        let params = ModelParams::illustration();
        let bank = SampleBank::build(&params, &McConfig::with_samples(300, 5)).unwrap();
        let sensor = SensorSpec::Threshold(3.0);
        for kind in [SweepKind::Undetected, SweepKind::Detected, SweepKind::Optional] {
            let sweep = Sweep::build(&bank, kind, sensor, Execution::Sequential);
            assert!(sweep.pieces.len() > 5);
            for i in (0..sweep.pieces.len()).step_by(7) {
                let g = sweep.representative(&sweep.pieces[i], f64::INFINITY);
                let (direct, extra) = match kind {
                    SweepKind::Undetected => (hitting_functional(&bank, sensor, 0.0, g, false, -4.0), 0.0),
                    SweepKind::Detected => (hitting_functional(&bank, sensor, g, 0.0, true, -4.0), 1.0),
                    SweepKind::Optional => (optional_functional(&bank, g, -4.0).unwrap(), 0.0),
                };
                let swept = sweep.evaluate_piece(i, -4.0, extra);
                let (a, b) = (direct.value.finite().unwrap(), swept.value.finite().unwrap());
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{kind:?} piece {i}: {a} vs {b}");
            }
        }
    }
}
