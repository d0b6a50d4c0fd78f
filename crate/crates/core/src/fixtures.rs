//! Random small integrands and integrators with integer data, plus reference
//! sums written as plain double loops. All arithmetic on these fixtures is
//! exact in `f64`, so identities can be checked with `==`.

use crate::integral::{FubiniFixture, FubiniReport, Interp, Knot, PiecewisePath};
use rand::Rng;

const TIMES: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

fn knot_times<R: Rng>(rng: &mut R, max: usize) -> Vec<f64> {
    let n = rng.random_range(0..=max);
    let mut ts: Vec<f64> = TIMES.to_vec();
    for i in (1..ts.len()).rev() {
        ts.swap(i, rng.random_range(0..=i));
    }
    ts.truncate(n);
    ts.sort_by(f64::total_cmp);
    ts
}

fn small<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-4..=4) as f64
}

/// Arbitrary step integrand with right limits.
pub fn random_integrand<R: Rng>(rng: &mut R, right_continuous: bool) -> PiecewisePath {
    let initial = small(rng);
    let mut prev = initial;
    let knots = knot_times(rng, 6)
        .into_iter()
        .map(|t| {
            let at = small(rng);
            let right = if right_continuous { at } else { small(rng) };
            let k = Knot::new(t, prev, at, right);
            prev = right;
            k
        })
        .collect();
    PiecewisePath::new(initial, knots, Interp::Step).expect("consistent by construction")
}

/// Step integrand that may oscillate just after a knot.
pub fn random_oscillating_integrand<R: Rng>(rng: &mut R) -> PiecewisePath {
    let mut p = random_integrand(rng, false);
    for k in &mut p.knots {
        if rng.random_bool(0.5) {
            let lo = k.right - rng.random_range(0..=3) as f64;
            let hi = k.right + rng.random_range(0..=3) as f64;
            k.envelope = Some((lo, hi));
        }
    }
    p
}

/// Pure-jump nondecreasing integrator with left and right jumps.
pub fn random_integrator<R: Rng>(rng: &mut R, no_jump_at_zero: bool) -> PiecewisePath {
    let initial = small(rng);
    let mut level = initial;
    let knots = knot_times(rng, 6)
        .into_iter()
        .map(|t| {
            let left = level;
            let at = if no_jump_at_zero && t == 0.0 { left } else { left + rng.random_range(0..=3) as f64 };
            let right = at + rng.random_range(0..=3) as f64;
            level = right;
            Knot::new(t, left, at, right)
        })
        .collect();
    PiecewisePath::new(initial, knots, Interp::Step).expect("consistent by construction")
}

pub fn random_fubini_fixture<R: Rng>(rng: &mut R) -> FubiniFixture {
    let a = random_integrator(rng, false);
    let b_atoms: Vec<(f64, f64)> = knot_times(rng, 6).into_iter().map(|t| (t, rng.random_range(1..=3) as f64)).collect();
    let phi = b_atoms.iter().map(|_| random_integrand(rng, false)).collect();
    FubiniFixture { a, b_atoms, phi }
}

/// `(φ_u, φ_{u+})` read straight off the knot list.
fn point_and_right(p: &PiecewisePath, u: f64) -> (f64, f64) {
    let mut cur = p.initial;
    for k in &p.knots {
        if k.time == u {
            return (k.at, k.right);
        }
        if k.time > u {
            break;
        }
        cur = k.right;
    }
    (cur, cur)
}

/// Reference values of both iterated integrals as explicit double sums over
/// the jumps of `A` and the atoms of `B`.
pub fn brute_force_fubini(fx: &FubiniFixture) -> FubiniReport {
    let mut first = 0.0;
    let mut second = 0.0;
    for k in &fx.a.knots {
        let (u, dl, dr) = (k.time, k.at - k.left, k.right - k.at);
        for (&(t, beta), phi) in fx.b_atoms.iter().zip(&fx.phi) {
            let (at, right) = point_and_right(phi, u);
            if t <= u {
                first += beta * (dl * at + dr * right);
            }
            if t >= u {
                second += beta * dl * at;
            }
            if t > u {
                second += beta * dr * right;
            }
        }
    }
    FubiniReport { first_outer_a: first, first_outer_b: first, second_outer_a: second, second_outer_b: second }
}

/// Reference L-integral `∫_{[0,t]} φ dA₊ − φ_t Δ⁺A_t` for pure-jump `A`.
pub fn l_integral(phi: &PiecewisePath, a: &PiecewisePath, t: f64) -> f64 {
    let mut total = 0.0;
    for k in a.knots.iter().filter(|k| k.time <= t) {
        let (at, _) = point_and_right(phi, k.time);
        total += at * (k.right - k.left);
        if k.time == t {
            total -= at * (k.right - k.at);
        }
    }
    total
}
