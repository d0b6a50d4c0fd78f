use ladlag::control::{barrier_path, running_sup_control, BarrierPath, BarrierPoint};
use ladlag::fixtures::{
    brute_force_fubini, l_integral, random_fubini_fixture, random_integrand, random_integrator,
    random_oscillating_integrand,
};
use ladlag::integral::{
    cs_integral, fubini_check, lower_star_integral, star_integral, value_of_control, Integrand, Interval,
    PiecewisePath,
};
use ladlag::path_model::{Event, EventPath, Side};
use ladlag::sensor::{observe, projected_reward, SensorSpec};
use ladlag::Ext;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ext_strategy() -> impl Strategy<Value = Ext> {
    prop_oneof![1 => Just(Ext::NegInf), 4 => (-20i32..20).prop_map(|v| Ext::Finite(v as f64 * 0.5))]
}

fn barrier_strategy() -> impl Strategy<Value = BarrierPath> {
    (ext_strategy(), prop::collection::vec((0.01f64..2.0, ext_strategy(), ext_strategy()), 0..12)).prop_map(
        |(initial, steps)| {
            let mut t = 0.0;
            let points = steps
                .into_iter()
                .map(|(dt, at, right)| {
                    t += dt;
                    BarrierPoint { time: t, at, right }
                })
                .collect();
            BarrierPath { initial, points }
        },
    )
}

fn path_strategy() -> impl Strategy<Value = EventPath> {
    (-5.0f64..5.0, prop::collection::vec((0.01f64..1.5, -8.0f64..8.0), 0..15)).prop_map(|(p0, steps)| {
        let mut t = 0.0;
        let events = steps
            .into_iter()
            .filter(|(_, y)| *y != 0.0)
            .map(|(dt, mark)| {
                t += dt;
                Event { time: t, mark }
            })
            .collect();
        EventPath::new(p0, events, t + 1.0).unwrap()
    })
}

/// `α φ + β ψ` as an integrand.
struct Comb<'a>(f64, &'a PiecewisePath, f64, &'a PiecewisePath);

impl Integrand for Comb<'_> {
    fn at(&self, t: f64) -> f64 {
        self.0 * self.1.at(t) + self.2 * self.3.at(t)
    }
    fn upper(&self, t: f64) -> f64 {
        self.0 * self.1.upper(t) + self.2 * self.3.upper(t)
    }
    fn lower(&self, t: f64) -> f64 {
        self.0 * self.1.lower(t) + self.2 * self.3.lower(t)
    }
    fn left(&self, t: f64) -> f64 {
        self.0 * self.1.left(t) + self.2 * self.3.left(t)
    }
    fn lebesgue(&self, a: f64, b: f64) -> f64 {
        self.0 * self.1.lebesgue(a, b) + self.2 * self.3.lebesgue(a, b)
    }
}

proptest! {
    #[test]
    fn running_sup_is_monotone_and_dominates(l in barrier_strategy(), c0 in -10.0f64..10.0) {
        let c = running_sup_control(&l, c0);
        prop_assert!(c.is_monotone());
        prop_assert!(Ext::Finite(c.level_at(0.0)) >= l.initial);
        for p in &l.points {
            prop_assert!(Ext::Finite(c.level_at(p.time)) >= p.at);
            prop_assert!(Ext::Finite(c.level_right(p.time)) >= p.right);
        }
    }

    #[test]
    fn running_sup_moves_only_onto_the_barrier(l in barrier_strategy(), c0 in -10.0f64..10.0) {
        let c = running_sup_control(&l, c0);
        for bp in &c.breakpoints {
            let (at, right) = if bp.time == 0.0 {
                (l.initial, l.initial)
            } else {
                let p = l.points.iter().find(|p| p.time == bp.time).unwrap();
                (p.at, p.right)
            };
            if bp.at > bp.left {
                prop_assert_eq!(Ext::Finite(bp.at), at);
            }
            if bp.right > bp.at {
                prop_assert_eq!(Ext::Finite(bp.right), right);
            }
        }
    }

    #[test]
    fn predictable_control_is_left_continuous(path in path_strategy(), c0 in -30.0f64..0.0) {
        let obs = observe(&path, SensorSpec::predictable());
        let ell = |p: f64, _: bool| Ext::Finite(2.0 * (p - 1.37642));
        let c = running_sup_control(&barrier_path(&obs, &ell), c0);
        for bp in c.breakpoints.iter().filter(|b| b.time > 0.0) {
            prop_assert_eq!(bp.left, bp.at);
        }
    }

    #[test]
    fn raising_eta_never_adds_detections(path in path_strategy(), lo in 0.0f64..6.0, gap in 0.0f64..6.0) {
        let a = observe(&path, SensorSpec::Threshold(lo));
        let b = observe(&path, SensorSpec::Threshold(lo + gap));
        for (da, db) in a.detected.iter().zip(&b.detected) {
            prop_assert!(!db || *da);
        }
        let inf = observe(&path, SensorSpec::predictable());
        prop_assert!(inf.detected.iter().all(|d| !d));
    }

    #[test]
    fn reward_jumps_by_the_mark(path in path_strategy()) {
        for e in &path.events {
            let d = path.reward_at(e.time, Side::At).unwrap() - path.reward_at(e.time, Side::Left).unwrap();
            prop_assert!((d - e.mark).abs() < 1e-12);
            prop_assert_eq!(path.reward_at(e.time, Side::At).unwrap(), path.reward_at(e.time, Side::Right).unwrap());
        }
        prop_assert!(path.reward_at(path.horizon + 1.0, Side::At).is_err());
    }

    #[test]
    fn projection_sides(path in path_strategy(), eta in 0.0f64..8.0) {
        let obs = observe(&path, SensorSpec::Threshold(eta));
        for (k, e) in path.events.iter().enumerate() {
            let disc = (-e.time).exp();
            let at = projected_reward(&obs, e.time, 1.0, Side::At).unwrap();
            let right = projected_reward(&obs, e.time, 1.0, Side::Right).unwrap();
            let expect_at = if obs.detected[k] { path.level_after(k) } else { path.level_before(k) };
            prop_assert!((at - expect_at * disc).abs() < 1e-12);
            prop_assert!((right - path.level_after(k) * disc).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fubini_matches_double_sums(seed in any::<u64>()) {
        let fx = random_fubini_fixture(&mut rng(seed));
        let got = fubini_check(&fx).unwrap();
        let want = brute_force_fubini(&fx);
        prop_assert_eq!(got, want);
        prop_assert!(got.holds());
    }

    #[test]
    fn star_integral_is_linear(seed in any::<u64>(), alpha in -3i32..=3, beta in -3i32..=3) {
        let mut g = rng(seed);
        let (phi, psi, a) = (random_oscillating_integrand(&mut g), random_oscillating_integrand(&mut g), random_integrator(&mut g, false));
        let (al, be) = (alpha as f64, beta as f64);
        let iv = Interval::all();
        let lhs = star_integral(&Comb(al, &phi, be, &psi), &a, iv);
        let rhs = al * star_integral(&phi, &a, iv) + be * star_integral(&psi, &a, iv);
        prop_assert_eq!(lhs, rhs);
        let (phi, psi) = (random_integrand(&mut g, false), random_integrand(&mut g, false));
        let lhs = star_integral(&Comb(al, &phi, be, &psi), &a, iv);
        let rhs = al * star_integral(&phi, &a, iv) + be * star_integral(&psi, &a, iv);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn star_integral_is_monotone(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (phi, a) = (random_oscillating_integrand(&mut g), random_integrator(&mut g, false));
        let mut bump = random_integrand(&mut g, false);
        bump.initial = bump.initial.abs();
        for k in &mut bump.knots {
            (k.left, k.at, k.right) = (k.left.abs(), k.at.abs(), k.right.abs());
        }
        let bigger = Comb(1.0, &phi, 1.0, &bump);
        prop_assert!(star_integral(&bigger, &a, Interval::all()) >= star_integral(&phi, &a, Interval::all()));
        prop_assert!(lower_star_integral(&bigger, &a, Interval::all()) >= lower_star_integral(&phi, &a, Interval::all()));
    }

    #[test]
    fn star_integral_is_additive(seed in any::<u64>(), t in 0u8..=6) {
        let mut g = rng(seed);
        let (phi, a) = (random_oscillating_integrand(&mut g), random_integrator(&mut g, false));
        let t = t as f64;
        let split = star_integral(&phi, &a, Interval::half_open(0.0, t)) + star_integral(&phi, &a, Interval::from(t));
        prop_assert_eq!(split, star_integral(&phi, &a, Interval::all()));
        let split = star_integral(&phi, &a, Interval::upto(t)) + star_integral(&phi, &a, Interval { lo: t, hi: f64::INFINITY, hi_closed: false })
            - star_integral(&phi, &a, Interval { lo: t, hi: t, hi_closed: true });
        prop_assert_eq!(split, star_integral(&phi, &a, Interval::all()));
    }

    #[test]
    fn lower_never_exceeds_upper(seed in any::<u64>()) {
        let mut g = rng(seed);
        let (phi, a) = (random_oscillating_integrand(&mut g), random_integrator(&mut g, false));
        prop_assert!(lower_star_integral(&phi, &a, Interval::all()) <= star_integral(&phi, &a, Interval::all()));
        let plain = random_integrand(&mut g, false);
        prop_assert_eq!(lower_star_integral(&plain, &a, Interval::all()), star_integral(&plain, &a, Interval::all()));
    }

    #[test]
    fn l_integral_differs_by_envelope_gaps(seed in any::<u64>(), t in 0u8..=6) {
        let mut g = rng(seed);
        let (phi, a) = (random_integrand(&mut g, false), random_integrator(&mut g, false));
        let t = t as f64;
        let gaps: f64 = a.knots.iter().filter(|k| k.time < t).map(|k| (phi.upper(k.time) - phi.at(k.time)) * (k.right - k.at)).sum();
        prop_assert_eq!(l_integral(&phi, &a, t), star_integral(&phi, &a, Interval::upto(t)) - gaps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn cs_integral_is_star_of_left_limits(seed in any::<u64>(), t in 0u8..=6) {
        let mut g = rng(seed);
        let (phi, a) = (random_integrand(&mut g, true), random_integrator(&mut g, true));
        let t = t as f64;
        prop_assert_eq!(cs_integral(&phi, &a, t), star_integral(&phi.left_limit_path(), &a, Interval::upto(t)));
    }

    #[test]
    fn truncation_is_exact_past_the_supremum(path in path_strategy(), eta in 0.0f64..8.0, c0 in -20.0f64..0.0, n in -20.0f64..20.0) {
        let obs = observe(&path, SensorSpec::Threshold(eta));
        let ell = |p: f64, d: bool| if d { Ext::Finite(0.5 * (p - 1.0).min(0.0)) } else { Ext::Finite(2.0 * (p - 1.0)) };
        let c = running_sup_control(&barrier_path(&obs, &ell), c0);
        let capped = c.cap(n);
        prop_assert!(capped.is_monotone());
        prop_assert!(capped.terminal <= n);
        let full = value_of_control(&obs, &c, 1.0);
        let at_sup = value_of_control(&obs, &c.cap(c.terminal), 1.0);
        prop_assert_eq!(full, at_sup);
        if n >= c.terminal {
            prop_assert_eq!(value_of_control(&obs, &capped, 1.0), full);
        }
    }
}
