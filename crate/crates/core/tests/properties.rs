//! Randomized invariants across the library.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use silver::certificate::{
    build_certificate, cocoercivity_q, disjunction_sides, random_trajectory, weighted_sum,
};
use silver::dynamics::{big_psi, h_update, rate_monotonicity_check};
use silver::gd::{
    contraction, curvature_switch_oracle, hard_instances, quadratic_oracle, run_gd, sandwich_violation,
    FunctionOracle,
};
use silver::schedule::{
    arithmetic_mean, build_schedule, harmonic_mean, normalized_sequence, normalized_step, psi, psi_inv,
};
use silver::twostep::{defining_residual, optimal_pair};
use silver::fmt_g17;

fn kappa_strategy() -> impl Strategy<Value = f64> {
    // log-uniform on [1.01, 1e4]
    (0.01f64.ln_1p()..1e4f64.ln()).prop_map(f64::exp)
}

fn level_strategy() -> impl Strategy<Value = u32> {
    0u32..=6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_recursion_identities(kappa in kappa_strategy()) {
        let pairs = normalized_sequence(&kappa, 60).unwrap();
        for w in pairs.windows(2) {
            let (p, c) = (&w[0], &w[1]);
            let yz = c.y * c.z;
            prop_assert!((yz - p.z * p.z).abs() <= 1e-12 * yz.abs());
            let diff = c.z - c.y;
            let want = 2.0 * p.z * p.u;
            // z − y cancels once both sit near 1, so its error is measured
            // against the magnitude of z.
            prop_assert!((diff - want).abs() <= 1e-12 * c.z.max(want.abs()));
            prop_assert!(c.u <= p.u);
        }
    }

    #[test]
    fn step_bounds_and_ordering(kappa in kappa_strategy(), level in level_strategy()) {
        let n = 1usize << level;
        let s = build_schedule(&kappa, n).unwrap();
        let hm = harmonic_mean(kappa);
        let am = arithmetic_mean(kappa);
        for &a in &s.steps {
            prop_assert!(a >= 1.0 && a <= am * (1.0 + 1e-15));
        }
        let b = *s.steps.last().unwrap();
        prop_assert!(b >= hm * (1.0 - 1e-15) && b <= am * (1.0 + 1e-15));
        if n >= 2 {
            let p = s.pair(n);
            let (a, b) = (psi(&p.y, &kappa), psi(&p.z, &kappa));
            prop_assert!(a <= b);
            if s.pair(n / 2).u > 1e-8 {
                prop_assert!(a < b);
            }
        }
    }

    #[test]
    fn last_step_increases_and_rate_decreases(kappa in kappa_strategy(), level in 0u32..8) {
        let n = 1usize << level;
        let a = build_schedule(&kappa, n).unwrap();
        let b = build_schedule(&kappa, 2 * n).unwrap();
        let (bn, b2n) = (*a.steps.last().unwrap(), *b.steps.last().unwrap());
        prop_assert!(b2n >= bn);
        if arithmetic_mean(kappa) - bn > 1e-12 * kappa {
            prop_assert!(b2n > bn);
        }
        prop_assert!(b.tau < a.tau);
    }

    #[test]
    fn prefix_property(kappa in kappa_strategy(), level in 1u32..8) {
        let n = 1usize << level;
        let a = build_schedule(&kappa, n).unwrap();
        let b = build_schedule(&kappa, 2 * n).unwrap();
        prop_assert_eq!(&a.steps[..n - 1], &b.steps[..n - 1]);
    }

    #[test]
    fn psi_round_trip(kappa in kappa_strategy(), t in 0.0f64..1.0) {
        let s = 1.0 + t * (kappa - 1.0);
        let back = psi(&psi_inv(&s, &kappa), &kappa);
        prop_assert!((back - s).abs() <= 1e-14 * s);
    }

    #[test]
    fn rate_map_conjugacy(z in 1e-6f64..(1.0 - 1e-6)) {
        let p = silver::schedule::NormalizedPair { y: z, z, u: 1.0 - z, level: 0 };
        let next = normalized_step(&p).unwrap();
        let lhs = h_update(big_psi(z));
        let rhs = big_psi(next.z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn rate_monotonicity(kappa in kappa_strategy()) {
        for lvl in rate_monotonicity_check(kappa, 14).unwrap() {
            prop_assert!(lvl.passed, "{:?}", lvl);
        }
    }

    #[test]
    fn optimal_pair_solves_defining_equations(m in 1e-4f64..0.99, big_m in 1.0f64..10.0) {
        let m = m * big_m;
        let s = optimal_pair(m, big_m).unwrap();
        let (r1, r2) = defining_residual(s.alpha_star, s.beta_star, m, big_m);
        prop_assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12, "{} {}", r1, r2);
        let (a, b, r) = common::two_step_closed_form(m, big_m);
        prop_assert!((s.alpha_star - a).abs() <= 1e-12 * a);
        prop_assert!((s.beta_star - b).abs() <= 1e-12 * b);
        prop_assert!((s.r_star - r).abs() <= 1e-12 * r.max(1e-300));
        prop_assert!(1.0 / big_m <= s.alpha_star && s.alpha_star <= 2.0 / (m + big_m));
        prop_assert!(2.0 / (m + big_m) <= s.beta_star && s.beta_star <= 1.0 / m);
        prop_assert!(s.r_star < ((big_m - m) / (big_m + m)).powi(2));
    }

    #[test]
    fn netflow_gives_f_invariance(kappa in 1.2f64..50.0, level in 0u32..5, seed in any::<u64>(), shift in -10.0f64..10.0) {
        prop_assume!((kappa - 2.0).abs() > 1e-3);
        let n = 1usize << level;
        let s = build_schedule(&kappa, n).unwrap();
        let lambda = build_certificate(&kappa, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut data, _) = random_trajectory(&s, 2, &mut rng);
        let before = weighted_sum(&lambda, &data, &kappa).unwrap();
        for (k, p) in data.iterates.iter_mut().enumerate() {
            p.f += shift * (k as f64 + 1.0).sqrt();
        }
        data.star.f -= shift;
        let after = weighted_sum(&lambda, &data, &kappa).unwrap();
        let scale = 1.0 + before.abs() + shift.abs() * lambda.entries.values().sum::<f64>();
        prop_assert!((after - before).abs() <= 1e-12 * scale);
    }

    #[test]
    fn disjunction_identity(c in prop::collection::vec(-3.0f64..3.0, 1..=20)) {
        let (lhs, rhs) = disjunction_sides(&c).unwrap();
        let scale = 1.0 + c.iter().map(|x| 1.0 + x.abs()).product::<f64>();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn g17_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_g17(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn oracles_obey_curvature_sandwich(kappa in 1.5f64..100.0, d in 1usize..8, seed in any::<u64>()) {
        let m = 1.0 / kappa;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spectrum: Vec<f64> = (0..d).map(|_| m + (1.0 - m) * rand::Rng::gen::<f64>(&mut rng)).collect();
        let q = quadratic_oracle(&spectrum, m, 1.0, seed).unwrap();
        prop_assert!(sandwich_violation(&q, 200, 1.0, seed) <= 1e-12);
        for h in hard_instances(m, 1.0, 2.0 / (1.0 + m)).unwrap() {
            prop_assert!(sandwich_violation(&h, 200, 1.0, seed) <= 1e-12);
        }
    }

    #[test]
    fn contraction_within_rate_and_certificate_nonnegative(
        kappa in 1.5f64..100.0,
        level in 0u32..5,
        seed in any::<u64>(),
        t in -2.0f64..2.0,
        x0 in -3.0f64..3.0,
    ) {
        prop_assume!((kappa - 2.0).abs() > 1e-3);
        let n = 1usize << level;
        let m = 1.0 / kappa;
        let s = build_schedule(&kappa, n).unwrap();
        let lambda = build_certificate(&kappa, n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spectrum: Vec<f64> = (0..4).map(|_| m + (1.0 - m) * rand::Rng::gen::<f64>(&mut rng)).collect();
        let oracles: Vec<Box<dyn FunctionOracle>> = vec![
            Box::new(quadratic_oracle(&spectrum, m, 1.0, seed).unwrap()),
            Box::new(curvature_switch_oracle(&[(f64::NEG_INFINITY, 1.0), (t, m)], m, 1.0).unwrap()),
            Box::new(curvature_switch_oracle(&[(f64::NEG_INFINITY, m), (t, 1.0)], m, 1.0).unwrap()),
        ];
        for o in &oracles {
            let start: Vec<f64> = (0..o.dim()).map(|k| x0 + k as f64).collect();
            let traj = run_gd(o.as_ref(), &start, &s.steps).unwrap();
            let c = contraction(&traj, &o.minimizer()).unwrap();
            prop_assert!(c <= s.tau * (1.0 + 1e-10) + 1e-15, "{} > {}", c, s.tau);
            let mut scale: f64 = 1.0;
            for &(i, j) in lambda.entries.keys() {
                let q = cocoercivity_q(&traj, i, j, &m, &1.0).unwrap();
                scale = scale.max(q.abs());
                prop_assert!(q >= -1e-10 * scale);
            }
            let total = weighted_sum(&lambda, &traj, &kappa).unwrap();
            prop_assert!(total >= -1e-10 * scale * lambda.entries.values().sum::<f64>());
        }
    }
}
