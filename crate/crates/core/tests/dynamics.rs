//! Rate envelope, two-step floor and oracle invariants.

mod common;

use silver::certificate::{cocoercivity_q, CertIndex};
use silver::dynamics::{phase_transition, rate_envelope, rate_monotonicity_check};
use silver::gd::{
    adversarial_probe, contraction, hard_instances, quadratic_oracle, run_gd, sandwich_violation,
    FunctionOracle,
};
use silver::schedule::{build_schedule, ln_rate_sequence, ln_silver_rate};
use silver::twostep::{basin_spread, optimal_pair, rate_floor, rate_floor_terms};
use silver::{Mp, Real};

#[test]
fn envelope_brackets_rate() {
    for k in [5.0, 10.0, 100.0, 1000.0] {
        let ln_tau = ln_rate_sequence(k, 14).unwrap();
        for (l, t) in ln_tau.iter().enumerate() {
            let env = rate_envelope(k, 1 << l).unwrap();
            assert!(env.contains_ln(*t), "κ={k} n={} {t} {env:?}", 1 << l);
        }
    }
}

#[test]
fn phase_index_formula() {
    let rho = 1.0 + 2f64.sqrt();
    for k in [1.5, 3.0, 3.5, 10.0, 100.0, 1000.0, 1e6] {
        let p = phase_transition(k).unwrap();
        let want = if k > 3.0 { ((k / 3.0).ln() / rho.ln()).floor() as u32 } else { 0 };
        assert_eq!(p.i_star, want, "κ={k}");
        assert_eq!(p.n_star, 1 << want);
    }
}

#[test]
fn rate_doubling_inequality() {
    for k in [1.5, 4.0, 10.0, 1e3, 1e5] {
        assert!(rate_monotonicity_check(k, 20).unwrap().iter().all(|l| l.passed));
    }
}

#[test]
fn log_rate_agrees_with_multiprecision() {
    for k in [1.5, 10.0, 1e4] {
        for n in [64usize, 1024] {
            let hp = build_schedule(&Mp::new(k, 256), n).unwrap();
            let ln_f64 = ln_silver_rate(k, n).unwrap();
            let ln_mp = hp.tau.ln_abs();
            assert!((ln_f64 - ln_mp).abs() <= 1e-12 * ln_mp.abs(), "κ={k} n={n}");
        }
    }
}

#[test]
fn silver_two_step_matches_optimal_pair() {
    for k in [1.5, 3.0, 4.0, 10.0, 100.0, 1e4] {
        let s = build_schedule(&k, 2).unwrap();
        let o = optimal_pair(1.0 / k, 1.0).unwrap();
        assert!((s.steps[0] - o.alpha_star).abs() <= 1e-12 * o.alpha_star);
        assert!((s.steps[1] - o.beta_star).abs() <= 1e-12 * o.beta_star);
        assert!((s.tau - o.r_star * o.r_star).abs() <= 1e-12 * s.tau);
    }
}

#[test]
fn floor_terms_are_attained_by_hard_instances() {
    for (m, big_m) in [(0.25, 1.0), (0.1, 1.0), (0.01, 1.0), (0.3, 2.0)] {
        let o = optimal_pair(m, big_m).unwrap();
        let floor = rate_floor(o.alpha_star, o.beta_star, m, big_m).unwrap();
        assert!((floor - o.r_star).abs() <= 1e-12 * o.r_star);
        let terms = rate_floor_terms(o.alpha_star, o.beta_star, m, big_m);
        let hard = hard_instances(m, big_m, o.alpha_star).unwrap();
        for (h, term) in hard.iter().zip(terms) {
            let traj = run_gd(h, &[1.0], &[o.alpha_star, o.beta_star]).unwrap();
            let c = contraction(&traj, &h.minimizer()).unwrap().sqrt();
            assert!((c - term).abs() <= 1e-12, "{}: {c} vs {term}", h.description());
        }
    }
}

#[test]
fn two_step_single_basin() {
    for (m, big_m) in [(0.25, 1.0), (0.05, 1.0)] {
        let spread = basin_spread(m, big_m, 100, 5).unwrap();
        assert!(spread < 1e-6, "spread {spread}");
    }
}

#[test]
fn reversed_two_step_is_worse() {
    let s = build_schedule(&4.0, 2).unwrap();
    let rev: Vec<f64> = s.steps.iter().rev().cloned().collect();
    let a = adversarial_probe(4.0, 2, &s.steps, 2000, 1).unwrap();
    let b = adversarial_probe(4.0, 2, &rev, 2000, 1).unwrap();
    assert!(b.worst.contraction > a.worst.contraction + 1e-3);
    assert!(a.worst.contraction <= s.tau * (1.0 + 1e-10));
}

#[test]
fn zero_budget_probe_returns_baseline() {
    let s = build_schedule(&10.0, 4).unwrap();
    let p = adversarial_probe(10.0, 4, &s.steps, 0, 3).unwrap();
    let base = common::quadratic_worst(&s.steps, 0.1, 1.0, 20_000);
    assert!(p.worst.contraction >= base * (1.0 - 1e-6));
    assert!(p.worst.contraction <= s.tau * (1.0 + 1e-10));
}

#[test]
fn oracles_in_class_and_trajectories_interpolable() {
    let m = 0.02;
    let spectrum: Vec<f64> = (0..50).map(|i| m + (1.0 - m) * i as f64 / 49.0).collect();
    let mut oracles: Vec<Box<dyn FunctionOracle>> = vec![Box::new(quadratic_oracle(&spectrum, m, 1.0, 8).unwrap())];
    for h in hard_instances(m, 1.0, 1.5).unwrap() {
        oracles.push(Box::new(h));
    }
    let s = build_schedule(&(1.0 / m), 8).unwrap();
    for o in &oracles {
        assert!(sandwich_violation(o.as_ref(), 10_000, 2.0, 4) <= 1e-12, "{}", o.description());
        let x0: Vec<f64> = (0..o.dim()).map(|i| 1.0 - 0.03 * i as f64).collect();
        let traj = run_gd(o.as_ref(), &x0, &s.steps).unwrap();
        let mut idx: Vec<CertIndex> = (0..=s.n).map(CertIndex::Iter).collect();
        idx.push(CertIndex::Star);
        for &i in &idx {
            for &j in &idx {
                if i != j {
                    let q = cocoercivity_q(&traj, i, j, &m, &1.0).unwrap();
                    assert!(q >= -1e-10, "{}: Q({i},{j}) = {q}", o.description());
                }
            }
        }
        let c = contraction(&traj, &o.minimizer()).unwrap();
        assert!(c <= s.tau * (1.0 + 1e-10));
    }
}
