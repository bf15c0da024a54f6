//! Gradient descent on instrumented κ-conditioned oracles.
//!
//! Oracles are m-strongly convex and M-smooth with a known minimizer. The
//! probe searches quadratics and 1-D curvature-switch functions for large
//! contraction ‖x_n − x*‖²/‖x_0 − x*‖² under a given schedule.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::certificate::{cocoercivity_q, CertIndex, Point, TrajectoryData};
use crate::error::{Error, Result};

/// A first-order oracle with curvature in [m, M].
pub trait FunctionOracle: Send + Sync {
    fn grad(&self, x: &[f64]) -> Vec<f64>;
    fn value(&self, x: &[f64]) -> f64;
    fn minimizer(&self) -> Vec<f64>;
    fn m(&self) -> f64;
    fn big_m(&self) -> f64;
    fn description(&self) -> String;

    fn dim(&self) -> usize {
        self.minimizer().len()
    }
}

/// f(x) = ½xᵀHx with H = QᵀDQ.
#[derive(Clone, Debug)]
pub struct QuadraticOracle {
    pub spectrum: Vec<f64>,
    pub m: f64,
    pub big_m: f64,
    h: DMatrix<f64>,
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Quadratic oracle with eigenvalues `spectrum` ⊂ [m, M], rotated by a
/// seeded random orthogonal matrix (no rotation in dimension 1).
pub fn quadratic_oracle(spectrum: &[f64], m: f64, big_m: f64, seed: u64) -> Result<QuadraticOracle> {
    check_bounds(m, big_m)?;
    if spectrum.is_empty() {
        return Err(Error::Invalid("spectrum must be nonempty".into()));
    }
    let tol = 1e-12 * big_m;
    if let Some(l) = spectrum.iter().find(|l| !(**l >= m - tol && **l <= big_m + tol)) {
        return Err(Error::Invalid(format!(
            "eigenvalue {l} outside [{m}, {big_m}]"
        )));
    }
    let d = spectrum.len();
    let diag = DMatrix::from_diagonal(&DVector::from_column_slice(spectrum));
    let h = if d == 1 {
        diag
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(d, &mut rng);
        q.transpose() * diag * q
    };
    Ok(QuadraticOracle {
        spectrum: spectrum.to_vec(),
        m,
        big_m,
        h,
    })
}

fn check_bounds(m: f64, big_m: f64) -> Result<()> {
    if !(m > 0.0 && big_m > m && big_m.is_finite()) {
        return Err(Error::Invalid(format!(
            "need 0 < m < M, got m={m}, M={big_m}"
        )));
    }
    Ok(())
}

impl FunctionOracle for QuadraticOracle {
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        (&self.h * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        0.5 * v.dot(&(&self.h * &v))
    }

    fn minimizer(&self) -> Vec<f64> {
        vec![0.0; self.spectrum.len()]
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn big_m(&self) -> f64 {
        self.big_m
    }

    fn description(&self) -> String {
        let s: Vec<String> = self.spectrum.iter().map(|l| format!("{l:.6}")).collect();
        format!("quadratic d={} spectrum=[{}]", self.spectrum.len(), s.join(","))
    }
}

/// One piece of a curvature-switch function: on [start, next start),
/// f'(x) = g + c(x − s) and f(x) = f + g(x − s) + c(x − s)²/2 with anchor
/// s = start, or s = 0 for the piece unbounded below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub curvature: f64,
    pub grad_at_start: f64,
    pub value_at_start: f64,
}

/// Univariate piecewise quadratic with f'' ∈ {m, M}, f(0) = f'(0) = 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvatureSwitchOracle {
    pub m: f64,
    pub big_m: f64,
    pub pieces: Vec<Piece>,
    pub label: String,
}

/// Builds a curvature-switch oracle from (threshold, curvature) pairs.
///
/// The first threshold must be −∞, thresholds must increase, and each
/// curvature must equal m or M. Value and gradient are integrated from 0.
pub fn curvature_switch_oracle(breaks: &[(f64, f64)], m: f64, big_m: f64) -> Result<CurvatureSwitchOracle> {
    check_bounds(m, big_m)?;
    match breaks.first() {
        Some((t, _)) if *t == f64::NEG_INFINITY => {}
        _ => {
            return Err(Error::Invalid(
                "first breakpoint threshold must be -inf".into(),
            ))
        }
    }
    for w in breaks.windows(2) {
        if !w[1].0.is_finite() || w[0].0.is_nan() || w[1].0 <= w[0].0 {
            return Err(Error::Invalid("thresholds must be finite and increasing".into()));
        }
    }
    if let Some((_, c)) = breaks.iter().find(|(_, c)| *c != m && *c != big_m) {
        return Err(Error::Invalid(format!("curvature {c} is neither m nor M")));
    }
    let mut pieces: Vec<Piece> = breaks
        .iter()
        .map(|&(start, curvature)| Piece {
            start,
            curvature,
            grad_at_start: 0.0,
            value_at_start: 0.0,
        })
        .collect();
    let home = piece_index(&pieces, 0.0);
    // Anchor the home piece at its start (or at 0 when unbounded below).
    let anchor = |p: &Piece| if p.start.is_finite() { p.start } else { 0.0 };
    {
        let p = &mut pieces[home];
        let s = if p.start.is_finite() { p.start } else { 0.0 };
        p.grad_at_start = p.curvature * s;
        p.value_at_start = 0.5 * p.curvature * s * s;
    }
    for i in home + 1..pieces.len() {
        let s = pieces[i].start;
        let (g, f) = eval_piece(&pieces[i - 1], anchor(&pieces[i - 1]), s);
        pieces[i].grad_at_start = g;
        pieces[i].value_at_start = f;
    }
    for i in (0..home).rev() {
        // Piece i ends where piece i + 1 starts; match value and slope there.
        let e = pieces[i + 1].start;
        let (ge, fe) = (pieces[i + 1].grad_at_start, pieces[i + 1].value_at_start);
        let c = pieces[i].curvature;
        let s = anchor(&pieces[i]);
        pieces[i].grad_at_start = ge - c * (e - s);
        pieces[i].value_at_start = fe - ge * (e - s) + 0.5 * c * (e - s) * (e - s);
    }
    let parts: Vec<String> = breaks
        .iter()
        .map(|(t, c)| format!("({t},{})", if *c == big_m { "M" } else { "m" }))
        .collect();
    Ok(CurvatureSwitchOracle {
        m,
        big_m,
        pieces,
        label: format!("switch [{}]", parts.join(",")),
    })
}

fn piece_index(pieces: &[Piece], x: f64) -> usize {
    pieces.partition_point(|p| p.start <= x).saturating_sub(1)
}

/// (f'(x), f(x)) on one piece anchored at `s`.
fn eval_piece(p: &Piece, s: f64, x: f64) -> (f64, f64) {
    let d = x - s;
    (
        p.grad_at_start + p.curvature * d,
        p.value_at_start + p.grad_at_start * d + 0.5 * p.curvature * d * d,
    )
}

impl CurvatureSwitchOracle {
    fn eval(&self, x: f64) -> (f64, f64) {
        let p = &self.pieces[piece_index(&self.pieces, x)];
        let s = if p.start.is_finite() { p.start } else { 0.0 };
        eval_piece(p, s, x)
    }

    /// Replaces the label used in reports.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl FunctionOracle for CurvatureSwitchOracle {
    fn grad(&self, x: &[f64]) -> Vec<f64> {
        vec![self.eval(x[0]).0]
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x[0]).1
    }

    fn minimizer(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn big_m(&self) -> f64 {
        self.big_m
    }

    fn description(&self) -> String {
        self.label.clone()
    }
}

/// The four univariate worst cases for a 2-step schedule (α, β): the two
/// extreme quadratics, f'' = M on x ≥ 0 and m below, and f'' = m on
/// x ≥ (1 − mα)/(1 + α(M − m)) and M below.
pub fn hard_instances(m: f64, big_m: f64, alpha: f64) -> Result<Vec<CurvatureSwitchOracle>> {
    let t = (1.0 - m * alpha) / (1.0 + alpha * (big_m - m));
    let ninf = f64::NEG_INFINITY;
    Ok(vec![
        curvature_switch_oracle(&[(ninf, big_m)], m, big_m)?.with_label("hard:first"),
        curvature_switch_oracle(&[(ninf, m)], m, big_m)?.with_label("hard:second"),
        curvature_switch_oracle(&[(ninf, m), (0.0, big_m)], m, big_m)?.with_label("hard:third"),
        curvature_switch_oracle(&[(ninf, big_m), (t, m)], m, big_m)?.with_label("hard:fourth"),
    ])
}

/// Runs x_{t+1} = x_t − α_t ∇f(x_t) and records (x_t, g_t, f_t) for
/// t = 0..=n, with the optimum as the star entry.
pub fn run_gd(oracle: &dyn FunctionOracle, x0: &[f64], schedule: &[f64]) -> Result<TrajectoryData<f64>> {
    if schedule.is_empty() {
        return Err(Error::Invalid("schedule must be nonempty".into()));
    }
    if x0.len() != oracle.dim() {
        return Err(Error::Invalid(format!(
            "x0 has dimension {}, oracle has {}",
            x0.len(),
            oracle.dim()
        )));
    }
    let sample = |x: Vec<f64>| -> Result<Point<f64>> {
        let g = oracle.grad(&x);
        let f = oracle.value(&x);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "oracle {} returned a non-finite value",
                oracle.description()
            )));
        }
        Ok(Point { x, g, f })
    };
    let mut iterates = Vec::with_capacity(schedule.len() + 1);
    let mut p = sample(x0.to_vec())?;
    for a in schedule {
        let next: Vec<f64> = p.x.iter().zip(&p.g).map(|(x, g)| x - a * g).collect();
        iterates.push(p);
        p = sample(next)?;
    }
    iterates.push(p);
    let star = sample(oracle.minimizer())?;
    Ok(TrajectoryData { iterates, star })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// ‖x_n − x*‖²/‖x_0 − x*‖² for the last recorded iterate.
pub fn contraction(trajectory: &TrajectoryData<f64>, minimizer: &[f64]) -> Result<f64> {
    let first = trajectory
        .iterates
        .first()
        .ok_or_else(|| Error::Invalid("empty trajectory".into()))?;
    let last = trajectory.iterates.last().expect("nonempty");
    let d0 = dist2(&first.x, minimizer);
    if d0 == 0.0 {
        return Err(Error::Invalid("x0 equals the minimizer".into()));
    }
    Ok(dist2(&last.x, minimizer) / d0)
}

/// Smallest co-coercivity Q_ij over all ordered pairs of recorded points
/// and the optimum. Nonnegative for in-class oracles.
pub fn min_cocoercivity(trajectory: &TrajectoryData<f64>, m: f64, big_m: f64) -> f64 {
    let idx: Vec<CertIndex> = (0..trajectory.iterates.len())
        .map(CertIndex::Iter)
        .chain(std::iter::once(CertIndex::Star))
        .collect();
    let mut worst = f64::INFINITY;
    for &i in &idx {
        for &j in &idx {
            if i != j {
                let q = cocoercivity_q(trajectory, i, j, &m, &big_m).expect("indices exist");
                worst = worst.min(q);
            }
        }
    }
    worst
}

/// Largest violation of m‖v‖² ≤ ⟨∇f(x+v) − ∇f(x), v⟩ ≤ M‖v‖², relative to
/// M‖v‖², over random secants.
pub fn sandwich_violation(oracle: &dyn FunctionOracle, samples: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = oracle.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let v: Vec<f64> = (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let xv: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        let g1 = oracle.grad(&xv);
        let g0 = oracle.grad(&x);
        let ip: f64 = g1.iter().zip(&g0).zip(&v).map(|((a, b), c)| (a - b) * c).sum();
        let nv: f64 = v.iter().map(|t| t * t).sum();
        let lo = oracle.m() * nv - ip;
        let hi = ip - oracle.big_m() * nv;
        worst = worst.max(lo.max(hi) / (oracle.big_m() * nv));
    }
    worst
}

/// Probe candidate: (contraction, switch breaks, x0).
type Elite = (f64, Vec<(f64, f64)>, f64);

/// Result of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schedule_id: String,
    pub oracle: String,
    pub n: usize,
    pub contraction: f64,
    pub tau_n: f64,
    pub slack: f64,
}

impl RunReport {
    pub fn new(schedule_id: &str, oracle: &str, n: usize, contraction: f64, tau_n: f64) -> Self {
        RunReport {
            schedule_id: schedule_id.to_string(),
            oracle: oracle.to_string(),
            n,
            contraction,
            tau_n,
            slack: tau_n - contraction,
        }
    }
}

/// Runs `schedule` on `oracle` from `x0` and reports against `tau_n`.
pub fn run_report(
    oracle: &dyn FunctionOracle,
    x0: &[f64],
    schedule: &[f64],
    schedule_id: &str,
    tau_n: f64,
) -> Result<RunReport> {
    let traj = run_gd(oracle, x0, schedule)?;
    let c = contraction(&traj, &oracle.minimizer())?;
    Ok(RunReport::new(
        schedule_id,
        &oracle.description(),
        schedule.len(),
        c,
        tau_n,
    ))
}

/// CSV dump (t, x, g, f) of a 1-D trajectory.
pub fn trajectory_csv(trajectory: &TrajectoryData<f64>) -> String {
    let mut out = String::from("t,x,g,f\n");
    for (t, p) in trajectory.iterates.iter().enumerate() {
        out.push_str(&format!(
            "{t},{},{},{}\n",
            crate::fmt_g17(p.x[0]),
            crate::fmt_g17(p.g[0]),
            crate::fmt_g17(p.f)
        ));
    }
    out
}

/// Worst contraction found by [`adversarial_probe`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeReport {
    pub worst: RunReport,
    pub evaluations: usize,
    pub seed: u64,
}

/// 1-D quadratic contraction ∏(1 − α_t λ)².
fn quad_contraction(schedule: &[f64], lambda: f64) -> f64 {
    schedule.iter().map(|a| (1.0 - a * lambda).powi(2)).product()
}

/// Switch oracle contraction from x_0 = ±1; thresholds given sorted.
fn switch_contraction(schedule: &[f64], breaks: &[(f64, f64)], m: f64, big_m: f64, x0: f64) -> Option<(f64, String)> {
    let o = curvature_switch_oracle(breaks, m, big_m).ok()?;
    let traj = run_gd(&o, &[x0], schedule).ok()?;
    let c = contraction(&traj, &[0.0]).ok()?;
    Some((c, format!("{} x0={x0}", o.label)))
}

/// Best-effort search for a large contraction of `schedule` over
/// in-class oracles with m = 1/κ, M = 1.
///
/// Always evaluates the 1-D quadratic family on a grid with golden-section
/// refinement. Then spends `budget` evaluations on random rotated
/// quadratics (d ≤ 10) and random curvature-switch oracles with at most
/// `n` thresholds, the last quarter refining the best switch oracles by
/// coordinate moves on their thresholds.
pub fn adversarial_probe(kappa: f64, n: usize, schedule: &[f64], budget: usize, seed: u64) -> Result<ProbeReport> {
    if schedule.len() != n || n == 0 {
        return Err(Error::Invalid(format!(
            "schedule length {} does not match n = {n}",
            schedule.len()
        )));
    }
    crate::schedule::check_kappa(&kappa)?;
    let (m, big_m) = (1.0 / kappa, 1.0);
    let tau = crate::schedule::silver_rate(&kappa, n.next_power_of_two())
        .map(|r| r.tau)
        .unwrap_or(f64::NAN);
    let id = "probe";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best_lambda = m;
    let mut best = (quad_contraction(schedule, m), format!("quadratic lambda={m}"));
    let grid = 256;
    for i in 0..=grid {
        let l = m + (big_m - m) * i as f64 / grid as f64;
        let c = quad_contraction(schedule, l);
        if c > best.0 {
            best = (c, format!("quadratic lambda={l}"));
            best_lambda = l;
        }
    }
    let h = (big_m - m) / grid as f64;
    let (mut lo, mut hi) = ((best_lambda - h).max(m), (best_lambda + h).min(big_m));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if quad_contraction(schedule, a) >= quad_contraction(schedule, b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let l = 0.5 * (lo + hi);
    let c = quad_contraction(schedule, l);
    if c > best.0 {
        best = (c, format!("quadratic lambda={l}"));
    }

    let mut evaluations = 0;
    let refine_budget = budget / 4;
    let random_budget = budget - refine_budget;
    let mut elite: Vec<Elite> = Vec::new();
    let pick = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { m } else { big_m };
    while evaluations < random_budget {
        evaluations += 1;
        if evaluations % 3 == 0 {
            let d = rng.gen_range(1..=10);
            let spectrum: Vec<f64> = (0..d)
                .map(|_| match rng.gen_range(0..3) {
                    0 => m,
                    1 => big_m,
                    _ => rng.gen_range(m..=big_m),
                })
                .collect();
            let o = quadratic_oracle(&spectrum, m, big_m, rng.gen())?;
            let x0: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            if let Ok(r) = run_report(&o, &x0, schedule, id, tau) {
                if r.contraction > best.0 {
                    best = (r.contraction, r.oracle);
                }
            }
        } else {
            let k = rng.gen_range(1..=n);
            let mut ts: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.5..1.5)).collect();
            ts.sort_by(f64::total_cmp);
            ts.dedup();
            let mut breaks = vec![(f64::NEG_INFINITY, pick(&mut rng))];
            breaks.extend(ts.into_iter().map(|t| (t, pick(&mut rng))));
            let x0 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            if let Some((c, desc)) = switch_contraction(schedule, &breaks, m, big_m, x0) {
                if c > best.0 {
                    best = (c, desc);
                }
                elite.push((c, breaks, x0));
                if elite.len() > 64 {
                    elite.sort_by(|a, b| b.0.total_cmp(&a.0));
                    elite.truncate(8);
                }
            }
        }
    }
    elite.sort_by(|a, b| b.0.total_cmp(&a.0));
    elite.truncate(8);
    let mut step = 0.25;
    let mut k = 0;
    while evaluations < budget && !elite.is_empty() {
        let slot = k % elite.len();
        k += 1;
        let (c0, breaks, x0) = elite[slot].clone();
        let mut cand = breaks.clone();
        if cand.len() > 1 {
            let i = rng.gen_range(1..cand.len());
            cand[i].0 += step * rng.gen_range(-1.0..1.0);
        }
        if rng.gen_bool(0.1) {
            let i = rng.gen_range(0..cand.len());
            cand[i].1 = if cand[i].1 == m { big_m } else { m };
        }
        let mut tail: Vec<(f64, f64)> = cand[1..].to_vec();
        tail.sort_by(|a, b| a.0.total_cmp(&b.0));
        tail.dedup_by(|a, b| a.0 == b.0);
        let mut cand = vec![cand[0]];
        cand.extend(tail);
        evaluations += 1;
        if let Some((c, desc)) = switch_contraction(schedule, &cand, m, big_m, x0) {
            if c > c0 {
                elite[slot] = (c, cand, x0);
            }
            if c > best.0 {
                best = (c, desc);
            }
        }
        if k % (8 * elite.len()) == 0 {
            step *= 0.5;
        }
    }
    Ok(ProbeReport {
        worst: RunReport::new(id, &best.1, n, best.0, tau),
        evaluations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_iterations() {
        let s = [4.0 / 3.0, 2.0];
        let q = quadratic_oracle(&[1.0], 0.25, 1.0, 0).unwrap();
        let t = run_gd(&q, &[1.0], &s).unwrap();
        assert!((t.iterates[2].x[0] - 1.0 / 3.0).abs() < 1e-15);
        let q = quadratic_oracle(&[0.25], 0.25, 1.0, 0).unwrap();
        let t = run_gd(&q, &[1.0], &s).unwrap();
        assert!((t.iterates[2].x[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((contraction(&t, &[0.0]).unwrap() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn hard_functions_at_two_step_optimum() {
        let hard = hard_instances(0.25, 1.0, 4.0 / 3.0).unwrap();
        let want = [1.0 / 3.0, 1.0 / 3.0, -1.0 / 6.0, -1.0 / 3.0];
        for (o, w) in hard.iter().zip(want) {
            let t = run_gd(o, &[1.0], &[4.0 / 3.0, 2.0]).unwrap();
            assert!((t.iterates[2].x[0] - w).abs() < 1e-15, "{}", o.label);
        }
    }

    #[test]
    fn switch_oracle_is_continuous() {
        let o = curvature_switch_oracle(
            &[(f64::NEG_INFINITY, 1.0), (-0.7, 0.1), (0.3, 1.0), (0.9, 0.1)],
            0.1,
            1.0,
        )
        .unwrap();
        assert_eq!(o.grad(&[0.0])[0], 0.0);
        assert_eq!(o.value(&[0.0]), 0.0);
        for t in [-0.7, 0.3, 0.9] {
            let e = 1e-9;
            let (gl, fl) = (o.grad(&[t - e])[0], o.value(&[t - e]));
            let (gr, fr) = (o.grad(&[t + e])[0], o.value(&[t + e]));
            assert!((gl - gr).abs() < 1e-8 && (fl - fr).abs() < 1e-8);
        }
        assert!(sandwich_violation(&o, 2000, 1.0, 4) < 1e-12);
    }

    #[test]
    fn malformed_breaks() {
        let ninf = f64::NEG_INFINITY;
        assert!(curvature_switch_oracle(&[(0.0, 1.0)], 0.25, 1.0).is_err());
        assert!(curvature_switch_oracle(&[(ninf, 0.5)], 0.25, 1.0).is_err());
        assert!(curvature_switch_oracle(&[(ninf, 1.0), (1.0, 0.25), (0.5, 1.0)], 0.25, 1.0).is_err());
        assert!(quadratic_oracle(&[2.0], 0.25, 1.0, 0).is_err());
    }

    #[test]
    fn rotated_quadratic_spectrum() {
        let o = quadratic_oracle(&[0.1, 0.5, 1.0], 0.1, 1.0, 7).unwrap();
        let sym = (&o.h - o.h.transpose()).abs().max();
        assert!(sym < 1e-14);
        let eig = o.h.clone().symmetric_eigen().eigenvalues;
        let mut e: Vec<f64> = eig.iter().cloned().collect();
        e.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip([0.1, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_start_is_rejected() {
        let q = quadratic_oracle(&[1.0], 0.25, 1.0, 0).unwrap();
        let t = run_gd(&q, &[0.0], &[1.0]).unwrap();
        assert_eq!(t.iterates[1].x[0], 0.0);
        assert!(contraction(&t, &[0.0]).is_err());
    }
}
