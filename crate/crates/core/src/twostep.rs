//! The two-step problem: closed-form optimum, the four-term rate floor, a
//! brute-force minimizer of that floor, and the Chebyshev pair for
//! quadratics.

use num_integer::Roots;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimal two-step schedule for curvature bounds m < M.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStepSolution {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub r_star: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "S")]
    pub s: f64,
}

fn check_mm(m: f64, big_m: f64) -> Result<()> {
    if !(m > 0.0 && m < big_m && big_m.is_finite()) {
        return Err(Error::Invalid(format!(
            "need 0 < m < M, got m={m}, M={big_m}"
        )));
    }
    Ok(())
}

/// α* = 2/(m + S), β* = 2/(2M + m − S), R* = (S − M)/(2m + S − M) with
/// S = √(M² + (M − m)²).
pub fn optimal_pair(m: f64, big_m: f64) -> Result<TwoStepSolution> {
    check_mm(m, big_m)?;
    let d = big_m - m;
    let s = big_m.hypot(d);
    Ok(TwoStepSolution {
        alpha_star: 2.0 / (m + s),
        beta_star: 2.0 / (2.0 * big_m + m - s),
        // S − M = (M − m)²/(S + M) avoids cancellation as m → M.
        r_star: {
            let sm = d * d / (s + big_m);
            sm / (2.0 * m + sm)
        },
        m,
        big_m,
        s,
    })
}

/// The closed form in exact rational arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactTwoStep {
    pub alpha_star: Rational64,
    pub beta_star: Rational64,
    pub r_star: Rational64,
    pub s: Rational64,
}

fn exact_sqrt(q: Rational64) -> Option<Rational64> {
    if *q.numer() < 0 {
        return None;
    }
    let (n, d) = (*q.numer(), *q.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (rn * rn == n && rd * rd == d).then(|| Rational64::new(rn, rd))
}

/// [`optimal_pair`] over the rationals. Returns `None` when
/// M² + (M − m)² is not the square of a rational.
pub fn optimal_pair_exact(m: Rational64, big_m: Rational64) -> Result<Option<ExactTwoStep>> {
    if !(m > Rational64::from(0) && m < big_m) {
        return Err(Error::Invalid(format!("need 0 < m < M, got m={m}, M={big_m}")));
    }
    let d = big_m - m;
    let two = Rational64::from(2);
    Ok(exact_sqrt(big_m * big_m + d * d).map(|s| ExactTwoStep {
        alpha_star: two / (m + s),
        beta_star: two / (two * big_m + m - s),
        r_star: (s - big_m) / (two * m + s - big_m),
        s,
    }))
}

/// Residuals of the two equalization conditions:
/// r1 = (Mα−1)(Mβ−1) − (1−αm)(1−βm),
/// r2 = (1−αm)(1−βm) − (1−mα)(Mβ−1)/(1+α(M−m)).
pub fn defining_residual(alpha: f64, beta: f64, m: f64, big_m: f64) -> (f64, f64) {
    let [t1, t2, _, t4] = rate_floor_terms(alpha, beta, m, big_m);
    (t1 - t2, t2 - t4)
}

/// The four terms of the rate floor, in order:
/// (Mα−1)(Mβ−1), (1−αm)(1−βm), (Mα−1)(1−mβ), (1−mα)(Mβ−1)/(1+α(M−m)).
pub fn rate_floor_terms(alpha: f64, beta: f64, m: f64, big_m: f64) -> [f64; 4] {
    [
        (big_m * alpha - 1.0) * (big_m * beta - 1.0),
        (1.0 - alpha * m) * (1.0 - beta * m),
        (big_m * alpha - 1.0) * (1.0 - m * beta),
        (1.0 - m * alpha) * (big_m * beta - 1.0) / (1.0 + alpha * (big_m - m)),
    ]
}

fn floor_unchecked(alpha: f64, beta: f64, m: f64, big_m: f64) -> f64 {
    rate_floor_terms(alpha, beta, m, big_m)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Lower bound on the worst-case two-step contraction factor: the largest
/// of [`rate_floor_terms`]. Stepsizes must lie in [1/M, 1/m].
pub fn rate_floor(alpha: f64, beta: f64, m: f64, big_m: f64) -> Result<f64> {
    check_mm(m, big_m)?;
    let (lo, hi) = (1.0 / big_m, 1.0 / m);
    let tol = 1e-12 * hi;
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v >= lo - tol && v <= hi + tol) {
            return Err(Error::Domain(format!(
                "{name}={v} outside [1/M, 1/m] = [{lo}, {hi}]; clipping it improves convergence"
            )));
        }
    }
    Ok(floor_unchecked(alpha, beta, m, big_m))
}

/// Local pattern search on a 5×5 stencil, shrinking when no stencil point
/// improves. The stencil's diagonal and knight moves follow kinks of the
/// max-of-terms function.
fn pattern_search(
    f: &dyn Fn(f64, f64) -> f64,
    start: (f64, f64),
    step: f64,
    iters: usize,
    clamp: &dyn Fn(f64, f64) -> (f64, f64),
) -> (f64, f64, f64) {
    let (mut a, mut b) = start;
    let mut best = f(a, b);
    let mut h = step;
    for _ in 0..iters {
        let mut moved = false;
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                if i == 0 && j == 0 {
                    continue;
                }
                let (ca, cb) = clamp(a + h * i as f64 / 2.0, b + h * j as f64 / 2.0);
                let v = f(ca, cb);
                if v < best {
                    best = v;
                    a = ca;
                    b = cb;
                    moved = true;
                }
            }
        }
        if !moved {
            h *= 0.5;
            if h < 1e-15 * (1.0 + a.abs() + b.abs()) {
                break;
            }
        }
    }
    (a, b, best)
}

fn golden<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..iters {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if f(x1) <= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force minimizer of the rate floor over [1/M, 1/m]².
///
/// A grid of `grid_resolution`² points is zoomed `refine_iters` times
/// around the best cell, then polished by golden-section coordinate probes
/// and a stencil pattern search.
pub fn argmin_floor(m: f64, big_m: f64, grid_resolution: usize, refine_iters: usize) -> Result<(f64, f64, f64)> {
    check_mm(m, big_m)?;
    if grid_resolution < 32 {
        return Err(Error::Invalid(format!(
            "grid resolution must be at least 32, got {grid_resolution}"
        )));
    }
    let (lo, hi) = (1.0 / big_m, 1.0 / m);
    let f = |a: f64, b: f64| floor_unchecked(a, b, m, big_m);
    let clamp = |a: f64, b: f64| (a.clamp(lo, hi), b.clamp(lo, hi));
    let (mut alo, mut ahi, mut blo, mut bhi) = (lo, hi, lo, hi);
    let mut best = (lo, lo, f(lo, lo));
    let r = grid_resolution;
    for _ in 0..=refine_iters {
        let (ha, hb) = ((ahi - alo) / (r - 1) as f64, (bhi - blo) / (r - 1) as f64);
        for i in 0..r {
            let a = alo + ha * i as f64;
            for j in 0..r {
                let b = blo + hb * j as f64;
                let v = f(a, b);
                if v < best.2 {
                    best = (a, b, v);
                }
            }
        }
        alo = (best.0 - 2.0 * ha).max(lo);
        ahi = (best.0 + 2.0 * ha).min(hi);
        blo = (best.1 - 2.0 * hb).max(lo);
        bhi = (best.1 + 2.0 * hb).min(hi);
    }
    let (mut a, mut b) = (best.0, best.1);
    for _ in 0..4 {
        let w = (ahi - alo).max(bhi - blo);
        let na = golden(|x| f(x, b), (a - w).max(lo), (a + w).min(hi), 60);
        if f(na, b) < f(a, b) {
            a = na;
        }
        let nb = golden(|y| f(a, y), (b - w).max(lo), (b + w).min(hi), 60);
        if f(a, nb) < f(a, b) {
            b = nb;
        }
    }
    let w = (ahi - alo).max(bhi - blo).max(1e-9);
    Ok(pattern_search(&f, (a, b), w, 400, &clamp))
}

/// Runs the stencil search from `starts` uniform random points and returns
/// the largest distance between any end point and the first one.
pub fn basin_spread(m: f64, big_m: f64, starts: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    check_mm(m, big_m)?;
    let (lo, hi) = (1.0 / big_m, 1.0 / m);
    let f = |a: f64, b: f64| floor_unchecked(a, b, m, big_m);
    let clamp = |a: f64, b: f64| (a.clamp(lo, hi), b.clamp(lo, hi));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut ends = Vec::with_capacity(starts);
    for _ in 0..starts {
        let s = (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi));
        let (a, b, _) = pattern_search(&f, s, 0.25 * (hi - lo), 4000, &clamp);
        ends.push((a, b));
    }
    Ok(ends
        .iter()
        .map(|(a, b)| (a - ends[0].0).hypot(b - ends[0].1))
        .fold(0.0, f64::max))
}

/// Inverse roots of the degree-2 Chebyshev polynomial on [m, M], short
/// step first: 1/((M+m)/2 ± (M−m)/(2√2)).
pub fn chebyshev_pair(m: f64, big_m: f64) -> Result<(f64, f64)> {
    check_mm(m, big_m)?;
    let c = 0.5 * (big_m + m);
    let r = (big_m - m) / (2.0 * std::f64::consts::SQRT_2);
    Ok((1.0 / (c + r), 1.0 / (c - r)))
}

/// Worst two-step contraction factor over quadratics, max over
/// λ ∈ {m, M, (1/α + 1/β)/2} of |(1 − λα)(1 − λβ)|; the middle point is the
/// vertex of the parabola, clipped to [m, M].
pub fn quadratic_two_step_rate(alpha: f64, beta: f64, m: f64, big_m: f64) -> f64 {
    let p = |l: f64| ((1.0 - l * alpha) * (1.0 - l * beta)).abs();
    let mid = (0.5 * (1.0 / alpha + 1.0 / beta)).clamp(m, big_m);
    p(m).max(p(big_m)).max(p(mid))
}

/// One sample of the contour grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourCell {
    pub alpha: f64,
    pub beta: f64,
    pub rate: f64,
}

/// Rate floor on a `resolution`² grid over [1/M, 1/m]², α varying slowest.
pub fn contour_grid(m: f64, big_m: f64, resolution: usize) -> Result<Vec<ContourCell>> {
    check_mm(m, big_m)?;
    if resolution < 2 {
        return Err(Error::Invalid(format!(
            "contour resolution must be at least 2, got {resolution}"
        )));
    }
    let (lo, hi) = (1.0 / big_m, 1.0 / m);
    let at = |i: usize| {
        if i + 1 == resolution {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (resolution - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        for j in 0..resolution {
            let (alpha, beta) = (at(i), at(j));
            out.push(ContourCell {
                alpha,
                beta,
                rate: floor_unchecked(alpha, beta, m, big_m),
            });
        }
    }
    Ok(out)
}
