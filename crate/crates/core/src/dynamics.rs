//! The scalar map h ↦ H(h) behind the silver rate.
//!
//! With Ψ(z) = 2z/(1+z), the level-i value h_i = Ψ(z_{2^i}) satisfies
//! h_{i+1} = H(h_i) and τ_{2^i} = (1 − h_i)². Near zero H(h) ≈ ρh
//! (acceleration); near one 1 − H(h) ≈ (1 − h)² (saturation).

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::Result;
use crate::schedule::{check_kappa, ln_rate_sequence};

/// Silver ratio 1 + √2.
pub const RHO: f64 = 1.0 + SQRT_2;
/// ν = 3ρ/(2√2), the quadratic coefficient of H at zero.
pub const NU: f64 = 3.0 * RHO / (2.0 * SQRT_2);

/// log2(ρ), the acceleration exponent.
pub fn log2_rho() -> f64 {
    RHO.log2()
}

/// H(h) = h(2 − 3h + √(5h² − 12h + 8)) / (2(1 − h²)) for h ∈ [0, 1).
pub fn h_update(h: f64) -> f64 {
    let s = (5.0 * h * h - 12.0 * h + 8.0).sqrt();
    h * (2.0 - 3.0 * h + s) / (2.0 * (1.0 - h * h))
}

/// 1 − H(1 − u), evaluated without cancellation as 2u²/D with
/// D = 1 + u² + (1 − u)√(1 + 2u + 5u²).
pub fn gap_update(u: f64) -> f64 {
    let s = (1.0 + 2.0 * u + 5.0 * u * u).sqrt();
    let d = 1.0 + u * u + (1.0 - u) * s;
    2.0 * u * u / d
}

/// Ψ(z) = 2z/(1 + z).
pub fn big_psi(z: f64) -> f64 {
    2.0 * z / (1.0 + z)
}

/// Ψ⁻¹(h) = h/(2 − h).
pub fn big_psi_inv(h: f64) -> f64 {
    h / (2.0 - h)
}

/// Signed margins of the four Taylor inequalities at one point.
///
/// Every field is nonnegative exactly when its inequality holds:
/// - `accel_upper` = ρh − H(h)
/// - `accel_lower` = H(h) − ρh + νh²
/// - `sat_upper` = (1 − h)² − (1 − H(h))
/// - `sat_lower` = (1 − H(h)) − (1 − h)² + (1 − h)⁴
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorMargins {
    pub h: f64,
    pub accel_upper: f64,
    pub accel_lower: f64,
    pub sat_upper: f64,
    pub sat_lower: f64,
}

/// Margins at the point described by `h` and `u = 1 − h`.
///
/// Both coordinates are taken as given, so points close to either end can
/// be specified without rounding `1 − h`. Each margin uses a rearranged
/// product form where the direct difference would cancel.
pub fn taylor_margins(h: f64, u: f64) -> TaylorMargins {
    let s_h = (5.0 * h * h - 12.0 * h + 8.0).sqrt();
    let one_minus_h2 = u * (1.0 + h);
    let big_h = h * (2.0 - 3.0 * h + s_h) / (2.0 * one_minus_h2);
    let t = s_h + 2.0 * SQRT_2;

    let (accel_upper, accel_lower) = if h < 0.5 {
        let up = h * h * ((12.0 - 5.0 * h) / t + 3.0 - 2.0 * RHO * h) / (2.0 * one_minus_h2);
        let b1 = ((5.0 * SQRT_2 * s_h - 16.0 + 15.0 * h) / t) / (SQRT_2 * t) + 2.0 * RHO
            - 2.0 * NU * h;
        let lo = h * h * h * b1 / (2.0 * one_minus_h2);
        (up, lo)
    } else {
        (RHO * h - big_h, big_h - RHO * h + NU * h * h)
    };

    let s_u = (1.0 + 2.0 * u + 5.0 * u * u).sqrt();
    let d = 1.0 + u * u + h * s_u;
    let w = s_u + 1.0 + u;
    let u2 = u * u;
    let sat_upper = 4.0 * u2 * u2 * h / (d * w);
    let bracket = 2.0 * (2.0 + 5.0 * u) / (s_u + 1.0) + 6.0 + 4.0 * u - 4.0 * u2;
    let sat_lower = u2 * u2 * u * bracket / (w * d);

    TaylorMargins {
        h,
        accel_upper,
        accel_lower,
        sat_upper,
        sat_lower,
    }
}

/// Grid point given by both coordinates (h, 1 − h).
#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub h: f64,
    pub u: f64,
}

/// `count` points in (lo, 1 − lo): half log-spaced in h on (lo, 1/2] and
/// half log-spaced in 1 − h on (lo, 1/2], so both ends are resolved.
pub fn taylor_grid(count: usize, lo: f64) -> Vec<GridPoint> {
    let half = count / 2;
    let rest = count - half;
    let span = (0.5f64 / lo).ln();
    let mut out = Vec::with_capacity(count);
    for k in 0..half {
        let h = lo * (span * (k as f64 + 0.5) / half as f64).exp();
        out.push(GridPoint { h, u: 1.0 - h });
    }
    for k in 0..rest {
        let u = lo * (span * (k as f64 + 0.5) / rest as f64).exp();
        out.push(GridPoint { h: 1.0 - u, u });
    }
    out
}

/// One failed inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorViolation {
    pub h: f64,
    pub inequality: &'static str,
    pub margin: f64,
}

/// Result of [`check_taylor_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaylorReport {
    pub points: usize,
    pub violations: Vec<TaylorViolation>,
    /// Smallest margin of each inequality divided by its leading power
    /// (h², h³, (1−h)⁴, (1−h)⁵), which keeps the values O(1).
    pub min_scaled_margins: [f64; 4],
}

/// Checks ρh − νh² ≤ H(h) ≤ ρh and (1−h)² − (1−h)⁴ ≤ 1 − H(h) ≤ (1−h)² on a grid.
pub fn check_taylor_bounds(grid: &[GridPoint]) -> TaylorReport {
    let mut violations = Vec::new();
    let mut mins = [f64::INFINITY; 4];
    for p in grid {
        let m = taylor_margins(p.h, p.u);
        let vals = [
            ("rho*h - H(h) >= 0", m.accel_upper, p.h * p.h),
            ("H(h) - rho*h + nu*h^2 >= 0", m.accel_lower, p.h.powi(3)),
            ("(1-h)^2 - (1-H(h)) >= 0", m.sat_upper, p.u.powi(4)),
            ("(1-H(h)) - (1-h)^2 + (1-h)^4 >= 0", m.sat_lower, p.u.powi(5)),
        ];
        for (k, (name, margin, scale)) in vals.into_iter().enumerate() {
            if margin.is_nan() || margin < 0.0 {
                violations.push(TaylorViolation {
                    h: p.h,
                    inequality: name,
                    margin,
                });
            }
            mins[k] = mins[k].min(margin / scale);
        }
    }
    TaylorReport {
        points: grid.len(),
        violations,
        min_scaled_margins: mins,
    }
}

/// Which side of the phase transition a horizon falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Acceleration,
    Saturation,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Acceleration => f.write_str("acceleration"),
            Regime::Saturation => f.write_str("saturation"),
        }
    }
}

/// Location of the phase transition for one κ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub kappa: f64,
    pub i_star: u32,
    pub n_star: usize,
}

impl PhaseReport {
    pub fn regime(&self, n: usize) -> Regime {
        if n <= self.n_star {
            Regime::Acceleration
        } else {
            Regime::Saturation
        }
    }
}

/// i* = max(0, ⌊ln(κ/3)/ln ρ⌋) and n* = 2^{i*}.
pub fn phase_transition(kappa: f64) -> Result<PhaseReport> {
    check_kappa(&kappa)?;
    let raw = ((kappa / 3.0).ln() / RHO.ln()).floor();
    let i_star = if raw > 0.0 { raw as u32 } else { 0 };
    Ok(PhaseReport {
        kappa,
        i_star,
        n_star: 1usize << i_star,
    })
}

/// Bounds on τ_n, stored as logarithms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub n: usize,
    pub regime: Regime,
    pub ln_lower: f64,
    pub ln_upper: f64,
}

impl Envelope {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }
    pub fn upper(&self) -> f64 {
        self.ln_upper.exp()
    }
    pub fn contains_ln(&self, ln_tau: f64) -> bool {
        self.ln_lower <= ln_tau && ln_tau <= self.ln_upper
    }
}

/// Envelope for τ_n, n a power of two.
///
/// Acceleration (n ≤ n*): exp(−8ρ^i/κ) ≤ τ_n ≤ exp(−ρ^i/κ) with i = log2 n,
/// i.e. ρ^i = n^{log2 ρ}.
///
/// Saturation (n > n*): the upper bound is exp(−(n/n*)ρ^{i*}/κ). The lower
/// bound unrolls τ_{2n} ≥ τ_n²/16 from n* and uses the acceleration lower
/// bound at n*, giving (τ_{n*}/16)^{n/n*} with τ_{n*} ≥ exp(−8ρ^{i*}/κ).
/// The simpler expression exp(−n/(2n*)) is not implied by that argument; it
/// is available as [`simplified_saturation_ln_lower`] for comparison only.
///
/// The acceleration lower bound assumes κ is not close to 1: below
/// κ ≈ 1.04 it exceeds τ_1 = ((κ−1)/(κ+1))².
pub fn rate_envelope(kappa: f64, n: usize) -> Result<Envelope> {
    let i = crate::schedule::log2_exact(n)?;
    let phase = phase_transition(kappa)?;
    let regime = phase.regime(n);
    let (ln_lower, ln_upper) = match regime {
        Regime::Acceleration => {
            let g = RHO.powi(i as i32) / kappa;
            (-8.0 * g, -g)
        }
        Regime::Saturation => {
            let g = RHO.powi(phase.i_star as i32) / kappa;
            let blocks = (n / phase.n_star) as f64;
            (blocks * (-8.0 * g - 16f64.ln()), -blocks * g)
        }
    };
    Ok(Envelope {
        n,
        regime,
        ln_lower,
        ln_upper,
    })
}

/// ln of exp(−n/(2n*)), the simplified saturation expression.
pub fn simplified_saturation_ln_lower(n: usize, n_star: usize) -> f64 {
    -(n as f64) / (2.0 * n_star as f64)
}

/// One level of [`rate_monotonicity_check`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityLevel {
    pub n: usize,
    pub ln_tau_n: f64,
    pub ln_tau_2n: f64,
    /// ln(τ_n²/τ_{2n}) evaluated in closed form; nonnegative iff τ_{2n} ≤ τ_n².
    pub ln_margin: f64,
    pub passed: bool,
}

/// τ_{2n} ≤ τ_n² at levels 0..max_level.
///
/// With w = √τ_n = 1 − h, √τ_{2n} = 2w²/D(w), so τ_n²/τ_{2n} = (D/2)² and
/// the margin is 2·ln(1 + (D − 2)/2) with D − 2 = 4(1 − w)w²/(s + 1 + w).
pub fn rate_monotonicity_check(kappa: f64, max_level: u32) -> Result<Vec<MonotonicityLevel>> {
    let ln_tau = ln_rate_sequence(kappa, max_level + 1)?;
    let mut out = Vec::with_capacity(max_level as usize + 1);
    for l in 0..=max_level as usize {
        let w = (0.5 * ln_tau[l]).exp();
        let s = (1.0 + 2.0 * w + 5.0 * w * w).sqrt();
        let d_minus_2 = 4.0 * (1.0 - w) * w * w / (s + 1.0 + w);
        let ln_margin = 2.0 * (0.5 * d_minus_2).ln_1p();
        let direct_ok = ln_tau[l + 1] <= 2.0 * ln_tau[l] + 1e-12 * ln_tau[l].abs();
        out.push(MonotonicityLevel {
            n: 1 << l,
            ln_tau_n: ln_tau[l],
            ln_tau_2n: ln_tau[l + 1],
            ln_margin,
            passed: ln_margin >= 0.0 && direct_ok,
        });
    }
    Ok(out)
}

/// Cobweb data h_0 = 2/(1+κ), h_{i+1} = H(h_i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HTrace {
    pub kappa: f64,
    /// h_0, …, h_iters.
    pub h: Vec<f64>,
    /// 1 − h_i, tracked separately so it stays accurate near one.
    pub gap: Vec<f64>,
}

impl HTrace {
    /// Consecutive (h_i, H(h_i)) pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.h.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

pub fn cobweb_trace(kappa: f64, iters: usize) -> Result<HTrace> {
    check_kappa(&kappa)?;
    let mut h = vec![2.0 / (1.0 + kappa)];
    let mut gap = vec![(kappa - 1.0) / (kappa + 1.0)];
    for _ in 0..iters {
        let g = gap_update(*gap.last().expect("nonempty"));
        let prev = *h.last().expect("nonempty");
        // Use the direct map while it is well conditioned.
        let next = if prev < 0.5 { h_update(prev) } else { 1.0 - g };
        h.push(next);
        gap.push(g);
    }
    Ok(HTrace { kappa, h, gap })
}
