//! Normalized silver stepsizes, the ψ transform, finite and infinite silver
//! schedules, and the silver convergence rate.
//!
//! All quantities use the normalization m = 1/κ, M = 1, so stepsizes lie in
//! [1, κ]. The pair (y, z) at level `l` describes the horizon n = 2^l. Since
//! z → 1 doubly exponentially, the gap u = 1 − z is carried alongside z and
//! updated through u' = u²/(1 + y'), which never subtracts nearby numbers.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;

/// Normalized pair (y, z) for horizon n = 2^level, plus u = 1 − z.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPair<T> {
    pub y: T,
    pub z: T,
    pub u: T,
    pub level: u32,
}

/// Returns log2(n) when n is a positive power of two.
pub fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros())
}

pub(crate) fn check_kappa<T: Real>(kappa: &T) -> Result<()> {
    let k = kappa.to_f64();
    if !kappa.is_finite() || *kappa <= kappa.one_like() {
        return Err(Error::Kappa(k));
    }
    Ok(())
}

/// One doubling of the normalized pair.
///
/// With ξ = 1 − z and μ = ξ + √(1 + ξ²): y' = z/μ and z' = zμ.
pub fn normalized_step<T: Real>(prev: &NormalizedPair<T>) -> Result<NormalizedPair<T>> {
    let one = prev.z.one_like();
    if !(prev.z > prev.z.zero_like() && prev.z <= one) || !prev.u.is_finite() {
        return Err(Error::Domain(format!(
            "normalized z must lie in (0, 1], got {:?}",
            prev.z
        )));
    }
    let xi = prev.u.clone();
    let mu = xi.clone() + (one.clone() + xi.clone() * xi).sqrt();
    let y = prev.z.clone() / mu.clone();
    let u = prev.u.clone() * prev.u.clone() / (one.clone() + y.clone());
    // Past one half, 1 − u is the more accurate form and stays ≤ 1.
    let z = prev.z.clone() * mu;
    let z = if z > one.lift(0.5) { one - u.clone() } else { z };
    Ok(NormalizedPair {
        y,
        z,
        u,
        level: prev.level + 1,
    })
}

/// Pairs for levels 0..=levels, starting from y = z = 1/κ.
pub fn normalized_sequence<T: Real>(kappa: &T, levels: u32) -> Result<Vec<NormalizedPair<T>>> {
    check_kappa(kappa)?;
    let one = kappa.one_like();
    let z0 = one.clone() / kappa.clone();
    let mut out = Vec::with_capacity(levels as usize + 1);
    out.push(NormalizedPair {
        y: z0.clone(),
        z: z0,
        u: (kappa.clone() - one) / kappa.clone(),
        level: 0,
    });
    for _ in 0..levels {
        let next = normalized_step(out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// ψ(t) = (1 + κt)/(1 + t).
pub fn psi<T: Real>(t: &T, kappa: &T) -> T {
    let one = t.one_like();
    (one.clone() + kappa.clone() * t.clone()) / (one + t.clone())
}

/// ψ⁻¹(s) = (s − 1)/(κ − s).
pub fn psi_inv<T: Real>(s: &T, kappa: &T) -> T {
    (s.clone() - s.one_like()) / (kappa.clone() - s.clone())
}

/// Symbolic name of a schedule entry: `A(n)` is a_n = ψ(y_n), `B(n)` is b_n = ψ(z_n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepSymbol {
    A(usize),
    B(usize),
}

impl fmt::Display for StepSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSymbol::A(n) => write!(f, "a_{n}"),
            StepSymbol::B(n) => write!(f, "b_{n}"),
        }
    }
}

/// Symbol pattern of the length-n schedule, e.g. n = 4 gives [a_2, a_4, a_2, b_4].
pub fn step_symbols(n: usize) -> Result<Vec<StepSymbol>> {
    let k = log2_exact(n)?;
    let mut h = vec![StepSymbol::B(1)];
    for l in 1..=k {
        let m = 1usize << l;
        let head = h[..h.len() - 1].to_vec();
        let mut next = Vec::with_capacity(m);
        next.extend_from_slice(&head);
        next.push(StepSymbol::A(m));
        next.extend_from_slice(&head);
        next.push(StepSymbol::B(m));
        h = next;
    }
    Ok(h)
}

/// Fraction of positions carrying each symbol of the length-n schedule.
pub fn occupation_measure(n: usize) -> Result<Vec<(StepSymbol, f64)>> {
    let symbols = step_symbols(n)?;
    let mut counts: std::collections::BTreeMap<StepSymbol, usize> = Default::default();
    for s in symbols {
        *counts.entry(s).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(s, c)| (s, c as f64 / n as f64))
        .collect())
}

/// A length-n silver schedule with its ψ-preimages and rate.
#[derive(Clone, Debug)]
pub struct SilverSchedule<T> {
    pub kappa: T,
    pub n: usize,
    /// Stepsizes α_0, …, α_{n−1} (0-indexed).
    pub steps: Vec<T>,
    /// ψ⁻¹ of each step, i.e. the y or z value it came from.
    pub normalized: Vec<T>,
    /// Normalized pairs for levels 0..=log2(n).
    pub pairs: Vec<NormalizedPair<T>>,
    pub tau: T,
}

impl<T: Real> SilverSchedule<T> {
    pub fn level(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Pair for horizon `m` (a power of two not exceeding n).
    pub fn pair(&self, m: usize) -> &NormalizedPair<T> {
        &self.pairs[m.trailing_zeros() as usize]
    }

    pub fn steps_f64(&self) -> Vec<f64> {
        self.steps.iter().map(Real::to_f64).collect()
    }
}

/// Builds h^(n) by h^(2m) = [h̃^(m), a_{2m}, h̃^(m), b_{2m}], where h̃ drops the last entry.
pub fn build_schedule<T: Real>(kappa: &T, n: usize) -> Result<SilverSchedule<T>> {
    let k = log2_exact(n)?;
    let pairs = normalized_sequence(kappa, k)?;
    let mut norm = vec![pairs[0].z.clone()];
    for pair in pairs.iter().skip(1) {
        let head = norm[..norm.len() - 1].to_vec();
        let mut next = Vec::with_capacity(2 * norm.len());
        next.extend_from_slice(&head);
        next.push(pair.y.clone());
        next.extend(head);
        next.push(pair.z.clone());
        norm = next;
    }
    let steps = norm.iter().map(|t| psi(t, kappa)).collect();
    let tau = tau_from_gap(&pairs[k as usize].u);
    Ok(SilverSchedule {
        kappa: kappa.clone(),
        n,
        steps,
        normalized: norm,
        pairs,
        tau,
    })
}

/// ((1 − z)/(1 + z))² written in terms of u = 1 − z.
pub fn tau_from_gap<T: Real>(u: &T) -> T {
    let r = u.clone() / (u.lift(2.0) - u.clone());
    r.clone() * r
}

/// Step i ≥ 1 of the infinite schedule: a_{2·lowbit(i)}.
///
/// Entries 1..n−1 agree with every finite schedule of length n ≥ i + 1, and
/// odd i give a_2.
pub fn infinite_step<T: Real>(i: u64, kappa: &T) -> Result<T> {
    if i == 0 {
        return Err(Error::Invalid("infinite schedule is indexed from 1".into()));
    }
    let level = i.trailing_zeros() + 1;
    let pairs = normalized_sequence(kappa, level)?;
    Ok(psi(&pairs[level as usize].y, kappa))
}

/// First `count` entries of the infinite schedule.
pub fn infinite_prefix<T: Real>(kappa: &T, count: usize) -> Result<Vec<T>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let max_level = (usize::BITS - count.leading_zeros()) + 1;
    let pairs = normalized_sequence(kappa, max_level)?;
    let a: Vec<T> = pairs.iter().map(|p| psi(&p.y, kappa)).collect();
    Ok((1..=count as u64)
        .map(|i| a[(i.trailing_zeros() + 1) as usize].clone())
        .collect())
}

/// The rate τ_n together with its logarithm.
#[derive(Clone, Debug)]
pub struct RateValue<T> {
    pub tau: T,
    pub n: usize,
    pub kappa: T,
    pub ln_tau: f64,
}

/// τ_n = ((1 − z_n)/(1 + z_n))².
pub fn silver_rate<T: Real>(kappa: &T, n: usize) -> Result<RateValue<T>> {
    let k = log2_exact(n)?;
    let pairs = normalized_sequence(kappa, k)?;
    let tau = tau_from_gap(&pairs[k as usize].u);
    let ln_tau = tau.ln_abs();
    Ok(RateValue {
        tau,
        n,
        kappa: kappa.clone(),
        ln_tau,
    })
}

/// ln u_l for levels 0..=levels, computed in the log domain so that it
/// stays finite long after u itself underflows.
pub fn ln_gap_sequence(kappa: f64, levels: u32) -> Result<Vec<f64>> {
    check_kappa(&kappa)?;
    let mut ln_u = ((kappa - 1.0) / kappa).ln();
    let mut out = vec![ln_u];
    for _ in 0..levels {
        let u = ln_u.exp();
        let z = 1.0 - u;
        let y = z / (u + (1.0 + u * u).sqrt());
        ln_u = 2.0 * ln_u - y.ln_1p();
        out.push(ln_u);
    }
    Ok(out)
}

/// ln τ_n at every level 0..=levels, valid far beyond the `f64` range of τ_n.
pub fn ln_rate_sequence(kappa: f64, levels: u32) -> Result<Vec<f64>> {
    Ok(ln_gap_sequence(kappa, levels)?
        .into_iter()
        .map(|lu| 2.0 * (lu - (2.0 - lu.exp()).ln()))
        .collect())
}

/// ln τ_n for a single horizon.
pub fn ln_silver_rate(kappa: f64, n: usize) -> Result<f64> {
    let k = log2_exact(n)?;
    Ok(*ln_rate_sequence(kappa, k)?.last().expect("nonempty"))
}

/// Harmonic mean of 1 and κ.
pub fn harmonic_mean(kappa: f64) -> f64 {
    2.0 * kappa / (1.0 + kappa)
}

/// Arithmetic mean of 1 and κ.
pub fn arithmetic_mean(kappa: f64) -> f64 {
    (1.0 + kappa) / 2.0
}
