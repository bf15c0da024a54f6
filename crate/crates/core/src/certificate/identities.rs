use serde::{Deserialize, Serialize};

use super::{build_certificate, optimum_row_values, q_from_steps, CertIndex};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::schedule::{build_schedule, log2_exact};

/// One numerical identity: a computed left side against closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    /// Closed form valid for every κ.
    pub rhs: f64,
    pub rel_error: f64,
    /// Simplified closed form that additionally assumes a₂ = κ/(κ − 1),
    /// which holds only at κ = 4.
    pub rhs_simplified: Option<f64>,
    pub rel_error_simplified: Option<f64>,
}

fn rel<T: Real>(a: &T, b: &T) -> f64 {
    let d = (a.clone() - b.clone()).abs();
    let s = a.abs().max_of(b.abs());
    if s == s.zero_like() {
        0.0
    } else {
        (d / s).to_f64()
    }
}

fn check<T: Real>(name: String, lhs: T, rhs: T, simplified: Option<T>) -> IdentityCheck {
    IdentityCheck {
        rel_error: rel(&lhs, &rhs),
        rel_error_simplified: simplified.as_ref().map(|s| rel(&lhs, s)),
        rhs_simplified: simplified.map(|s| s.to_f64()),
        name,
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
    }
}

/// All checks for one (κ, n).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub kappa: f64,
    pub n: usize,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    /// Largest error against the general closed forms.
    pub fn max_rel_error(&self) -> f64 {
        self.checks.iter().map(|c| c.rel_error).fold(0.0, f64::max)
    }

    /// Largest error against the simplified closed forms.
    pub fn max_rel_error_simplified(&self) -> f64 {
        self.checks
            .iter()
            .filter_map(|c| c.rel_error_simplified)
            .fold(0.0, f64::max)
    }
}

/// Product and ladder identities of the glued certificate, for n ≥ 4.
///
/// The q_t come from the 2n-step schedule, a₂ is its first step, and
/// z_n, z_{2n} are its normalized values. Items:
/// - (a) ∏_{t=0}^{n−3} 1/q_t = (κ−1)(κ−a₂)/(κ²(1−z_n))
/// - (b) ∏_{t=0}^{n−1} 1/q_t = (1−z_n)/(1−z_{2n})
/// - (c) Σ_{j=n}^{2n−2} ∏_{t=n}^{j−1} 1/q_t = (κz_n−1)(κ−a₂)/(a₂κ(1−z_n))
/// - (d) σ_{*,j} = (∏_{t=j}^{n−3} q_t)·a₂(κ−1)(1−z_n)/(κ(1+z_n)²) for
///   j ≤ n−2, together with the two optimum-row values at n−1.
///
/// At κ = 4, a₂ = κ/(κ−1) and the forms reduce to (κ−2)/(κ(1−z_n)),
/// (κ−2)(κz_n−1)/(κ(1−z_n)) and (∏q_t)(1−z_n)/(1+z_n)², which are reported
/// alongside.
pub fn check_identities<T: Real>(kappa: &T, n: usize) -> Result<IdentityReport> {
    log2_exact(n)?;
    if n < 4 {
        return Err(Error::Invalid("identities are stated for n >= 4".into()));
    }
    let k = kappa.clone();
    let one = k.one_like();
    let two = k.lift(2.0);
    let s2 = build_schedule(kappa, 2 * n)?;
    let steps = &s2.steps;
    let a2 = steps[0].clone();
    let pn = s2.pair(n);
    let p2 = s2.pair(2 * n);
    let q: Vec<T> = (0..2 * n - 1).map(|t| q_from_steps(steps, t, &k)).collect();
    let km1 = k.clone() - one.clone();
    let kma = k.clone() - a2.clone();
    let mut checks = Vec::new();

    let mut pa = one.clone();
    for qt in q.iter().take(n - 2) {
        pa = pa / qt.clone();
    }
    checks.push(check(
        format!("(a) prod_{{t=0}}^{{{}}} 1/q_t", n - 3),
        pa,
        km1.clone() * kma.clone() / (k.clone() * k.clone() * pn.u.clone()),
        Some((k.clone() - two.clone()) / (k.clone() * pn.u.clone())),
    ));

    let mut pb = one.clone();
    for qt in q.iter().take(n) {
        pb = pb / qt.clone();
    }
    checks.push(check(
        format!("(b) prod_{{t=0}}^{{{}}} 1/q_t", n - 1),
        pb,
        pn.u.clone() / p2.u.clone(),
        None,
    ));

    let mut sum = k.zero_like();
    let mut w = one.clone();
    for j in n..=2 * n - 2 {
        if j > n {
            w = w / q[j - 1].clone();
        }
        sum = sum + w.clone();
    }
    let kz1 = k.clone() * pn.z.clone() - one.clone();
    checks.push(check(
        format!("(c) sum_{{j={n}}}^{{{}}} prod 1/q_t", 2 * n - 2),
        sum,
        kz1.clone() * kma / (a2.clone() * k.clone() * pn.u.clone()),
        Some((k.clone() - two) * kz1 / (k.clone() * pn.u.clone())),
    ));

    let sigma = build_certificate(kappa, n)?;
    let sn = build_schedule(kappa, n)?;
    let zp1 = one.clone() + pn.z.clone();
    let base_simplified = pn.u.clone() / (zp1.clone() * zp1);
    let base = a2 * km1 / k.clone() * base_simplified.clone();
    let mut ladder = one.clone();
    for j in (0..=n - 2).rev() {
        if j < n - 2 {
            ladder = ladder * q[j].clone();
        }
        let got = sigma.get(CertIndex::Star, CertIndex::Iter(j), &k);
        checks.push(check(
            format!("(d) sigma_{{*,{j}}}"),
            got,
            ladder.clone() * base.clone(),
            Some(ladder.clone() * base_simplified.clone()),
        ));
    }
    let (to_star, from_star) = optimum_row_values(&sn);
    checks.push(check(
        format!("(d) sigma_{{{},*}}", n - 1),
        sigma.get(CertIndex::Iter(n - 1), CertIndex::Star, &k),
        to_star.clone(),
        Some(to_star),
    ));
    checks.push(check(
        format!("(d) sigma_{{*,{}}}", n - 1),
        sigma.get(CertIndex::Star, CertIndex::Iter(n - 1), &k),
        from_star.clone(),
        Some(from_star),
    ));

    Ok(IdentityReport {
        kappa: kappa.to_f64(),
        n,
        checks,
    })
}

/// Both sides of Σ_{t=0}^{T} c_t ∏_{i=t+1}^{T}(1 − c_i) = 1 − ∏_{t=0}^{T}(1 − c_t).
pub fn disjunction_sides<T: Real>(c: &[T]) -> Option<(T, T)> {
    let first = c.first()?;
    let one = first.one_like();
    let mut lhs = first.zero_like();
    let mut prod = one.clone();
    for ct in c {
        lhs = lhs * (one.clone() - ct.clone()) + ct.clone();
        prod = prod * (one.clone() - ct.clone());
    }
    Some((lhs, one - prod))
}
