//! Co-coercivity certificates for the silver schedule.
//!
//! A certificate λ ≥ 0 over indices {0, …, n−1, *} proves the rate through
//! the identity τ_n‖x_0 − x*‖² − ‖x_n − x*‖² = Σ λ_ij Q_ij, valid for every
//! gradient-descent trajectory. Certificates are built for n = 1 directly
//! and then doubled by recursive gluing: two rescaled copies of the n-step
//! certificate plus a rank-one correction Ξ and a six-entry correction Δ.
//!
//! Conventions: m = 1/κ, M = 1, x* = g* = f* = 0, and Q exactly as in
//! [`cocoercivity_q`]. Under this convention the certificates hold with
//! global scale 1.

mod esl;
mod identities;
mod verify;

pub use esl::{e_matrix, esl_from_parts, esl_matrices, l_matrix, quad_form, s_matrix, Esl, Mat4};
pub use identities::{check_identities, disjunction_sides, IdentityCheck, IdentityReport};
pub use verify::{
    random_trajectory, verify_identity, verify_identity_with, verify_structure, IdentityOptions,
    IdentityStats, StructureReport,
};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::schedule::{build_schedule, check_kappa, log2_exact, psi, tau_from_gap, SilverSchedule};

/// Tag stored with every certificate describing the Q convention it certifies.
pub const SCALE_CONVENTION: &str =
    "Q_ij = 2(M-m)(f_i-f_j) + 2<M g_j - m g_i, x_j - x_i> - |g_i-g_j|^2 - Mm|x_i-x_j|^2; m=1/kappa, M=1; scale 1";

/// Iterate index or the optimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CertIndex {
    Iter(usize),
    Star,
}

impl CertIndex {
    /// Shifts an iterate index by `by`; the optimum is unchanged.
    pub fn shift(self, by: usize) -> Self {
        match self {
            CertIndex::Iter(t) => CertIndex::Iter(t + by),
            CertIndex::Star => CertIndex::Star,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "star" || s == "*" {
            return Ok(CertIndex::Star);
        }
        s.parse::<usize>()
            .map(CertIndex::Iter)
            .map_err(|_| Error::Invalid(format!("bad certificate index {s:?}")))
    }
}

impl fmt::Display for CertIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertIndex::Iter(t) => write!(f, "{t}"),
            CertIndex::Star => f.write_str("star"),
        }
    }
}

use CertIndex::{Iter, Star};

pub type Entries<T> = BTreeMap<(CertIndex, CertIndex), T>;

/// Sparse multiplier matrix λ for an n-step certificate.
#[derive(Clone, Debug)]
pub struct Multipliers<T> {
    pub n: usize,
    pub entries: Entries<T>,
    pub scale_convention: String,
}

impl<T: Real> Multipliers<T> {
    pub fn new(n: usize, entries: Entries<T>) -> Self {
        Multipliers {
            n,
            entries,
            scale_convention: SCALE_CONVENTION.to_string(),
        }
    }

    /// Entry (i, j), or zero when absent.
    pub fn get(&self, i: CertIndex, j: CertIndex, like: &T) -> T {
        self.entries
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| like.zero_like())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Every index of the certificate, iterates first.
    pub fn indices(&self) -> Vec<CertIndex> {
        (0..self.n).map(Iter).chain(std::iter::once(Star)).collect()
    }
}

/// First-order data (x, g, f) at one index.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    pub x: Vec<T>,
    pub g: Vec<T>,
    pub f: T,
}

/// Data at iterates 0..len plus the optimum.
#[derive(Clone, Debug)]
pub struct TrajectoryData<T> {
    pub iterates: Vec<Point<T>>,
    pub star: Point<T>,
}

impl<T: Real> TrajectoryData<T> {
    pub fn point(&self, i: CertIndex) -> Result<&Point<T>> {
        match i {
            Star => Ok(&self.star),
            Iter(t) => self
                .iterates
                .get(t)
                .ok_or_else(|| Error::Invalid(format!("index {t} missing from trajectory"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.star.x.len()
    }
}

/// Quadratic part of Q: 2⟨M g_j − m g_i, x_j − x_i⟩ − ‖g_i − g_j‖² − Mm‖x_i − x_j‖².
pub(crate) fn q_quadratic<T: Real>(pi: &Point<T>, pj: &Point<T>, m: &T, big_m: &T) -> T {
    let like = &pi.f;
    let mut acc = like.zero_like();
    for k in 0..pi.x.len() {
        let dx = pj.x[k].clone() - pi.x[k].clone();
        let dg = pi.g[k].clone() - pj.g[k].clone();
        let lin = big_m.clone() * pj.g[k].clone() - m.clone() * pi.g[k].clone();
        acc = acc + like.lift(2.0) * lin * dx.clone()
            - dg.clone() * dg
            - big_m.clone() * m.clone() * dx.clone() * dx;
    }
    acc
}

/// Co-coercivity Q_ij for curvature bounds m ≤ M.
pub fn cocoercivity_q<T: Real>(
    data: &TrajectoryData<T>,
    i: CertIndex,
    j: CertIndex,
    m: &T,
    big_m: &T,
) -> Result<T> {
    let pi = data.point(i)?;
    let pj = data.point(j)?;
    let lin = pi.f.lift(2.0) * (big_m.clone() - m.clone()) * (pi.f.clone() - pj.f.clone());
    Ok(lin + q_quadratic(pi, pj, m, big_m))
}

/// P_ij: Q_ij with m = 1/κ, M = 1 and without the function-value term.
pub fn quad_part_p<T: Real>(data: &TrajectoryData<T>, i: CertIndex, j: CertIndex, kappa: &T) -> Result<T> {
    let m = kappa.one_like() / kappa.clone();
    Ok(q_quadratic(data.point(i)?, data.point(j)?, &m, &kappa.one_like()))
}

/// Σ λ_ij Q_ij for m = 1/κ, M = 1.
pub fn weighted_sum<T: Real>(lambda: &Multipliers<T>, data: &TrajectoryData<T>, kappa: &T) -> Result<T> {
    let m = kappa.one_like() / kappa.clone();
    let one = kappa.one_like();
    let mut acc = kappa.zero_like();
    for (&(i, j), v) in &lambda.entries {
        acc = acc + v.clone() * cocoercivity_q(data, i, j, &m, &one)?;
    }
    Ok(acc)
}

/// The one-step certificate: λ_{0,*} = λ_{*,0} = 2κ²/(κ+1)².
pub fn base_certificate<T: Real>(kappa: &T) -> Result<Multipliers<T>> {
    check_kappa(kappa)?;
    let one = kappa.one_like();
    let kp1 = kappa.clone() + one;
    let v = kappa.lift(2.0) * kappa.clone() * kappa.clone() / (kp1.clone() * kp1);
    let mut e = Entries::new();
    e.insert((Iter(0), Star), v.clone());
    e.insert((Star, Iter(0)), v);
    Ok(Multipliers::new(1, e))
}

/// q_i = α_i(1 − α_{i+1}/κ)/α_{i+1} for 0 ≤ i < n − 1.
pub fn q_shorthand<T: Real>(schedule: &SilverSchedule<T>, i: usize) -> Result<T> {
    if i + 1 >= schedule.n {
        return Err(Error::Invalid(format!(
            "q index {i} out of range for n = {}",
            schedule.n
        )));
    }
    Ok(q_from_steps(&schedule.steps, i, &schedule.kappa))
}

pub(crate) fn q_from_steps<T: Real>(steps: &[T], i: usize, kappa: &T) -> T {
    let a = steps[i].clone();
    let b = steps[i + 1].clone();
    a * (kappa.one_like() - b.clone() / kappa.clone()) / b
}

/// Scalars and pieces of one gluing step n → 2n.
#[derive(Clone, Debug)]
pub struct GlueParts<T> {
    pub n: usize,
    /// r = 1/∏_{t<n} q_t.
    pub r: T,
    /// Weight of the second copy.
    pub c: T,
    /// Scale of the rank-one correction.
    pub phi: T,
    /// γ = κa₂/(κ − a₂), the factor inside φ.
    pub gamma: T,
    pub theta: Entries<T>,
    pub xi: Entries<T>,
    /// Correction on the six entries among {n−1, 2n−1, *}, so that
    /// λ = Θ + Ξ + Δ.
    pub delta: Entries<T>,
}

fn add_entry<T: Real>(e: &mut Entries<T>, key: (CertIndex, CertIndex), v: T) {
    match e.get_mut(&key) {
        Some(cur) => *cur = cur.clone() + v,
        None => {
            e.insert(key, v);
        }
    }
}

/// Closed-form values of λ on the six entries among {n−1, 2n−1, *}.
///
/// With ρ = (z_{2n} + z_n)/(z_{2n} − z_n):
/// λ_{n−1,2n−1} = τ_{2n}ρ/(1 − z_n), λ_{2n−1,n−1} = κy_{2n}λ_{n−1,2n−1},
/// λ_{*,n−1} = τ_{2n}(1 + κy_{2n})/(1 − z_n),
/// λ_{*,2n−1} = (1 + (κ−1)z_{2n} + κz_{2n}²)/(1 + z_{2n})²,
/// λ_{2n−1,*} = 2κz_{2n}/(1 + z_{2n})², λ_{n−1,*} = 0.
pub fn special_entries<T: Real>(schedule_2n: &SilverSchedule<T>) -> Vec<((CertIndex, CertIndex), T)> {
    let n = schedule_2n.n / 2;
    let k = &schedule_2n.kappa;
    let one = k.one_like();
    let pn = schedule_2n.pair(n);
    let p2 = schedule_2n.pair(2 * n);
    let t2 = tau_from_gap(&p2.u);
    let ratio = (p2.z.clone() + pn.z.clone()) / (pn.u.clone() - p2.u.clone());
    let a = t2.clone() * ratio / pn.u.clone();
    let ky2 = k.clone() * p2.y.clone();
    let zp1 = one.clone() + p2.z.clone();
    let zp1sq = zp1.clone() * zp1;
    vec![
        ((Iter(n - 1), Iter(2 * n - 1)), a.clone()),
        ((Iter(2 * n - 1), Iter(n - 1)), ky2.clone() * a),
        ((Star, Iter(n - 1)), t2 * (one.clone() + ky2) / pn.u.clone()),
        (
            (Star, Iter(2 * n - 1)),
            (one.clone()
                + (k.clone() - one) * p2.z.clone()
                + k.clone() * p2.z.clone() * p2.z.clone())
                / zp1sq.clone(),
        ),
        ((Iter(n - 1), Star), k.zero_like()),
        (
            (Iter(2 * n - 1), Star),
            k.lift(2.0) * k.clone() * p2.z.clone() / zp1sq,
        ),
    ]
}

/// Glues an n-step certificate into a 2n-step one.
///
/// Θ holds (τ_{2n}/τ_n)σ on the first block and cσ shifted by n on the
/// second, with c = (τ_{2n}/τ_n)[r + (1 + r)ρ]. Ξ places φw_j, rφw_j and
/// −(1+r)φw_j in rows n−1, 2n−1 and * at columns j = n..2n−2, where
/// w_j = 1/∏_{t=n}^{j−1} q_t and φ = γτ_{2n}ρ. Δ sets the six special
/// entries to [`special_entries`].
///
/// κ = 2 is rejected; use κ = 2 ± ε.
pub fn glue<T: Real>(
    sigma: &Multipliers<T>,
    schedule_2n: &SilverSchedule<T>,
) -> Result<(Multipliers<T>, GlueParts<T>)> {
    let kappa = &schedule_2n.kappa;
    if kappa.to_f64() == 2.0 && *kappa == kappa.lift(2.0) {
        return Err(Error::KappaTwo);
    }
    glue_any_kappa(sigma, schedule_2n)
}

/// [`glue`] without the κ = 2 guard. Used to probe the excluded point.
pub fn glue_any_kappa<T: Real>(
    sigma: &Multipliers<T>,
    schedule_2n: &SilverSchedule<T>,
) -> Result<(Multipliers<T>, GlueParts<T>)> {
    let n = sigma.n;
    if schedule_2n.n != 2 * n {
        return Err(Error::Invalid(format!(
            "schedule length {} does not double certificate size {n}",
            schedule_2n.n
        )));
    }
    let k = &schedule_2n.kappa;
    let one = k.one_like();
    let steps = &schedule_2n.steps;
    let pn = schedule_2n.pair(n);
    let p2 = schedule_2n.pair(2 * n);
    let tn = tau_from_gap(&pn.u);
    let t2 = tau_from_gap(&p2.u);
    let ratio = (p2.z.clone() + pn.z.clone()) / (pn.u.clone() - p2.u.clone());

    let mut prod = one.clone();
    for t in 0..n {
        prod = prod * q_from_steps(steps, t, k);
    }
    let r = one.clone() / prod;
    let scale1 = t2.clone() / tn;
    let c = scale1.clone() * (r.clone() + (one.clone() + r.clone()) * ratio.clone());
    let a2 = steps[0].clone();
    let gamma = k.clone() * a2.clone() / (k.clone() - a2);
    let phi = gamma.clone() * t2 * ratio;

    let mut theta = Entries::new();
    for (&(i, j), v) in &sigma.entries {
        add_entry(&mut theta, (i, j), scale1.clone() * v.clone());
        add_entry(&mut theta, (i.shift(n), j.shift(n)), c.clone() * v.clone());
    }

    let mut xi = Entries::new();
    let mut w = one.clone();
    for j in n..=(2 * n).saturating_sub(2) {
        if j > n {
            w = w / q_from_steps(steps, j - 1, k);
        }
        let base = phi.clone() * w.clone();
        xi.insert((Iter(n - 1), Iter(j)), base.clone());
        xi.insert((Iter(2 * n - 1), Iter(j)), r.clone() * base.clone());
        xi.insert((Star, Iter(j)), -((one.clone() + r.clone()) * base));
    }

    let mut lambda = theta.clone();
    for (key, v) in &xi {
        add_entry(&mut lambda, *key, v.clone());
    }
    let mut delta = Entries::new();
    for (key, target) in special_entries(schedule_2n) {
        let current = lambda.get(&key).cloned().unwrap_or_else(|| k.zero_like());
        delta.insert(key, target.clone() - current);
        if target == k.zero_like() {
            lambda.remove(&key);
        } else {
            lambda.insert(key, target);
        }
    }

    let parts = GlueParts {
        n,
        r,
        c,
        phi,
        gamma,
        theta,
        xi,
        delta,
    };
    Ok((Multipliers::new(2 * n, lambda), parts))
}

/// Certificate for the n-step schedule, folded from the base case.
pub fn build_certificate<T: Real>(kappa: &T, n: usize) -> Result<Multipliers<T>> {
    Ok(build_certificate_chain(kappa, n)?.pop().expect("nonempty").0)
}

/// Certificates for 1, 2, 4, …, n, each with the glue parts that produced
/// it (`None` for the base case).
#[allow(clippy::type_complexity)]
pub fn build_certificate_chain<T: Real>(
    kappa: &T,
    n: usize,
) -> Result<Vec<(Multipliers<T>, Option<GlueParts<T>>)>> {
    let levels = log2_exact(n)?;
    let mut out = vec![(base_certificate(kappa)?, None)];
    for l in 1..=levels {
        let sched = build_schedule(kappa, 1usize << l)?;
        let (next, parts) = glue(&out.last().expect("nonempty").0, &sched)?;
        out.push((next, Some(parts)));
    }
    Ok(out)
}

/// σ_{n−1,*} = 2κz_n/(1+z_n)² and σ_{*,n−1} = (1 + (κ−1)z_n + κz_n²)/(1+z_n)².
pub fn optimum_row_values<T: Real>(schedule: &SilverSchedule<T>) -> (T, T) {
    let k = &schedule.kappa;
    let one = k.one_like();
    let z = schedule.pair(schedule.n).z.clone();
    let zp1 = one.clone() + z.clone();
    let d = zp1.clone() * zp1;
    let to_star = k.lift(2.0) * k.clone() * z.clone() / d.clone();
    let from_star = (one.clone() + (k.clone() - one) * z.clone() + k.clone() * z.clone() * z) / d;
    (to_star, from_star)
}

/// Step b_n = ψ(z_n) for horizon m within a schedule's pairs.
pub(crate) fn b_step<T: Real>(schedule: &SilverSchedule<T>, m: usize) -> T {
    psi(&schedule.pair(m).z, &schedule.kappa)
}

/// Step a_n = ψ(y_n).
pub(crate) fn a_step<T: Real>(schedule: &SilverSchedule<T>, m: usize) -> T {
    psi(&schedule.pair(m).y, &schedule.kappa)
}
