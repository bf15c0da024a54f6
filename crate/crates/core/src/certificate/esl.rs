use super::{a_step, b_step, build_certificate, glue, q_from_steps, CertIndex, GlueParts};
use crate::error::Result;
use crate::real::Real;
use crate::schedule::{build_schedule, tau_from_gap, SilverSchedule};

use CertIndex::{Iter, Star};

/// Symmetric 4×4 matrix acting on v = [x_{n−1}, g_{n−1}, x_{2n−1}, g_{2n−1}].
///
/// Off-diagonal entries hold half the cross coefficient, so the quadratic
/// form is vᵀAv.
pub type Mat4<T> = [[T; 4]; 4];

/// The three coefficient matrices of one gluing step n → 2n.
#[derive(Clone, Debug)]
pub struct Esl<T> {
    /// Input certificate size.
    pub n: usize,
    /// Gluing error τ_{2n}‖x_0‖² − ‖x_{2n}‖² − ΣΘP.
    pub e: Mat4<T>,
    /// ΣΔP.
    pub s: Mat4<T>,
    /// ΣΞP.
    pub l: Mat4<T>,
    /// max |E − S − L| over entries. For n = 1 the coordinates are dependent
    /// (x_1 = x_0 − a_2 g_0) and the residual is taken on that subspace.
    pub residual: f64,
    /// max |E| over entries.
    pub scale: f64,
}

fn zeros<T: Real>(like: &T) -> Mat4<T> {
    std::array::from_fn(|_| std::array::from_fn(|_| like.zero_like()))
}

fn set_sym<T: Real>(m: &mut Mat4<T>, i: usize, j: usize, v: T) {
    m[i][j] = v.clone();
    m[j][i] = v;
}

/// vᵀAv for a vector quadruple of scalars.
pub fn quad_form<T: Real>(a: &Mat4<T>, v: &[T; 4]) -> T {
    let mut acc = v[0].zero_like();
    for i in 0..4 {
        for j in 0..4 {
            acc = acc + a[i][j].clone() * v[i].clone() * v[j].clone();
        }
    }
    acc
}

/// Gluing error matrix.
pub fn e_matrix<T: Real>(schedule_2n: &SilverSchedule<T>, parts: &GlueParts<T>) -> Mat4<T> {
    let n = parts.n;
    let k = &schedule_2n.kappa;
    let one = k.one_like();
    let tn = tau_from_gap(&schedule_2n.pair(n).u);
    let t2 = tau_from_gap(&schedule_2n.pair(2 * n).u);
    let s1 = t2 / tn.clone();
    let c = parts.c.clone();
    let a = a_step(schedule_2n, 2 * n);
    let bn = b_step(schedule_2n, n);
    let b2 = b_step(schedule_2n, 2 * n);
    let ctn = c.clone() * tn;
    let mut e = zeros(k);
    e[0][0] = s1.clone() - ctn.clone();
    set_sym(&mut e, 0, 1, ctn.clone() * a.clone() - s1.clone() * bn.clone());
    e[1][1] = s1 * bn.clone() * bn.clone() - ctn * a.clone() * a;
    e[2][2] = c.clone() - one;
    set_sym(&mut e, 2, 3, b2.clone() - c.clone() * bn.clone());
    e[3][3] = c * bn.clone() * bn - b2.clone() * b2;
    e
}

/// Sparse correction matrix from the six Δ entries.
pub fn s_matrix<T: Real>(kappa: &T, parts: &GlueParts<T>) -> Mat4<T> {
    let n = parts.n;
    let d = |i, j| {
        parts
            .delta
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| kappa.zero_like())
    };
    let p = Iter(n - 1);
    let q = Iter(2 * n - 1);
    let a = d(p, q);
    let b = d(q, p);
    let p_star = d(p, Star);
    let star_p = d(Star, p);
    let q_star = d(q, Star);
    let star_q = d(Star, q);
    let k = kappa.clone();
    let sum1 = a.clone() + b.clone() + p_star.clone() + star_p.clone();
    let cross1 = (a.clone() + p_star) / k.clone() + b.clone() + star_p;
    let sum2 = a.clone() + b.clone() + q_star.clone() + star_q.clone();
    let cross2 = (b.clone() + q_star) / k.clone() + a.clone() + star_q;
    let mut s = zeros(kappa);
    s[0][0] = -(sum1.clone() / k.clone());
    set_sym(&mut s, 0, 1, cross1);
    set_sym(&mut s, 0, 2, (a.clone() + b.clone()) / k.clone());
    set_sym(&mut s, 0, 3, -(a.clone() + b.clone() / k.clone()));
    s[1][1] = -sum1;
    set_sym(&mut s, 1, 2, -(b.clone() + a.clone() / k.clone()));
    set_sym(&mut s, 1, 3, a + b);
    s[2][2] = -(sum2.clone() / k.clone());
    set_sym(&mut s, 2, 3, cross2);
    s[3][3] = -sum2;
    s
}

/// Rank-one correction matrix L = φ(L₁ + rL₂).
///
/// With α = a_{2n}, W = Σ_{j=n}^{2n−2} ∏_{t=n}^{j−1} 1/q_t and
/// K = 1/(α_n ∏_{t=n+1}^{2n−2}(1 − α_t/κ)), row n−1 of Ξ contributes L₁ and
/// row 2n−1 contributes L₂ (each paired with row *). L = 0 when n = 1.
pub fn l_matrix<T: Real>(schedule_2n: &SilverSchedule<T>, parts: &GlueParts<T>) -> Mat4<T> {
    let n = parts.n;
    let k = schedule_2n.kappa.clone();
    let mut l = zeros(&k);
    if n < 2 {
        return l;
    }
    let one = k.one_like();
    let steps = &schedule_2n.steps;
    let mut w_sum = k.zero_like();
    let mut w = one.clone();
    for j in n..=2 * n - 2 {
        if j > n {
            w = w / q_from_steps(steps, j - 1, &k);
        }
        w_sum = w_sum + w.clone();
    }
    let mut kprod = steps[n].clone();
    for step in steps.iter().take(2 * n - 1).skip(n + 1) {
        kprod = kprod * (one.clone() - step.clone() / k.clone());
    }
    let kk = one.clone() / kprod;
    let alpha = a_step(schedule_2n, 2 * n);
    let wk = w_sum.clone() / k.clone();
    let two = k.lift(2.0);

    let mut l1 = zeros(&k);
    l1[0][0] = wk.clone() - two.clone() * kk.clone();
    set_sym(
        &mut l1,
        0,
        1,
        kk.clone() * (alpha.clone() + one.clone()) - wk.clone() * alpha.clone(),
    );
    set_sym(&mut l1, 0, 2, kk.clone());
    l1[1][1] = w_sum.clone() * (two.clone() * alpha.clone() / k.clone() - one)
        - two.clone() * kk.clone() * alpha.clone();
    set_sym(&mut l1, 1, 2, -kk.clone());

    let mut l2 = zeros(&k);
    let d = wk.clone() - kk.clone();
    l2[2][2] = two * kk - wk;
    l2[3][3] = -w_sum;
    set_sym(&mut l2, 2, 3, d.clone());
    set_sym(&mut l2, 0, 2, d.clone());
    set_sym(&mut l2, 1, 2, -(alpha.clone() * d.clone()));
    set_sym(&mut l2, 0, 3, -d.clone());
    set_sym(&mut l2, 1, 3, alpha * d);

    for i in 0..4 {
        for j in 0..4 {
            l[i][j] =
                parts.phi.clone() * (l1[i][j].clone() + parts.r.clone() * l2[i][j].clone());
        }
    }
    l
}

/// Restricts a form on [x_0, g_0, x_1, g_1] to the subspace x_1 = x_0 − a g_0,
/// returned in coordinates [x_0, g_0, g_1] padded with a zero last row.
fn reduce_first_step<T: Real>(d: &Mat4<T>, a: &T) -> Mat4<T> {
    let zero = a.zero_like();
    let one = a.one_like();
    // Columns map reduced coordinates to the full vector.
    let t: [[T; 3]; 4] = [
        [one.clone(), zero.clone(), zero.clone()],
        [zero.clone(), one.clone(), zero.clone()],
        [one.clone(), -a.clone(), zero.clone()],
        [zero.clone(), zero.clone(), one],
    ];
    let mut out = zeros(a);
    for p in 0..3 {
        for q in 0..3 {
            let mut acc = zero.clone();
            for i in 0..4 {
                for j in 0..4 {
                    acc = acc + t[i][p].clone() * d[i][j].clone() * t[j][q].clone();
                }
            }
            out[p][q] = acc;
        }
    }
    out
}

/// Assembles E, S, L for the gluing step n → 2n and measures E − S − L.
pub fn esl_matrices<T: Real>(kappa: &T, n: usize) -> Result<Esl<T>> {
    let sigma = build_certificate(kappa, n)?;
    let sched = build_schedule(kappa, 2 * n)?;
    let (_, parts) = glue(&sigma, &sched)?;
    Ok(esl_from_parts(&sched, &parts))
}

/// E, S, L for an already computed gluing step.
pub fn esl_from_parts<T: Real>(schedule_2n: &SilverSchedule<T>, parts: &GlueParts<T>) -> Esl<T> {
    let e = e_matrix(schedule_2n, parts);
    let s = s_matrix(&schedule_2n.kappa, parts);
    let l = l_matrix(schedule_2n, parts);
    let mut diff = zeros(&schedule_2n.kappa);
    let mut scale = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            diff[i][j] = e[i][j].clone() - s[i][j].clone() - l[i][j].clone();
            scale = scale.max(e[i][j].abs().to_f64());
        }
    }
    if parts.n == 1 {
        diff = reduce_first_step(&diff, &schedule_2n.steps[0]);
    }
    let residual = diff
        .iter()
        .flatten()
        .map(|d| d.abs().to_f64())
        .fold(0.0, f64::max);
    Esl {
        n: parts.n,
        e,
        s,
        l,
        residual,
        scale,
    }
}
