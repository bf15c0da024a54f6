use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{q_quadratic, CertIndex, Multipliers, Point, TrajectoryData};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::schedule::SilverSchedule;

/// Structural checks on a multiplier matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub n: usize,
    pub nnz: usize,
    pub min_entry: f64,
    /// Largest |row sum − column sum| over all indices.
    pub netflow_max: f64,
    /// Largest entry magnitude, for scale.
    pub max_entry: f64,
    pub nonnegative: bool,
    /// No (t, *) entry for t < n − 1, checked exactly.
    pub star_sparse: bool,
    pub netflow: bool,
    pub passed: bool,
}

/// Checks nonnegativity (≥ −tol·s), *-sparsity (exact) and netflow
/// (≤ tol·s), with s = max(1, largest entry).
pub fn verify_structure<T: Real>(lambda: &Multipliers<T>, tol: f64) -> StructureReport {
    use std::collections::BTreeMap;
    let mut flow: BTreeMap<CertIndex, f64> = BTreeMap::new();
    let mut min_entry = f64::INFINITY;
    let mut max_entry: f64 = 0.0;
    let mut star_sparse = true;
    let mut finite = true;
    let mut sums: BTreeMap<CertIndex, Option<T>> = BTreeMap::new();
    for (&(i, j), v) in &lambda.entries {
        let f = v.to_f64();
        finite &= v.is_finite();
        min_entry = min_entry.min(f);
        max_entry = max_entry.max(f.abs());
        if let (CertIndex::Iter(t), CertIndex::Star) = (i, j) {
            if t + 1 < lambda.n && *v != v.zero_like() {
                star_sparse = false;
            }
        }
        for (idx, sign) in [(i, 1.0), (j, -1.0)] {
            let slot = sums.entry(idx).or_insert(None);
            let add = v.lift(sign) * v.clone();
            *slot = Some(match slot.take() {
                Some(acc) => acc + add,
                None => add,
            });
        }
    }
    for (idx, s) in sums {
        flow.insert(idx, s.map(|x| x.abs().to_f64()).unwrap_or(0.0));
    }
    let netflow_max = flow.values().cloned().fold(0.0, f64::max);
    if lambda.entries.is_empty() {
        min_entry = 0.0;
    }
    let scaled = tol * max_entry.max(1.0);
    let nonnegative = finite && min_entry >= -scaled;
    let netflow = finite && netflow_max <= scaled;
    StructureReport {
        n: lambda.n,
        nnz: lambda.nnz(),
        min_entry,
        netflow_max,
        max_entry,
        nonnegative,
        star_sparse,
        netflow,
        passed: nonnegative && star_sparse && netflow,
    }
}

/// Options for [`verify_identity_with`].
#[derive(Clone, Copy, Debug)]
pub struct IdentityOptions {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    /// Fit a global scale on the first trial; otherwise the scale is 1.
    pub fit_scale: bool,
}

/// Residual statistics of the certificate identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityStats {
    pub trials: usize,
    pub dim: usize,
    pub seed: u64,
    pub precision_bits: usize,
    /// Scale s fitted on the first trial (1 when fitting is off).
    pub scale: f64,
    /// max over trials of |LHS − sΣλQ| / (Σ|λQ| + τ‖x_0‖² + ‖x_n‖²).
    pub max_relative_residual: f64,
    /// The same residual with s fixed to 1.
    pub max_relative_residual_unit_scale: f64,
    /// Largest relative spread of per-trial implied scales LHS/ΣλQ around s.
    pub scale_spread: f64,
    pub finite: bool,
}

impl IdentityStats {
    pub fn passes(&self, tol: f64) -> bool {
        self.finite && self.max_relative_residual <= tol
    }
}

/// Random GD data for `schedule`: x_0, g_t ~ N(0, I), f_t ~ N(0, 1),
/// x_{t+1} = x_t − α_t g_t. Returns the data and x_n.
pub fn random_trajectory<T: Real>(
    schedule: &SilverSchedule<T>,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> (TrajectoryData<T>, Vec<T>) {
    let like = &schedule.kappa;
    let draw = |rng: &mut ChaCha8Rng| -> T {
        let v: f64 = StandardNormal.sample(rng);
        like.lift(v)
    };
    let mut x: Vec<T> = (0..dim).map(|_| draw(rng)).collect();
    let mut iterates = Vec::with_capacity(schedule.n);
    for step in &schedule.steps {
        let g: Vec<T> = (0..dim).map(|_| draw(rng)).collect();
        let f = draw(rng);
        let next = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| xi.clone() - step.clone() * gi.clone())
            .collect();
        iterates.push(Point { x, g, f });
        x = next;
    }
    let zero = vec![like.zero_like(); dim];
    let data = TrajectoryData {
        iterates,
        star: Point {
            x: zero.clone(),
            g: zero,
            f: like.zero_like(),
        },
    };
    (data, x)
}

fn norm2<T: Real>(v: &[T], like: &T) -> T {
    v.iter()
        .fold(like.zero_like(), |a, x| a + x.clone() * x.clone())
}

/// Randomized check of τ‖x_0‖² − ‖x_n‖² = s·Σλ_ij Q_ij with scale fitting.
pub fn verify_identity<T: Real>(
    schedule: &SilverSchedule<T>,
    lambda: &Multipliers<T>,
    tau: &T,
    trials: usize,
    dim: usize,
    seed: u64,
) -> Result<IdentityStats> {
    verify_identity_with(
        schedule,
        lambda,
        tau,
        IdentityOptions {
            trials,
            dim,
            seed,
            fit_scale: true,
        },
    )
}

pub fn verify_identity_with<T: Real>(
    schedule: &SilverSchedule<T>,
    lambda: &Multipliers<T>,
    tau: &T,
    opts: IdentityOptions,
) -> Result<IdentityStats> {
    if lambda.n != schedule.n {
        return Err(Error::Invalid(format!(
            "certificate size {} does not match schedule length {}",
            lambda.n, schedule.n
        )));
    }
    let kappa = &schedule.kappa;
    let m = kappa.one_like() / kappa.clone();
    let one = kappa.one_like();
    let fscale = kappa.lift(2.0) * (one.clone() - m.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut scale: Option<T> = None;
    let mut worst = 0.0f64;
    let mut worst_unit = 0.0f64;
    let mut spread = 0.0f64;
    let mut finite = true;

    for _ in 0..opts.trials {
        let (data, xn) = random_trajectory(schedule, opts.dim, &mut rng);
        let x0 = &data.iterates[0].x;
        let lhs_a = tau.clone() * norm2(x0, kappa);
        let lhs_b = norm2(&xn, kappa);
        let lhs = lhs_a.clone() - lhs_b.clone();
        let mut rhs = kappa.zero_like();
        let mut mag = kappa.zero_like();
        for (&(i, j), v) in &lambda.entries {
            let pi = data.point(i)?;
            let pj = data.point(j)?;
            let q = fscale.clone() * (pi.f.clone() - pj.f.clone()) + q_quadratic(pi, pj, &m, &one);
            let term = v.clone() * q;
            mag = mag + term.abs();
            rhs = rhs + term;
        }
        let s = match &scale {
            Some(s) => s.clone(),
            None => {
                let s = if opts.fit_scale && rhs != rhs.zero_like() {
                    lhs.clone() / rhs.clone()
                } else {
                    one.clone()
                };
                scale = Some(s.clone());
                s
            }
        };
        let denom = mag + lhs_a + lhs_b;
        let res = ((lhs.clone() - s.clone() * rhs.clone()).abs() / denom.clone()).to_f64();
        let res_unit = ((lhs.clone() - rhs.clone()).abs() / denom).to_f64();
        if rhs != rhs.zero_like() {
            let implied = lhs / rhs;
            spread = spread.max(((implied - s.clone()) / s.clone()).abs().to_f64());
        }
        finite &= res.is_finite() && res_unit.is_finite();
        worst = worst.max(if res.is_finite() { res } else { f64::INFINITY });
        worst_unit = worst_unit.max(if res_unit.is_finite() {
            res_unit
        } else {
            f64::INFINITY
        });
    }
    Ok(IdentityStats {
        trials: opts.trials,
        dim: opts.dim,
        seed: opts.seed,
        precision_bits: kappa.precision_bits(),
        scale: scale.map(|s| s.to_f64()).unwrap_or(1.0),
        max_relative_residual: worst,
        max_relative_residual_unit_scale: worst_unit,
        scale_spread: spread,
        finite,
    })
}
