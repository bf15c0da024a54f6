//! Independent reference values shared by the integration tests.
#![allow(dead_code)]

/// Two-step optimum for curvature bounds m < M, from the closed form with
/// S = √(M² + (M − m)²).
pub fn two_step_closed_form(m: f64, big_m: f64) -> (f64, f64, f64) {
    let s = (big_m * big_m + (big_m - m) * (big_m - m)).sqrt();
    (
        2.0 / (m + s),
        2.0 / (2.0 * big_m + m - s),
        (s - big_m) / (2.0 * m + s - big_m),
    )
}

/// The explicit 2-step multiplier matrix over rows/columns (0, 1, *), for
/// curvature bounds m < M. Returned as (row, col, value) with rows 0, 1, 2
/// standing for 0, 1, *.
pub fn explicit_two_step_lambda(m: f64, big_m: f64) -> Vec<(usize, usize, f64)> {
    let s = (big_m * big_m + (big_m - m) * (big_m - m)).sqrt();
    let (a, b, _) = two_step_closed_form(m, big_m);
    let pre = a * b * b / 4.0;
    let d = big_m - m;
    vec![
        (0, 1, pre * (s - m) * (s - big_m) / d),
        (1, 0, pre * (s - big_m) * (2.0 * big_m - s - m) / d),
        (1, 2, pre * (2.0 * big_m * big_m + s * s - 2.0 * big_m * s - m * m) / d),
        (
            2,
            0,
            pre * (m.powi(3) - m * m * s + 4.0 * big_m * big_m * s - m * s * s
                - 4.0 * big_m * s * s
                + s.powi(3))
                / (big_m * (m + s)),
        ),
        (2, 1, pre * (2.0 * big_m * s - m * m - s * s) / d),
    ]
}

/// Silver schedule by the naive recursion on (y, z) with
/// y' = z/(x + √(1+x²)), z' = z(x + √(1+x²)), x = 1 − z, and
/// a = ψ(y), b = ψ(z); the schedule for 2m is [h, a, h, b] with h the
/// schedule for m minus its final step.
pub fn naive_schedule(kappa: f64, n: usize) -> Vec<f64> {
    let psi = |t: f64| (1.0 + kappa * t) / (1.0 + t);
    let mut h = vec![psi(1.0 / kappa)];
    let mut z = 1.0 / kappa;
    while h.len() < n {
        let x = 1.0 - z;
        let mu = x + (1.0 + x * x).sqrt();
        let y = z / mu;
        z *= mu;
        let mut prefix = h.clone();
        prefix.pop();
        let mut next = prefix.clone();
        next.push(psi(y));
        next.extend(prefix);
        next.push(psi(z));
        h = next;
    }
    h
}

/// Worst-case squared contraction of GD on quadratics with curvatures in
/// [m, M], maximized over a dense curvature grid.
pub fn quadratic_worst(steps: &[f64], m: f64, big_m: f64, grid: usize) -> f64 {
    (0..=grid)
        .map(|i| {
            let l = m + (big_m - m) * i as f64 / grid as f64;
            steps.iter().map(|a| (1.0 - a * l).powi(2)).product::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Exact rational arithmetic on i128 numerator/denominator pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frac(pub i128, pub i128);

impl Frac {
    pub fn new(n: i128, d: i128) -> Self {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        Frac(s * n / g, s * d / g)
    }
    pub fn add(self, o: Self) -> Self {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    pub fn sub(self, o: Self) -> Self {
        Frac::new(self.0 * o.1 - o.0 * self.1, self.1 * o.1)
    }
    pub fn mul(self, o: Self) -> Self {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    pub fn div(self, o: Self) -> Self {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
}
