//! Scalar abstraction shared by the schedule and certificate code.
//!
//! Everything generic is written against [`Real`]. `f64` is the default;
//! [`Mp`] is a software float with a configurable mantissa and an exponent
//! range wide enough for rates far below `f64::MIN_POSITIVE`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode, Sign};

/// Field operations plus the few transcendental helpers the crate needs.
///
/// Constants are produced with [`Real::lift`] so that a multiprecision value
/// keeps the precision of its template.
pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Converts `x` to a value with the same precision as `self`.
    fn lift(&self, x: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    /// Nearest `f64`; may underflow to zero or overflow to infinity.
    fn to_f64(&self) -> f64;
    /// Natural logarithm of `|self|`, valid outside the `f64` exponent range.
    fn ln_abs(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Mantissa precision in bits.
    fn precision_bits(&self) -> usize;

    fn zero_like(&self) -> Self {
        self.lift(0.0)
    }
    fn one_like(&self) -> Self {
        self.lift(1.0)
    }
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn lift(&self, x: f64) -> Self {
        x
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn ln_abs(&self) -> f64 {
        f64::abs(*self).ln()
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn precision_bits(&self) -> usize {
        53
    }
}

const RM: RoundingMode = RoundingMode::ToEven;

/// Software binary float backed by `astro-float`.
///
/// Binary operations run at the larger of the two operand precisions.
#[derive(Clone)]
pub struct Mp {
    v: BigFloat,
    p: usize,
}

impl Mp {
    /// Smallest accepted precision.
    pub const MIN_BITS: usize = 64;

    pub fn new(x: f64, bits: usize) -> Self {
        let p = bits.max(Self::MIN_BITS);
        Mp {
            v: BigFloat::from_f64(x, p),
            p,
        }
    }

    fn wrap(v: BigFloat, p: usize) -> Self {
        Mp { v, p }
    }

    pub fn inner(&self) -> &BigFloat {
        &self.v
    }

    /// Splits a finite nonzero value into `(sign, fraction in [0.5, 1), exponent)`.
    fn parts(&self) -> Option<(f64, f64, i64)> {
        let (words, _, sign, exp, _) = self.v.as_raw_parts()?;
        let top = *words.last()?;
        if top == 0 {
            return None;
        }
        let frac = top as f64 / 18_446_744_073_709_551_616.0;
        let s = if sign == Sign::Neg { -1.0 } else { 1.0 };
        Some((s, frac, exp as i64))
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({:e}, {} bits)", self.to_f64(), self.p)
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

macro_rules! mp_binop {
    ($tr:ident, $method:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $method(self, rhs: Mp) -> Mp {
                let p = self.p.max(rhs.p);
                Mp::wrap(self.v.$method(&rhs.v, p, RM), p)
            }
        }
    };
}

mp_binop!(Add, add);
mp_binop!(Sub, sub);
mp_binop!(Mul, mul);
mp_binop!(Div, div);

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        let p = self.p;
        Mp::wrap(self.v.neg(), p)
    }
}

impl Real for Mp {
    fn lift(&self, x: f64) -> Self {
        Mp::new(x, self.p)
    }
    fn sqrt(&self) -> Self {
        Mp::wrap(self.v.sqrt(self.p, RM), self.p)
    }
    fn abs(&self) -> Self {
        Mp::wrap(self.v.abs(), self.p)
    }
    fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        match self.parts() {
            None => 0.0,
            Some((s, frac, e)) => {
                let e = e.clamp(-2000, 2000) as i32;
                // Two factors keep the intermediate power representable.
                let half = e / 2;
                s * frac * 2f64.powi(half) * 2f64.powi(e - half)
            }
        }
    }
    fn ln_abs(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return f64::INFINITY;
        }
        match self.parts() {
            None => f64::NEG_INFINITY,
            Some((_, frac, e)) => frac.ln() + e as f64 * std::f64::consts::LN_2,
        }
    }
    fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }
    fn precision_bits(&self) -> usize {
        self.p
    }
}
