//! Outward-rounded real intervals.
//!
//! [`Interval`] carries `f64` endpoints and widens every result by at least
//! one ulp on each side, so enclosures survive floating-point rounding. The
//! elementary functions (`ln`, `exp`) are widened by a few ulps to absorb
//! libm error. [`RatInterval`] has exact rational endpoints and is used where
//! more than 53 bits are needed.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::rational::Rational;

/// Closed interval `[lo, hi]` with `f64` endpoints.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const LIBM_ULPS: u32 = 2;

fn down(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_down())
}

fn up(x: f64, n: u32) -> f64 {
    (0..n).fold(x, |v, _| v.next_up())
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Smallest `f64` interval containing the rational.
    pub fn from_rational(r: &Rational) -> Self {
        Interval {
            lo: r.to_f64_down(),
            hi: r.to_f64_up(),
        }
    }

    /// Interval around an `f64` computed with at most `ulps` of rounding error.
    pub fn around(x: f64, ulps: u32) -> Self {
        Interval {
            lo: down(x, ulps),
            hi: up(x, ulps),
        }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    /// Enclosure of `|x|` over the interval.
    pub fn abs(&self) -> Self {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval::new(0.0, self.hi.max(-self.lo))
        }
    }

    pub fn ln(&self) -> Self {
        assert!(self.lo > 0.0, "ln of non-positive interval [{}, {}]", self.lo, self.hi);
        Interval::new(down(self.lo.ln(), LIBM_ULPS), up(self.hi.ln(), LIBM_ULPS))
    }

    pub fn exp(&self) -> Self {
        Interval::new(
            down(self.lo.exp(), LIBM_ULPS).max(0.0),
            up(self.hi.exp(), LIBM_ULPS),
        )
    }

    pub fn sqrt(&self) -> Self {
        Interval::new(down(self.lo.max(0.0).sqrt(), 1), up(self.hi.sqrt(), 1))
    }

    pub fn scale(&self, k: f64) -> Self {
        *self * Interval::point(k)
    }

    pub fn min(&self, other: &Interval) -> Self {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval::new(down(self.lo + rhs.lo, 1), up(self.hi + rhs.hi, 1))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let c = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo, 1), up(hi, 1))
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        assert!(
            rhs.lo > 0.0 || rhs.hi < 0.0,
            "division by interval containing zero"
        );
        let c = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo, 1), up(hi, 1))
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Closed interval with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rational,
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn magnitude(&self) -> Rational {
        std::cmp::max(self.lo.abs(), self.hi.abs())
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn add_scalar(&self, c: &Rational) -> RatInterval {
        RatInterval::new(&self.lo + c, &self.hi + c)
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }

    pub fn mul_scalar(&self, c: &Rational) -> RatInterval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            RatInterval::new(a, b)
        } else {
            RatInterval::new(b, a)
        }
    }

    /// Widens the endpoints to dyadic rationals with `bits` fractional bits.
    pub fn round_outward(&self, bits: u32) -> RatInterval {
        RatInterval::new(self.lo.round_dyadic(bits, false), self.hi.round_dyadic(bits, true))
    }

    /// Smallest enclosing `f64` interval.
    pub fn to_interval(&self) -> Interval {
        Interval::new(self.lo.to_f64_down(), self.hi.to_f64_up())
    }
}
