//! Closed intervals: f64 with outward rounding, and exact rational.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{serde_rational, to_f64, Rational};

/// Widen a float bound by a few ulps in the given direction.
pub fn round_down(x: f64) -> f64 {
    x - 4.0 * f64::EPSILON * x.abs() - f64::MIN_POSITIVE
}

pub fn round_up(x: f64) -> f64 {
    x + 4.0 * f64::EPSILON * x.abs() + f64::MIN_POSITIVE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is empty");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_inside(&self, outer: &Interval) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }

    /// Square of a nonnegative interval.
    pub fn square(&self) -> Interval {
        debug_assert!(self.lo >= 0.0);
        Interval::new(round_down(self.lo * self.lo), round_up(self.hi * self.hi))
    }
}

/// Exact closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatInterval {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Interval quotient; `None` when the divisor straddles zero.
    pub fn div(&self, other: &RatInterval) -> Option<RatInterval> {
        if other.contains_zero() {
            return None;
        }
        let c = [
            &self.lo / &other.lo,
            &self.lo / &other.hi,
            &self.hi / &other.lo,
            &self.hi / &other.hi,
        ];
        let lo = c.iter().min().cloned()?;
        let hi = c.iter().max().cloned()?;
        Some(RatInterval::new(lo, hi))
    }

    pub fn abs_max(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn abs_min(&self) -> Rational {
        if self.contains_zero() {
            Rational::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn to_f64(&self) -> Interval {
        Interval::new(round_down(to_f64(&self.lo)), round_up(to_f64(&self.hi)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rational_division_signs() {
        let num = RatInterval::new(rat(-1, 1), rat(-1, 2));
        let den = RatInterval::new(rat(-3, 8), rat(-1, 4));
        let q = num.div(&den).unwrap();
        assert_eq!(q.lo, rat(4, 3));
        assert_eq!(q.hi, rat(4, 1));
        assert!(num.div(&RatInterval::new(rat(-1, 1), rat(1, 1))).is_none());
    }

    #[test]
    fn outward_rounding() {
        let i = Interval::new(round_down(0.1), round_up(0.1));
        assert!(i.contains(0.1));
        assert!(i.lo < 0.1 && i.hi > 0.1);
    }
}
