//! Outward-rounded enclosures of real numbers.
//!
//! Every arithmetic result is computed in round-to-nearest and then widened
//! by one ulp on each side, which is sound for the correctly rounded IEEE
//! operations (`+ - * / sqrt`). Transcendental functions come from the
//! platform libm, which is not correctly rounded; those results are widened
//! by [`LIBM_ULPS`] ulps instead.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Widening applied to `exp`/`ln` results. glibc and musl both document
/// errors below one ulp for these functions.
pub const LIBM_ULPS: u32 = 3;

/// A closed interval `[lo, hi]` guaranteed to contain some real value.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedBound {
    lo: f64,
    hi: f64,
}

fn down(x: f64, steps: u32) -> f64 {
    (0..steps).fold(x, |v, _| v.next_down())
}

fn up(x: f64, steps: u32) -> f64 {
    (0..steps).fold(x, |v, _| v.next_up())
}

impl DirectedBound {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(!lo.is_nan() && !hi.is_nan() && lo <= hi, "invalid enclosure [{lo}, {hi}]");
        DirectedBound { lo, hi }
    }

    /// A degenerate interval for a value that is exactly representable.
    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Encloses a machine value that is only known to be within one ulp.
    pub fn around(x: f64) -> Self {
        Self::new(x.next_down(), x.next_up())
    }

    pub fn from_u64(v: u64) -> Self {
        let f = v as f64;
        if f as u64 == v && v < (1u64 << 53) {
            Self::point(f)
        } else {
            Self::around(f)
        }
    }

    /// Tightest machine enclosure of an exact rational.
    pub fn from_ratio(r: &BigRational) -> Self {
        let approx = ratio_to_f64(r);
        if !approx.is_finite() {
            return if r.is_positive() {
                Self::new(f64::MAX, f64::INFINITY)
            } else {
                Self::new(f64::NEG_INFINITY, f64::MIN)
            };
        }
        let mut lo = approx;
        let mut hi = approx;
        // `approx` is within an ulp or two; step until the exact value is bracketed.
        while exact(lo) > *r {
            lo = lo.next_down();
        }
        while exact(hi) < *r {
            hi = hi.next_up();
        }
        Self::new(lo, hi)
    }

    pub fn from_biguint(v: &BigUint) -> Self {
        Self::from_ratio(&BigRational::from_integer(BigInt::from(v.clone())))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo.is_finite() && self.hi.is_finite() {
            self.lo / 2.0 + self.hi / 2.0
        } else if self.lo.is_finite() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Width divided by the magnitude of the enclosed value (absolute width
    /// when the interval touches zero).
    pub fn rel_width(&self) -> f64 {
        let mag = self.lo.abs().min(self.hi.abs());
        if mag == 0.0 || self.contains(0.0) {
            self.width()
        } else {
            self.width() / mag
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Exact test that a rational lies in the interval.
    pub fn contains_ratio(&self, r: &BigRational) -> bool {
        let lo_ok = !self.lo.is_finite() || exact(self.lo) <= *r;
        let hi_ok = !self.hi.is_finite() || exact(self.hi) >= *r;
        lo_ok && hi_ok
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    /// Certified strict ordering: every point of `self` is below every point
    /// of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    pub fn certainly_le(&self, other: &Self) -> bool {
        self.hi <= other.lo
    }

    /// `Some(ordering)` when the relation to `x` is decided for every point.
    pub fn cmp_f64(&self, x: f64) -> Option<Ordering> {
        if self.hi < x {
            Some(Ordering::Less)
        } else if self.lo > x {
            Some(Ordering::Greater)
        } else if self.lo == x && self.hi == x {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn sqrt(self) -> Self {
        assert!(self.lo >= 0.0, "sqrt of enclosure with negative part");
        let lo = if self.lo == 0.0 { 0.0 } else { self.lo.sqrt().next_down().max(0.0) };
        Self::new(lo, self.hi.sqrt().next_up())
    }

    pub fn exp(self) -> Self {
        let lo = down(self.lo.exp(), LIBM_ULPS).max(0.0);
        let hi = up(self.hi.exp(), LIBM_ULPS);
        Self::new(lo, hi)
    }

    pub fn ln(self) -> Self {
        assert!(self.lo > 0.0, "ln of enclosure reaching zero");
        let lo = if self.lo == 1.0 { 0.0 } else { down(self.lo.ln(), LIBM_ULPS) };
        let hi = if self.hi == 1.0 { 0.0 } else { up(self.hi.ln(), LIBM_ULPS) };
        Self::new(lo, hi)
    }

    pub fn recip(self) -> Self {
        Self::point(1.0) / self
    }

    pub fn square(self) -> Self {
        if self.lo >= 0.0 {
            self * self
        } else if self.hi <= 0.0 {
            (-self) * (-self)
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Self::new(0.0, (m * m).next_up())
        }
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Self::new(0.0, self.lo.abs().max(self.hi))
        }
    }

    pub fn max(self, other: Self) -> Self {
        Self::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min(self, other: Self) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    pub fn powi(self, e: u32) -> Self {
        (0..e).fold(Self::point(1.0), |acc, _| acc * self)
    }
}

impl fmt::Debug for DirectedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for DirectedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12}, {:.12}]", self.lo, self.hi)
    }
}

/// Rounded result of a correctly rounded op, widened by one ulp unless the
/// operation was exact in machine arithmetic.
fn widen(lo: f64, hi: f64) -> DirectedBound {
    DirectedBound::new(lo.next_down(), hi.next_up())
}

impl Add for DirectedBound {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        widen(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for DirectedBound {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        widen(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Neg for DirectedBound {
    type Output = Self;
    fn neg(self) -> Self {
        DirectedBound::new(-self.hi, -self.lo)
    }
}

impl Mul for DirectedBound {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            let lo = if self.lo == 0.0 || rhs.lo == 0.0 {
                0.0
            } else {
                (self.lo * rhs.lo).next_down().max(0.0)
            };
            return DirectedBound::new(lo, (self.hi * rhs.hi).next_up());
        }
        let products = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let lo = products.iter().copied().filter(|p| !p.is_nan()).fold(f64::INFINITY, f64::min);
        let hi = products.iter().copied().filter(|p| !p.is_nan()).fold(f64::NEG_INFINITY, f64::max);
        widen(lo, hi)
    }
}

impl Div for DirectedBound {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(rhs.lo > 0.0 || rhs.hi < 0.0, "division by enclosure containing zero: {rhs:?}");
        if self.lo >= 0.0 && rhs.lo > 0.0 {
            let lo = if self.lo == 0.0 {
                0.0
            } else {
                (self.lo / rhs.hi).next_down().max(0.0)
            };
            return DirectedBound::new(lo, (self.hi / rhs.lo).next_up());
        }
        let q = [self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi];
        let lo = q.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        widen(lo, hi)
    }
}

impl Add<f64> for DirectedBound {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        self + DirectedBound::point(rhs)
    }
}

impl Mul<f64> for DirectedBound {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self * DirectedBound::point(rhs)
    }
}

impl Div<f64> for DirectedBound {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / DirectedBound::point(rhs)
    }
}

/// Exact rational value of a finite double.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite double")
}

fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    // Scale so the quotient has ~64 significant bits, then rebuild.
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = num.bits() as i64 - den.bits() as i64 - 64;
    let q = if shift >= 0 {
        &num / (&den << shift as usize)
    } else {
        (&num << (-shift) as usize) / &den
    };
    let mag = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(shift.clamp(-1100, 1100) as i32);
    let mag = if shift.abs() > 1100 {
        if shift > 0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        mag
    };
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

/// The constant one-half times ln(2π) as an enclosure.
pub fn half_ln_two_pi() -> DirectedBound {
    DirectedBound::around(0.918_938_533_204_672_7)
}

pub fn ln2() -> DirectedBound {
    DirectedBound::around(std::f64::consts::LN_2)
}

pub fn pi() -> DirectedBound {
    DirectedBound::around(std::f64::consts::PI)
}

/// Enclosure of `ln(v)` for an arbitrarily large positive integer, from its
/// leading 53 bits.
pub fn ln_biguint(v: &BigUint) -> DirectedBound {
    assert!(!v.is_zero(), "ln of zero");
    let bits = v.bits();
    if bits <= 53 {
        return DirectedBound::from_u64(v.to_u64().expect("fits")).ln();
    }
    let shift = bits - 53;
    let top = (v >> shift).to_u64().expect("53 bits");
    let exact_top = (BigUint::from(top) << shift) == *v;
    let lo = DirectedBound::from_u64(top).ln();
    let hi = if exact_top { lo } else { DirectedBound::from_u64(top + 1).ln() };
    let scale = ln2() * DirectedBound::from_u64(shift);
    lo.hull(&hi) + scale
}

pub fn log2_biguint(v: &BigUint) -> DirectedBound {
    if v.is_one() {
        return DirectedBound::point(0.0);
    }
    ln_biguint(v) / ln2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn ratio_enclosure_brackets_thirds() {
        let r = BigRational::new(BigInt::from(1), BigInt::from(3));
        let b = DirectedBound::from_ratio(&r);
        assert!(b.contains_ratio(&r));
        assert!(b.width() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn huge_ratio_encloses() {
        let num = BigInt::from(10).pow(400) + BigInt::from(7);
        let r = BigRational::new(num, BigInt::from(10).pow(399));
        let b = DirectedBound::from_ratio(&r);
        assert!(b.contains_ratio(&r));
        assert!((b.mid() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn arithmetic_contains_exact_results() {
        let third = DirectedBound::from_ratio(&BigRational::new(1.into(), 3.into()));
        let one = third + third + third;
        assert!(one.contains(1.0));
        let prod = third * DirectedBound::point(3.0);
        assert!(prod.contains(1.0));
        let q = DirectedBound::point(1.0) / DirectedBound::point(3.0);
        assert!(q.contains_ratio(&BigRational::new(1.into(), 3.into())));
    }

    #[test]
    fn ln_of_big_power_of_two() {
        let v = BigUint::from(1u32) << 1000usize;
        let l = log2_biguint(&v);
        assert!(l.contains(1000.0), "{l:?}");
        assert!(l.width() < 1e-9);
    }

    #[test]
    fn signs_in_mul() {
        let a = DirectedBound::new(-2.0, 3.0);
        let b = DirectedBound::new(-1.0, 4.0);
        let p = a * b;
        assert!(p.lo() <= -8.0 && p.hi() >= 12.0);
    }
}
