//! Arithmetic substrate: exact integers and rationals, plus outward-rounded
//! enclosures for the fast paths.

pub mod binomial;
pub mod interval;
pub mod lnfact;
pub mod ser;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;

pub use binomial::{binomial, log2_binomial_bounds, BinomialMemo};
pub use interval::DirectedBound;
pub use lnfact::{ln_factorial, LnFactTable};

/// Nonnegative arbitrary-precision count.
pub type BigCount = BigUint;

/// Exact rational, always stored reduced with a positive denominator.
pub type Ratio = BigRational;

pub fn ratio(num: i64, den: i64) -> Ratio {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_from_count(c: &BigCount) -> Ratio {
    BigRational::from_integer(BigInt::from(c.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ratio_stays_reduced() {
        let r = ratio(6, -4);
        assert_eq!(*r.numer(), BigInt::from(-3));
        assert_eq!(*r.denom(), BigInt::from(2));
    }

    #[test]
    fn reciprocal_products_are_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let mut num: i64 = rng.gen_range(-1_000_000..1_000_000);
            if num == 0 {
                num = 1;
            }
            let den: i64 = rng.gen_range(1..1_000_000);
            let r = ratio(num, den);
            let inv = ratio(den, num);
            assert!((&r * &inv).is_one());
        }
    }
}
