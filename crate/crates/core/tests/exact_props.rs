use fracmatch_core::exact::interval::log2_biguint;
use fracmatch_core::exact::{binomial, log2_binomial_bounds, ratio, Ratio};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Pascal's triangle row by row, independent of the multiplicative formula.
fn pascal_rows(n_max: usize) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for n in 1..=n_max {
        let prev = &rows[n - 1];
        let mut row = vec![BigUint::one(); n + 1];
        for k in 1..n {
            row[k] = &prev[k - 1] + &prev[k];
        }
        rows.push(row);
    }
    rows
}

#[test]
fn binomial_matches_pascal_to_500() {
    let rows = pascal_rows(500);
    for (n, row) in rows.iter().enumerate() {
        for (k, v) in row.iter().enumerate() {
            assert_eq!(&binomial(n as u64, k as u64), v, "C({n},{k})");
        }
        assert!(binomial(n as u64, n as u64 + 1).is_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn log2_enclosure_contains_exact(n in 1u64..=3000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as u64;
        let exact = log2_biguint(&binomial(n, k));
        let b = log2_binomial_bounds(n, k);
        prop_assert!(b.lo() <= exact.hi() && exact.lo() <= b.hi(), "({}, {}): {:?} vs {:?}", n, k, b, exact);
        prop_assert!(b.width() <= 1e-6 * exact.hi().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ratio_inverse(num in 1i64..1_000_000_000, den in 1i64..1_000_000_000, neg in any::<bool>()) {
        let r = ratio(if neg { -num } else { num }, den);
        let inv = Ratio::new(r.denom().clone(), r.numer().clone());
        prop_assert_eq!(&r * &inv, Ratio::from_integer(BigInt::one()));
        prop_assert!(r.denom() > &BigInt::zero());
    }

    #[test]
    fn vandermonde(n in 2u64..200, a_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0) {
        let a = (a_frac * n as f64) as u64;
        let k = (k_frac * n as f64) as u64;
        let sum: BigUint = (0..=k).map(|i| binomial(a, i) * binomial(n - a, k - i)).sum();
        prop_assert_eq!(sum, binomial(n, k));
    }

    #[test]
    fn complement_symmetry(n in 0u64..400, k_frac in 0.0f64..=1.0) {
        let k = (k_frac * n as f64) as u64;
        prop_assert_eq!(binomial(n, k), binomial(n, n - k));
    }
}
