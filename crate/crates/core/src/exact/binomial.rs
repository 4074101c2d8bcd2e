use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::interval::{ln2, DirectedBound};
use super::lnfact::ln_factorial;
use super::BigCount;

/// `C(n, k)` by the multiplicative formula. Every partial product
/// `C(n-k+i, i)` is an integer, so each division is exact.
pub fn binomial(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Per-worker memo of exact binomials, keyed with `k <= n/2`.
#[derive(Debug, Default, Clone)]
pub struct BinomialMemo {
    table: HashMap<(u64, u64), BigCount>,
}

impl BinomialMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, n: u64, k: u64) -> BigCount {
        if k > n {
            return BigUint::zero();
        }
        let key = (n, k.min(n - k));
        self.table.entry(key).or_insert_with(|| binomial(key.0, key.1)).clone()
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Overwrites an entry without checking it. Only used for fault injection
    /// in self-tests.
    pub fn insert_unchecked(&mut self, n: u64, k: u64, value: BigCount) {
        self.table.insert((n, k.min(n - k)), value);
    }
}

/// Certified enclosure of `log2 C(n, k)`.
pub fn log2_binomial_bounds(n: u64, k: u64) -> DirectedBound {
    assert!(k <= n, "log2_binomial_bounds requires k <= n");
    if k == 0 || k == n {
        return DirectedBound::point(0.0);
    }
    let ln = ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
    ln / ln2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::interval::log2_biguint;

    fn pascal_row(n: usize) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row
    }

    #[test]
    fn small_values() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(0, 0), BigUint::from(1u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(7, 0), BigUint::one());
    }

    #[test]
    fn poker_hands_match_pascal() {
        let row = pascal_row(52);
        assert_eq!(row[5], BigUint::from(2_598_960u32));
        assert_eq!(binomial(52, 5), row[5]);
        for (k, v) in row.iter().enumerate() {
            assert_eq!(&binomial(52, k as u64), v);
        }
    }

    #[test]
    fn pascal_identity_to_500() {
        let mut memo = BinomialMemo::new();
        for n in 1..=500u64 {
            for k in 1..=n {
                let lhs = memo.get(n, k);
                let rhs = memo.get(n - 1, k) + memo.get(n - 1, k - 1);
                assert_eq!(lhs, rhs, "Pascal fails at ({n},{k})");
            }
        }
    }

    #[test]
    fn log2_bounds_small() {
        let b = log2_binomial_bounds(4, 2);
        assert!(b.contains(6f64.log2()));
        let b = log2_binomial_bounds(10, 5);
        assert!(b.contains(252f64.log2()));
        assert!(b.width() < 1e-9);
    }

    #[test]
    fn log2_bounds_large_contains_exact() {
        let exact = binomial(120_000, 30_000);
        let exact_log = log2_biguint(&exact);
        let b = log2_binomial_bounds(120_000, 30_000);
        assert!(b.lo() <= exact_log.hi() && exact_log.lo() <= b.hi());
        // the exact log enclosure is tight, so b must straddle its midpoint
        assert!(b.contains(exact_log.mid()), "{b:?} vs {exact_log:?}");
        assert!(b.width() <= 1e-6 * b.mid());
    }

    #[test]
    fn log2_bounds_width_budget() {
        for &(n, k) in &[(200_000u64, 1u64), (200_000, 2), (200_000, 100_000), (20, 3), (21, 10)] {
            let b = log2_binomial_bounds(n, k);
            let budget = 1e-6 * b.mid().max(1.0);
            assert!(b.width() <= budget, "({n},{k}) width {} > {budget}", b.width());
        }
    }
}
