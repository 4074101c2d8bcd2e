//! Exact binomial and hypergeometric sums behind the small-`a` and
//! large-`a` cases.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{binomial, ratio, ratio_from_count, ser, DirectedBound, Ratio};
use crate::formula::{tail_sum_strict, tail_sum_weak};

use super::constants::q;

/// `|P0 - 1/2|` where `P0 = P(Bin(a, p) < pa)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernoulliGap {
    pub a: u64,
    #[serde(serialize_with = "ser::ratio")]
    pub p: Ratio,
    #[serde(serialize_with = "ser::ratio")]
    pub gap: Ratio,
    /// `gap < 0.71 / sqrt(a)`, decided exactly by squaring.
    pub within_bound: bool,
}

pub fn bernoulli_tail_gap(a: u64, p: &Ratio) -> BernoulliGap {
    assert!(a >= 1 && p.is_positive() && *p < Ratio::one(), "need a >= 1 and 0 < p < 1");
    let u = p.numer().magnitude().clone();
    let v = p.denom().magnitude().clone();
    let w = &v - &u;
    // P0 = sum_{i v < u a} C(a,i) u^i w^(a-i) / v^a, accumulated over integers.
    let mut num = BigUint::zero();
    let mut coeff = BigUint::one();
    let ua = &u * BigUint::from(a);
    for i in 0..=a {
        if BigUint::from(i) * &v >= ua {
            break;
        }
        num += &coeff * u.pow(i as u32) * w.pow((a - i) as u32);
        coeff = coeff * BigUint::from(a - i) / BigUint::from(i + 1);
    }
    let p0 = Ratio::new(BigInt::from(num), BigInt::from(v.pow(a as u32)));
    let gap = (p0 - ratio(1, 2)).abs();
    let within_bound = &gap * &gap * Ratio::from_integer(BigInt::from(a)) < ratio(5041, 10_000);
    BernoulliGap {
        a,
        p: p.clone(),
        gap,
        within_bound,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallAThreshold {
    pub a_star: u64,
    pub printed_claim: u64,
    pub agrees: bool,
}

/// `1.1203 (1/2 + 0.71/sqrt(a)) < 3/4`, decided exactly.
pub fn small_a_inequality(a: u64) -> bool {
    // Equivalent to 0.71/sqrt(a) < c with c = 3/4 / 1.1203 - 1/2 > 0.
    let c = ratio(3, 4) / ratio(11_203, 10_000) - ratio(1, 2);
    debug_assert_eq!(c, ratio(3797, 22_406));
    &c * &c * Ratio::from_integer(BigInt::from(a)) > ratio(5041, 10_000)
}

pub fn small_a_threshold() -> SmallAThreshold {
    let a_star = (1..).find(|&a| small_a_inequality(a)).expect("inequality eventually holds");
    // "a > 14" means the inequality should hold from a = 15 on.
    SmallAThreshold {
        a_star,
        printed_claim: 14,
        agrees: a_star <= 15,
    }
}

/// Lower sums near `a = n` written in terms of `b = n - a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerSumRow {
    pub n: u64,
    pub b: u64,
    pub ks_checked: u64,
    /// `sum_{i < kb/n} C(b,i) C(n-b,k-i) <= (3/4) C(n,k)`, as printed.
    pub printed_failures: Vec<u64>,
    /// The same bound for `sum_{i > kb/n}`, the image of the `a`-side sum
    /// under `a = n - b`, `i -> k - i`.
    pub substituted_failures: Vec<u64>,
    pub worst_printed_ratio: f64,
    pub worst_substituted_ratio: f64,
}

/// `C(b,i) C(n-b,k-i) / C(n,k) = C(k,i) C(n-k,b-i) / C(n,b)`; sums over `i`
/// are evaluated on the right-hand side where the numbers stay small.
fn small_b_sum(n: u64, k: u64, b: u64, keep: impl Fn(u64) -> bool) -> BigUint {
    (0..=b.min(k))
        .filter(|&i| keep(i) && b - i <= n - k)
        .map(|i| binomial(k, i) * binomial(n - k, b - i))
        .sum()
}

pub fn lower_sum_checks(ns: &[u64], b_max: u64) -> Vec<LowerSumRow> {
    let mut rows = Vec::new();
    for &n in ns {
        let ks: Vec<u64> = (n / 5 + 1..n.div_ceil(4)).collect();
        for b in 0..=b_max {
            let mut row = LowerSumRow {
                n,
                b,
                ks_checked: ks.len() as u64,
                printed_failures: Vec::new(),
                substituted_failures: Vec::new(),
                worst_printed_ratio: 0.0,
                worst_substituted_ratio: 0.0,
            };
            let total = binomial(n, b);
            for &k in &ks {
                let printed = small_b_sum(n, k, b, |i| i * n < k * b);
                let substituted = small_b_sum(n, k, b, |i| i * n > k * b);
                let three_quarters = BigUint::from(3u32) * &total;
                if BigUint::from(4u32) * &printed > three_quarters {
                    row.printed_failures.push(k);
                }
                if BigUint::from(4u32) * &substituted > three_quarters {
                    row.substituted_failures.push(k);
                }
                let t = ratio_from_count(&total);
                row.worst_printed_ratio = row
                    .worst_printed_ratio
                    .max(DirectedBound::from_ratio(&(ratio_from_count(&printed) / &t)).hi());
                row.worst_substituted_ratio = row
                    .worst_substituted_ratio
                    .max(DirectedBound::from_ratio(&(ratio_from_count(&substituted) / &t)).hi());
            }
            rows.push(row);
        }
    }
    rows
}

/// `sum_{i<ka/n} C(a,i) C(n-a,k-i) <= 1.1203 (1/2 + 0.71/sqrt a) C(n,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainCheck {
    pub n: u64,
    pub k: u64,
    pub a: u64,
    /// The lower sum divided by `C(n,k)`.
    pub lhs: DirectedBound,
    pub rhs: DirectedBound,
    pub holds: bool,
}

pub fn chain_spot_check(n: u64, k: u64, a: u64) -> ChainCheck {
    let total = binomial(n, k);
    let upper = tail_sum_weak(n, k, a).expect("valid triple");
    let lower = ratio_from_count(&(&total - upper)) / ratio_from_count(&total);
    let lhs = DirectedBound::from_ratio(&lower);
    let rhs = q(11_203, 10_000) * (q(1, 2) + q(71, 100) / DirectedBound::from_u64(a).sqrt());
    ChainCheck {
        n,
        k,
        a,
        lhs,
        rhs,
        holds: lhs.hi() < rhs.lo(),
    }
}

/// `|P(i <= ka/n) - 1/2|` for the hypergeometric law of `|x ∩ [a]|`, from the
/// exact upper tail.
pub fn be_empirical_gap(n: u64, k: u64, a: u64) -> DirectedBound {
    let upper = tail_sum_strict(n, k, a).expect("valid triple");
    let p = ratio_from_count(&upper) / ratio_from_count(&binomial(n, k));
    DirectedBound::from_ratio(&(ratio(1, 2) - p).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::verify_cell;

    #[test]
    fn bernoulli_gap_examples() {
        let g = bernoulli_tail_gap(20, &ratio(1, 5));
        assert!((DirectedBound::from_ratio(&g.gap).mid() - 0.0886).abs() < 1e-4);
        assert!(g.within_bound);
        let g = bernoulli_tail_gap(1, &ratio(1, 5));
        assert_eq!(g.gap, ratio(3, 10));
        let g = bernoulli_tail_gap(100, &ratio(1, 4));
        assert!(g.gap < ratio(71, 1000));
    }

    #[test]
    fn bernoulli_gap_under_bound_to_400() {
        for p in [ratio(1, 5) + ratio(1, 1000), ratio(9, 40), ratio(1, 4)] {
            for a in 1..=400 {
                assert!(bernoulli_tail_gap(a, &p).within_bound, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn small_a_values() {
        assert!(!small_a_inequality(15));
        assert!(!small_a_inequality(17));
        assert!(small_a_inequality(18));
        let t = small_a_threshold();
        assert_eq!(t.a_star, 18);
        assert!(!t.agrees);
    }

    #[test]
    fn small_b_identity() {
        for n in 2..=30u64 {
            for k in 1..n {
                for b in 0..=n.min(8) {
                    let direct: BigUint = (0..=b.min(k))
                        .filter(|&i| k - i <= n - b)
                        .map(|i| binomial(b, i) * binomial(n - b, k - i))
                        .sum();
                    let mirrored = small_b_sum(n, k, b, |_| true);
                    // Both sides over their own totals.
                    assert_eq!(direct * binomial(n, b), mirrored * binomial(n, k));
                }
            }
        }
    }

    #[test]
    fn lower_sum_examples() {
        let rows = lower_sum_checks(&[1000], 8);
        let r8 = rows.iter().find(|r| r.b == 8).unwrap();
        assert!(r8.printed_failures.is_empty());
        // (100, 24, 1): the single term C(99,24) is 76/100 of C(100,24).
        let rows = lower_sum_checks(&[100], 8);
        assert!(rows[0].printed_failures.is_empty() && rows[0].worst_printed_ratio == 0.0);
        let r1 = rows.iter().find(|r| r.b == 1).unwrap();
        assert!(r1.printed_failures.contains(&24));
        let s = small_b_sum(100, 24, 1, |i| i * 100 < 24);
        assert_eq!(ratio_from_count(&s) / ratio_from_count(&binomial(100, 1)), ratio(76, 100));
        for r in &rows {
            assert!(r.substituted_failures.is_empty());
            if r.b >= 2 {
                assert!(r.printed_failures.is_empty(), "b={}", r.b);
            }
        }
    }

    #[test]
    fn chain_holds_at_samples() {
        for a in [15u64, 18, 100, 1000] {
            let c = chain_spot_check(120_001, 27_000, a);
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn empirical_gap_examples() {
        let g = be_empirical_gap(100, 24, 50);
        assert!(g.hi() < 0.25);
        let g = be_empirical_gap(66_000, 16_000, 33_000);
        assert!(g.hi() < 0.2203);
        assert!(g.rel_width() < 1e-6);
        for (n, k) in [(40u64, 6u64), (100, 12)] {
            let a = n / 2;
            let g = be_empirical_gap(n, k, a);
            assert!(g.hi() <= 0.5);
            let c = (ratio(1, 1) - ratio_from_count(&tail_sum_strict(n, k, a).unwrap()) / ratio_from_count(&binomial(n, k)) - ratio(1, 2))
                .abs();
            assert!(g.contains_ratio(&c));
        }
    }

    #[test]
    fn small_gap_implies_cell_ok() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut implied = 0;
        for _ in 0..300 {
            let n = rng.gen_range(21..400u64);
            let (lo, hi) = (n / 5 + 1, n.div_ceil(4));
            if lo >= hi {
                continue;
            }
            let k = rng.gen_range(lo..hi);
            let a = rng.gen_range(1..n);
            if be_empirical_gap(n, k, a).hi() < 0.25 {
                implied += 1;
                assert!(verify_cell(n, k, a).unwrap().ok, "({n},{k},{a})");
            }
        }
        assert!(implied > 50);
    }
}
