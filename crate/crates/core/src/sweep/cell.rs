//! Single-cell checks of `sum_{i > ka/n} C(a,i) C(n-a,k-i) <= C(n-1,k)`.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::exact::interval::{ln2, log2_biguint};
use crate::exact::{BigCount, BinomialMemo, DirectedBound, LnFactTable};
use crate::formula::i_min_strict;

use super::SweepError;

/// Exact verdict for one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellVerdict {
    pub ok: bool,
    pub lhs: BigCount,
    pub rhs: BigCount,
    /// `4k <= n`; cells outside are still compared but are not part of the
    /// finite verification range.
    pub in_scope: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPath {
    Crude,
    Refined,
    Exact,
}

/// Certified information about `rhs/lhs` gathered on the way to a verdict.
/// The logarithm is deferred because most cells never need it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginBound {
    /// `lhs = 0` or `lhs = rhs`.
    None,
    /// Lower bound on `log2(rhs/lhs)`.
    Log2(f64),
    /// Upper bound on `lhs/rhs`, below one.
    RatioHi(f64),
}

impl MarginBound {
    /// Certified lower bound on `log2(rhs/lhs)`.
    pub fn log2_lower(&self) -> Option<f64> {
        match *self {
            MarginBound::None => None,
            MarginBound::Log2(m) => Some(m),
            MarginBound::RatioHi(r) => Some((-(DirectedBound::point(r).ln() / ln2())).lo()),
        }
    }
}

/// Filtered verdict. `lhs`/`rhs` are present only on the exact path.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredVerdict {
    pub ok: bool,
    pub path: CellPath,
    pub bound: MarginBound,
    pub equality: bool,
    pub lhs_is_zero: bool,
    pub exact: Option<(BigCount, BigCount)>,
}

impl FilteredVerdict {
    /// Certified lower bound on `log2(rhs/lhs)`; `None` when `lhs = 0` or
    /// `lhs = rhs`.
    pub fn margin_log2(&self) -> Option<f64> {
        self.bound.log2_lower()
    }
}

fn validate(n: u64, k: u64, a: u64) -> Result<(), SweepError> {
    if n < 2 || k < 1 || k >= n || a < 1 || a >= n {
        return Err(SweepError::InvalidCell { n, k, a });
    }
    Ok(())
}

/// First index with a nonzero strict-tail term, and the last index.
fn term_range(n: u64, k: u64, a: u64) -> (u64, u64) {
    let start = i_min_strict(n, k, a).max((k + a).saturating_sub(n));
    (start, a.min(k))
}

/// `term(i+1) / term(i)` for `term(i) = C(a,i) C(n-a,k-i)`, as exact
/// integer numerator and denominator.
#[inline]
fn ratio_parts(n: u64, k: u64, a: u64, i: u64) -> (u64, u64) {
    ((a - i) * (k - i), (i + 1) * (n + i + 1 - a - k))
}

fn exact_lhs(memo: &mut BinomialMemo, n: u64, k: u64, a: u64) -> BigCount {
    let (start, end) = term_range(n, k, a);
    if start > end {
        return BigUint::zero();
    }
    let mut term = memo.get(a, start) * memo.get(n - a, k - start);
    let mut sum = term.clone();
    for i in start..end {
        let (num, den) = ratio_parts(n, k, a, i);
        term *= num;
        term /= den;
        sum += &term;
    }
    sum
}

/// Exact big-integer comparison for one cell.
pub fn verify_cell(n: u64, k: u64, a: u64) -> Result<CellVerdict, SweepError> {
    let mut memo = BinomialMemo::new();
    verify_cell_with(&mut memo, n, k, a)
}

pub fn verify_cell_with(memo: &mut BinomialMemo, n: u64, k: u64, a: u64) -> Result<CellVerdict, SweepError> {
    validate(n, k, a)?;
    let lhs = exact_lhs(memo, n, k, a);
    let rhs = memo.get(n - 1, k);
    Ok(CellVerdict {
        ok: lhs <= rhs,
        lhs,
        rhs,
        in_scope: 4 * k <= n,
    })
}

/// Lower bound on `log2(rhs/lhs)` from exact values.
pub fn exact_margin_log2(lhs: &BigCount, rhs: &BigCount) -> Option<f64> {
    if lhs.is_zero() || lhs == rhs {
        return None;
    }
    Some((log2_biguint(rhs) - log2_biguint(lhs)).lo())
}

/// What the certified filter concluded before any exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterOutcome {
    /// The tail is empty.
    Empty,
    /// Certified `lhs < rhs`.
    Certified { path: CellPath, bound: MarginBound },
    /// Could not certify; exact arithmetic must decide.
    Undecided,
}

/// Filtered cell checker. Holds the `ln m!` table shared by all workers and a
/// per-worker binomial memo for the exact fallback.
#[derive(Debug, Clone)]
pub struct CellChecker {
    table: Arc<LnFactTable>,
    memo: BinomialMemo,
    slack_bits: f64,
}

impl CellChecker {
    pub fn new(n_max: u64, slack_bits: f64) -> Self {
        Self::with_table(Arc::new(LnFactTable::new(n_max)), slack_bits)
    }

    pub fn with_table(table: Arc<LnFactTable>, slack_bits: f64) -> Self {
        CellChecker {
            table,
            memo: BinomialMemo::new(),
            slack_bits,
        }
    }

    pub fn memo(&mut self) -> &mut BinomialMemo {
        &mut self.memo
    }

    pub fn ln_rhs(&self, n: u64, k: u64) -> DirectedBound {
        self.table.ln_binomial(n - 1, k).expect("k <= n-1")
    }

    /// Certified filter. Terms of the strict tail are nonincreasing from the
    /// first index on (the index is past the hypergeometric mode) and their
    /// successive ratios decrease, which justifies both bounds used here:
    /// `tail <= (#terms) * first`, and after partial summation
    /// `rest <= t_i * r_i / (1 - r_i)`.
    pub fn filter(&self, n: u64, k: u64, a: u64, ln_rhs: DirectedBound) -> FilterOutcome {
        let (start, end) = term_range(n, k, a);
        if start > end {
            return FilterOutcome::Empty;
        }
        let t = &self.table;
        let ln_first = t.ln_binomial(a, start).expect("start <= a") + t.ln_binomial(n - a, k - start).expect("k - start <= n - a");
        let ln_crude = ln_first + t.ln(end - start + 1);
        if ln_crude.certainly_lt(&ln_rhs) {
            return FilterOutcome::Certified {
                path: CellPath::Crude,
                bound: MarginBound::Log2(((ln_rhs - ln_crude) / ln2()).lo()),
            };
        }
        if ((ln_crude - ln_rhs) / ln2()).lo() > self.slack_bits {
            return FilterOutcome::Undecided;
        }

        // Partial summation in units of rhs. All quantities are positive, so
        // the enclosure is kept as raw (lo, hi) pairs rounded outward by hand.
        // Ratio numerators and denominators are below 2^53 and convert exactly.
        let first = (ln_first - ln_rhs).exp();
        let (mut t_lo, mut t_hi) = (first.lo(), first.hi());
        let (mut s_lo, mut s_hi) = (t_lo, t_hi);
        for i in start..end {
            let (num, den) = ratio_parts(n, k, a, i);
            let q = num as f64 / den as f64;
            let (r_lo, r_hi) = (q.next_down(), q.next_up());
            if r_hi < 1.0 {
                let rest_hi = ((t_hi * r_hi).next_up() / (1.0 - r_hi).next_down()).next_up();
                let total_hi = (s_hi + rest_hi).next_up();
                if total_hi < 1.0 {
                    return FilterOutcome::Certified {
                        path: CellPath::Refined,
                        bound: MarginBound::RatioHi(total_hi),
                    };
                }
            }
            t_lo = (t_lo * r_lo).next_down().max(0.0);
            t_hi = (t_hi * r_hi).next_up();
            s_lo = (s_lo + t_lo).next_down();
            s_hi = (s_hi + t_hi).next_up();
            if s_lo >= 1.0 || !s_hi.is_finite() {
                return FilterOutcome::Undecided;
            }
        }
        if s_hi < 1.0 {
            return FilterOutcome::Certified {
                path: CellPath::Refined,
                bound: MarginBound::RatioHi(s_hi),
            };
        }
        FilterOutcome::Undecided
    }

    pub fn verify_filtered(&mut self, n: u64, k: u64, a: u64) -> Result<FilteredVerdict, SweepError> {
        validate(n, k, a)?;
        if n > self.table.max() {
            return Err(SweepError::TableTooSmall { n, max: self.table.max() });
        }
        let ln_rhs = self.ln_rhs(n, k);
        Ok(self.verify_filtered_unchecked(n, k, a, ln_rhs))
    }

    pub(crate) fn verify_filtered_unchecked(&mut self, n: u64, k: u64, a: u64, ln_rhs: DirectedBound) -> FilteredVerdict {
        match self.filter(n, k, a, ln_rhs) {
            FilterOutcome::Empty => FilteredVerdict {
                ok: true,
                path: CellPath::Crude,
                bound: MarginBound::None,
                equality: false,
                lhs_is_zero: true,
                exact: None,
            },
            FilterOutcome::Certified { path, bound } => FilteredVerdict {
                ok: true,
                path,
                bound,
                equality: false,
                lhs_is_zero: false,
                exact: None,
            },
            FilterOutcome::Undecided => self.exact_verdict(n, k, a),
        }
    }

    pub(crate) fn exact_verdict(&mut self, n: u64, k: u64, a: u64) -> FilteredVerdict {
        let lhs = exact_lhs(&mut self.memo, n, k, a);
        let rhs = self.memo.get(n - 1, k);
        FilteredVerdict {
            ok: lhs <= rhs,
            path: CellPath::Exact,
            bound: exact_margin_log2(&lhs, &rhs).map_or(MarginBound::None, MarginBound::Log2),
            equality: lhs == rhs,
            lhs_is_zero: lhs.is_zero(),
            exact: Some((lhs, rhs)),
        }
    }
}

/// Filtered check of a single cell with a freshly built table.
pub fn verify_cell_filtered(n: u64, k: u64, a: u64) -> Result<FilteredVerdict, SweepError> {
    CellChecker::new(n, super::DEFAULT_SLACK_BITS).verify_filtered(n, k, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::binomial;
    use crate::formula::tail_sum_strict;

    #[test]
    fn exact_examples() {
        let v = verify_cell(13, 3, 12).unwrap();
        assert!(v.ok && v.in_scope);
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (BigUint::from(220u32), BigUint::from(220u32)));

        let v = verify_cell(13, 3, 4).unwrap();
        assert!(v.ok);
        assert_eq!(v.lhs, BigUint::from(202u32));
        assert_eq!(v.rhs, BigUint::from(220u32));

        let v = verify_cell(10, 3, 3).unwrap();
        assert!(!v.in_scope);
        assert!(!v.ok);
        assert_eq!((v.lhs, v.rhs), (BigUint::from(85u32), BigUint::from(84u32)));
    }

    #[test]
    fn filtered_examples() {
        let v = verify_cell_filtered(2000, 499, 1000).unwrap();
        assert!(v.ok);
        assert_ne!(v.path, CellPath::Exact);

        let v = verify_cell_filtered(2000, 499, 1999).unwrap();
        assert!(v.ok && v.equality);
        assert_eq!(v.path, CellPath::Exact);
    }

    #[test]
    fn crude_path_reached() {
        let v = verify_cell_filtered(2000, 100, 3).unwrap();
        assert_eq!(v.path, CellPath::Crude);
    }

    #[test]
    fn invalid_cells_rejected() {
        assert!(verify_cell(5, 0, 1).is_err());
        assert!(verify_cell(5, 2, 5).is_err());
        let mut c = CellChecker::new(10, 32.0);
        assert!(matches!(c.verify_filtered(20, 2, 3), Err(SweepError::TableTooSmall { .. })));
    }

    #[test]
    fn exact_lhs_matches_formula() {
        let mut memo = BinomialMemo::new();
        for n in 2..=30u64 {
            for k in 1..n {
                for a in 1..n {
                    assert_eq!(exact_lhs(&mut memo, n, k, a), tail_sum_strict(n, k, a).unwrap());
                }
            }
        }
    }

    #[test]
    fn terms_decrease_from_first_index() {
        for n in 2..=60u64 {
            for k in 1..n {
                for a in 1..n {
                    let (start, end) = term_range(n, k, a);
                    let terms: Vec<_> = (start..=end).map(|i| binomial(a, i) * binomial(n - a, k - i)).collect();
                    assert!(terms.windows(2).all(|w| w[0] >= w[1]), "({n},{k},{a})");
                }
            }
        }
    }

    #[test]
    fn margin_is_a_lower_bound() {
        let mut c = CellChecker::new(400, 32.0);
        for &(n, k, a) in &[(400u64, 100u64, 200u64), (400, 50, 7), (300, 75, 298), (333, 80, 150)] {
            let f = c.verify_filtered(n, k, a).unwrap();
            let e = verify_cell(n, k, a).unwrap();
            let truth = log2_biguint(&e.rhs) - log2_biguint(&e.lhs);
            if let Some(m) = f.margin_log2() {
                assert!(m <= truth.hi(), "({n},{k},{a}) margin {m} > {truth:?}");
            }
        }
    }
}
