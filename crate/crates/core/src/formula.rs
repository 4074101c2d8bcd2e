//! Closed-form extremal values for the no-perfect-fractional-matching
//! problem `p(n, k)` and the nonnegative-sum problem `q(n, k)`, evaluated
//! exactly, plus the identities that tie them together.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{binomial, ratio, ser, BigCount, Ratio};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("invalid parameters n={n}, k={k}, a={a}: need n >= 2, 1 <= k < n, 1 <= a <= n-1")]
    InvalidTail { n: u64, k: u64, a: u64 },
    #[error("invalid parameters n={n}, k={k}: need 1 <= k < n")]
    InvalidPair { n: u64, k: u64 },
    #[error("precondition violated for ({n},{k}): {condition}")]
    Precondition { n: u64, k: u64, condition: &'static str },
}

/// Validated `(n, k, a)` triple for the hypergeometric tail sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailParams {
    pub n: u64,
    pub k: u64,
    pub a: u64,
}

impl TailParams {
    pub fn new(n: u64, k: u64, a: u64) -> Result<Self, FormulaError> {
        if n < 2 || k < 1 || k >= n || a < 1 || a > n - 1 {
            return Err(FormulaError::InvalidTail { n, k, a });
        }
        Ok(TailParams { n, k, a })
    }

    /// The threshold `ka/n`, exactly.
    pub fn threshold(&self) -> Ratio {
        ratio((self.k * self.a) as i64, self.n as i64)
    }

    /// First index with `i > ka/n`.
    pub fn i_min_strict(&self) -> u64 {
        i_min_strict(self.n, self.k, self.a)
    }

    /// First index with `i >= ka/n`.
    pub fn i_min_weak(&self) -> u64 {
        i_min_weak(self.n, self.k, self.a)
    }

    /// Largest index with a nonzero term `C(a,i) C(n-a,k-i)`.
    pub fn i_max(&self) -> u64 {
        self.a.min(self.k)
    }

    /// Whether `n | ka`, the only case where strict and weak tails differ.
    pub fn threshold_is_integral(&self) -> bool {
        (self.k * self.a).is_multiple_of(self.n)
    }
}

pub fn i_min_strict(n: u64, k: u64, a: u64) -> u64 {
    (k * a) / n + 1
}

pub fn i_min_weak(n: u64, k: u64, a: u64) -> u64 {
    (k * a).div_ceil(n)
}

fn check_pair(n: u64, k: u64) -> Result<(), FormulaError> {
    if k < 1 || k >= n {
        return Err(FormulaError::InvalidPair { n, k });
    }
    Ok(())
}

/// `sum_{i = from}^{min(a,k)} C(a,i) C(n-a,k-i)` using the ratio recurrence
/// between consecutive terms. Indices below `k - (n-a)` contribute zero and
/// are skipped.
pub fn hypergeometric_tail_from(n: u64, k: u64, a: u64, from: u64) -> BigCount {
    let start = from.max((k + a).saturating_sub(n));
    let end = a.min(k);
    if start > end {
        return BigUint::zero();
    }
    let mut term = binomial(a, start) * binomial(n - a, k - start);
    let mut sum = term.clone();
    for i in start..end {
        term *= (a - i) * (k - i);
        term /= (i + 1) * (n + i + 1 - a - k);
        sum += &term;
    }
    sum
}

/// `sum_{i > ka/n} C(a,i) C(n-a,k-i)`.
pub fn tail_sum_strict(n: u64, k: u64, a: u64) -> Result<BigCount, FormulaError> {
    let p = TailParams::new(n, k, a)?;
    Ok(hypergeometric_tail_from(n, k, a, p.i_min_strict()))
}

/// `sum_{i >= ka/n} C(a,i) C(n-a,k-i)`.
pub fn tail_sum_weak(n: u64, k: u64, a: u64) -> Result<BigCount, FormulaError> {
    let p = TailParams::new(n, k, a)?;
    Ok(hypergeometric_tail_from(n, k, a, p.i_min_weak()))
}

/// An exact extremum over `a` together with every attaining `a`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremumProfile {
    #[serde(serialize_with = "ser::count")]
    pub value: BigCount,
    pub args: Vec<u64>,
    /// Value for each `a = 1..=n-1` (index `a - 1`), when retained.
    #[serde(serialize_with = "ser::opt_counts")]
    pub table: Option<Vec<BigCount>>,
}

impl ExtremumProfile {
    fn from_table(table: Vec<BigCount>, want_max: bool) -> Self {
        let value = if want_max { table.iter().max() } else { table.iter().min() }
            .expect("nonempty table")
            .clone();
        let args = table
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == value)
            .map(|(i, _)| i as u64 + 1)
            .collect();
        ExtremumProfile {
            value,
            args,
            table: Some(table),
        }
    }
}

/// Conjectured `p(n,k)`: the maximum over `a` of the strict tail.
pub fn p_conjectured(n: u64, k: u64) -> Result<ExtremumProfile, FormulaError> {
    check_pair(n, k)?;
    let table = (1..n).map(|a| tail_sum_strict(n, k, a)).collect::<Result<Vec<_>, _>>()?;
    Ok(ExtremumProfile::from_table(table, true))
}

/// Conjectured `q(n,k)`: the minimum over `a` of the weak tail.
pub fn q_conjectured(n: u64, k: u64) -> Result<ExtremumProfile, FormulaError> {
    check_pair(n, k)?;
    let table = (1..n).map(|a| tail_sum_weak(n, k, a)).collect::<Result<Vec<_>, _>>()?;
    Ok(ExtremumProfile::from_table(table, false))
}

/// One summand family of the `s`-indexed form of `p(n,k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AkTerm {
    pub s: u64,
    /// `n_s = ceil(ns/k) - 1`.
    pub n_s: u64,
    #[serde(serialize_with = "ser::count")]
    pub value: BigCount,
}

pub fn p_ak_terms(n: u64, k: u64) -> Result<Vec<AkTerm>, FormulaError> {
    check_pair(n, k)?;
    Ok((1..=k)
        .map(|s| {
            let n_s = (n * s).div_ceil(k) - 1;
            let value = (0..=k - s).map(|i| binomial(n_s, i + s) * binomial(n - n_s, k - s - i)).sum();
            AkTerm { s, n_s, value }
        })
        .collect())
}

/// `p(n,k)` in the `s`-indexed form with `n_s = ceil(ns/k) - 1`.
pub fn p_ak_form(n: u64, k: u64) -> Result<BigCount, FormulaError> {
    Ok(p_ak_terms(n, k)?.into_iter().map(|t| t.value).max().expect("k >= 1"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplementReport {
    pub n: u64,
    pub k: u64,
    pub holds: bool,
    #[serde(serialize_with = "ser::count")]
    pub p: BigCount,
    #[serde(serialize_with = "ser::count")]
    pub q: BigCount,
    #[serde(serialize_with = "ser::count")]
    pub total: BigCount,
}

/// Checks `p + q = C(n,k)` for the conjectured values.
pub fn check_complement_identity(n: u64, k: u64) -> Result<ComplementReport, FormulaError> {
    let p = p_conjectured(n, k)?.value;
    let q = q_conjectured(n, k)?.value;
    let total = binomial(n, k);
    Ok(ComplementReport {
        n,
        k,
        holds: &p + &q == total,
        p,
        q,
        total,
    })
}

/// Outcome of comparing `q_conjectured(n,k)` with `C(n-1,k-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MmsReport {
    pub n: u64,
    pub k: u64,
    pub holds: bool,
    #[serde(serialize_with = "ser::count")]
    pub q: BigCount,
    #[serde(serialize_with = "ser::count")]
    pub target: BigCount,
    pub minimizers: Vec<u64>,
    /// False when evaluated outside the identity's stated range.
    pub in_scope: bool,
}

fn mms_report(n: u64, k: u64, in_scope: bool) -> Result<MmsReport, FormulaError> {
    let q = q_conjectured(n, k)?;
    let target = binomial(n - 1, k - 1);
    Ok(MmsReport {
        n,
        k,
        holds: q.value == target,
        q: q.value,
        target,
        minimizers: q.args,
        in_scope,
    })
}

/// `q(n,k) = C(n-1,k-1)` for `n >= 4k`.
pub fn check_mms_identity(n: u64, k: u64) -> Result<MmsReport, FormulaError> {
    check_pair(n, k)?;
    if n < 4 * k {
        return Err(FormulaError::Precondition {
            n,
            k,
            condition: "n >= 4k",
        });
    }
    mms_report(n, k, true)
}

/// Evaluates the MMS comparison regardless of `n >= 4k`.
pub fn check_mms_identity_forced(n: u64, k: u64) -> Result<MmsReport, FormulaError> {
    check_pair(n, k)?;
    mms_report(n, k, n >= 4 * k)
}

/// `q(n,k) = C(n-1,k-1)` whenever `k | n`.
pub fn check_divisibility_case(n: u64, k: u64) -> Result<MmsReport, FormulaError> {
    check_pair(n, k)?;
    if !n.is_multiple_of(k) {
        return Err(FormulaError::Precondition {
            n,
            k,
            condition: "k divides n",
        });
    }
    mms_report(n, k, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicityStatus {
    /// The identity fails at `(n, k)`, so nothing is claimed at `(n+k, k)`.
    Vacuous,
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicityReport {
    pub n: u64,
    pub k: u64,
    pub status: PeriodicityStatus,
    #[serde(serialize_with = "ser::opt_count")]
    pub q_at_shift: Option<BigCount>,
    #[serde(serialize_with = "ser::opt_count")]
    pub target_at_shift: Option<BigCount>,
}

/// If `q(n,k) = C(n-1,k-1)` then `q(n+k,k) = C(n+k-1,k-1)`.
pub fn check_periodicity(n: u64, k: u64) -> Result<PeriodicityReport, FormulaError> {
    let base = mms_report(n, k, true)?;
    if !base.holds {
        return Ok(PeriodicityReport {
            n,
            k,
            status: PeriodicityStatus::Vacuous,
            q_at_shift: None,
            target_at_shift: None,
        });
    }
    let shifted = mms_report(n + k, k, true)?;
    Ok(PeriodicityReport {
        n,
        k,
        status: if shifted.holds {
            PeriodicityStatus::Holds
        } else {
            PeriodicityStatus::Fails
        },
        q_at_shift: Some(shifted.q),
        target_at_shift: Some(shifted.target),
    })
}
