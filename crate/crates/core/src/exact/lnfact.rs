//! Enclosures of `ln(m!)`.
//!
//! Small arguments use the exact factorial; larger ones use the Stirling
//! series truncated after the `m^-3` term, whose remainder lies in
//! `(0, 1/(1260 m^5))`.

use super::interval::{half_ln_two_pi, DirectedBound};

const EXACT_LIMIT: u64 = 20;

pub fn ln_factorial(m: u64) -> DirectedBound {
    if m <= 1 {
        return DirectedBound::point(0.0);
    }
    if m <= EXACT_LIMIT {
        let f: u64 = (2..=m).product();
        return DirectedBound::from_u64(f).ln();
    }
    let x = DirectedBound::from_u64(m);
    let ln_x = x.ln();
    let main = (x + 0.5) * ln_x - x + half_ln_two_pi();
    let x3 = x * x * x;
    let series = DirectedBound::point(1.0) / (x * 12.0) - DirectedBound::point(1.0) / (x3 * 360.0);
    let remainder_hi = (DirectedBound::point(1.0) / (x3 * x * x * 1260.0)).hi();
    let lo = main + series;
    DirectedBound::new(lo.lo(), (lo + DirectedBound::new(0.0, remainder_hi)).hi())
}

/// `ln(m!)` enclosures for `0 <= m <= max`, computed independently per entry.
#[derive(Debug, Clone)]
pub struct LnFactTable {
    entries: Vec<DirectedBound>,
    logs: Vec<DirectedBound>,
}

impl LnFactTable {
    pub fn new(max: u64) -> Self {
        LnFactTable {
            entries: (0..=max).map(ln_factorial).collect(),
            logs: (0..=max.max(1))
                .map(|m| {
                    if m == 0 {
                        DirectedBound::point(f64::NEG_INFINITY)
                    } else {
                        DirectedBound::from_u64(m).ln()
                    }
                })
                .collect(),
        }
    }

    pub fn max(&self) -> u64 {
        self.entries.len() as u64 - 1
    }

    #[inline]
    pub fn get(&self, m: u64) -> DirectedBound {
        self.entries[m as usize]
    }

    /// `ln m` for `1 <= m <= max`.
    #[inline]
    pub fn ln(&self, m: u64) -> DirectedBound {
        debug_assert!(m >= 1);
        self.logs[m as usize]
    }

    /// `ln C(n, k)`; `None` when `k > n`.
    #[inline]
    pub fn ln_binomial(&self, n: u64, k: u64) -> Option<DirectedBound> {
        if k > n {
            return None;
        }
        if k == 0 || k == n {
            return Some(DirectedBound::point(0.0));
        }
        Some(self.get(n) - self.get(k) - self.get(n - k))
    }
}
