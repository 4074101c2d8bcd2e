use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::exact::LnFactTable;

use super::cell::{CellChecker, CellPath};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub cells: u64,
    pub disagreements: Vec<(u64, u64, u64)>,
    /// Cells the filter certified without exact arithmetic.
    pub filter_certified: u64,
    pub exact_fallbacks: u64,
}

/// Random cells with `4 <= n_min <= n <= n_max`, `1 <= k <= n/4`, `1 <= a < n`.
pub fn sample_cells(samples: usize, n_min: u64, n_max: u64, seed: u64) -> Vec<(u64, u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = n_min.max(4);
    (0..samples)
        .map(|_| {
            let n = rng.gen_range(lo..=n_max);
            let k = rng.gen_range(1..=n / 4);
            let a = rng.gen_range(1..n);
            (n, k, a)
        })
        .collect()
}

/// Re-verifies every sampled cell exactly and compares with the filtered
/// verdict. Any cell the filter certified must also pass exactly.
pub fn audit_filter(cells: &[(u64, u64, u64)], slack_bits: f64) -> AuditReport {
    let n_max = cells.iter().map(|c| c.0).max().unwrap_or(2);
    let table = Arc::new(LnFactTable::new(n_max));
    let results: Vec<(bool, CellPath)> = cells
        .par_iter()
        .map_init(
            || CellChecker::with_table(Arc::clone(&table), slack_bits),
            |checker, &(n, k, a)| {
                let filtered = checker.verify_filtered(n, k, a).expect("sampled cell is valid");
                let exact = checker.exact_verdict(n, k, a);
                (filtered.ok == exact.ok, filtered.path)
            },
        )
        .collect();
    let mut report = AuditReport {
        cells: cells.len() as u64,
        disagreements: Vec::new(),
        filter_certified: 0,
        exact_fallbacks: 0,
    };
    for (cell, (agree, path)) in cells.iter().zip(results) {
        if !agree {
            report.disagreements.push(*cell);
        }
        if path == CellPath::Exact {
            report.exact_fallbacks += 1;
        } else {
            report.filter_certified += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_audit_agrees() {
        let cells = sample_cells(500, 4, 200, 11);
        let r = audit_filter(&cells, 32.0);
        assert!(r.disagreements.is_empty());
        assert_eq!(r.cells, 500);
        assert!(r.filter_certified > 0);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_cells(20, 4, 100, 3), sample_cells(20, 4, 100, 3));
    }
}
