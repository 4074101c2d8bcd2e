use std::collections::BTreeSet;
use std::fs;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;

use serde::Serialize;

use crate::exact::LnFactTable;

use super::cell::{CellChecker, CellPath, FilteredVerdict, MarginBound};
use super::config::{SweepConfig, SweepMode};
use super::ledger::{canonicalize, read_records, write_records_atomic, Checkpoint, RecordAppender, SweepRecord};
use super::SweepError;

/// Everything computed for one `n` (all `k` in scope, all `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShardResult {
    pub n: u64,
    pub records: Vec<SweepRecord>,
    pub violations: Vec<(u64, u64, u64)>,
    pub cells: u64,
    pub crude: u64,
    pub refined: u64,
    pub exact: u64,
}

fn record_for(
    n: u64,
    k: u64,
    verdicts: impl Iterator<Item = (u64, FilteredVerdict)>,
    mode: SweepMode,
    shard: &mut ShardResult,
) -> SweepRecord {
    let mut ok = true;
    let mut equality_as = Vec::new();
    let mut worst_log2: Option<(f64, u64)> = None;
    let mut worst_ratio: Option<(f64, u64)> = None;
    let mut fallbacks = 0;
    for (a, v) in verdicts {
        shard.cells += 1;
        match v.path {
            CellPath::Crude => shard.crude += 1,
            CellPath::Refined => shard.refined += 1,
            CellPath::Exact => {
                shard.exact += 1;
                if mode == SweepMode::Filtered {
                    fallbacks += 1;
                }
            }
        }
        if !v.ok {
            ok = false;
            shard.violations.push((n, k, a));
        }
        if v.equality {
            equality_as.push(a);
        }
        match v.bound {
            MarginBound::None => {}
            MarginBound::Log2(m) => {
                if worst_log2.is_none_or(|(w, _)| m < w) {
                    worst_log2 = Some((m, a));
                }
            }
            MarginBound::RatioHi(r) => {
                if worst_ratio.is_none_or(|(w, _)| r > w) {
                    worst_ratio = Some((r, a));
                }
            }
        }
    }
    let from_ratio = worst_ratio.map(|(r, a)| (MarginBound::RatioHi(r).log2_lower().expect("ratio bound"), a));
    let worst = match (worst_log2, from_ratio) {
        (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
        (x, y) => x.or(y),
    };
    let worst_a = match worst {
        Some((_, a)) => a,
        None => equality_as.last().copied().unwrap_or(0),
    };
    SweepRecord {
        n,
        k,
        worst_a,
        ok,
        margin_log2: worst.map(|(m, _)| m),
        equality_as,
        exact_fallbacks: fallbacks,
    }
}

/// Verifies every `(k, a)` for one `n`.
pub fn run_shard(n: u64, ks: &[u64], mode: SweepMode, checker: &mut CellChecker) -> ShardResult {
    let mut shard = ShardResult {
        n,
        records: Vec::with_capacity(ks.len()),
        violations: Vec::new(),
        cells: 0,
        crude: 0,
        refined: 0,
        exact: 0,
    };
    for &k in ks {
        let verdicts: Vec<(u64, FilteredVerdict)> = match mode {
            SweepMode::Exact => (1..n).map(|a| (a, checker.exact_verdict(n, k, a))).collect(),
            SweepMode::Filtered => {
                let ln_rhs = checker.ln_rhs(n, k);
                (1..n).map(|a| (a, checker.verify_filtered_unchecked(n, k, a, ln_rhs))).collect()
            }
        };
        let rec = record_for(n, k, verdicts.into_iter(), mode, &mut shard);
        shard.records.push(rec);
    }
    // Rows are not reused across n; keep memory flat.
    *checker.memo() = Default::default();
    shard
}

/// External control over a running sweep.
#[derive(Debug, Clone, Default)]
pub struct SweepControl {
    /// Continue from an existing checkpoint with a matching digest.
    pub resume: bool,
    /// Stop (resumably) after this many shards complete in this invocation.
    pub stop_after_shards: Option<usize>,
    /// Cooperative cancellation flag.
    pub cancel: Option<Arc<AtomicBool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub cells: u64,
    pub violations: Vec<(u64, u64, u64)>,
    pub records_written: u64,
    pub crude: u64,
    pub refined: u64,
    pub exact: u64,
    pub completed_n: usize,
    pub interrupted: bool,
}

pub fn run_sweep(config: &SweepConfig, control: &SweepControl) -> Result<SweepSummary, SweepError> {
    config.validate()?;
    let digest = config.digest();

    let mut checkpoint = match (control.resume, Checkpoint::load(&config.checkpoint_path)?) {
        (true, Some(cp)) => {
            if cp.config_digest != digest {
                return Err(SweepError::DigestMismatch {
                    expected: digest,
                    found: cp.config_digest,
                });
            }
            cp
        }
        _ => Checkpoint::new(digest),
    };

    // Drop partial shards left by an interruption, then append from there.
    let completed: BTreeSet<u64> = checkpoint.completed_n.iter().copied().collect();
    let kept = if checkpoint.completed_n.is_empty() {
        Vec::new()
    } else {
        canonicalize(read_records(&config.out_path)?, &completed)
    };
    write_records_atomic(&config.out_path, &kept)?;
    checkpoint.save(&config.checkpoint_path)?;

    let pending: Vec<u64> = (config.n_min..=config.n_max).filter(|n| !completed.contains(n)).collect();
    let table = Arc::new(LnFactTable::new(config.n_max));
    let next = AtomicUsize::new(0);
    let stop = Arc::new(AtomicBool::new(false));
    let cancel = control.cancel.clone().unwrap_or_else(|| Arc::new(AtomicBool::new(false)));
    let workers = config.workers.min(pending.len().max(1));

    let mut summary = SweepSummary {
        cells: 0,
        violations: Vec::new(),
        records_written: 0,
        crude: 0,
        refined: 0,
        exact: 0,
        completed_n: checkpoint.completed_n.len(),
        interrupted: false,
    };
    let mut write_error: Option<SweepError> = None;

    thread::scope(|scope| {
        let (tx, rx) = mpsc::sync_channel::<ShardResult>(workers * 2);
        for _ in 0..workers {
            let tx = tx.clone();
            let mut checker = CellChecker::with_table(Arc::clone(&table), config.filter_slack_bits);
            let (next, stop, cancel, pending) = (&next, &stop, &cancel, &pending);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) || cancel.load(Ordering::SeqCst) {
                    break;
                }
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(&n) = pending.get(idx) else { break };
                let shard = run_shard(n, &config.k_rule.ks(n), config.mode, &mut checker);
                if tx.send(shard).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut appender = match RecordAppender::open(&config.out_path) {
            Ok(a) => Some(a),
            Err(e) => {
                write_error = Some(e);
                stop.store(true, Ordering::SeqCst);
                None
            }
        };
        let mut done_here = 0usize;
        for shard in rx {
            let Some(app) = appender.as_mut() else { continue };
            let step = app.append(&shard.records).and_then(|_| {
                checkpoint.mark_complete(shard.n, &shard.violations);
                checkpoint.save(&config.checkpoint_path)
            });
            if let Err(e) = step {
                write_error = Some(e);
                stop.store(true, Ordering::SeqCst);
                appender = None;
                continue;
            }
            summary.cells += shard.cells;
            summary.crude += shard.crude;
            summary.refined += shard.refined;
            summary.exact += shard.exact;
            done_here += 1;
            if control.stop_after_shards.is_some_and(|limit| done_here >= limit) {
                stop.store(true, Ordering::SeqCst);
            }
        }
    });

    if let Some(e) = write_error {
        return Err(e);
    }
    summary.violations = checkpoint.violations.clone();
    summary.completed_n = checkpoint.completed_n.len();
    let all_done = pending.iter().all(|n| checkpoint.completed_n.binary_search(n).is_ok());
    if !all_done {
        summary.interrupted = true;
        return Ok(summary);
    }
    let completed: BTreeSet<u64> = checkpoint.completed_n.iter().copied().collect();
    let records = canonicalize(read_records(&config.out_path)?, &completed);
    write_records_atomic(&config.out_path, &records)?;
    summary.records_written = records.len() as u64;
    Ok(summary)
}

/// Removes the ledger and checkpoint of a previous run.
pub fn reset(config: &SweepConfig) -> Result<(), SweepError> {
    for p in [&config.out_path, &config.checkpoint_path] {
        match fs::remove_file(p) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::config::KRule;

    #[test]
    fn small_exact_shard() {
        let mut c = CellChecker::new(13, 32.0);
        let shard = run_shard(13, &[1, 2, 3], SweepMode::Exact, &mut c);
        assert_eq!(shard.records.len(), 3);
        assert!(shard.violations.is_empty());
        for r in &shard.records {
            assert!(r.ok);
            assert!(r.equality_as.contains(&12));
            assert_eq!(r.exact_fallbacks, 0);
        }
        assert_eq!(shard.cells, 36);
    }

    #[test]
    fn shard_out_of_scope_reports_violation() {
        let mut c = CellChecker::new(10, 32.0);
        let shard = run_shard(10, &[3], SweepMode::Filtered, &mut c);
        assert_eq!(shard.violations, vec![(10, 3, 3)]);
        let r = &shard.records[0];
        assert!(!r.ok);
        assert_eq!(r.worst_a, 3);
        assert!(r.margin_log2.unwrap() < 0.0);
    }

    #[test]
    fn tiny_sweep_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SweepConfig::new(2, 40, KRule::Quarter, dir.path().join("r.jsonl"), dir.path().join("c.json"));
        let s = run_sweep(&cfg, &SweepControl::default()).unwrap();
        assert!(!s.interrupted);
        assert!(s.violations.is_empty());
        let recs = read_records(&cfg.out_path).unwrap();
        assert_eq!(recs.len() as u64, s.records_written);
        assert_eq!(recs.len(), (2..=40u64).map(|n| (n / 4) as usize).sum::<usize>());
    }

    #[test]
    fn digest_mismatch_refuses_resume() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SweepConfig::new(2, 20, KRule::Quarter, dir.path().join("r.jsonl"), dir.path().join("c.json"));
        run_sweep(&cfg, &SweepControl::default()).unwrap();
        cfg.n_max = 21;
        let ctl = SweepControl {
            resume: true,
            ..Default::default()
        };
        assert!(matches!(run_sweep(&cfg, &ctl), Err(SweepError::DigestMismatch { .. })));
    }
}
