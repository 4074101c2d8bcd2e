//! Finite verification of `sum_{i > ka/n} C(a,i) C(n-a,k-i) <= C(n-1,k)`
//! over `k <= n/4` and all `a`, sharded by `n` with a resumable ledger.

pub mod audit;
pub mod cell;
pub mod config;
pub mod ledger;
pub mod run;

use thiserror::Error;

pub use audit::{audit_filter, AuditReport};
pub use cell::{verify_cell, verify_cell_filtered, CellChecker, CellPath, CellVerdict, FilteredVerdict};
pub use config::{ARule, KRule, SweepConfig, SweepMode, DEFAULT_SLACK_BITS};
pub use ledger::{read_records, Checkpoint, SweepRecord};
pub use run::{reset, run_shard, run_sweep, ShardResult, SweepControl, SweepSummary};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid cell (n={n}, k={k}, a={a})")]
    InvalidCell { n: u64, k: u64, a: u64 },
    #[error("ln-factorial table covers n <= {max}, asked for n = {n}")]
    TableTooSmall { n: u64, max: u64 },
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("checkpoint digest {found} does not match configuration digest {expected}")]
    DigestMismatch { expected: String, found: String },
    #[error("corrupt sweep state: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
