use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SweepError;

pub const DEFAULT_SLACK_BITS: f64 = 32.0;

/// Which `k` values are swept for each `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum KRule {
    /// `1 <= k <= n/4`.
    Quarter,
    /// `n/5 < k < n/4`.
    Band,
    /// A fixed list, restricted per `n` to `1 <= k < n`.
    Explicit(Vec<u64>),
}

impl KRule {
    pub fn ks(&self, n: u64) -> Vec<u64> {
        match self {
            KRule::Quarter => (1..=n / 4).collect(),
            KRule::Band => (1..n).filter(|&k| 5 * k > n && 4 * k < n).collect(),
            KRule::Explicit(list) => {
                let mut ks: Vec<u64> = list.iter().copied().filter(|&k| k >= 1 && k < n).collect();
                ks.sort_unstable();
                ks.dedup();
                ks
            }
        }
    }
}

/// Which `a` values are swept. Only the full range is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ARule {
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Every cell by big-integer arithmetic.
    Exact,
    /// Certified filter first, exact only when the filter cannot decide.
    #[default]
    Filtered,
}

fn default_slack() -> f64 {
    DEFAULT_SLACK_BITS
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_min: u64,
    pub n_max: u64,
    pub k_rule: KRule,
    #[serde(default)]
    pub a_rule: ARule,
    #[serde(default)]
    pub mode: SweepMode,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub out_path: PathBuf,
    pub checkpoint_path: PathBuf,
    /// Largest overshoot, in bits, of the crude bound for which partial
    /// summation is attempted before falling back to exact arithmetic.
    #[serde(default = "default_slack")]
    pub filter_slack_bits: f64,
}

/// The fields that determine sweep output. Workers and paths are excluded so
/// a run may be resumed with a different pool size or from a moved file.
#[derive(Serialize)]
struct CanonicalConfig<'a> {
    a_rule: ARule,
    filter_slack_bits: f64,
    k_rule: &'a KRule,
    mode: SweepMode,
    n_max: u64,
    n_min: u64,
    version: u32,
}

impl SweepConfig {
    pub fn new(n_min: u64, n_max: u64, k_rule: KRule, out_path: impl Into<PathBuf>, checkpoint_path: impl Into<PathBuf>) -> Self {
        SweepConfig {
            n_min,
            n_max,
            k_rule,
            a_rule: ARule::All,
            mode: SweepMode::Filtered,
            workers: 1,
            out_path: out_path.into(),
            checkpoint_path: checkpoint_path.into(),
            filter_slack_bits: DEFAULT_SLACK_BITS,
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.n_min < 2 {
            return Err(SweepError::Config("n_min must be at least 2".into()));
        }
        if self.n_max < self.n_min {
            return Err(SweepError::Config("n_max must be >= n_min".into()));
        }
        if self.workers < 1 {
            return Err(SweepError::Config("workers must be at least 1".into()));
        }
        if !(self.filter_slack_bits.is_finite() && self.filter_slack_bits >= 0.0) {
            return Err(SweepError::Config("filter_slack_bits must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Canonical JSON of the result-determining fields (sorted keys, no
    /// whitespace).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&CanonicalConfig {
            a_rule: self.a_rule,
            filter_slack_bits: self.filter_slack_bits,
            k_rule: &self.k_rule,
            mode: self.mode,
            n_max: self.n_max,
            n_min: self.n_min,
            version: super::ledger::CHECKPOINT_VERSION,
        })
        .expect("config serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_rules() {
        assert_eq!(KRule::Quarter.ks(13), vec![1, 2, 3]);
        assert_eq!(KRule::Quarter.ks(3), Vec::<u64>::new());
        assert_eq!(KRule::Band.ks(100), vec![21, 22, 23, 24]);
        assert_eq!(KRule::Explicit(vec![5, 3, 3, 200]).ks(100), vec![3, 5]);
    }

    #[test]
    fn digest_ignores_workers_and_paths() {
        let a = SweepConfig::new(2, 50, KRule::Quarter, "a.jsonl", "a.json");
        let mut b = SweepConfig::new(2, 50, KRule::Quarter, "b.jsonl", "b.json");
        b.workers = 8;
        assert_eq!(a.digest(), b.digest());
        b.n_max = 51;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn canonical_json_is_stable() {
        let c = SweepConfig::new(2, 300, KRule::Quarter, "r.jsonl", "c.json");
        assert_eq!(
            c.canonical_json(),
            r#"{"a_rule":"all","filter_slack_bits":32.0,"k_rule":"quarter","mode":"filtered","n_max":300,"n_min":2,"version":1}"#
        );
        assert_eq!(c.digest().len(), 64);
    }

    #[test]
    fn unknown_keys_rejected() {
        let json = r#"{"n_min":2,"n_max":10,"k_rule":"quarter","out_path":"o","checkpoint_path":"c","bogus":1}"#;
        assert!(serde_json::from_str::<SweepConfig>(json).is_err());
        let json = r#"{"n_min":2,"n_max":10,"k_rule":{"explicit":[2]},"out_path":"o","checkpoint_path":"c"}"#;
        let c: SweepConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.k_rule, KRule::Explicit(vec![2]));
    }

    #[test]
    fn validation() {
        let mut c = SweepConfig::new(1, 10, KRule::Quarter, "o", "c");
        assert!(c.validate().is_err());
        c.n_min = 2;
        assert!(c.validate().is_ok());
        c.workers = 0;
        assert!(c.validate().is_err());
    }
}
