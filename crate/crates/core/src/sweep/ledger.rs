//! Persistent sweep state: JSONL records and the resumable checkpoint.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SweepError;

pub const CHECKPOINT_VERSION: u32 = 1;

/// One line of the sweep ledger: the outcome for all `a` at a fixed `(n, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: u64,
    pub k: u64,
    pub worst_a: u64,
    pub ok: bool,
    pub margin_log2: Option<f64>,
    pub equality_as: Vec<u64>,
    pub exact_fallbacks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub version: u32,
    pub config_digest: String,
    pub completed_n: Vec<u64>,
    pub violations: Vec<(u64, u64, u64)>,
}

impl Checkpoint {
    pub fn new(config_digest: String) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_digest,
            completed_n: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Option<Self>, SweepError> {
        match fs::read_to_string(path) {
            Ok(s) => {
                let cp: Checkpoint = serde_json::from_str(&s).map_err(|e| SweepError::Corrupt(format!("{}: {e}", path.display())))?;
                if cp.version != CHECKPOINT_VERSION {
                    return Err(SweepError::Corrupt(format!("unsupported checkpoint version {}", cp.version)));
                }
                Ok(Some(cp))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(SweepError::Io(e)),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), SweepError> {
        let body = serde_json::to_string(self).expect("checkpoint serializes");
        write_atomic(path, body.as_bytes())
    }

    pub fn mark_complete(&mut self, n: u64, violations: &[(u64, u64, u64)]) {
        if let Err(pos) = self.completed_n.binary_search(&n) {
            self.completed_n.insert(pos, n);
        }
        self.violations.extend_from_slice(violations);
        self.violations.sort_unstable();
        self.violations.dedup();
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Write to a sibling temp file, sync, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), SweepError> {
    let tmp = temp_path(path);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn record_line(r: &SweepRecord) -> String {
    serde_json::to_string(r).expect("record serializes")
}

/// Reads a JSONL ledger; a missing file is an empty ledger. A truncated
/// final line (from an interrupted append) is dropped.
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>, SweepError> {
    let f = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(SweepError::Io(e)),
    };
    let lines: Vec<String> = BufReader::new(f).lines().collect::<Result<_, _>>()?;
    let last = lines.len().saturating_sub(1);
    let mut out = Vec::with_capacity(lines.len());
    for (idx, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if idx == last => {}
            Err(e) => return Err(SweepError::Corrupt(format!("{}:{}: {e}", path.display(), idx + 1))),
        }
    }
    Ok(out)
}

/// Sorts by `(n, k)`, keeps one record per key, and keeps only completed `n`.
pub fn canonicalize(records: Vec<SweepRecord>, completed: &BTreeSet<u64>) -> Vec<SweepRecord> {
    let mut by_key = BTreeMap::new();
    for r in records {
        if completed.contains(&r.n) {
            by_key.insert((r.n, r.k), r);
        }
    }
    by_key.into_values().collect()
}

pub fn write_records_atomic(path: &Path, records: &[SweepRecord]) -> Result<(), SweepError> {
    let mut body = String::new();
    for r in records {
        body.push_str(&record_line(r));
        body.push('\n');
    }
    write_atomic(path, body.as_bytes())
}

/// Append-only handle used by the single writer during a sweep.
pub struct RecordAppender {
    out: BufWriter<File>,
}

impl RecordAppender {
    pub fn open(path: &Path) -> Result<Self, SweepError> {
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordAppender { out: BufWriter::new(f) })
    }

    pub fn append(&mut self, records: &[SweepRecord]) -> Result<(), SweepError> {
        for r in records {
            self.out.write_all(record_line(r).as_bytes())?;
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        self.out.get_ref().sync_data()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u64, k: u64) -> SweepRecord {
        SweepRecord {
            n,
            k,
            worst_a: 1,
            ok: true,
            margin_log2: Some(0.5),
            equality_as: vec![n - 1],
            exact_fallbacks: 1,
        }
    }

    #[test]
    fn record_json_shape() {
        let mut r = rec(13, 3);
        r.margin_log2 = None;
        assert_eq!(
            record_line(&r),
            r#"{"n":13,"k":3,"worst_a":1,"ok":true,"margin_log2":null,"equality_as":[12],"exact_fallbacks":1}"#
        );
    }

    #[test]
    fn checkpoint_roundtrip_and_shape() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        assert!(Checkpoint::load(&path).unwrap().is_none());
        let mut cp = Checkpoint::new("ab".into());
        cp.mark_complete(5, &[]);
        cp.mark_complete(3, &[(3, 1, 2)]);
        cp.mark_complete(5, &[]);
        cp.save(&path).unwrap();
        let s = fs::read_to_string(&path).unwrap();
        assert_eq!(
            s,
            r#"{"version":1,"config_digest":"ab","completed_n":[3,5],"violations":[[3,1,2]]}"#
        );
        assert_eq!(Checkpoint::load(&path).unwrap().unwrap(), cp);
    }

    #[test]
    fn truncated_tail_dropped_and_canonicalized() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        let body = format!(
            "{}\n{}\n{}\n{{\"n\":9,\"k",
            record_line(&rec(8, 2)),
            record_line(&rec(5, 1)),
            record_line(&rec(8, 1))
        );
        fs::write(&path, body).unwrap();
        let recs = read_records(&path).unwrap();
        assert_eq!(recs.len(), 3);
        let completed: BTreeSet<u64> = [8].into_iter().collect();
        let canon = canonicalize(recs, &completed);
        assert_eq!(canon.iter().map(|r| (r.n, r.k)).collect::<Vec<_>>(), vec![(8, 1), (8, 2)]);
    }
}
