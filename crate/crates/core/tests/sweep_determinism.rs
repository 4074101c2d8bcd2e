use std::fs;

use fracmatch_core::sweep::{run_sweep, KRule, SweepConfig, SweepControl};

fn config(dir: &std::path::Path, tag: &str, workers: usize) -> SweepConfig {
    let mut c = SweepConfig::new(
        2,
        90,
        KRule::Quarter,
        dir.join(format!("{tag}.jsonl")),
        dir.join(format!("{tag}.ckpt")),
    );
    c.workers = workers;
    c
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let one = config(dir.path(), "one", 1);
    let four = config(dir.path(), "four", 4);
    let s1 = run_sweep(&one, &SweepControl::default()).unwrap();
    let s4 = run_sweep(&four, &SweepControl::default()).unwrap();
    assert!(s1.violations.is_empty() && !s1.interrupted);
    assert_eq!(s1.cells, s4.cells);
    assert_eq!(fs::read(&one.out_path).unwrap(), fs::read(&four.out_path).unwrap());
    assert_eq!(one.digest(), four.digest());
}

#[test]
fn interrupted_then_resumed_matches() {
    let dir = tempfile::tempdir().unwrap();
    let full = config(dir.path(), "full", 2);
    run_sweep(&full, &SweepControl::default()).unwrap();

    let part = config(dir.path(), "part", 3);
    let stop = SweepControl {
        stop_after_shards: Some(17),
        ..Default::default()
    };
    let s = run_sweep(&part, &stop).unwrap();
    assert!(s.interrupted);
    // A second interruption on top of the first.
    let s = run_sweep(&part, &SweepControl { resume: true, ..stop }).unwrap();
    assert!(s.interrupted);
    let s = run_sweep(
        &part,
        &SweepControl {
            resume: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!s.interrupted);
    assert_eq!(fs::read(&full.out_path).unwrap(), fs::read(&part.out_path).unwrap());
}

#[test]
fn resume_rejects_changed_config() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "x", 1);
    run_sweep(
        &c,
        &SweepControl {
            stop_after_shards: Some(3),
            ..Default::default()
        },
    )
    .unwrap();
    let mut other = c.clone();
    other.n_max = 91;
    assert!(run_sweep(
        &other,
        &SweepControl {
            resume: true,
            ..Default::default()
        }
    )
    .is_err());
}
