//! A fast, deterministic property suite over every module. Each check has a
//! stable name so failures can be reported by invariant.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{binomial, log2_binomial_bounds, BinomialMemo};
use crate::formula::{check_complement_identity, check_mms_identity, p_conjectured, q_conjectured};
use crate::hull::{has_pfm, verify_certificate, Hypergraph};
use crate::smooth::{smoothed_f, smoothed_grad};
use crate::sweep::audit::sample_cells;
use crate::sweep::{audit_filter, DEFAULT_SLACK_BITS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.name).collect()
    }

    /// One line per check; contains no timings so equal seeds give equal logs.
    pub fn log(&self) -> String {
        let mut out = format!("selftest seed={}\n", self.seed);
        for c in &self.checks {
            out.push_str(&format!("{} {}: {}\n", if c.ok { "ok  " } else { "FAIL" }, c.name, c.detail));
        }
        out
    }
}

/// Owns the state the checks run against, so tests can corrupt it first.
pub struct Selftest {
    seed: u64,
    memo: BinomialMemo,
}

impl Selftest {
    pub fn new(seed: u64) -> Self {
        Selftest {
            seed,
            memo: BinomialMemo::new(),
        }
    }

    pub fn memo_mut(&mut self) -> &mut BinomialMemo {
        &mut self.memo
    }

    pub fn run(mut self) -> SelftestReport {
        let seed = self.seed;
        let checks = vec![
            self.memo_pascal(),
            log2_enclosure(seed),
            formula_values(),
            complement_identity(),
            mms_identity(),
            filter_soundness(seed),
            certificates_verify(seed),
            gradient_check(seed),
        ];
        SelftestReport { seed, checks }
    }

    fn memo_pascal(&mut self) -> CheckResult {
        let mut bad = None;
        'outer: for n in 1..=200u64 {
            for k in 1..n {
                let lhs = self.memo.get(n, k);
                if lhs != self.memo.get(n - 1, k) + self.memo.get(n - 1, k - 1) || lhs != binomial(n, k) {
                    bad = Some((n, k));
                    break 'outer;
                }
            }
        }
        check(
            "binomial_pascal",
            bad.is_none(),
            match bad {
                None => "C(n,k) = C(n-1,k) + C(n-1,k-1) for n <= 200".into(),
                Some((n, k)) => format!("mismatch at (n,k) = ({n},{k})"),
            },
        )
    }
}

fn check(name: &'static str, ok: bool, detail: String) -> CheckResult {
    CheckResult { name, ok, detail }
}

fn log2_enclosure(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x10);
    let mut bad = None;
    for _ in 0..500 {
        let n = rng.gen_range(1..=3000u64);
        let k = rng.gen_range(0..=n);
        let exact = crate::exact::interval::log2_biguint(&binomial(n, k));
        let b = log2_binomial_bounds(n, k);
        if !(b.lo() <= exact.hi() && exact.lo() <= b.hi()) {
            bad = Some((n, k));
            break;
        }
    }
    check(
        "log2_binomial_enclosure",
        bad.is_none(),
        match bad {
            None => "500 random (n,k) with n <= 3000".into(),
            Some((n, k)) => format!("enclosure misses exact value at ({n},{k})"),
        },
    )
}

fn formula_values() -> CheckResult {
    let p = p_conjectured(10, 3).map(|p| (p.value, p.args));
    let q = q_conjectured(10, 3).map(|q| q.value);
    let ok = matches!((&p, &q), (Ok((pv, args)), Ok(qv)) if *pv == BigUint::from(85u32) && args == &[3] && *qv == BigUint::from(35u32));
    check("formula_values", ok, "p(10,3) = 85 at a = 3, q(10,3) = 35".into())
}

fn complement_identity() -> CheckResult {
    let mut bad = None;
    'outer: for n in 3..=30 {
        for k in 2..n {
            if !check_complement_identity(n, k).map(|r| r.holds).unwrap_or(false) {
                bad = Some((n, k));
                break 'outer;
            }
        }
    }
    check(
        "complement_identity",
        bad.is_none(),
        match bad {
            None => "p + q = C(n,k) for 2 <= k < n <= 30".into(),
            Some((n, k)) => format!("fails at ({n},{k})"),
        },
    )
}

fn mms_identity() -> CheckResult {
    let mut bad = None;
    'outer: for n in 4..=60 {
        for k in 1..=n / 4 {
            if !check_mms_identity(n, k).map(|r| r.holds).unwrap_or(false) {
                bad = Some((n, k));
                break 'outer;
            }
        }
    }
    check(
        "mms_identity",
        bad.is_none(),
        match bad {
            None => "q(n,k) = C(n-1,k-1) for n <= 60, k <= n/4".into(),
            Some((n, k)) => format!("fails at ({n},{k})"),
        },
    )
}

fn filter_soundness(seed: u64) -> CheckResult {
    let cells = sample_cells(2000, 4, 600, seed ^ 0x20);
    let r = audit_filter(&cells, DEFAULT_SLACK_BITS);
    check(
        "filter_soundness",
        r.disagreements.is_empty(),
        format!(
            "{} cells, {} disagreements, {} decided by the filter",
            r.cells,
            r.disagreements.len(),
            r.filter_certified
        ),
    )
}

fn certificates_verify(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x30);
    let mut failures = 0;
    let mut pfm = 0;
    let mut checked = 0;
    for _ in 0..30 {
        let n = rng.gen_range(4..=8u64);
        let k = rng.gen_range(2..n - 1);
        let edges: Vec<u64> = crate::hull::ksubsets(n, k).filter(|_| rng.gen_bool(0.4)).collect();
        // Empty instances are rejected by the oracle by design.
        if edges.is_empty() {
            continue;
        }
        let Ok(h) = Hypergraph::new(n, k, edges) else {
            failures += 1;
            continue;
        };
        checked += 1;
        match has_pfm(&h) {
            Ok(cert) => {
                if matches!(cert, crate::hull::Certificate::Pfm(_)) {
                    pfm += 1;
                }
                if !verify_certificate(&h, &cert) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    check(
        "lp_certificates",
        failures == 0,
        format!("{checked} random instances, {pfm} feasible, {failures} failures"),
    )
}

fn gradient_check(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x40);
    let (n, k, a) = (8u64, 2u64, 4usize);
    let sigma = 0.1;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let mut g = vec![0.0; n as usize - 1];
        let raw: Vec<f64> = (0..a).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (x, r) in g.iter_mut().zip(&raw) {
            *x = r / s;
        }
        let grad = smoothed_grad(&g, sigma, n, k, a as u64).expect("valid point");
        let central = |j: usize, h: f64| {
            let mut plus = g.clone();
            let mut minus = g.clone();
            plus[j] += h;
            plus[a - 1] -= h;
            minus[j] -= h;
            minus[a - 1] += h;
            (smoothed_f(&plus, sigma, n, k).unwrap() - smoothed_f(&minus, sigma, n, k).unwrap()) / (2.0 * h)
        };
        for (j, gj) in grad.iter().enumerate() {
            let fd = (4.0 * central(j, 5e-5) - central(j, 1e-4)) / 3.0;
            worst = worst.max((fd - gj).abs() / gj.abs().max(1e-3));
        }
    }
    check(
        "smoothed_gradient",
        worst < 1e-6,
        format!("10 interior points, worst relative error {worst:.1e}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_run_passes_and_is_deterministic() {
        let a = Selftest::new(3).run();
        assert!(a.ok(), "{}", a.log());
        let b = Selftest::new(3).run();
        assert_eq!(a.log(), b.log());
    }

    #[test]
    fn corrupted_memo_is_named() {
        let mut t = Selftest::new(3);
        t.memo_mut().insert_unchecked(50, 20, binomial(50, 20) + 1u32);
        let r = t.run();
        assert_eq!(r.failed(), vec!["binomial_pascal"]);
        assert!(r.log().contains("FAIL binomial_pascal"));
    }
}
