use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fracmatch_core::bounds;
use fracmatch_core::exact::binomial;
use fracmatch_core::formula::{p_ak_form, p_conjectured, q_conjectured, FormulaError};
use fracmatch_core::hull::{brute_force_p, brute_force_q, has_pfm_capped, Hypergraph, DEFAULT_EDGE_CAP};
use fracmatch_core::selftest::Selftest;
use fracmatch_core::smooth::{anneal_all_supports, anneal_optimize, SmoothConfig};
use fracmatch_core::sweep::{run_sweep, KRule, SweepConfig, SweepControl, SweepError, SweepMode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;
pub const EXIT_INTERRUPTED: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "fracmatch", version, about = "Exact checks for fractional matching extremal bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate p(n,k) and q(n,k) exactly.
    Eval(EvalArgs),
    /// Verify the tail inequality over a range of n.
    Sweep(SweepArgs),
    /// Decide perfect fractional matching for an instance, or brute-force p and q.
    Oracle(OracleArgs),
    /// Maximize the smoothed count over the simplex.
    Optimize(OptimizeArgs),
    /// Audit the constants of the large-n argument.
    Bounds(BoundsArgs),
    /// Run the fast property suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KRuleArg {
    Quarter,
    Band,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Filtered,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep configuration; flags below are ignored when given.
    #[arg(long, conflicts_with_all = ["n_min", "n_max", "k_rule", "k", "mode", "out", "checkpoint"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    n_min: u64,
    #[arg(long, required_unless_present = "config")]
    n_max: Option<u64>,
    #[arg(long, value_enum, default_value = "quarter")]
    k_rule: KRuleArg,
    /// Explicit k values; overrides --k-rule.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value = "filtered")]
    mode: ModeArg,
    #[arg(long, env = "FRACMATCH_JOBS", default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "sweep.jsonl")]
    out: PathBuf,
    #[arg(long, default_value = "sweep.checkpoint.json")]
    checkpoint: PathBuf,
    #[arg(long)]
    resume: bool,
    /// Stop after this many completed n in this invocation.
    #[arg(long)]
    stop_after: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Edge-list file: a header line "n k" and one edge per line.
    #[arg(long, conflicts_with = "brute_force")]
    file: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EDGE_CAP)]
    edge_cap: usize,
    /// Compute p(n,k) and q(n,k) by enumeration (n <= 8).
    #[arg(long, requires_all = ["n", "k"])]
    brute_force: bool,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    k: u64,
    /// Width of the support; without it every width is tried.
    #[arg(long)]
    a: Option<u64>,
    /// JSON optimizer configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "FRACMATCH_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Print the full report (the default).
    #[arg(long)]
    report: bool,
    #[arg(long)]
    json: bool,
    /// Exit with 2 when any line item fails as printed.
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<FormulaError> for Failure {
    fn from(e: FormulaError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Config(_) | SweepError::DigestMismatch { .. } | SweepError::InvalidCell { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

pub fn dispatch(cli: Cli) -> u8 {
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
        Command::Optimize(a) => optimize(a),
        Command::Bounds(a) => bounds_cmd(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Internal(e.to_string()))?;
    println!("{s}");
    Ok(())
}

#[derive(Serialize)]
struct EvalOutput {
    n: u64,
    k: u64,
    p: String,
    p_argmax: Vec<u64>,
    p_ak_form: String,
    q: String,
    q_argmin: Vec<u64>,
    binomial: String,
    complement_holds: bool,
}

fn eval(args: EvalArgs) -> Result<u8, Failure> {
    let (n, k) = (args.n, args.k);
    let p = p_conjectured(n, k)?;
    let q = q_conjectured(n, k)?;
    let ak = p_ak_form(n, k)?;
    let total = binomial(n, k);
    let out = EvalOutput {
        n,
        k,
        complement_holds: &p.value + &q.value == total,
        p: p.value.to_string(),
        p_argmax: p.args,
        p_ak_form: ak.to_string(),
        q: q.value.to_string(),
        q_argmin: q.args,
        binomial: total.to_string(),
    };
    if args.json {
        print_json(&out)?;
    } else {
        println!("n={n} k={k}");
        println!("p={} argmax a={:?}", out.p, out.p_argmax);
        println!("p (s-indexed form)={}", out.p_ak_form);
        println!("q={} argmin a={:?}", out.q, out.q_argmin);
        println!("C(n,k)={} p+q=C(n,k): {}", out.binomial, out.complement_holds);
    }
    Ok(EXIT_OK)
}

fn sweep_config(args: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SweepConfig>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => {
            let k_rule = match (&args.k, args.k_rule) {
                (Some(ks), _) => KRule::Explicit(ks.clone()),
                (None, KRuleArg::Quarter) => KRule::Quarter,
                (None, KRuleArg::Band) => KRule::Band,
            };
            let mut c = SweepConfig::new(
                args.n_min,
                args.n_max.expect("required by clap"),
                k_rule,
                &args.out,
                &args.checkpoint,
            );
            c.mode = match args.mode {
                ModeArg::Exact => SweepMode::Exact,
                ModeArg::Filtered => SweepMode::Filtered,
            };
            c
        }
    };
    config.workers = args.jobs;
    config.validate()?;
    Ok(config)
}

fn sweep(args: SweepArgs) -> Result<u8, Failure> {
    let config = sweep_config(&args)?;
    let cancel = Arc::new(AtomicBool::new(false));
    {
        let cancel = Arc::clone(&cancel);
        // A second handler cannot be installed in the same process; ignore that case.
        let _ = ctrlc::set_handler(move || cancel.store(true, Ordering::SeqCst));
    }
    let control = SweepControl {
        resume: args.resume,
        stop_after_shards: args.stop_after,
        cancel: Some(cancel),
    };
    let summary = run_sweep(&config, &control)?;
    eprintln!(
        "cells={} crude={} refined={} exact={} completed_n={} violations={}{}",
        summary.cells,
        summary.crude,
        summary.refined,
        summary.exact,
        summary.completed_n,
        summary.violations.len(),
        if summary.interrupted {
            " (interrupted; rerun with --resume)"
        } else {
            ""
        }
    );
    for (n, k, a) in &summary.violations {
        println!("violation n={n} k={k} a={a}");
    }
    Ok(if !summary.violations.is_empty() {
        EXIT_VIOLATION
    } else if summary.interrupted {
        EXIT_INTERRUPTED
    } else {
        EXIT_OK
    })
}

#[derive(Serialize)]
struct BruteOutput {
    n: u64,
    k: u64,
    p: u64,
    q: u64,
    p_conjectured: String,
    q_conjectured: String,
    agrees: bool,
}

fn oracle(args: OracleArgs) -> Result<u8, Failure> {
    if args.brute_force {
        let (n, k) = (args.n.expect("required by clap"), args.k.expect("required by clap"));
        let hull_err = |e: fracmatch_core::hull::HullError| Failure::Usage(e.to_string());
        let p = brute_force_p(n, k).map_err(hull_err)?;
        let q = brute_force_q(n, k).map_err(hull_err)?;
        let pc = p_conjectured(n, k)?.value;
        let qc = q_conjectured(n, k)?.value;
        let agrees = pc == p.value.into() && qc == q.value.into();
        print_json(&BruteOutput {
            n,
            k,
            p: p.value,
            q: q.value,
            p_conjectured: pc.to_string(),
            q_conjectured: qc.to_string(),
            agrees,
        })?;
        return Ok(if agrees { EXIT_OK } else { EXIT_VIOLATION });
    }
    let Some(path) = args.file else {
        return Err(Failure::Usage("oracle needs --file or --brute-force".into()));
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let h = Hypergraph::parse(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let cert = has_pfm_capped(&h, args.edge_cap).map_err(|e| Failure::Usage(e.to_string()))?;
    if !fracmatch_core::hull::verify_certificate(&h, &cert) {
        return Err(Failure::Internal("certificate failed verification".into()));
    }
    print_json(&cert)?;
    Ok(EXIT_OK)
}

fn optimize(args: OptimizeArgs) -> Result<u8, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SmoothConfig>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => SmoothConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let run = || {
        match args.a {
            Some(a) => anneal_optimize(args.n, args.k, a, &config),
            None => anneal_all_supports(args.n, args.k, &config),
        }
        .map_err(|e| Failure::Usage(e.to_string()))
    };
    let result = match args.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Failure::Internal(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    print_json(&result)?;
    Ok(EXIT_OK)
}

fn bounds_cmd(args: BoundsArgs) -> Result<u8, Failure> {
    let report = bounds::report();
    // The table is printed whether or not --report is given.
    let _ = args.report;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{report}");
    }
    let failures = report.failures();
    if args.strict && !failures.is_empty() {
        eprintln!(
            "{} line items fail as printed: {}",
            failures.len(),
            failures.iter().map(|f| f.name).collect::<Vec<_>>().join(", ")
        );
        return Ok(EXIT_VIOLATION);
    }
    Ok(EXIT_OK)
}

fn selftest(args: SelftestArgs) -> Result<u8, Failure> {
    let report = Selftest::new(args.seed).run();
    print!("{}", report.log());
    Ok(if report.ok() { EXIT_OK } else { EXIT_VIOLATION })
}
