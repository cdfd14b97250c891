//! `rfactor`: run the verification suites and write JSON reports.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rfactor_core::verify::suite::{catalog_names, preflight};
use rfactor_core::{run_suite, Mutation, Rat, Report, Status, Suite, SuiteConfig};

#[derive(Parser, Debug)]
#[command(name = "rfactor", version, about = "Exact verification of factorized R-operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// sl(2) structure, defining equations, orderings, spectrum.
    Sl2(Common),
    /// sl(3) structure, Lax factorization, defining equations.
    Sl3(Common),
    /// Closed forms against the intertwiner linear-solve oracle.
    Oracle(OracleArgs),
    /// Yang-Baxter checks.
    Ybe(Common),
    /// Every suite with its defaults, in one report.
    Report(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Height cap; each suite has its own default.
    #[arg(long)]
    cap: Option<u32>,
    /// Sampled parameter points per check.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit comma-separated rationals, e.g. 1/2,-3,4/7.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Option<Vec<Rat>>,
    /// Restrict to named checks (repeatable or comma-separated).
    #[arg(long = "check", value_delimiter = ',')]
    checks: Vec<String>,
    /// Perturb one eigenvalue: r1:K, r2:K (sl2) or r3:b:K (sl3).
    #[arg(long)]
    mutate: Option<Mutation>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// List the checks of the suite and exit.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algebra {
    Sl2,
    Sl3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleOp {
    R1,
    R2,
    R3,
    #[value(name = "r3-reduced")]
    R3Reduced,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    algebra: Option<Algebra>,
    #[arg(long)]
    op: Option<OracleOp>,
    #[command(flatten)]
    common: Common,
}

fn config(suite: Suite, c: &Common) -> SuiteConfig {
    let mut cfg = SuiteConfig::new(suite);
    if let Some(cap) = c.cap {
        cfg.cap = cap;
    }
    cfg.trials = c.trials;
    cfg.seed = c.seed;
    cfg.params = c.params.clone();
    cfg.checks = c.checks.clone();
    cfg.mutation = c.mutate;
    cfg.jobs = c.jobs;
    cfg
}

/// Check names selected by `--algebra` / `--op`.
fn oracle_checks(alg: Option<Algebra>, op: Option<OracleOp>) -> Result<Vec<String>, String> {
    let algs: &[&str] = match alg {
        Some(Algebra::Sl2) => &["sl2"],
        Some(Algebra::Sl3) => &["sl3"],
        None => &["sl2", "sl3"],
    };
    let ops: &[&str] = match op {
        Some(OracleOp::R1) => &["r1"],
        Some(OracleOp::R2) => &["r2"],
        Some(OracleOp::R3) => &["r3"],
        Some(OracleOp::R3Reduced) => &["r3-reduced"],
        None => &["r1", "r2", "r3", "r3-reduced"],
    };
    let known: Vec<&str> = catalog_names(Suite::Oracle).into_iter().map(|(n, _)| n).collect();
    let out: Vec<String> = algs
        .iter()
        .flat_map(|a| ops.iter().map(move |o| format!("oracle-{a}-{o}")))
        .filter(|n| known.contains(&n.as_str()))
        .collect();
    if out.is_empty() {
        return Err("no oracle check matches the given --algebra/--op".into());
    }
    Ok(out)
}

fn summary_line(c: &rfactor_core::CheckResult) -> String {
    let status = match c.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    };
    let params: Vec<String> = c.params.iter().map(Rat::to_string).collect();
    let mut line = format!(
        "{status} {} ({}) cap={} window={}",
        c.name,
        params.join(","),
        c.cap,
        c.window
    );
    if let Some(w) = &c.witness {
        line.push_str(&format!(" witness: {} -> {}", w.monomial, w.image));
    }
    if let Some(r) = &c.reason {
        line.push_str(&format!(" reason: {r}"));
    }
    line
}

fn run(cli: Cli) -> Result<Report, String> {
    let (suites, common): (Vec<SuiteConfig>, Common) = match cli.command {
        Command::Sl2(c) => (vec![config(Suite::Sl2, &c)], c),
        Command::Sl3(c) => (vec![config(Suite::Sl3, &c)], c),
        Command::Ybe(c) => (vec![config(Suite::Ybe, &c)], c),
        Command::Oracle(o) => {
            let mut cfg = config(Suite::Oracle, &o.common);
            if cfg.checks.is_empty() && (o.algebra.is_some() || o.op.is_some()) {
                cfg.checks = oracle_checks(o.algebra, o.op)?;
            }
            (vec![cfg], o.common)
        }
        Command::Report(c) => {
            if c.params.is_some() || !c.checks.is_empty() {
                return Err("report runs the default catalogs; --params and --check are not accepted".into());
            }
            (Suite::ALL.iter().map(|s| config(*s, &c)).collect(), c)
        }
    };
    if common.list {
        let mut out = std::io::stdout().lock();
        for cfg in &suites {
            for (name, default) in catalog_names(cfg.suite) {
                let extra = if default { "" } else { " (extra)" };
                if writeln!(out, "{} {name}{extra}", cfg.suite.name()).is_err() {
                    break;
                }
            }
        }
        std::process::exit(0);
    }
    let mut reports = Vec::new();
    for cfg in &suites {
        preflight(cfg).map_err(|e| format!("cap {} for {}: {e}", cfg.cap, cfg.suite.name()))?;
        reports.push(run_suite(cfg).map_err(|e| e.to_string())?);
    }
    let report = if reports.len() == 1 {
        reports.pop().expect("one report")
    } else {
        Report::merge("all", common.seed, reports)
    };
    let json = report.to_json();
    match &common.out {
        Some(path) => std::fs::write(path, json).map_err(|e| format!("writing {}: {e}", path.display()))?,
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| format!("writing report: {e}"))?,
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            let mut err = std::io::stderr().lock();
            for c in &report.checks {
                let _ = writeln!(err, "{}", summary_line(c));
            }
            let count = |s| report.checks.iter().filter(|c| c.status == s).count();
            let _ = writeln!(
                err,
                "{} checks: {} passed, {} failed, {} skipped; {} sampled points rejected by guards",
                report.checks.len(),
                count(Status::Pass),
                count(Status::Fail),
                count(Status::Skipped),
                report.rejections.len()
            );
            if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("rfactor: {msg}");
            ExitCode::from(2)
        }
    }
}
