//! stabfin: scenario runner for the exact-algebra verification suites.
//!
//! Exit codes: 0 pass, 1 fail, 2 bounded-inconclusive, 3 usage error.

mod commands;
mod report;
mod scenario;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use report::{Report, Status};
use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "stabfin",
    about = "Exact computational-algebra verification suites: group rings, \
             direct finiteness, wreath products, additive cellular automata, \
             local embeddings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Command parameters as key=value pairs (see the docs for each
    /// command's schema).
    params: Vec<String>,
    /// Seed for sampled modes (deterministic SplitMix64).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Element/pair budget for exhaustive scans.
    #[arg(long, default_value_t = scenario::DEFAULT_BUDGET)]
    budget: u64,
    /// Support window radius for infinite-group searches.
    #[arg(long)]
    window: Option<i64>,
    /// Write the JSON report to this path (also printed to stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    /// Directory of *.scenario files.
    dir: PathBuf,
    /// Write the aggregate JSON report to this path.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive/sampled XY=I ⇒ YX=I scan over a finite matrix ring.
    #[command(name = "df-check")]
    DfCheck(RunArgs),
    /// Windowed one-sided-unit search over an infinite group ring.
    #[command(name = "unit-search")]
    UnitSearch(RunArgs),
    /// Build and verify a structured wreath endomorphism.
    #[command(name = "wreath-verify")]
    WreathVerify(RunArgs),
    /// Hensel-lifted Hopf-witness pipeline on P ≀ Γ.
    #[command(name = "hopf-pipeline")]
    HopfPipeline(RunArgs),
    /// Cellular-automata surjunctivity sweep or decomposition.
    #[command(name = "ca-report")]
    CaReport(RunArgs),
    /// Local embeddings: tower pipeline, evaluation, or regular
    /// representation.
    #[command(name = "localembed")]
    LocalEmbed(RunArgs),
    /// Abelian normal subgroup classification of a finite wreath product.
    #[command(name = "abelian-normal-scan")]
    AbelianNormalScan(RunArgs),
    /// Run every *.scenario file in a directory and aggregate.
    Suite(SuiteArgs),
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Command::DfCheck(a) => run_single("df-check", a),
        Command::UnitSearch(a) => run_single("unit-search", a),
        Command::WreathVerify(a) => run_single("wreath-verify", a),
        Command::HopfPipeline(a) => run_single("hopf-pipeline", a),
        Command::CaReport(a) => run_single("ca-report", a),
        Command::LocalEmbed(a) => run_single("localembed", a),
        Command::AbelianNormalScan(a) => run_single("abelian-normal-scan", a),
        Command::Suite(a) => run_suite(a),
    };
    std::process::exit(code);
}

fn parse_kv(params: &[String]) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for p in params {
        let Some((k, v)) = p.split_once('=') else {
            return Err(format!("expected key=value, got {p:?}"));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn run_single(command: &str, args: RunArgs) -> i32 {
    let params = match parse_kv(&args.params) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("usage error: {msg}");
            return Status::UsageError.exit_code();
        }
    };
    let scenario = Scenario::from_parts(
        command.to_string(),
        command.to_string(),
        params,
        Some(args.seed),
        Some(args.budget),
        args.window,
    );
    let report = execute(&scenario);
    emit(&report, args.json.as_deref());
    report.status.exit_code()
}

/// Runs one scenario; deterministic given (parameters, seed).
fn execute(scenario: &Scenario) -> Report {
    let start = Instant::now();
    let (status, records, witnesses) = match commands::run_command(scenario) {
        Ok(out) => (out.status, out.records, out.witnesses),
        Err(stabfin_core::Error::UsageError(msg)) | Err(stabfin_core::Error::Parse(msg)) => {
            (Status::UsageError, vec![json!({ "error": msg })], vec![])
        }
        Err(e) => (
            Status::UsageError,
            vec![json!({"error": e.to_string()})],
            vec![],
        ),
    };
    Report {
        schema: 1,
        name: scenario.name.clone(),
        command: scenario.command.clone(),
        status,
        parameters: scenario.params.clone(),
        seed: scenario.seed,
        budget: scenario.budget,
        records,
        witnesses,
        timing_ms: start.elapsed().as_millis(),
        expected_status: scenario.expect_status.clone(),
    }
}

fn emit(report: &Report, json_path: Option<&Path>) {
    let value = report.to_json();
    let pretty = serde_json::to_string_pretty(&value).expect("serialize");
    println!("{pretty}");
    if let Some(path) = json_path {
        if let Err(e) = std::fs::write(path, &pretty) {
            eprintln!("cannot write {}: {e}", path.display());
        }
    }
}

/// Runs all scenarios in a directory, in name order; a scenario counts
/// as passing when its status equals its declared expect_status
/// (default: pass).
fn run_suite(args: SuiteArgs) -> i32 {
    let mut entries: Vec<PathBuf> = match std::fs::read_dir(&args.dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "scenario").unwrap_or(false))
            .collect(),
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.dir.display());
            return Status::UsageError.exit_code();
        }
    };
    entries.sort();
    let mut reports = Vec::new();
    let mut pass = 0u32;
    let mut fail = 0u32;
    let mut bounded = 0u32;
    let mut usage = 0u32;
    let mut mismatches = 0u32;
    for path in &entries {
        let report = match Scenario::load(path) {
            Ok(mut s) => {
                // Sort key: scenario name defaults to the file stem.
                s.name = s.name.clone();
                execute(&s)
            }
            Err(stabfin_core::Error::UsageError(msg)) => Report {
                schema: 1,
                name: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_default(),
                command: "?".into(),
                status: Status::UsageError,
                parameters: BTreeMap::new(),
                seed: 0,
                budget: 0,
                records: vec![json!({ "error": msg })],
                witnesses: vec![],
                timing_ms: 0,
                expected_status: None,
            },
            Err(e) => unreachable!("scenario loading only raises usage errors: {e}"),
        };
        match report.status {
            Status::Pass => pass += 1,
            Status::Fail => fail += 1,
            Status::BoundedInconclusive => bounded += 1,
            Status::UsageError => usage += 1,
        }
        let expected = report
            .expected_status
            .clone()
            .unwrap_or_else(|| "pass".to_string());
        if report.status.as_str() != expected {
            mismatches += 1;
        }
        reports.push(report);
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    let aggregate_status = if usage > 0 || mismatches > 0 {
        Status::Fail
    } else {
        Status::Pass
    };
    let aggregate = json!({
        "schema": 1,
        "suite": args.dir.display().to_string(),
        "status": aggregate_status.as_str(),
        "summary": {
            "scenarios": reports.len(),
            "pass": pass,
            "fail": fail,
            "bounded_inconclusive": bounded,
            "usage_error": usage,
            "expectation_mismatches": mismatches,
        },
        "reports": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    let pretty = serde_json::to_string_pretty(&aggregate).expect("serialize");
    println!("{pretty}");
    if let Some(path) = &args.json {
        if let Err(e) = std::fs::write(path, &pretty) {
            eprintln!("cannot write {}: {e}", path.display());
        }
    }
    for r in &reports {
        let expected = r
            .expected_status
            .clone()
            .unwrap_or_else(|| "pass".to_string());
        let marker = if r.status.as_str() == expected {
            "ok"
        } else {
            "MISMATCH"
        };
        eprintln!("{}: {} [{marker}]", r.name, r.status.as_str());
    }
    aggregate_status.exit_code()
}
