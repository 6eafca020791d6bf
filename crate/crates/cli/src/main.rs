//! `mixalign`: conformance checking against Workflow nets with Declare
//! constraints.
//!
//! Exit codes: 0 success, 1 fatal error (unreadable or invalid input),
//! 2 per-trace failure or oracle mismatch, 3 oracle limit exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mixalign::bundled;
use mixalign::eventlog::read_log_file;
use mixalign::oracle::{cross_check, Verdict};
use mixalign::report::{build_report, summary_csv};
use mixalign::{
    align, AlignOptions, CheckOptions, CostValue, EventLog, HeuristicKind, MixedModel, Mode, ModelFile, OracleLimits,
    Rational, RationalCostScheme, ReadOptions, TruthStatus,
};

/// Model or log argument naming the bundled running example.
const EXAMPLE: &str = "@example";

#[derive(Parser)]
#[command(name = "mixalign", version, about = "Align event logs against Workflow nets with Declare constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align every trace variant of a log and write report.json and summary.csv.
    Check(CheckArgs),
    /// Check a model file for structural problems.
    Validate {
        /// Model JSON, or @example.
        model: String,
    },
    /// Align one trace and print it as a move table.
    Explain(ExplainArgs),
    /// Compare aligner costs against the exhaustive oracle.
    OracleVerify(VerifyArgs),
}

#[derive(Args)]
struct CostArgs {
    #[arg(long, default_value = "0")]
    sync_cost: String,
    #[arg(long, default_value = "0")]
    tau_cost: String,
    #[arg(long, default_value = "1")]
    model_cost: String,
    #[arg(long, default_value = "1")]
    log_cost: String,
    /// Default constraint violation cost (violations mode).
    #[arg(long, default_value = "1")]
    violation_cost: String,
    /// Per-constraint violation cost, as ID=VALUE. Repeatable.
    #[arg(long = "violation-cost-for", value_name = "ID=VALUE")]
    violation_cost_for: Vec<String>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value = "unmatched")]
    heuristic: HeuristicKind,
    #[arg(long, default_value_t = mixalign::aligner::DEFAULT_MAX_EXPANSIONS)]
    max_expansions: u64,
}

#[derive(Args)]
struct CheckArgs {
    /// Model JSON, or @example.
    model: String,
    /// XES, XES.GZ or CSV log, or @example.
    log: String,
    #[arg(long, default_value = "full")]
    mode: Mode,
    #[command(flatten)]
    costs: CostArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Keep only XES events whose lifecycle:transition is "complete".
    #[arg(long)]
    filter_complete: bool,
    /// Variant-level worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ExplainArgs {
    /// Model JSON, or @example.
    model: String,
    /// Activities of the trace; none for the empty trace.
    events: Vec<String>,
    #[arg(long, default_value = "full")]
    mode: Mode,
    #[command(flatten)]
    costs: CostArgs,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Model JSON, or @example.
    model: String,
    /// XES, XES.GZ or CSV log, or @example.
    log: String,
    /// Mode to verify; all modes when omitted.
    #[arg(long)]
    mode: Option<Mode>,
    #[command(flatten)]
    costs: CostArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    filter_complete: bool,
    /// Oracle bound on explored configurations.
    #[arg(long, default_value_t = OracleLimits::default().max_configurations)]
    max_configurations: usize,
    /// Also enforce the structural bounds: 12 transitions, 8 constraints,
    /// traces of length 10.
    #[arg(long)]
    strict_limits: bool,
}

fn parse_cost(flag: &str, text: &str) -> Result<Rational> {
    Rational::parse_cost(text).ok_or_else(|| anyhow!("--{flag}: '{text}' is not a number"))
}

impl CostArgs {
    fn scheme(&self, mp: &MixedModel) -> Result<RationalCostScheme> {
        let mut costs = RationalCostScheme {
            sync: parse_cost("sync-cost", &self.sync_cost)?,
            tau: parse_cost("tau-cost", &self.tau_cost)?,
            model: parse_cost("model-cost", &self.model_cost)?,
            log: parse_cost("log-cost", &self.log_cost)?,
            default_violation: parse_cost("violation-cost", &self.violation_cost)?,
            ..Default::default()
        };
        for entry in &self.violation_cost_for {
            let (id, value) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("--violation-cost-for: expected ID=VALUE, got '{entry}'"))?;
            let id = id.trim();
            if mp.constraint_index(id).is_none() {
                bail!("--violation-cost-for: unknown constraint '{id}'");
            }
            costs = costs.with_violation(id, parse_cost("violation-cost-for", value)?);
        }
        costs.validate()?;
        Ok(costs)
    }
}

impl SearchArgs {
    fn options(&self) -> AlignOptions {
        AlignOptions {
            heuristic: self.heuristic,
            max_expansions: self.max_expansions,
            ..AlignOptions::default()
        }
    }
}

fn load_model(arg: &str) -> Result<MixedModel> {
    if arg == EXAMPLE {
        return Ok(bundled::running_example());
    }
    let file = ModelFile::load(Path::new(arg)).with_context(|| format!("loading model {arg}"))?;
    file.build().map_err(|e| anyhow!("{} [{}]", e, e.code())).with_context(|| format!("loading model {arg}"))
}

fn load_log(arg: &str, filter_complete: bool) -> Result<EventLog> {
    if arg == EXAMPLE {
        return Ok(bundled::running_example_log());
    }
    let log = read_log_file(Path::new(arg), &ReadOptions { filter_complete }).with_context(|| format!("loading log {arg}"))?;
    for warning in &log.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(log)
}

fn cmd_check(args: &CheckArgs) -> Result<ExitCode> {
    let mp = load_model(&args.model)?;
    let log = load_log(&args.log, args.filter_complete)?;
    let costs = args.costs.scheme(&mp)?;
    let options = CheckOptions {
        mode: args.mode,
        align: args.search.options(),
        threads: args.threads,
        dedup: true,
    };
    let result = mixalign::check_log(&log, &mp, &costs, &options);
    let report = build_report(&result, &mp, &costs, args.search.heuristic);

    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let report_path = args.out.join("report.json");
    std::fs::write(&report_path, report.to_json() + "\n").with_context(|| format!("writing {}", report_path.display()))?;
    let summary_path = args.out.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(&result)).with_context(|| format!("writing {}", summary_path.display()))?;

    println!(
        "{} traces, {} variants, mode {}, aggregate fitness {:.6}",
        result.total_traces,
        result.variants.len(),
        args.mode,
        result.aggregate_fitness.to_f64_lossy()
    );
    for v in &result.variants {
        if let Err(e) = &v.outcome {
            eprintln!("error [{}]: <{}>: {e}", e.code(), v.trace.join(","));
        }
    }
    println!("wrote {} and {}", report_path.display(), summary_path.display());
    Ok(if result.failed_variants > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_validate(model: &str) -> Result<ExitCode> {
    let file = if model == EXAMPLE {
        ModelFile::from_json(bundled::RUNNING_EXAMPLE_MODEL)?
    } else {
        ModelFile::load(Path::new(model)).map_err(|e| anyhow!("{} [{}]", e, e.code()))?
    };
    let net = match file.build_net() {
        Ok(net) => net,
        Err(e) => {
            println!("error [{}]: {e}", e.code());
            return Ok(ExitCode::from(1));
        }
    };
    let report = net.validate();
    let mut errors = 0;
    for d in &report.diagnostics {
        let severity = match d.severity {
            mixalign::petrinet::Severity::Warning => "warning",
            mixalign::petrinet::Severity::Error => {
                errors += 1;
                "error"
            }
        };
        println!("{severity}: {}", d.message);
    }
    for e in file.constraint_errors(&net) {
        errors += 1;
        println!("error [{}]: {e}", e.code());
    }
    let warnings = report.warnings().count();
    println!("{errors} error(s), {warnings} warning(s)");
    Ok(if errors > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

/// Two-row move table; a third row marks moves that violate a constraint.
fn render_table(alignment: &mixalign::RationalAlignment, mp: &MixedModel) -> String {
    const SKIP: &str = "≫";
    let mut log_row = vec!["log".to_string()];
    let mut model_row = vec!["model".to_string()];
    let mut mark_row = vec![String::new()];
    for mv in &alignment.moves {
        log_row.push(mv.event.clone().unwrap_or_else(|| SKIP.to_string()));
        model_row.push(match mv.transition {
            Some(t) => {
                let tr = mp.net.transition(t);
                match &tr.label {
                    Some(l) => format!("{}/{l}", tr.name),
                    None => format!("{}/τ", tr.name),
                }
            }
            None => SKIP.to_string(),
        });
        mark_row.push(if mv.kind.is_violating() { format!("! {}", mv.newly_violated.join(",")) } else { String::new() });
    }
    let widths: Vec<usize> = (0..log_row.len())
        .map(|c| [&log_row[c], &model_row[c], &mark_row[c]].iter().map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let render = |row: &[String]| -> String {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
            .collect();
        cells.join(" | ").trim_end().to_string()
    };
    let mut out = format!("{}\n{}\n", render(&log_row), render(&model_row));
    if mark_row.iter().any(|s| !s.is_empty()) {
        out.push_str(&render(&mark_row));
        out.push('\n');
    }
    out
}

fn cmd_explain(args: &ExplainArgs) -> Result<ExitCode> {
    let mp = load_model(&args.model)?;
    let costs = args.costs.scheme(&mp)?;
    let alignment = match align(&args.events, &mp, args.mode, &costs, &args.search.options()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            return Ok(ExitCode::from(2));
        }
    };
    print!("{}", render_table(&alignment, &mp));
    println!("moves: {}", alignment.moves.len());
    println!("cost: {}", mixalign::format_cost(&alignment.total_cost));
    if !alignment.terminal_violations.is_empty() {
        println!("violated at the end: {}", alignment.terminal_violations.join(", "));
    }
    println!("constraints:");
    for (ca, status) in mp.constraints.iter().zip(mp.statuses(&alignment.final_configuration)) {
        let params: Vec<String> = ca
            .constraint
            .params
            .iter()
            .map(|&t| mp.net.label(t).map(str::to_string).unwrap_or_else(|| mp.net.transition(t).name.clone()))
            .collect();
        let marker = if status == TruthStatus::PermViolation || status == TruthStatus::TempViolation { " !" } else { "" };
        println!("  {} {}({}): {}{marker}", ca.id(), ca.constraint.template.name(), params.join(","), status.as_str());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_verify(args: &VerifyArgs) -> Result<ExitCode> {
    let mp = load_model(&args.model)?;
    let log = load_log(&args.log, args.filter_complete)?;
    let costs = args.costs.scheme(&mp)?;
    let options = args.search.options();
    let mut limits = if args.strict_limits { OracleLimits::strict() } else { OracleLimits::default() };
    limits.max_configurations = args.max_configurations;
    let modes: Vec<Mode> = match args.mode {
        Some(m) => vec![m],
        None => Mode::ALL.to_vec(),
    };
    let (mut mismatches, mut over_limit) = (0usize, 0usize);
    for &mode in &modes {
        for trace in log.variants.keys() {
            let check = cross_check(trace, &mp, mode, &costs, None, &options, &limits);
            let aligner = check.aligner.as_ref().map(mixalign::format_cost).unwrap_or_else(|e| e.code().to_string());
            let oracle = match &check.oracle {
                Ok(c) => mixalign::format_cost(c),
                Err(e) => e.code().to_string(),
            };
            let verdict = match check.verdict {
                Verdict::Match => "PASS",
                Verdict::Mismatch => {
                    mismatches += 1;
                    "FAIL"
                }
                Verdict::LimitExceeded => {
                    over_limit += 1;
                    "LIMIT_EXCEEDED"
                }
            };
            println!("{verdict} {mode} <{}> aligner={aligner} oracle={oracle}", trace.join(","));
        }
    }
    let total = modes.len() * log.variant_count();
    println!("{} checked, {mismatches} mismatched, {over_limit} over limit", total);
    Ok(if mismatches > 0 {
        ExitCode::from(2)
    } else if over_limit > 0 {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Validate { model } => cmd_validate(model),
        Command::Explain(args) => cmd_explain(args),
        Command::OracleVerify(args) => cmd_oracle_verify(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
