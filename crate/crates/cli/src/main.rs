//! `fsmsolc`: validate, compile, simulate and analyse FSM contracts.
//!
//! Exit codes: 0 success, 1 tooling/input error, 2 modelled rejection or
//! counterexample found, 64 bad usage.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fsmsolc_core::diag::{has_errors, Diagnostic};
use fsmsolc_core::dsl::parse_contract;
use fsmsolc_core::emit::{emit_solidity, structural_check, EmitOptions};
use fsmsolc_core::expr::Address;
use fsmsolc_core::gas::{check_calibration, estimate, GasCalibration, DEFAULT_TOLERANCE};
use fsmsolc_core::interp::{
    parse_schedule, run_schedule, search_reentrancy, InterpError, Invocation, Outcome, SearchBounds, Trace,
};
use fsmsolc_core::validate::validate;
use fsmsolc_core::weave::{apply_plugins, AugmentedContract, PluginSet};
use fsmsolc_core::Contract;

const SCHEMA_VERSION: u32 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "fsmsolc", version, about = "Compile finite-state-machine contracts to Solidity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a contract for errors and warnings.
    Validate {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Generate Solidity source.
    Emit {
        input: PathBuf,
        /// Comma-separated plugins: locking, counter, timed, access.
        #[arg(long, default_value = "")]
        plugins: PluginSet,
        /// Output file; standard output if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "^0.4.17")]
        pragma: String,
    },
    /// Run a schedule of calls against the contract.
    Simulate {
        input: PathBuf,
        #[arg(long, default_value = "")]
        plugins: PluginSet,
        /// JSON array of invocation records.
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Deployment time in seconds.
        #[arg(long, default_value_t = 0)]
        creation_time: u64,
        /// Deploying account; defaults to the sender of the first call.
        #[arg(long)]
        creator: Option<String>,
    },
    /// Search for a reentrancy exploit.
    Search {
        input: PathBuf,
        #[arg(long, default_value = "")]
        plugins: PluginSet,
        /// Frames per call tree (1 to 3).
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Calls made before the attacked call.
        #[arg(long, default_value_t = 4)]
        prefix: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Estimate plugin gas overheads from calibration data.
    GasReport {
        input: PathBuf,
        #[arg(long, default_value = "")]
        plugins: PluginSet,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Calibration file; overrides FSMSOLC_CALIBRATION.
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Additivity tolerance in gas.
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: u64,
    },
}

/// A failure that ends the command with exit code 1.
struct Failure(String);

impl From<InterpError> for Failure {
    fn from(e: InterpError) -> Self {
        Failure(format!("error[{}]: {e}", e.code()))
    }
}

fn diagnostics_text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(format!("error: cannot read {}: {e}", path.display())))
}

fn load_contract(path: &Path) -> Result<Contract, Failure> {
    let src = read(path)?;
    parse_contract(&src).map_err(|d| Failure(diagnostics_text(&d).trim_end().to_string()))
}

fn load_woven(path: &Path, plugins: PluginSet) -> Result<AugmentedContract, Failure> {
    let contract = load_contract(path)?;
    apply_plugins(&contract, plugins).map_err(|d| Failure(diagnostics_text(&d).trim_end().to_string()))
}

fn print_json(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Validate { input, format } => cmd_validate(&input, format),
        Command::Emit { input, plugins, output, pragma } => cmd_emit(&input, plugins, output.as_deref(), pragma),
        Command::Simulate { input, plugins, schedule, format, creation_time, creator } => {
            cmd_simulate(&input, plugins, &schedule, format, creation_time, creator)
        }
        Command::Search { input, plugins, depth, prefix, format } => cmd_search(&input, plugins, depth, prefix, format),
        Command::GasReport { input, plugins, format, calibration, tolerance } => {
            cmd_gas(&input, plugins, format, calibration, tolerance)
        }
    }
}

fn cmd_validate(input: &Path, format: Format) -> Result<u8, Failure> {
    let src = read(input)?;
    let diags = match parse_contract(&src) {
        Ok(c) => validate(&c),
        Err(d) => d,
    };
    match format {
        Format::Text => eprint!("{}", diagnostics_text(&diags)),
        Format::Json => print_json(serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "diagnostics": diags,
        })),
    }
    Ok(if has_errors(&diags) { 1 } else { 0 })
}

fn cmd_emit(input: &Path, plugins: PluginSet, output: Option<&Path>, pragma: String) -> Result<u8, Failure> {
    if pragma.trim().is_empty() {
        return Err(Failure("error: --pragma must not be empty".into()));
    }
    let aug = load_woven(input, plugins)?;
    let sol = emit_solidity(&aug, &EmitOptions { pragma_version: pragma, ..EmitOptions::default() })
        .map_err(|d| Failure(diagnostics_text(&d).trim_end().to_string()))?;
    let problems = structural_check(&sol, &aug);
    if !problems.is_empty() {
        return Err(Failure(diagnostics_text(&problems).trim_end().to_string()));
    }
    match output {
        Some(path) => {
            std::fs::write(path, sol).map_err(|e| Failure(format!("error: cannot write {}: {e}", path.display())))?
        }
        None => print!("{sol}"),
    }
    Ok(0)
}

fn describe_call(inv: &Invocation) -> String {
    let mut s = format!("{} from {} at {}", inv.transition, inv.env.sender, inv.env.now);
    if !inv.env.value.is_zero() {
        let _ = write!(s, " value {}", inv.env.value);
    }
    if !inv.args.is_empty() {
        let _ = write!(s, " args {}", serde_json::to_string(&inv.args).unwrap_or_default());
    }
    if let Some(n) = inv.counter_arg {
        let _ = write!(s, " #{n}");
    }
    s
}

fn trace_text(trace: &Trace) -> String {
    let mut out = String::new();
    for e in &trace.entries {
        let indent = "  ".repeat(e.depth.saturating_sub(1));
        let outcome = match &e.outcome {
            Outcome::Accepted { new_state, outputs, auto_fired } => {
                let mut s = format!("accepted, state {new_state}");
                if !auto_fired.is_empty() {
                    let _ = write!(s, ", auto-fired {}", auto_fired.join(", "));
                }
                for (k, v) in outputs {
                    let _ = write!(s, ", {k} = {}", v.to_json());
                }
                s
            }
            Outcome::Rejected(code) => format!("rejected {code}"),
        };
        let _ = writeln!(out, "{indent}{}: {outcome}", describe_call(&e.invocation));
    }
    let f = &trace.final_state;
    let _ = writeln!(out, "final state {}, balance {}, counter {}", f.current_state, f.balance, f.counter);
    out
}

fn cmd_simulate(
    input: &Path,
    plugins: PluginSet,
    schedule: &Path,
    format: Format,
    creation_time: u64,
    creator: Option<String>,
) -> Result<u8, Failure> {
    let aug = load_woven(input, plugins)?;
    let calls = parse_schedule(&read(schedule)?)?;
    let creator =
        creator.map(Address::new).or_else(|| calls.first().map(|c| c.env.sender.clone())).unwrap_or_else(Address::zero);
    let trace = run_schedule(&aug, creation_time, &creator, &calls)?;
    match format {
        Format::Text => print!("{}", trace_text(&trace)),
        Format::Json => print_json(serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "trace": trace.to_json(),
        })),
    }
    Ok(if trace.all_accepted() { 0 } else { 2 })
}

fn cmd_search(input: &Path, plugins: PluginSet, depth: usize, prefix: usize, format: Format) -> Result<u8, Failure> {
    let aug = load_woven(input, plugins)?;
    let bounds = SearchBounds { depth_limit: depth, prefix_len: prefix, ..SearchBounds::default() };
    let found = search_reentrancy(&aug, &bounds)?;
    match (format, &found) {
        (Format::Text, None) => println!("no finding (depth {depth}, prefix {prefix})"),
        (Format::Text, Some(w)) => {
            println!("reentrancy counterexample (depth {depth}, prefix {prefix})");
            println!("with reentry:");
            print!("{}", trace_text(&w.trace));
            println!("without reentry:");
            print!("{}", trace_text(&w.baseline));
        }
        (Format::Json, _) => print_json(serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "depth": depth,
            "prefix": prefix,
            "counterexample": found.as_ref().map(|w| serde_json::json!({
                "schedule": w.schedule,
                "trace": w.trace.to_json(),
                "baseline": w.baseline.to_json(),
            })),
        })),
    }
    Ok(if found.is_some() { 2 } else { 0 })
}

fn load_calibration(explicit: Option<PathBuf>) -> Result<GasCalibration, Failure> {
    let path = explicit.or_else(|| std::env::var_os("FSMSOLC_CALIBRATION").map(PathBuf::from));
    match path {
        None => Ok(GasCalibration::embedded()),
        Some(p) => GasCalibration::from_json(&read(&p)?)
            .map_err(|e| Failure(format!("error[{}]: {}: {e}", e.code(), p.display()))),
    }
}

fn cmd_gas(
    input: &Path,
    plugins: PluginSet,
    format: Format,
    calibration: Option<PathBuf>,
    tolerance: u64,
) -> Result<u8, Failure> {
    let aug = load_woven(input, plugins)?;
    let cal = load_calibration(calibration)?;
    let est = estimate(&cal, cal.baseline(), plugins).map_err(|e| Failure(format!("error[{}]: {e}", e.code())))?;
    let report = check_calibration(&cal, tolerance);
    let names: Vec<&str> = aug.base().transitions.iter().map(|t| t.name.as_str()).collect();
    match format {
        Format::Json => print_json(serde_json::json!({
            "schemaVersion": SCHEMA_VERSION,
            "estimate": est,
            "uncalibratedTransitions": names.iter().filter(|n| !cal.baseline().contains_key(**n)).collect::<Vec<_>>(),
            "calibrationCheck": report,
        })),
        Format::Text => {
            let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max("transition".len());
            println!("plugins: {}", est.plugins);
            println!("{:<width$}  {:>9}  {:>9}  {:>8}", "transition", "baseline", "estimate", "overhead");
            for n in &names {
                match (cal.baseline().get(*n), est.per_transition.get(*n)) {
                    (Some(b), Some(e)) => println!(
                        "{n:<width$}  {b:>9}  {e:>9}  {:>7.1}%",
                        est.overhead_percent.get(*n).copied().unwrap_or(0.0)
                    ),
                    _ => println!("{n:<width$}  {:>9}  {:>9}  {:>8}", "-", "-", "-"),
                }
            }
            println!("deployment: {}", est.deployment);
            println!("calibration checks (tolerance {}):", report.tolerance);
            for c in &report.checks {
                println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            println!("  deployment residual (informational): {}", report.deployment_residual);
        }
    }
    Ok(0)
}
