//! `evsched`: validate, compile, export, solve and compare scheduling
//! instances.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input, 3 a solve limit
//! was hit, 4 a verification failed.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use evsched_core::harness::{
    check_suite, equivalence_suite, measure_growth, plan_horizons, run_rolling, synthetic_month, EquivalenceReport,
    GrowthGrid, MonthPlan,
};
use evsched_core::instance::warnings;
use evsched_core::solver::verify;
use evsched_core::{
    compile, count, export_lp, export_mps, load, solve, CompileOptions, Compiled, Formulation, Instance, Limits,
    LoadError, WindowMode,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "evsched",
    version,
    about = "Event-point scheduling models with sequence-dependent changeovers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance file and list every violated invariant.
    Validate {
        instance: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Compile an instance and print constraint and variable counts.
    Build {
        #[command(flatten)]
        model: ModelArgs,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the compiled model as MPS or LP text.
    Export {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = ExportFormat::Mps)]
        format: ExportFormat,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print the schedule and its verification.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        limits: LimitArgs,
        /// Also write the solution (schedule and variable values) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve instances under both formulations and compare objectives.
    ///
    /// Without instance files a generated suite of 50 small instances
    /// starting at `--seed` is used.
    Compare {
        instances: Vec<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
        /// First seed of the generated suite.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Count changeover rows of both formulations over a size grid.
    Sweep {
        /// `N1,N2,..xT1,T2,..`: event-point counts crossed with tasks per unit.
        #[arg(long, default_value = "4,8,16x3,8")]
        grid: GrowthGrid,
        /// Seed of the generated instances.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Plan 12 h horizons for a period and solve them in order.
    ///
    /// Without a plan file the built-in four-horizon example is used.
    Rolling {
        plan: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormulationArg::Compact)]
        formulation: FormulationArg,
        #[arg(long, value_enum, default_value_t = WindowsArg::None)]
        windows: WindowsArg,
        #[command(flatten)]
        limits: LimitArgs,
        /// Also write the result as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = FormulationArg::Compact)]
    formulation: FormulationArg,
    /// `assign` needs `legacy`, `explicit` needs `compact`.
    #[arg(long, value_enum, default_value_t = WindowsArg::None)]
    windows: WindowsArg,
}

#[derive(Args, Debug)]
struct LimitArgs {
    /// Branch-and-bound nodes per solve.
    #[arg(long, default_value_t = Limits::default().max_nodes)]
    max_nodes: usize,
    /// Wall-clock seconds per solve.
    #[arg(long, default_value_t = Limits::default().max_seconds)]
    max_seconds: f64,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_nodes: self.max_nodes,
            max_seconds: self.max_seconds,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormulationArg {
    Legacy,
    Compact,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum WindowsArg {
    None,
    Assign,
    Explicit,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ExportFormat {
    Mps,
    Lp,
}

fn options(f: FormulationArg, w: WindowsArg) -> CompileOptions {
    let formulation = match f {
        FormulationArg::Legacy => Formulation::Legacy,
        FormulationArg::Compact => Formulation::Compact,
    };
    let windows = match w {
        WindowsArg::None => WindowMode::None,
        WindowsArg::Assign => WindowMode::Assign,
        WindowsArg::Explicit => WindowMode::Explicit,
    };
    CompileOptions::new(formulation, windows)
}

/// An error with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::new(EXIT_USAGE, e)
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Failure::new(EXIT_USAGE, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(|e| Failure::new(EXIT_USAGE, e))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    load(&read(path)?)
        .map_err(|e| Failure::new(EXIT_INVALID, anyhow::Error::new(e).context(path.display().to_string())))
}

fn build_model(args: &ModelArgs) -> Result<(Instance, Compiled), Failure> {
    let inst = load_instance(&args.instance)?;
    let compiled = compile(&inst, options(args.formulation, args.windows))?;
    Ok((inst, compiled))
}

/// Writes to standard output; a closed pipe ends the output quietly.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn cmd_validate(path: &Path, as_json: bool) -> Outcome {
    let text = read(path)?;
    let (violations, notes) = match load(&text) {
        Ok(inst) => (Vec::new(), warnings(&inst)),
        Err(LoadError::Invalid(v)) => (v, Vec::new()),
        Err(e @ LoadError::Parse { .. }) => {
            if as_json {
                print_json(&json!({ "valid": false, "parse_error": e.to_string(), "violations": [] }))?;
            } else {
                eprintln!("{}: {e}", path.display());
            }
            return Ok(EXIT_INVALID);
        }
    };
    let valid = violations.is_empty();
    if as_json {
        print_json(&json!({ "valid": valid, "violations": violations, "warnings": notes }))?;
    } else if valid {
        let mut text = format!("{}: valid\n", path.display());
        for w in &notes {
            writeln!(text, "warning: {w}")?;
        }
        emit(&text)?;
    } else {
        eprintln!("{}: {} violation(s)", path.display(), violations.len());
        for v in &violations {
            eprintln!("  {v}");
        }
    }
    Ok(if valid { 0 } else { EXIT_INVALID })
}

fn cmd_build(args: &ModelArgs, as_json: bool) -> Outcome {
    let (_, c) = build_model(args)?;
    let report = count(&c.model);
    let changeover = report.groups_with_prefix(c.changeover_prefix());
    let x = report.var_group("x");
    if as_json {
        print_json(&json!({
            "formulation": c.options.formulation,
            "windows": c.options.windows,
            "changeover_constraints": changeover,
            "x_variables": x,
            "counts": report,
        }))?;
    } else {
        emit(&format!(
            "{} formulation, windows {}\n{report}\nchangeover constraints: {changeover}\nx variables: {x}\n",
            c.options.formulation, c.options.windows
        ))?;
    }
    Ok(0)
}

fn cmd_export(args: &ModelArgs, format: ExportFormat, out: Option<&Path>) -> Outcome {
    let (_, c) = build_model(args)?;
    let text = match format {
        ExportFormat::Mps => export_mps(&c.model)?,
        ExportFormat::Lp => export_lp(&c.model)?,
    };
    match out {
        Some(path) => write(path, &text)?,
        None => emit(&text)?,
    }
    Ok(0)
}

fn cmd_solve(args: &ModelArgs, limits: &LimitArgs, out: Option<&Path>, as_json: bool) -> Outcome {
    let (inst, c) = build_model(args)?;
    let r = solve(&c.model, limits.limits()).map_err(|e| Failure::new(EXIT_VERIFY, e))?;
    let schedule = if r.has_assignment() {
        Some(verify(&inst, &c, &r.assignment).map_err(|e| Failure::new(EXIT_VERIFY, e))?)
    } else {
        None
    };
    let values: serde_json::Map<String, serde_json::Value> = if r.has_assignment() {
        c.model
            .variables()
            .iter()
            .zip(&r.assignment)
            .map(|(v, x)| (v.name.clone(), json!(x)))
            .collect()
    } else {
        Default::default()
    };
    let report = json!({
        "status": r.status,
        "objective_vector": r.objective_vector,
        "stats": r.stats,
        "schedule": schedule,
    });
    if as_json {
        print_json(&report)?;
    } else {
        let obj: Vec<String> = r.objective_vector.iter().map(|v| format!("{v:.6}")).collect();
        let mut text = format!("status {}  objective [{}]\n", r.status, obj.join(", "));
        writeln!(
            text,
            "nodes {}  lp iterations {}  {:.3}s",
            r.stats.nodes, r.stats.lp_iterations, r.stats.wall_seconds
        )?;
        if let Some(s) = &schedule {
            writeln!(text, "{s}")?;
        }
        emit(&text)?;
    }
    if let Some(path) = out {
        let mut full = report.clone();
        full["values"] = serde_json::Value::Object(values);
        write(path, &serde_json::to_string_pretty(&full)?)?;
    }
    if schedule.as_ref().is_some_and(|s| !s.verification.passed()) {
        eprintln!("verification failed");
        return Ok(EXIT_VERIFY);
    }
    if r.status.is_limit() {
        eprintln!("stopped at a {} before proving optimality", r.status);
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

fn compare_code(report: &EquivalenceReport) -> u8 {
    let unverified = report
        .records
        .iter()
        .any(|r| r.legacy.verified == Some(false) || r.compact.verified == Some(false));
    if report.mismatched() > 0 || unverified {
        EXIT_VERIFY
    } else if report.inconclusive() > 0 {
        EXIT_LIMIT
    } else {
        0
    }
}

fn cmd_compare(paths: &[PathBuf], limits: &LimitArgs, seed: u64, out: Option<&Path>, as_json: bool) -> Outcome {
    let suite: Vec<(String, Instance)> = if paths.is_empty() {
        equivalence_suite(seed, 50)
    } else {
        paths
            .iter()
            .map(|p| Ok((p.display().to_string(), load_instance(p)?)))
            .collect::<Result<_, Failure>>()?
    };
    let report = check_suite(&suite, limits.limits()).map_err(|e| Failure::new(EXIT_VERIFY, e))?;
    if as_json {
        print_json(&report)?;
    } else {
        emit(&report.to_string())?;
    }
    if let Some(path) = out {
        write(path, &report.to_csv())?;
    }
    let code = compare_code(&report);
    if code != 0 {
        eprintln!(
            "{} mismatch, {} inconclusive of {}",
            report.mismatched(),
            report.inconclusive(),
            report.records.len()
        );
    }
    Ok(code)
}

fn cmd_sweep(grid: &GrowthGrid, seed: u64, out: Option<&Path>, as_json: bool) -> Outcome {
    let grid = GrowthGrid { seed, ..grid.clone() };
    let report = measure_growth(&grid).map_err(|e| Failure::new(EXIT_INVALID, e))?;
    if as_json {
        print_json(&report)?;
    } else {
        emit(&report.to_string())?;
    }
    if let Some(path) = out {
        write(path, &report.to_csv())?;
    }
    if !report.all_closed_forms_ok() {
        eprintln!("compiled counts differ from the closed forms");
        return Ok(EXIT_VERIFY);
    }
    Ok(0)
}

fn cmd_rolling(
    path: Option<&Path>,
    opts: CompileOptions,
    limits: &LimitArgs,
    out: Option<&Path>,
    as_json: bool,
) -> Outcome {
    let month: MonthPlan = match path {
        Some(p) => {
            let text = read(p)?;
            serde_json::from_str(&text)
                .with_context(|| format!("{}: not a plan document", p.display()))
                .map_err(|e| Failure::new(EXIT_INVALID, e))?
        }
        None => synthetic_month(),
    };
    let plan = plan_horizons(&month).map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let result = run_rolling(&plan, opts, limits.limits()).map_err(|e| {
        let code = match e {
            evsched_core::harness::HarnessError::Compile(_) => EXIT_USAGE,
            _ => EXIT_VERIFY,
        };
        Failure::new(code, e)
    })?;
    let both = json!({ "plan": plan, "result": result });
    if as_json {
        print_json(&both)?;
    } else {
        emit(&format!("{plan}{result}"))?;
    }
    if let Some(path) = out {
        write(path, &serde_json::to_string_pretty(&both)?)?;
    }
    if !result.complete {
        eprintln!("a horizon stopped at a solve limit");
        return Ok(EXIT_LIMIT);
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Validate { instance, json } => cmd_validate(instance, *json),
        Command::Build { model, json } => cmd_build(model, *json),
        Command::Export { model, format, out } => cmd_export(model, *format, out.as_deref()),
        Command::Solve {
            model,
            limits,
            out,
            json,
        } => cmd_solve(model, limits, out.as_deref(), *json),
        Command::Compare {
            instances,
            limits,
            seed,
            out,
            json,
        } => cmd_compare(instances, limits, *seed, out.as_deref(), *json),
        Command::Sweep { grid, seed, out, json } => cmd_sweep(grid, *seed, out.as_deref(), *json),
        Command::Rolling {
            plan,
            formulation,
            windows,
            limits,
            out,
            json,
        } => cmd_rolling(
            plan.as_deref(),
            options(*formulation, *windows),
            limits,
            out.as_deref(),
            *json,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
