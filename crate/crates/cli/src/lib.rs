//! `qwc`: compile, verify, simulate, export and benchmark.
//!
//! Exit codes: 0 on success, 1 on bad input or usage, 2 when an internal
//! invariant check fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qwalk::compiler::{
    apply_shift_compensation, compile_with, read_schedule, schedule_to_json, verify,
    write_schedule, CompileOptions, CompileResult, Strategy, DEFAULT_TOLERANCE,
};
use qwalk::hardware::{schedule_to_timebins, write_eom_csv, write_eom_csv_file, Calibration};
use qwalk::linalg::unitary_json::{read_unitary, to_string as matrix_json, write_matrix};
use qwalk::meshes::Architecture;
use qwalk::metrics::compare;
use qwalk::noise::{sample_imperfections, NoiseParams, Regime};
use qwalk::selftest::run_selftest;
use qwalk::sweep::{
    csv_string, run_sweep, threads_from_env, write_outputs, Grid, SweepConfig, SweepKind,
};
use qwalk::walk::{build_coin_operator, build_shift_operator, evolve};
use qwalk::{Error, Result};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "qwc", version, about = "Quantum walk unitary compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a unitary (matrix JSON) into a coin schedule.
    Compile(CompileArgs),
    /// Check a schedule against its target.
    Verify(VerifyArgs),
    /// Run a compiled schedule, optionally with one imperfection draw.
    Simulate(SimulateArgs),
    /// Time-bin EOM settings as CSV.
    ExportEom(ExportArgs),
    /// Fidelity and similarity against mean loss.
    SweepLoss(SweepArgs),
    /// Fidelity and similarity against phase noise.
    SweepPhase(SweepArgs),
    /// Built-in invariant suites.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[arg(long)]
    input: PathBuf,
    /// Schedule JSON; printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// odd-even or bruhat.
    #[arg(long, default_value = "odd-even")]
    strategy: String,
    /// Keep identity slots and trailing empty steps.
    #[arg(long)]
    no_reduce: bool,
    /// Write coin, shift and evolution operators into this directory.
    #[arg(long)]
    dump_operators: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Score the realized block against this unitary.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Realized K x K block as matrix JSON; embedded in stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    mean_amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_loss: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_phase: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    dump_operators: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Loop round-trip time.
    #[arg(long)]
    tau: f64,
    /// Time-bin spacing, same unit as tau.
    #[arg(long)]
    delta_tau: f64,
    /// JSON `{"slope": .., "offset": ..}` mapping angle to drive voltage.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the full time-bin program as JSON.
    #[arg(long)]
    program: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// JSON file with SweepConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    unitaries: Option<usize>,
    #[arg(long)]
    patterns: Option<usize>,
    /// Comma-separated subset of qwalk,reck,clements,mgdr.
    #[arg(long, value_delimiter = ',')]
    archs: Option<Vec<String>>,
    /// Mean-loss grid `start:stop:count` (sweep-loss).
    #[arg(long)]
    loss_grid: Option<String>,
    /// Phase standard deviation grid `start:stop:count` in radians (sweep-phase).
    #[arg(long)]
    sigma_grid: Option<String>,
    /// Loss standard deviation (sweep-loss).
    #[arg(long)]
    sigma_loss: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path; a `.meta.json` sidecar is written next to it. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json(text: &str) -> Value {
    serde_json::from_str(text).expect("library JSON is valid")
}

fn print_json(v: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("value serializes")
    );
}

fn dump_operators(dir: &Path, result: &CompileResult) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let lattice = result.schedule.lattice();
    let field = apply_shift_compensation(&result.schedule);
    let steps = result.steps_used as u32;
    write_matrix(
        &dir.join("shift.json"),
        build_shift_operator(&lattice).matrix(),
    )?;
    for n in 1..=steps {
        write_matrix(
            &dir.join(format!("coin_{n:03}.json")),
            build_coin_operator(&field, n, &lattice)?.matrix(),
        )?;
    }
    write_matrix(
        &dir.join("evolution.json"),
        evolve(&field, steps, &lattice)?.matrix(),
    )
}

fn cmd_compile(a: CompileArgs) -> Result<()> {
    let target = read_unitary(&a.input)?;
    let strategy = match a.strategy.as_str() {
        "odd-even" => Strategy::OddEvenSort,
        "bruhat" => Strategy::Bruhat,
        s => {
            return Err(Error::InvalidArgument(format!(
                "unknown strategy {s:?}; use odd-even or bruhat"
            )))
        }
    };
    let options = CompileOptions {
        tolerance: a.tolerance,
        strategy,
        reduce: !a.no_reduce,
    };
    let result = compile_with(&target, &options)?;
    let residual = verify(&result, &target)?;
    let mut summary = json!({
        "dim": result.dim(),
        "steps_used": result.steps_used,
        "programmed_slots": result.schedule.programmed_count(),
        "residual": residual,
    });
    match &a.output {
        Some(path) => {
            write_schedule(path, &result)?;
            summary["output"] = json!(path.display().to_string());
        }
        None => summary["schedule"] = parse_json(&schedule_to_json(&result)),
    }
    if let Some(dir) = &a.dump_operators {
        dump_operators(dir, &result)?;
    }
    print_json(&summary);
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let result = read_schedule(&a.schedule)?;
    let target = read_unitary(&a.target)?;
    let residual = verify(&result, &target)?;
    let ok = residual <= a.tolerance;
    print_json(&json!({ "residual": residual, "tolerance": a.tolerance, "ok": ok }));
    if !ok {
        eprintln!(
            "error: residual {residual:.3e} exceeds tolerance {:.1e}",
            a.tolerance
        );
    }
    Ok(ok)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let result = read_schedule(&a.schedule)?;
    let params = NoiseParams {
        mean_amplitude: a.mean_amplitude,
        sigma_loss: a.sigma_loss,
        sigma_phase: a.sigma_phase,
    };
    let draw = sample_imperfections(&params, Regime::TimeMultiplexed, 1, a.seed)?[0];
    let realized = qwalk::sweep::realize_compiled(&result, &draw)?;
    let mut summary =
        json!({ "dim": result.dim(), "steps_used": result.steps_used, "seed": a.seed });
    if let Some(t) = &a.target {
        let s = compare(&realized, &read_unitary(t)?)?;
        summary["fidelity"] = json!(s.fidelity);
        summary["similarity"] = json!(s.similarity);
    }
    match &a.output {
        Some(path) => {
            write_matrix(path, &realized)?;
            summary["output"] = json!(path.display().to_string());
        }
        None => summary["realized"] = parse_json(&matrix_json(&realized)),
    }
    if let Some(dir) = &a.dump_operators {
        dump_operators(dir, &result)?;
    }
    print_json(&summary);
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let result = read_schedule(&a.schedule)?;
    let program = schedule_to_timebins(&result, a.tau, a.delta_tau)?;
    let calibration = a
        .calibration
        .as_deref()
        .map(Calibration::read)
        .transpose()?;
    if let Some(path) = &a.program {
        write_text(path, &program.to_json())?;
    }
    match &a.output {
        Some(path) => write_eom_csv_file(path, &program, calibration.as_ref()),
        None => write_eom_csv(std::io::stdout().lock(), &program, calibration.as_ref()).map_err(
            |source| Error::Io {
                path: "<stdout>".into(),
                source,
            },
        ),
    }
}

fn sweep_config(a: &SweepArgs, kind: SweepKind) -> Result<SweepConfig> {
    let mut c = match &a.config {
        Some(path) => SweepConfig::from_json(&read_text(path)?).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })?,
        None => SweepConfig::default_for(kind),
    };
    let (grid_flag, other_flag) = match kind {
        SweepKind::Loss => (&a.loss_grid, ("--sigma-grid", &a.sigma_grid)),
        SweepKind::Phase => (&a.sigma_grid, ("--loss-grid", &a.loss_grid)),
    };
    if other_flag.1.is_some() {
        return Err(Error::InvalidArgument(format!(
            "{} does not apply to this sweep",
            other_flag.0
        )));
    }
    if kind == SweepKind::Phase && a.sigma_loss.is_some() {
        return Err(Error::InvalidArgument(
            "--sigma-loss does not apply to sweep-phase".into(),
        ));
    }
    if let Some(g) = grid_flag {
        c.grid = g.parse::<Grid>()?;
    }
    if let Some(archs) = &a.archs {
        c.architectures = archs
            .iter()
            .map(|s| s.parse::<Architecture>())
            .collect::<Result<_>>()?;
    }
    c.dim = a.dim.unwrap_or(c.dim);
    c.n_unitaries = a.unitaries.unwrap_or(c.n_unitaries);
    c.n_patterns = a.patterns.unwrap_or(c.n_patterns);
    c.sigma_loss = a.sigma_loss.unwrap_or(c.sigma_loss);
    c.seed = a.seed.unwrap_or(c.seed);
    if a.out.is_some() {
        c.out = a.out.clone();
    }
    c.validate()?;
    Ok(c)
}

fn cmd_sweep(a: SweepArgs, kind: SweepKind) -> Result<()> {
    let config = sweep_config(&a, kind)?;
    let output = run_sweep(&config, kind, threads_from_env()?)?;
    match &config.out {
        Some(path) => {
            write_outputs(path, &output)?;
            eprintln!(
                "wrote {} records to {}",
                output.records.len(),
                path.display()
            );
        }
        None => print!("{}", csv_string(&output.records)),
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    if e.is_internal() {
        2
    } else {
        1
    }
}

/// Parses `argv` (program name first) and runs one subcommand.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Compile(a) => cmd_compile(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a).map(|_| true),
        Command::ExportEom(a) => cmd_export(a).map(|_| true),
        Command::SweepLoss(a) => cmd_sweep(a, SweepKind::Loss).map(|_| true),
        Command::SweepPhase(a) => cmd_sweep(a, SweepKind::Phase).map(|_| true),
        Command::Selftest { seed } => {
            let report = run_selftest(seed);
            for s in &report.suites {
                println!("{s}");
            }
            return if report.passed() { 0 } else { 2 };
        }
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
