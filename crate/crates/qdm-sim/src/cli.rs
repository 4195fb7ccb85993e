//! Command-line front end: config file in, CSV and JSON artifacts out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::analytic::{analytic_trajectory, AnalyticError};
use crate::basis::BasisLabel;
use crate::config::{load_config, ConfigError, LoadedConfig, RunSolver, SimulationSettings};
use crate::entangle::{
    concurrence_run, dft_spectrum, write_lambda_csv, write_spectrum_csv, EntangleError,
};
use crate::numeric::{integrate, write_csv, IntegratorSpec, NumericError, Solver, Trajectory};
use crate::rabi::{build_rabi_system, export_terms_json, RabiSystem};

#[derive(Parser)]
#[command(
    name = "qdm-sim",
    version,
    about = "Coupled quantum-dot cavity dynamics: compile, integrate, post-process"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial state and write the trajectory
    Simulate(SimulateArgs),
    /// Dump the compiled equation system as JSON
    EmitEquations(CommonArgs),
    /// Track the combined concurrence of the photon shells over time
    Concurrence(ConcurrenceArgs),
    /// Fourier transform one amplitude column of a run
    Spectrum(SpectrumArgs),
    /// Compare two trajectory CSV files label by label
    Compare(CompareArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for the output files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Override the configured solver (analytic, euler, rk4)
    #[arg(long)]
    solver: Option<String>,
    /// Override the configured step size in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Override the configured horizon in seconds
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args)]
struct ConcurrenceArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Override the configured solver (euler, rk4)
    #[arg(long)]
    solver: Option<String>,
    /// Override the configured step size in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Override the configured horizon in seconds
    #[arg(long)]
    t_end: Option<f64>,
    /// Largest photon shell N_sum to include
    #[arg(long, default_value_t = 3)]
    n_max: u32,
    /// Shells integrated in parallel
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Amplitude to transform, e.g. A22_F00
    #[arg(long)]
    label: String,
    /// Override the configured solver (analytic, euler, rk4)
    #[arg(long)]
    solver: Option<String>,
    /// Override the configured step size in seconds
    #[arg(long)]
    dt: Option<f64>,
    /// Override the configured horizon in seconds
    #[arg(long)]
    t_end: Option<f64>,
}

#[derive(Args)]
struct CompareArgs {
    /// First trajectory CSV
    a: PathBuf,
    /// Second trajectory CSV
    b: PathBuf,
    /// Fail (exit 4) if the largest amplitude deviation exceeds this
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for the comparison report
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Entangle(#[from] EntangleError),
    #[error("cannot write outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error("config has no {what} section, which this command needs")]
    MissingSection { what: &'static str },
    #[error(
        "the analytic solver covers single-mode rotating-wave systems only; \
         this config has {modes} mode(s) with rwa = {rwa}"
    )]
    AnalyticScope { modes: usize, rwa: bool },
    #[error("the concurrence command integrates shells numerically; pick euler or rk4")]
    AnalyticShells,
    #[error("label {label} is not in the basis of this config")]
    LabelNotInBasis { label: String },
    #[error("trajectories do not share a grid: {reason}")]
    GridMismatch { reason: String },
    #[error("largest deviation {max:.3e} exceeds the tolerance {tol:.3e}")]
    Tolerance { max: f64, tol: f64 },
    #[error("cannot read trajectory: {0}")]
    Csv(#[from] csv::Error),
}

fn exit_code(error: &CliError) -> u8 {
    match error {
        CliError::Numeric(NumericError::NonFinite { .. }) => 3,
        CliError::Entangle(EntangleError::Numeric(NumericError::NonFinite { .. })) => 3,
        CliError::Tolerance { .. } => 4,
        _ => 2,
    }
}

/// Parse the process arguments, run the requested command, and map errors
/// to the documented exit codes.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code(&error))
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::EmitEquations(args) => emit_equations(args),
        Command::Concurrence(args) => concurrence(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Compare(args) => compare(args),
    }
}

fn merge_settings(
    loaded: &LoadedConfig,
    solver: &Option<String>,
    dt: Option<f64>,
    t_end: Option<f64>,
) -> Result<SimulationSettings, CliError> {
    let base = loaded
        .simulation
        .ok_or(CliError::MissingSection {
            what: "[simulation]",
        })?;
    let solver = match solver {
        Some(name) => RunSolver::parse(name)?,
        None => base.solver,
    };
    let merged = SimulationSettings {
        solver,
        dt: dt.unwrap_or(base.dt),
        t_end: t_end.unwrap_or(base.t_end),
        output_stride: base.output_stride,
    };
    integrator_spec(&merged, Solver::Rk4).validate()?;
    Ok(merged)
}

fn integrator_spec(settings: &SimulationSettings, fallback: Solver) -> IntegratorSpec {
    IntegratorSpec {
        solver: settings.solver.numeric().unwrap_or(fallback),
        dt: settings.dt,
        t_end: settings.t_end,
        output_stride: settings.output_stride,
    }
}

fn solve(
    loaded: &LoadedConfig,
    system: &RabiSystem,
    settings: &SimulationSettings,
    initial: &[C64],
) -> Result<Trajectory, CliError> {
    let spec = integrator_spec(settings, Solver::Rk4);
    match settings.solver {
        RunSolver::Analytic => {
            if loaded.system.mode_count() != 1 || !loaded.system.rwa() {
                return Err(CliError::AnalyticScope {
                    modes: loaded.system.mode_count(),
                    rwa: loaded.system.rwa(),
                });
            }
            Ok(analytic_trajectory(system, &spec, initial)?)
        }
        RunSolver::Euler | RunSolver::Rk4 => Ok(integrate(system, &spec, initial)?),
    }
}

struct RunSummary<'a> {
    mode: &'a str,
    settings: Option<&'a SimulationSettings>,
    terminal_norm_drift: Option<f64>,
    outputs: &'a [&'a str],
    n_max: Option<u32>,
}

fn write_run_json(
    dir: &Path,
    loaded: &LoadedConfig,
    system: &RabiSystem,
    summary: RunSummary<'_>,
) -> Result<(), CliError> {
    let leakage = system.leakage();
    let mut doc = serde_json::json!({
        "mode": summary.mode,
        "config_sha256": loaded.sha256,
        "solver": summary.settings.map(|s| s.solver.to_string()),
        "dt": summary.settings.map(|s| s.dt),
        "t_end": summary.settings.map(|s| s.t_end),
        "output_stride": summary.settings.map(|s| s.output_stride),
        "basis_size": system.dim(),
        "term_count": system.terms().len(),
        "leakage": { "count": leakage.count, "weight": leakage.weight },
        "terminal_norm_drift": summary.terminal_norm_drift,
        "outputs": summary.outputs,
    });
    if let Some(n_max) = summary.n_max {
        doc["n_max"] = serde_json::json!(n_max);
    }
    let text = serde_json::to_string_pretty(&doc).expect("metadata serializes");
    fs::write(dir.join("run.json"), text + "\n")?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.common.config)?;
    let settings = merge_settings(&loaded, &args.solver, args.dt, args.t_end)?;
    let initial = loaded
        .initial
        .as_deref()
        .ok_or(CliError::MissingSection { what: "[initial]" })?;
    let system = build_rabi_system(&loaded.system, &loaded.basis);
    let trajectory = solve(&loaded, &system, &settings, initial)?;

    fs::create_dir_all(&args.common.out)?;
    let mut csv_bytes = Vec::new();
    write_csv(&trajectory, system.basis(), &mut csv_bytes)?;
    fs::write(args.common.out.join("trajectory.csv"), csv_bytes)?;
    write_run_json(
        &args.common.out,
        &loaded,
        &system,
        RunSummary {
            mode: "simulate",
            settings: Some(&settings),
            terminal_norm_drift: Some(trajectory.terminal_norm_drift()),
            outputs: &["trajectory.csv"],
            n_max: None,
        },
    )
}

fn emit_equations(args: CommonArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.config)?;
    let system = build_rabi_system(&loaded.system, &loaded.basis);
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("equations.json"), export_terms_json(&system) + "\n")?;
    write_run_json(
        &args.out,
        &loaded,
        &system,
        RunSummary {
            mode: "emit-equations",
            settings: loaded.simulation.as_ref(),
            terminal_norm_drift: None,
            outputs: &["equations.json"],
            n_max: None,
        },
    )
}

fn concurrence(args: ConcurrenceArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.common.config)?;
    let settings = merge_settings(&loaded, &args.solver, args.dt, args.t_end)?;
    if settings.solver == RunSolver::Analytic {
        return Err(CliError::AnalyticShells);
    }
    let system = build_rabi_system(&loaded.system, &loaded.basis);
    let spec = integrator_spec(&settings, Solver::Rk4);
    let series = concurrence_run(
        &loaded.system,
        &loaded.basis,
        &spec,
        args.n_max,
        args.jobs,
    )?;

    fs::create_dir_all(&args.common.out)?;
    let mut csv_bytes = Vec::new();
    write_lambda_csv(&series, &mut csv_bytes)?;
    fs::write(args.common.out.join("lambda.csv"), csv_bytes)?;
    write_run_json(
        &args.common.out,
        &loaded,
        &system,
        RunSummary {
            mode: "concurrence",
            settings: Some(&settings),
            terminal_norm_drift: Some(series.max_norm_drift),
            outputs: &["lambda.csv"],
            n_max: Some(args.n_max),
        },
    )
}

fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let loaded = load_config(&args.common.config)?;
    let settings = merge_settings(&loaded, &args.solver, args.dt, args.t_end)?;
    let initial = loaded
        .initial
        .as_deref()
        .ok_or(CliError::MissingSection { what: "[initial]" })?;
    let label: BasisLabel =
        args.label
            .parse()
            .map_err(|_| CliError::LabelNotInBasis {
                label: args.label.clone(),
            })?;
    let position =
        loaded
            .basis
            .position(&label)
            .ok_or_else(|| CliError::LabelNotInBasis {
                label: args.label.clone(),
            })?;
    let system = build_rabi_system(&loaded.system, &loaded.basis);
    let trajectory = solve(&loaded, &system, &settings, initial)?;

    // keep only the uniformly spaced samples; the trailing off-stride
    // sample, when present, would skew the transform
    let sample_dt = settings.output_stride as f64 * settings.dt;
    let mut series: Vec<C64> = Vec::with_capacity(trajectory.times.len());
    for (row, &t) in trajectory.times.iter().enumerate() {
        let expected = (row as u64 * settings.output_stride) as f64 * settings.dt;
        if t != expected {
            break;
        }
        series.push(trajectory.states[row][position]);
    }
    let spectrum = dft_spectrum(&series, sample_dt)?;

    fs::create_dir_all(&args.common.out)?;
    let mut csv_bytes = Vec::new();
    write_spectrum_csv(&spectrum, &mut csv_bytes)?;
    fs::write(args.common.out.join("spectrum.csv"), csv_bytes)?;
    write_run_json(
        &args.common.out,
        &loaded,
        &system,
        RunSummary {
            mode: "spectrum",
            settings: Some(&settings),
            terminal_norm_drift: Some(trajectory.terminal_norm_drift()),
            outputs: &["spectrum.csv"],
            n_max: None,
        },
    )
}

struct TrajectoryTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<TrajectoryTable, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|s| s.to_string()).collect());
    }
    Ok(TrajectoryTable { header, rows })
}

fn compare(args: CompareArgs) -> Result<(), CliError> {
    let a = read_table(&args.a)?;
    let b = read_table(&args.b)?;
    if a.header != b.header {
        return Err(CliError::GridMismatch {
            reason: "column headers differ".to_string(),
        });
    }
    if a.rows.len() != b.rows.len() {
        return Err(CliError::GridMismatch {
            reason: format!("{} rows vs {}", a.rows.len(), b.rows.len()),
        });
    }
    for (n, (ra, rb)) in a.rows.iter().zip(&b.rows).enumerate() {
        if ra[0] != rb[0] {
            return Err(CliError::GridMismatch {
                reason: format!("row {n} sampled at t = {} vs t = {}", ra[0], rb[0]),
            });
        }
    }

    let parse = |s: &str| -> f64 { s.parse().unwrap_or(f64::NAN) };
    let label_count = (a.header.len() - 2) / 3;
    let mut per_label: Vec<(String, f64)> = Vec::with_capacity(label_count + 1);
    let mut max_abs_error = 0.0f64;
    for k in 0..label_count {
        let re_col = 1 + 3 * k;
        let name = a.header[re_col]
            .strip_suffix("_re")
            .unwrap_or(&a.header[re_col])
            .to_string();
        let mut worst = 0.0f64;
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let delta = C64::new(
                parse(&ra[re_col]) - parse(&rb[re_col]),
                parse(&ra[re_col + 1]) - parse(&rb[re_col + 1]),
            );
            worst = worst.max(delta.norm());
        }
        max_abs_error = max_abs_error.max(worst);
        per_label.push((name, worst));
    }
    let norm_col = a.header.len() - 1;
    let mut norm_worst = 0.0f64;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        norm_worst = norm_worst.max((parse(&ra[norm_col]) - parse(&rb[norm_col])).abs());
    }
    per_label.push(("norm".to_string(), norm_worst));
    max_abs_error = max_abs_error.max(norm_worst);

    println!("max_abs_error = {max_abs_error:e} over {} rows", a.rows.len());
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let labels: serde_json::Map<String, serde_json::Value> = per_label
            .iter()
            .map(|(name, err)| (name.clone(), serde_json::json!(err)))
            .collect();
        let doc = serde_json::json!({
            "max_abs_error": max_abs_error,
            "rows": a.rows.len(),
            "per_label": labels,
        });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes");
        fs::write(dir.join("compare.json"), text + "\n")?;
    }
    if let Some(tol) = args.tol {
        if max_abs_error > tol {
            return Err(CliError::Tolerance {
                max: max_abs_error,
                tol,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
units = "hz"
excitation_cap = 2

[[dots]]
levels = [0.0, 4.0e13]

[[dots]]
levels = [0.0, 4.0e13]

[[modes]]
frequency = 3.9e13

[couplings]
"gamma[1][1][2]" = [1.0, 0.0]
"gamma[2][1][2]" = [1.0, 0.0]
"g[1][1][2][1]" = [2.0e12, 0.0]
"g[2][1][2][1]" = [2.0e12, 0.0]
"eta[1][1][2]" = [1.2e12, 0.0]
"eta[2][1][2]" = [1.0, 0.0]

[simulation]
solver = "rk4"
dt = 1e-16
t_end = 2e-14
output_stride = 20

[initial]
"A22_F0" = [1.0, 0.0]
"#;

    fn write_config(dir: &Path) -> PathBuf {
        let path = dir.join("run.toml");
        fs::write(&path, CONFIG).unwrap();
        path
    }

    fn common(config: &Path, out: &Path) -> CommonArgs {
        CommonArgs {
            config: config.to_path_buf(),
            out: out.to_path_buf(),
        }
    }

    #[test]
    fn simulate_writes_deterministic_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        for round in ["first", "second"] {
            let out = dir.path().join(round);
            simulate(SimulateArgs {
                common: common(&config, &out),
                solver: None,
                dt: None,
                t_end: None,
            })
            .unwrap();
        }
        let csv_a = fs::read(dir.path().join("first/trajectory.csv")).unwrap();
        let csv_b = fs::read(dir.path().join("second/trajectory.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        let json_a = fs::read(dir.path().join("first/run.json")).unwrap();
        let json_b = fs::read(dir.path().join("second/run.json")).unwrap();
        assert_eq!(json_a, json_b);

        let meta: serde_json::Value =
            serde_json::from_slice(&json_a).unwrap();
        assert_eq!(meta["mode"], "simulate");
        assert_eq!(meta["solver"], "rk4");
        assert_eq!(meta["basis_size"], 12);
        assert!(meta["terminal_norm_drift"].as_f64().unwrap() < 1e-8);
        assert_eq!(meta["outputs"][0], "trajectory.csv");
        assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn analytic_and_rk4_match_through_the_cli_compare_path() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        for solver in ["analytic", "rk4"] {
            simulate(SimulateArgs {
                common: common(&config, &dir.path().join(solver)),
                solver: Some(solver.to_string()),
                dt: None,
                t_end: None,
            })
            .unwrap();
        }
        let report = dir.path().join("report");
        compare(CompareArgs {
            a: dir.path().join("analytic/trajectory.csv"),
            b: dir.path().join("rk4/trajectory.csv"),
            tol: Some(1e-6),
            out: Some(report.clone()),
        })
        .unwrap();
        let doc: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(report.join("compare.json")).unwrap(),
        )
        .unwrap();
        assert!(doc["max_abs_error"].as_f64().unwrap() < 1e-6);
        assert!(doc["per_label"]["A22_F0"].is_number());
    }

    #[test]
    fn compare_flags_real_deviations_and_grid_mismatches() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        simulate(SimulateArgs {
            common: common(&config, &dir.path().join("base")),
            solver: None,
            dt: None,
            t_end: None,
        })
        .unwrap();
        simulate(SimulateArgs {
            common: common(&config, &dir.path().join("euler")),
            solver: Some("euler".to_string()),
            dt: None,
            t_end: None,
        })
        .unwrap();

        let a = dir.path().join("base/trajectory.csv");
        let b = dir.path().join("euler/trajectory.csv");
        let err = compare(CompareArgs {
            a: a.clone(),
            b,
            tol: Some(1e-12),
            out: None,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::Tolerance { .. }));
        assert_eq!(exit_code(&err), 4);

        simulate(SimulateArgs {
            common: common(&config, &dir.path().join("short")),
            solver: None,
            dt: None,
            t_end: Some(1e-14),
        })
        .unwrap();
        let err = compare(CompareArgs {
            a,
            b: dir.path().join("short/trajectory.csv"),
            tol: None,
            out: None,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::GridMismatch { .. }));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn analytic_scope_refusal_names_the_reason() {
        let dir = tempfile::tempdir().unwrap();
        let two_modes = CONFIG.replace(
            "[[modes]]\nfrequency = 3.9e13\n",
            "[[modes]]\nfrequency = 3.9e13\n\n[[modes]]\nfrequency = 2.0e13\n",
        );
        let config = dir.path().join("two.toml");
        fs::write(&config, two_modes.replace("\"A22_F0\"", "\"A22_F00\"")).unwrap();
        let err = simulate(SimulateArgs {
            common: common(&config, &dir.path().join("out")),
            solver: Some("analytic".to_string()),
            dt: None,
            t_end: None,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::AnalyticScope { modes: 2, .. }));
        assert_eq!(exit_code(&err), 2);
    }

    #[test]
    fn emit_equations_dumps_a_parseable_system() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        let out = dir.path().join("eq");
        emit_equations(common(&config, &out)).unwrap();
        let doc: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(out.join("equations.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(doc["basis"].as_array().unwrap().len(), 12);
        assert!(!doc["terms"].as_array().unwrap().is_empty());
        let meta: serde_json::Value = serde_json::from_str(
            &fs::read_to_string(out.join("run.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(meta["mode"], "emit-equations");
        assert!(meta["terminal_norm_drift"].is_null());
    }

    #[test]
    fn spectrum_emits_sorted_frequencies() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        let out = dir.path().join("spec");
        spectrum(SpectrumArgs {
            common: common(&config, &out),
            label: "A22_F0".to_string(),
            solver: None,
            dt: None,
            t_end: None,
        })
        .unwrap();
        let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
        assert!(text.starts_with("freq_hz,magnitude\n"));
        let freqs: Vec<f64> = text
            .lines()
            .skip(1)
            .map(|line| line.split(',').next().unwrap().parse().unwrap())
            .collect();
        assert!(freqs.windows(2).all(|w| w[0] < w[1]));

        let err = spectrum(SpectrumArgs {
            common: common(&config, &dir.path().join("spec2")),
            label: "A22_F9".to_string(),
            solver: None,
            dt: None,
            t_end: None,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::LabelNotInBasis { .. }));
    }

    #[test]
    fn concurrence_needs_a_two_mode_config_and_numeric_solver() {
        let dir = tempfile::tempdir().unwrap();
        let config = write_config(dir.path());
        let err = concurrence(ConcurrenceArgs {
            common: common(&config, &dir.path().join("out")),
            solver: Some("analytic".to_string()),
            dt: None,
            t_end: None,
            n_max: 3,
            jobs: 1,
        })
        .unwrap_err();
        assert!(matches!(err, CliError::AnalyticShells));

        // single-mode config cannot host the quadruple
        let err = concurrence(ConcurrenceArgs {
            common: common(&config, &dir.path().join("out")),
            solver: None,
            dt: None,
            t_end: None,
            n_max: 3,
            jobs: 1,
        })
        .unwrap_err();
        assert!(matches!(
            err,
            CliError::Entangle(EntangleError::NotTwoQubit { .. })
        ));
    }
}
