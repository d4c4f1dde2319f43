//! `diffdrive` — differential-drive control toolkit CLI.
//!
//! Subcommands: `simulate-regulate` and `simulate-track` run scenario files
//! and emit CSV traces or JSON summaries; `design-gains`, `check-stability`
//! and `roots` are quick analysis helpers. Exit codes: 0 success, 2 usage,
//! 3 scenario/config error, 4 gain design error, 5 diverged run, 6 output
//! I/O error. Set `DIFFDRIVE_LOG=error|warn|info|debug` to tune stderr
//! verbosity.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diffdrive::sim::{run_scenario, RunOutcome, ScenarioMode};
use diffdrive::tracking::DEFAULT_SPEED_FLOOR;
use diffdrive::ScenarioConfig64;
use diffdrive_cli::output::{summary_json, trace_csv_bytes, write_output};
use diffdrive_cli::scenario::load_scenario;
use diffdrive_cli::{commands, exit_code, log, CliError};

#[derive(Parser)]
#[command(name = "diffdrive", version, about = "Differential-drive control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory-tracking scenario file.
    SimulateTrack(SimArgs),
    /// Run a pose-regulation scenario file.
    SimulateRegulate(SimArgs),
    /// Compute tracking gains from damping and natural frequency.
    DesignGains {
        /// Damping factor (> 0).
        #[arg(long)]
        xi: f64,
        /// Natural frequency in rad/s (> 0).
        #[arg(long)]
        omega_n: f64,
        /// Reference linear speed in m/s.
        #[arg(long, allow_negative_numbers = true)]
        v_ref: f64,
        /// Reference turn rate in rad/s.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        omega_ref: f64,
        /// Floor on |v_ref| below which the design is refused.
        #[arg(long, default_value_t = DEFAULT_SPEED_FLOOR)]
        speed_floor: f64,
    },
    /// Check the regulator gain stability inequalities.
    CheckStability {
        /// Gain on the goal distance.
        #[arg(long, allow_negative_numbers = true)]
        k_distance: f64,
        /// Gain on the bearing error.
        #[arg(long, allow_negative_numbers = true)]
        k_bearing: f64,
        /// Gain on the goal-frame heading term.
        #[arg(long, allow_negative_numbers = true)]
        k_goal_heading: f64,
    },
    /// Roots of the monic cubic s^3 + c2 s^2 + c1 s + c0.
    Roots {
        #[arg(allow_negative_numbers = true)]
        c2: f64,
        #[arg(allow_negative_numbers = true)]
        c1: f64,
        #[arg(allow_negative_numbers = true)]
        c0: f64,
    },
}

#[derive(Args)]
struct SimArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv emits the full trace; summary emits a JSON run summary.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Scenario override as key=value (repeatable), e.g.
    /// --override regulation.ramp_enabled=false
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Sweep one numeric key over start:step:end (inclusive); requires
    /// --out, one output file per value.
    #[arg(long, value_name = "KEY=START:STEP:END")]
    sweep: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Summary,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SimulateTrack(args) => simulate(&args, Mode::Tracking),
        Command::SimulateRegulate(args) => simulate(&args, Mode::Regulation),
        Command::DesignGains {
            xi,
            omega_n,
            v_ref,
            omega_ref,
            speed_floor,
        } => {
            let report = commands::design_gains_report(xi, omega_n, v_ref, omega_ref, speed_floor)?;
            print!("{report}");
            Ok(())
        }
        Command::CheckStability {
            k_distance,
            k_bearing,
            k_goal_heading,
        } => {
            let (report, _stable) =
                commands::check_stability_report(k_distance, k_bearing, k_goal_heading);
            print!("{report}");
            Ok(())
        }
        Command::Roots { c2, c1, c0 } => {
            print!("{}", commands::cubic_roots_report(c2, c1, c0));
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Tracking,
    Regulation,
}

fn simulate(args: &SimArgs, mode: Mode) -> Result<(), CliError> {
    match &args.sweep {
        None => {
            let config = load_scenario(&args.scenario, &args.overrides)?;
            check_mode(&config, mode)?;
            run_one(&config, args.out.as_deref(), args.format)
        }
        Some(sweep) => {
            let out = args.out.as_deref().ok_or_else(|| CliError::BadArgument {
                argument: sweep.clone(),
                message: "--sweep requires --out".to_string(),
            })?;
            let (key, values) = parse_sweep(sweep)?;
            let mut first_error = None;
            for value in values {
                let mut overrides = args.overrides.clone();
                overrides.push(format!("{key}={value}"));
                let config = load_scenario(&args.scenario, &overrides)?;
                check_mode(&config, mode)?;
                let path = sweep_output_path(out, &key, value);
                log::info(format!("sweep {key}={value} -> {}", path.display()));
                if let Err(err) = run_one(&config, Some(&path), args.format) {
                    match err {
                        // Keep sweeping through diverged points; report at the end.
                        CliError::Diverged => first_error = first_error.or(Some(err)),
                        other => return Err(other),
                    }
                }
            }
            match first_error {
                None => Ok(()),
                Some(err) => Err(err),
            }
        }
    }
}

fn check_mode(config: &ScenarioConfig64, mode: Mode) -> Result<(), CliError> {
    let matches = matches!(
        (&config.mode, mode),
        (ScenarioMode::Tracking(_), Mode::Tracking)
            | (ScenarioMode::Regulation(_), Mode::Regulation)
    );
    if matches {
        Ok(())
    } else {
        let (expected, other) = match mode {
            Mode::Tracking => ("tracking", "simulate-regulate"),
            Mode::Regulation => ("regulation", "simulate-track"),
        };
        Err(CliError::Invalid {
            key: "regulation/tracking".to_string(),
            message: format!("this subcommand needs a {expected} scenario (did you mean {other}?)"),
        })
    }
}

fn run_one(config: &ScenarioConfig64, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    warn_about_gains(config);
    let trace = run_scenario(config)?;
    log::info(format!(
        "{} after {:.2} s simulated, {} steps, wall {:?}",
        trace.summary.outcome,
        trace.summary.sim_time,
        trace.summary.steps,
        trace.summary.wall
    ));
    let bytes = match format {
        Format::Csv => trace_csv_bytes(&trace),
        Format::Summary => summary_json(&trace).into_bytes(),
    };
    match out {
        Some(path) => write_output(path, &bytes)?,
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(&bytes).map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            })?;
        }
    }
    if trace.summary.outcome == RunOutcome::Diverged {
        return Err(CliError::Diverged);
    }
    Ok(())
}

/// Advisory gain checks, logged but never fatal: unstable configurations
/// are legitimate scenarios for demonstrating divergence.
fn warn_about_gains(config: &ScenarioConfig64) {
    use diffdrive::regulator::stability_check;
    if let ScenarioMode::Regulation(setup) = &config.mode {
        let verdict = stability_check(setup.gains);
        for violation in verdict.violations() {
            log::warn(format!("regulator gains outside the stability region: {violation}"));
        }
    }
}

fn parse_sweep(sweep: &str) -> Result<(String, Vec<f64>), CliError> {
    let bad = |message: &str| CliError::BadArgument {
        argument: sweep.to_string(),
        message: message.to_string(),
    };
    let (key, range) = sweep.split_once('=').ok_or_else(|| bad("expected key=start:step:end"))?;
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected key=start:step:end"));
    }
    let parse = |text: &str| {
        text.parse::<f64>()
            .map_err(|_| bad("start, step and end must be numbers"))
    };
    let (start, step, end) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
    if step == 0.0 || !step.is_finite() {
        return Err(bad("step must be nonzero and finite"));
    }
    if (end - start) / step < 0.0 {
        return Err(bad("step direction does not reach end"));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    let values = (0..count).map(|i| start + step * i as f64).collect();
    Ok((key.trim().to_string(), values))
}

/// `trace.csv` swept over `regulation.gains.distance = 0.5` becomes
/// `trace_regulation-gains-distance_0.5.csv`; names depend only on the
/// sweep point.
fn sweep_output_path(base: &Path, key: &str, value: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let extension = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    let safe_key = key.replace('.', "-");
    base.with_file_name(format!("{stem}_{safe_key}_{value}{extension}"))
}
