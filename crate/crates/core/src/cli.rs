//! Command-line front end. `fsi-split <subcommand> --config PATH [...]`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, SimConfig};
use crate::diagnostics::{refinement_study, shift_report, Norms, ShiftField};
use crate::driver::{initialize, run_simulation, RunSummary, Trajectory};
use crate::error::Error;
use crate::mms::{mms_spatial, mms_temporal, MmsCase};
use crate::output::{
    field_vtk, interface_rows, mms_csv, refinement_csv, shifts_csv, OutputDir, INTERFACE_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_FAILED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "fsi-split", version, about = "Moving-boundary FSI solver with Lie splitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write VTK field dumps.
    #[arg(long)]
    dump_fields: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the time loop and write the energy ledger.
    Run(Common),
    /// Time-shift norms over a fresh trajectory.
    Shifts {
        #[command(flatten)]
        common: Common,
        /// Shifts, comma separated (default: dt times 1,2,4,8,16).
        #[arg(long, value_delimiter = ',')]
        h_list: Option<Vec<f64>>,
    },
    /// Time-step refinement (Cauchy) study.
    Refine {
        #[command(flatten)]
        common: Common,
        /// Time steps, comma separated, strictly decreasing (default: dt halved four times).
        #[arg(long, value_delimiter = ',')]
        dt_list: Option<Vec<f64>>,
    },
    /// Manufactured-solution convergence in space and time.
    Mms {
        #[command(flatten)]
        common: Common,
        /// Time steps for the temporal study.
        #[arg(long, value_delimiter = ',')]
        dt_list: Option<Vec<f64>>,
    },
    /// Parse and validate the configuration only.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::IncompatibleInitialData { .. }
        | Error::InvalidPolygon(_)
        | Error::NonRectifiablePolygon(_)
        | Error::MissingElasticFace
        | Error::ClampViolatedInput(_)
        | Error::InvalidArgument(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(common: &Common) -> crate::Result<SimConfig> {
    let mut cfg = parse_config(&common.config)?;
    if common.dump_fields {
        cfg.output.dump_fields = true;
    }
    Ok(cfg)
}

fn write_json<T: serde::Serialize>(out: &mut OutputDir, rel: &str, v: &T) -> crate::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("value serializes");
    out.write(rel, text.as_bytes())?;
    Ok(())
}

/// Runs `cfg`, writing the ledger, summary, interface positions and optional
/// field dumps. Returns the summary and, if requested, the trajectory.
fn run_to_dir(
    cfg: &SimConfig,
    out: &mut OutputDir,
    keep_trajectory: bool,
) -> crate::Result<(RunSummary, Option<Trajectory>)> {
    let mut sim = initialize(cfg)?;
    let steps = cfg.num_steps();
    let every = cfg.output.dump_every.max(1);
    let mut interface = String::from(INTERFACE_HEADER);
    interface.push('\n');
    let mut dumps = Vec::new();
    let mut snapshots = Vec::new();
    let summary = run_simulation(&mut sim, steps, |s| {
        if s.step % every == 0 || s.step == steps {
            interface_rows(s, &mut interface);
            if cfg.output.dump_fields {
                dumps.push((format!("fields/step_{:06}.vtk", s.step), field_vtk(s)));
            }
        }
        if keep_trajectory {
            snapshots.push(s.snapshot());
        }
    });
    out.write("energy_ledger.csv", sim.ledger.to_csv().as_bytes())?;
    write_json(out, "run_summary.json", &summary)?;
    out.write("interface.csv", interface.as_bytes())?;
    for (name, text) in dumps {
        out.write(&name, text.as_bytes())?;
    }
    let traj = keep_trajectory.then(|| Trajectory {
        dt: sim.dt(),
        snapshots,
        stop_reason: summary.stop_reason,
        stop_step: summary.stop_step,
        final_status: sim.status,
        message: sim.message().map(str::to_string),
    });
    Ok((summary, traj))
}

fn report_summary(s: &RunSummary) -> i32 {
    eprintln!(
        "stop_reason={:?} steps={}/{} E0={:.6e} E_final={:.6e}",
        s.stop_reason, s.stop_step, s.steps_requested, s.e0, s.e_final
    );
    if s.failed {
        for f in &s.failures {
            eprintln!("FAILED: {f}");
        }
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn execute(cmd: Command) -> crate::Result<i32> {
    match cmd {
        Command::ValidateConfig { config } => {
            parse_config(&config)?;
            eprintln!("{}: ok", config.display());
            Ok(EXIT_OK)
        }
        Command::Run(common) => {
            let cfg = load(&common)?;
            let mut out = OutputDir::create(&common.out)?;
            let (summary, _) = run_to_dir(&cfg, &mut out, false)?;
            out.finish("run", Some(&cfg))?;
            Ok(report_summary(&summary))
        }
        Command::Shifts { common, h_list } => {
            let cfg = load(&common)?;
            let dt = cfg.time.dt;
            let hs = h_list.unwrap_or_else(|| [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|k| k * dt).collect());
            let mut out = OutputDir::create(&common.out)?;
            let (summary, traj) = run_to_dir(&cfg, &mut out, true)?;
            let traj = traj.expect("trajectory kept");
            let norms = Norms::for_config(&cfg)?;
            let report = shift_report(&traj, &norms, &ShiftField::ALL, &hs)?;
            out.write("shifts.csv", shifts_csv(&report).as_bytes())?;
            write_json(&mut out, "shifts_fit.json", &report.fits)?;
            for (f, p) in &report.fits {
                eprintln!("{}: C = {:.4e}, beta = {:.4}", f.name(), p.c, p.beta);
            }
            out.finish("shifts", Some(&cfg))?;
            Ok(report_summary(&summary))
        }
        Command::Refine { common, dt_list } => {
            let cfg = load(&common)?;
            let dt = cfg.time.dt;
            let dts = dt_list.unwrap_or_else(|| (0..5).map(|k| dt / f64::powi(2.0, k)).collect());
            let table = refinement_study(&cfg, &dts)?;
            let mut out = OutputDir::create(&common.out)?;
            out.write("refinement.csv", refinement_csv(&table).as_bytes())?;
            for r in &table.rows {
                eprintln!("dt={:.4e} diff_u={:.6e} diff_eta={:.6e}", r.dt, r.diff_u, r.diff_eta);
            }
            out.finish("refine", Some(&cfg))?;
            if table.strictly_decreasing() {
                Ok(EXIT_OK)
            } else {
                eprintln!("FAILED: Cauchy differences are not strictly decreasing");
                Ok(EXIT_FAILED)
            }
        }
        Command::Mms { common, dt_list } => {
            let cfg = load(&common)?;
            let case = MmsCase {
                rho: cfg.fluid.rho_f,
                mu: cfg.fluid.mu,
                alpha: cfg.fluid.alpha,
                steady: true,
            };
            let dts = dt_list.unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
            let space = mms_spatial(&case, &[4, 8, 16])?;
            let time = mms_temporal(&case, 32, &dts, 1.0)?;
            let mut out = OutputDir::create(&common.out)?;
            out.write("mms.csv", mms_csv(&[&space, &time]).as_bytes())?;
            eprintln!("space: order_u = {:.3}, order_p = {:.3}", space.order_u, space.order_p);
            eprintln!("time: order_u = {:.3}, order_p = {:.3}", time.order_u, time.order_p);
            out.finish("mms", Some(&cfg))?;
            Ok(EXIT_OK)
        }
    }
}
