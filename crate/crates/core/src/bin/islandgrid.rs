use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use islandgrid::model::ScenarioMode;
use islandgrid::ramps::RampParams;
use islandgrid::solve::SolverOptions;
use islandgrid::study::{self, StudySpec, OUT_ENV};

/// Frequency-constrained PV and battery sizing for isolated grids.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Output root directory.
    #[arg(long, global = true, env = OUT_ENV, default_value = "islandgrid-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SimFlags {
    /// Case file (TOML); the bundled reference case when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulation time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Derate FCR by (1 - r_tr).
    #[arg(long)]
    robust: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Extract hourly and global worst-case ramp envelopes from 1 s irradiance.
    Ramps {
        irradiance: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Smallest drop kept (kW/m²).
        #[arg(long, default_value_t = RampParams::default().min_drop)]
        min_drop: f64,
        /// Moving-average window (samples).
        #[arg(long, default_value_t = RampParams::default().smooth_window)]
        smooth: usize,
    },
    /// Build and solve the sizing problem for each mode, then check and simulate.
    Size {
        #[arg(long)]
        irradiance: Option<PathBuf>,
        #[arg(long)]
        load: Option<PathBuf>,
        /// Modes to run (repeat or comma-separate); all four by default.
        #[arg(long, value_delimiter = ',')]
        mode: Vec<ScenarioMode>,
        /// Relative optimality gap.
        #[arg(long, default_value_t = 0.01)]
        gap: f64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        node_limit: usize,
        /// Wall-clock limit per mode (s).
        #[arg(long)]
        time_limit: Option<f64>,
        /// Seed of the synthetic data used when files are omitted.
        #[arg(long, default_value_t = 2010)]
        seed: u64,
        #[arg(long)]
        no_sim: bool,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Replay a saved dispatch against a hull file.
    Simulate {
        dispatch: PathBuf,
        hulls: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Tabulate a saved study report.
    Report {
        /// Study report; `<out>/report.json` when omitted.
        report: Option<PathBuf>,
    },
}

fn verdict(pass: bool) -> ExitCode {
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> islandgrid::Result<ExitCode> {
    let out = study::output_root(Some(&cli.out));
    match cli.command {
        Command::Ramps {
            irradiance,
            horizon,
            min_drop,
            smooth,
        } => {
            let params = RampParams {
                min_drop,
                smooth_window: smooth,
            };
            let sc = study::cmd_ramps(&irradiance, &params, horizon, &out)?;
            let events: usize = sc.hourly.iter().map(|h| h.len()).sum();
            println!(
                "{} hours, {} envelope points, {} in the global envelope -> {}",
                sc.hourly.len(),
                events,
                sc.global.len(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Size {
            irradiance,
            load,
            mode,
            gap,
            horizon,
            node_limit,
            time_limit,
            seed,
            no_sim,
            sim,
        } => {
            let mut spec = StudySpec::new(&out);
            spec.irradiance = irradiance;
            spec.load = load;
            spec.config = sim.config;
            if !mode.is_empty() {
                spec.modes = mode;
            }
            spec.horizon = horizon;
            spec.solver = SolverOptions {
                node_limit,
                time_limit: time_limit.map(Duration::from_secs_f64),
                ..SolverOptions::with_gap(gap)
            };
            spec.robust = sim.robust;
            spec.dt = sim.dt;
            spec.seed = seed;
            spec.simulate = !no_sim;
            let outcome = study::cmd_size(&spec)?;
            for m in &outcome.modes {
                let r = &m.report;
                println!(
                    "{:<11} {:?} gap {:.4} PV {:.2} MW bat {:.2} MW capex {:.2} M$ total {:.2} M$ checks {} ({:.1} s)",
                    r.mode.as_str(),
                    r.status,
                    r.gap,
                    r.pv_installed_mw,
                    r.bat_installed_mw,
                    r.capex_musd,
                    r.total_cost_musd,
                    if r.checks_pass() { "pass" } else { "FAIL" },
                    m.seconds
                );
                for w in &r.warnings {
                    println!("  warning: {w}");
                }
                if let Some(f) = r.feasibility.as_ref().filter(|f| !f.feasible) {
                    println!(
                        "  infeasible: {} violation(s), worst {} by {:.3e} (see {})",
                        f.violations,
                        f.worst.as_deref().unwrap_or("?"),
                        f.max_violation,
                        m.dir.join("violations.csv").display()
                    );
                }
                if let Some(s) = r.simulation.as_ref().filter(|s| !s.pass()) {
                    for run in s.runs.iter().filter(|run| !run.verdict.pass) {
                        println!(
                            "  frequency limits broken at hour {}: {} nadir {:.4} Hz",
                            s.hour,
                            run.ramp.map_or("trip only".into(), |(d, i)| format!("ramp {d} s / {i} kW/m2")),
                            run.verdict.nadir_hz
                        );
                    }
                }
            }
            Ok(verdict(outcome.pass()))
        }
        Command::Simulate {
            dispatch,
            hulls,
            sim,
        } => {
            let s = study::cmd_simulate(&dispatch, &hulls, sim.config.as_deref(), sim.robust, sim.dt, &out)?;
            println!("binding hour {} (sudden loss {:.2} MW)", s.hour, s.p_sud_mw);
            for r in &s.runs {
                let ramp = r
                    .ramp
                    .map_or("trip only".to_string(), |(d, i)| format!("ramp {d} s / {i} kW/m2"));
                println!(
                    "  {ramp}: nadir {:.4} Hz {}",
                    r.verdict.nadir_hz,
                    if r.verdict.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(verdict(s.pass()))
        }
        Command::Report { report } => {
            let path = report.unwrap_or_else(|| out.join("report.json"));
            let (_, pass) = study::cmd_report(&path, std::io::stdout().lock())?;
            Ok(verdict(pass))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
