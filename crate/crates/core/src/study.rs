//! File-level study runner behind the `islandgrid` binary.
//!
//! Every command reads CSV/TOML/JSON and writes CSV/JSON/MPS below an output
//! directory. Sizing modes run on their own threads and each writes only to
//! its own subdirectory:
//!
//! ```text
//! <out>/hulls_hourly.csv, hull_global.csv
//! <out>/report.json, indicators.csv
//! <out>/<mode>/model.mps, model_names.csv, solution.csv, dispatch.json,
//!              violations.csv, report.json, sim/trace_*.csv
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::CaseConfig;
use crate::data::{load_load_csv, synthetic_irradiance, synthetic_load};
use crate::error::{Error, Result};
use crate::model::{build_problem, Dispatch, ScenarioMode, SizingInputs, SizingModel};
use crate::ramps::io::{group_by_hour, load_hull_csv, load_irradiance_csv, write_hull_csv};
use crate::ramps::{extract_scenarios, RampHull, RampParams, RampScenarios};
use crate::report::{
    compute_indicators, write_indicator_table, FeasibilitySummary, RampVerdict, SimulationSummary,
    StudyDocument, StudyReport,
};
use crate::sim::{simulate, verify_run, worst_case_configs, SimSettings};
use crate::solve::{check_feasible, export_mps, solve, SolverOptions};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "ISLANDGRID_OUT";

/// Tolerance of the post-solve feasibility check.
pub const CHECK_TOL: f64 = 1e-6;

/// Output root: an explicit path wins, then `ISLANDGRID_OUT`, then `islandgrid-out`.
pub fn output_root(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("islandgrid-out"))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn load_case(path: Option<&Path>) -> Result<CaseConfig> {
    match path {
        Some(p) => CaseConfig::load(p),
        None => Ok(CaseConfig::reference()),
    }
}

/// Apply the command-line overrides shared by `size` and `simulate`.
fn apply_overrides(case: &mut CaseConfig, robust: bool, dt: Option<f64>) -> Result<()> {
    if robust {
        case.plant.freq.robust_mode = true;
    }
    if let Some(dt) = dt {
        case.sim.dt = dt;
    }
    case.validate()
}

/// Extract and write hourly and global ramp envelopes. Returns the scenarios.
pub fn cmd_ramps(
    irradiance: &Path,
    params: &RampParams,
    horizon: Option<usize>,
    out_dir: &Path,
) -> Result<RampScenarios> {
    let series = load_irradiance_csv(irradiance)?;
    let mut sc = extract_scenarios(&series, params)?;
    if let Some(h) = horizon {
        truncate_scenarios(&mut sc, h, irradiance)?;
    }
    create_dir(out_dir)?;
    write_hull_csv(&sc.hourly, create_file(&out_dir.join("hulls_hourly.csv"))?)?;
    write_hull_csv([&sc.global], create_file(&out_dir.join("hull_global.csv"))?)?;
    Ok(sc)
}

fn truncate_scenarios(sc: &mut RampScenarios, horizon: usize, source: &Path) -> Result<()> {
    if horizon > sc.hourly.len() {
        return Err(Error::Validation(format!(
            "{}: horizon {horizon} h exceeds the {} whole hours of irradiance",
            source.display(),
            sc.hourly.len()
        )));
    }
    sc.hourly.truncate(horizon);
    sc.hourly_mean.truncate(horizon);
    sc.global = crate::ramps::global_hull(&sc.hourly);
    Ok(())
}

/// Everything a sizing study needs.
#[derive(Debug, Clone)]
pub struct StudySpec {
    /// 1 s irradiance CSV; a seeded synthetic week is used when absent.
    pub irradiance: Option<PathBuf>,
    /// Hourly load CSV; a seeded synthetic profile is used when absent.
    pub load: Option<PathBuf>,
    /// Case file; the bundled reference case when absent.
    pub config: Option<PathBuf>,
    pub modes: Vec<ScenarioMode>,
    pub out_dir: PathBuf,
    pub horizon: Option<usize>,
    pub solver: SolverOptions,
    pub robust: bool,
    pub dt: Option<f64>,
    pub seed: u64,
    /// Replay the binding hour for modes with reserve constraints.
    pub simulate: bool,
}

impl StudySpec {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        StudySpec {
            irradiance: None,
            load: None,
            config: None,
            modes: ScenarioMode::ALL.to_vec(),
            out_dir: out_dir.into(),
            horizon: None,
            solver: SolverOptions::default(),
            robust: false,
            dt: None,
            seed: 2010,
            simulate: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidArgument("at least one mode is required".into()));
        }
        for p in [&self.irradiance, &self.load, &self.config].into_iter().flatten() {
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
        }
        if self.horizon == Some(0) {
            return Err(Error::InvalidArgument("horizon must be at least one hour".into()));
        }
        self.solver.validate()
    }
}

/// Inputs resolved from a [`StudySpec`], shared read-only by the mode threads.
#[derive(Debug, Clone)]
pub struct PreparedStudy {
    pub case: CaseConfig,
    pub scenarios: RampScenarios,
    pub inputs: SizingInputs,
}

pub fn prepare(spec: &StudySpec) -> Result<PreparedStudy> {
    spec.validate()?;
    let mut case = load_case(spec.config.as_deref())?;
    apply_overrides(&mut case, spec.robust, spec.dt)?;

    let (series, irr_source) = match &spec.irradiance {
        Some(p) => (load_irradiance_csv(p)?, p.clone()),
        None => {
            let days = spec.horizon.map_or(7, |h| h.div_ceil(24));
            (synthetic_irradiance(days, spec.seed), PathBuf::from("<synthetic irradiance>"))
        }
    };
    let mut scenarios = extract_scenarios(&series, &case.ramps)?;
    let load = match &spec.load {
        Some(p) => {
            let l = load_load_csv(p)?;
            if l.start != series.start {
                return Err(Error::Validation(format!(
                    "{} starts at {} but {} starts at {}",
                    p.display(),
                    l.start,
                    irr_source.display(),
                    series.start
                )));
            }
            l.values
        }
        None => synthetic_load(scenarios.hourly.len(), spec.seed).values,
    };
    let horizon = spec.horizon.unwrap_or(load.len().min(scenarios.hourly.len()));
    if horizon > load.len() {
        return Err(Error::Validation(format!(
            "horizon {horizon} h exceeds the {} hours of load",
            load.len()
        )));
    }
    truncate_scenarios(&mut scenarios, horizon, &irr_source)?;
    let mut inputs = SizingInputs::new(
        load[..horizon].to_vec(),
        scenarios.hourly_mean.clone(),
        scenarios.hourly.clone(),
        case.plant.clone(),
        case.economics.clone(),
    );
    inputs.options = case.build;
    Ok(PreparedStudy {
        case,
        scenarios,
        inputs,
    })
}

/// Result of one mode.
#[derive(Debug, Clone)]
pub struct ModeOutcome {
    pub report: StudyReport,
    pub dispatch: Option<Dispatch>,
    pub dir: PathBuf,
    pub seconds: f64,
}

/// Replay the worst case of a dispatch and write one trace per run.
pub fn simulate_dispatch(
    dispatch: &Dispatch,
    hulls: &[RampHull],
    case: &CaseConfig,
    settings: &SimSettings,
    trace_dir: Option<&Path>,
) -> Result<SimulationSummary> {
    let wc = worst_case_configs(dispatch, hulls, &case.plant, settings)?;
    if let Some(d) = trace_dir {
        create_dir(d)?;
    }
    let mut runs = Vec::with_capacity(wc.runs.len());
    for (k, (ramp, cfg)) in wc.runs.iter().enumerate() {
        let result = simulate(cfg);
        let verdict = verify_run(&result, &case.plant.freq)?;
        if let Some(d) = trace_dir {
            let trace = match &result {
                Ok(t) => Some(t),
                Err(Error::Unstable { trace, .. }) => Some(trace.as_ref()),
                Err(_) => None,
            };
            if let Some(t) = trace {
                t.save_csv(&d.join(format!("trace_{k}.csv")))?;
            }
        }
        runs.push(RampVerdict {
            ramp: ramp.map(|e| (e.duration, e.drop)),
            verdict,
        });
    }
    Ok(SimulationSummary {
        hour: wc.hour,
        p_sud_mw: wc.p_sud,
        requirement_mw: wc.requirement,
        runs,
    })
}

fn write_solution_csv(model: &SizingModel, values: &[f64], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create_file(path)?);
    let err = |e: csv::Error| Error::Validation(format!("{}: {e}", path.display()));
    w.write_record(["name", "value"]).map_err(err)?;
    for (v, x) in model.problem.variables.iter().zip(values) {
        w.write_record([v.name.as_str(), &x.to_string()]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Build, export, solve, check and (optionally) simulate one mode.
pub fn run_mode(
    mode: ScenarioMode,
    prepared: &PreparedStudy,
    spec: &StudySpec,
) -> Result<ModeOutcome> {
    let started = Instant::now();
    let dir = spec.out_dir.join(mode.as_str());
    create_dir(&dir)?;
    let model = build_problem(mode, &prepared.inputs)?;
    export_mps(&model.problem)?.write_files(&dir, "model")?;
    let sol = solve(&model.problem, &spec.solver)?;

    if !sol.has_assignment() {
        let report = StudyReport::unsolved(mode, sol.status, prepared.inputs.horizon);
        write_json(&dir.join("report.json"), &report)?;
        return Ok(ModeOutcome {
            report,
            dispatch: None,
            dir,
            seconds: started.elapsed().as_secs_f64(),
        });
    }

    write_solution_csv(&model, &sol.values, &dir.join("solution.csv"))?;
    let check = check_feasible(&model.problem, &sol.values, CHECK_TOL)?;
    check.write_csv(create_file(&dir.join("violations.csv"))?)?;
    let dispatch = model.dispatch(&sol.values)?;
    write_json(&dir.join("dispatch.json"), &dispatch)?;

    let mut report = compute_indicators(&sol, &model, &prepared.inputs)?;
    report.feasibility = Some(FeasibilitySummary::from(&check));
    if spec.simulate && mode.has_reserves() {
        report.simulation = Some(simulate_dispatch(
            &dispatch,
            &prepared.inputs.hulls,
            &prepared.case,
            &prepared.case.sim,
            Some(&dir.join("sim")),
        )?);
    }
    write_json(&dir.join("report.json"), &report)?;
    Ok(ModeOutcome {
        report,
        dispatch: Some(dispatch),
        dir,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Outcome of `size`: per-mode results in the requested order.
#[derive(Debug, Clone)]
pub struct StudyOutcome {
    pub prepared: PreparedStudy,
    pub modes: Vec<ModeOutcome>,
}

impl StudyOutcome {
    pub fn pass(&self) -> bool {
        self.modes.iter().all(|m| m.report.checks_pass())
    }

    pub fn reports(&self) -> Vec<StudyReport> {
        self.modes.iter().map(|m| m.report.clone()).collect()
    }
}

/// Run every requested mode concurrently and write the combined report.
pub fn cmd_size(spec: &StudySpec) -> Result<StudyOutcome> {
    let prepared = prepare(spec)?;
    create_dir(&spec.out_dir)?;
    write_hull_csv(
        &prepared.scenarios.hourly,
        create_file(&spec.out_dir.join("hulls_hourly.csv"))?,
    )?;
    write_hull_csv(
        [&prepared.scenarios.global],
        create_file(&spec.out_dir.join("hull_global.csv"))?,
    )?;

    let results: Vec<Result<ModeOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = spec
            .modes
            .iter()
            .map(|&mode| {
                let prepared = &prepared;
                s.spawn(move || run_mode(mode, prepared, spec))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join().unwrap_or_else(|_| {
                    Err(Error::Validation("a sizing thread panicked".into()))
                })
            })
            .collect()
    });
    let modes = results.into_iter().collect::<Result<Vec<_>>>()?;
    let outcome = StudyOutcome { prepared, modes };
    let reports = outcome.reports();
    StudyDocument::new(reports.clone()).save_json(&spec.out_dir.join("report.json"))?;
    write_indicator_table(&reports, create_file(&spec.out_dir.join("indicators.csv"))?)?;
    Ok(outcome)
}

/// Replay a saved dispatch against a hull file.
pub fn cmd_simulate(
    dispatch_path: &Path,
    hull_path: &Path,
    config: Option<&Path>,
    robust: bool,
    dt: Option<f64>,
    out_dir: &Path,
) -> Result<SimulationSummary> {
    let mut case = load_case(config)?;
    apply_overrides(&mut case, robust, dt)?;
    let text = std::fs::read_to_string(dispatch_path).map_err(|e| Error::io(dispatch_path, e))?;
    let dispatch: Dispatch = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: dispatch_path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if dispatch.commitment.len() != case.plant.generators.len() {
        return Err(Error::Validation(format!(
            "{}: dispatch has {} units but the case has {}",
            dispatch_path.display(),
            dispatch.commitment.len(),
            case.plant.generators.len()
        )));
    }
    let events = load_hull_csv(hull_path)?;
    let hulls = group_by_hour(&events, dispatch.horizon)
        .map_err(|e| Error::Validation(format!("{}: {e}", hull_path.display())))?;
    create_dir(out_dir)?;
    let summary = simulate_dispatch(&dispatch, &hulls, &case, &case.sim, Some(out_dir))?;
    write_json(&out_dir.join("verdicts.json"), &summary)?;
    Ok(summary)
}

/// Re-tabulate a saved study report. Returns the document and whether all checks passed.
pub fn cmd_report<W: Write>(report_json: &Path, table: W) -> Result<(StudyDocument, bool)> {
    let doc = StudyDocument::load_json(report_json)?;
    write_indicator_table(&doc.reports, table)?;
    let pass = !doc.reports.is_empty() && doc.reports.iter().all(StudyReport::checks_pass);
    Ok((doc, pass))
}
