//! Techno-economic indicators of a solved sizing problem.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dispatch, ScenarioMode, SizingInputs, SizingModel};
use crate::sim::LimitVerdict;
use crate::solve::{Solution, SolveStatus, ViolationReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySummary {
    pub feasible: bool,
    pub violations: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    /// Name of the worst violated row or variable.
    #[serde(default)]
    pub worst: Option<String>,
}

impl From<&ViolationReport> for FeasibilitySummary {
    fn from(r: &ViolationReport) -> Self {
        FeasibilitySummary {
            feasible: r.is_feasible(),
            violations: r.violations.len(),
            max_violation: r.max_violation(),
            tolerance: r.tolerance,
            worst: r
                .violations
                .iter()
                .min_by(|a, b| a.slack.total_cmp(&b.slack))
                .map(|v| v.name.clone()),
        }
    }
}

/// Outcome of one worst-case simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampVerdict {
    /// Ramp duration and irradiance drop, absent for a trip-only run.
    pub ramp: Option<(f64, f64)>,
    pub verdict: LimitVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub hour: usize,
    pub p_sud_mw: f64,
    pub requirement_mw: f64,
    pub runs: Vec<RampVerdict>,
}

impl SimulationSummary {
    pub fn pass(&self) -> bool {
        self.runs.iter().all(|r| r.verdict.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub mode: ScenarioMode,
    pub status: SolveStatus,
    pub horizon: usize,
    pub pv_installed_mw: f64,
    pub bat_installed_mw: f64,
    pub pv_area_m2: f64,
    pub capex_musd: f64,
    /// Fuel burned per year (config volume unit).
    pub fuel_per_year: f64,
    /// CO2 per year (config mass unit).
    pub co2_per_year: f64,
    pub lcoe_usd_per_mwh: f64,
    pub total_cost_musd: f64,
    pub objective: f64,
    pub gap: f64,
    pub feasibility: Option<FeasibilitySummary>,
    pub simulation: Option<SimulationSummary>,
    pub warnings: Vec<String>,
}

impl StudyReport {
    /// Placeholder for a mode that produced no assignment; all indicators are zero.
    pub fn unsolved(mode: ScenarioMode, status: SolveStatus, horizon: usize) -> Self {
        StudyReport {
            mode,
            status,
            horizon,
            pv_installed_mw: 0.0,
            bat_installed_mw: 0.0,
            pv_area_m2: 0.0,
            capex_musd: 0.0,
            fuel_per_year: 0.0,
            co2_per_year: 0.0,
            lcoe_usd_per_mwh: 0.0,
            total_cost_musd: 0.0,
            objective: 0.0,
            gap: 0.0,
            feasibility: None,
            simulation: None,
            warnings: vec![format!("no solution: solver status {status:?}")],
        }
    }

    /// Feasibility clean and, when simulated, every run within limits.
    pub fn checks_pass(&self) -> bool {
        self.status.has_solution()
            && self.feasibility.as_ref().is_some_and(|f| f.feasible)
            && self.simulation.as_ref().is_none_or(SimulationSummary::pass)
    }
}

/// Yearly fuel use of a dispatch, scaled from the horizon by the period weight.
pub fn yearly_fuel(dispatch: &Dispatch, inputs: &SizingInputs) -> f64 {
    let gens = &inputs.plant.generators;
    let mut fuel = 0.0;
    for (m, g) in gens.iter().enumerate() {
        for h in 0..dispatch.horizon {
            if dispatch.commitment[m][h] == 1 {
                fuel += g.fuel_slope() * dispatch.gen_power[m][h] + g.fuel_intercept();
            }
        }
    }
    fuel * inputs.period_weight()
}

/// Indicators for a solved model. Refuses solutions without an assignment.
pub fn compute_indicators(
    sol: &Solution,
    model: &SizingModel,
    inputs: &SizingInputs,
) -> Result<StudyReport> {
    if !sol.has_assignment() || !matches!(sol.status, SolveStatus::Optimal | SolveStatus::FeasibleWithinGap | SolveStatus::IterationLimit) {
        return Err(Error::Validation(format!(
            "no indicators for a solution with status {:?}",
            sol.status
        )));
    }
    let d = model.dispatch(&sol.values)?;
    let econ = &inputs.econ;
    let annuity = econ.annuity_factor();
    let capex = econ.capex_musd(d.pv_installed, d.bat_installed);
    let fuel = yearly_fuel(&d, inputs);
    let co2 = fuel * econ.co2_factor;
    let total = capex + annuity * (fuel * econ.c_fuel + co2 * econ.c_co2) * 1e-6;
    let energy: f64 = inputs.load.iter().sum::<f64>() * inputs.period_weight();
    let lcoe = total * 1e6 / (annuity * energy);
    let mut warnings = Vec::new();
    if model.mode == ScenarioMode::NoFc {
        warnings.push("reserve constraints omitted: frequency stability is not ensured".into());
    }
    if sol.status == SolveStatus::IterationLimit {
        warnings.push(format!("solver limit reached with gap {:.4}", sol.gap));
    }
    Ok(StudyReport {
        mode: model.mode,
        status: sol.status,
        horizon: d.horizon,
        pv_installed_mw: d.pv_installed,
        bat_installed_mw: d.bat_installed,
        pv_area_m2: d.pv_area_m2.iter().copied().fold(0.0, f64::max),
        capex_musd: capex,
        fuel_per_year: fuel,
        co2_per_year: co2,
        lcoe_usd_per_mwh: lcoe,
        total_cost_musd: total,
        objective: sol.objective,
        gap: sol.gap,
        feasibility: None,
        simulation: None,
        warnings,
    })
}

/// Reports of one study run. The timestamp is the only field that varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDocument {
    pub generated_at: String,
    pub reports: Vec<StudyReport>,
}

impl StudyDocument {
    pub fn new(reports: Vec<StudyReport>) -> Self {
        StudyDocument {
            generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            reports,
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

const TABLE_ROWS: [&str; 6] = [
    "P_PV_inst_MW",
    "P_bat_inst_MW",
    "capex_MUSD",
    "co2_per_year",
    "lcoe_USD_per_MWh",
    "total_cost_MUSD",
];

/// One row per indicator, one column per scenario.
pub fn write_indicator_table<W: Write>(reports: &[StudyReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Validation(format!("writing indicator table: {e}"));
    let mut header = vec!["indicator".to_string()];
    header.extend(reports.iter().map(|r| r.mode.to_string()));
    w.write_record(&header).map_err(err)?;
    for (i, name) in TABLE_ROWS.iter().enumerate() {
        let mut row = vec![name.to_string()];
        row.extend(reports.iter().map(|r| {
            let v = match i {
                0 => r.pv_installed_mw,
                1 => r.bat_installed_mw,
                2 => r.capex_musd,
                3 => r.co2_per_year,
                4 => r.lcoe_usd_per_mwh,
                _ => r.total_cost_musd,
            };
            format!("{v:.2}")
        }));
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("writing indicator table: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CaseConfig;
    use crate::model::build_problem;
    use crate::solve::{solve, SolverOptions};

    fn small(mode: ScenarioMode) -> (SizingInputs, SizingModel, Solution) {
        let case = CaseConfig::reference();
        let inputs = SizingInputs::new(
            vec![110.0, 120.0],
            vec![0.0, 0.6],
            vec![],
            case.plant,
            case.economics,
        );
        let model = build_problem(mode, &inputs).unwrap();
        let sol = solve(&model.problem, &SolverOptions::with_gap(1e-6)).unwrap();
        (inputs, model, sol)
    }

    #[test]
    fn total_cost_matches_objective() {
        for mode in [ScenarioMode::Baseline, ScenarioMode::NoFc] {
            let (inputs, model, sol) = small(mode);
            let r = compute_indicators(&sol, &model, &inputs).unwrap();
            assert!((r.total_cost_musd - sol.objective).abs() < 1e-6 * sol.objective.abs());
            assert!((r.co2_per_year - r.fuel_per_year * inputs.econ.co2_factor).abs() < 1e-9 * r.co2_per_year);
            assert_eq!(r.warnings.is_empty(), mode == ScenarioMode::Baseline);
        }
    }

    #[test]
    fn refuses_infeasible() {
        let (inputs, model, mut sol) = small(ScenarioMode::Baseline);
        sol.status = SolveStatus::Infeasible;
        sol.values.clear();
        let err = compute_indicators(&sol, &model, &inputs).unwrap_err();
        assert!(err.to_string().contains("Infeasible"));
    }

    #[test]
    fn costs_scale_jointly() {
        let (mut inputs, model, sol) = small(ScenarioMode::NoFc);
        let a = compute_indicators(&sol, &model, &inputs).unwrap();
        let e = &mut inputs.econ;
        e.c_fuel *= 3.0;
        e.c_co2 *= 3.0;
        e.c_pv *= 3.0;
        e.c_bat *= 3.0;
        let b = compute_indicators(&sol, &model, &inputs).unwrap();
        assert!((b.lcoe_usd_per_mwh - 3.0 * a.lcoe_usd_per_mwh).abs() < 1e-9 * b.lcoe_usd_per_mwh);
        assert!((b.total_cost_musd - 3.0 * a.total_cost_musd).abs() < 1e-9 * b.total_cost_musd);
    }

    #[test]
    fn table_layout() {
        let (inputs, model, sol) = small(ScenarioMode::Baseline);
        let r = compute_indicators(&sol, &model, &inputs).unwrap();
        let mut buf = Vec::new();
        write_indicator_table(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "indicator,baseline");
        assert_eq!(lines[1], "P_PV_inst_MW,0.00");
        assert_eq!(lines.len(), 7);
    }
}
