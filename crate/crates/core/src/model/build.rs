//! Assembly of the sizing MILP.
//!
//! Decision variables per generator `m` and hour `h`: dispatch `P[m,h]`,
//! commitment `rho[m,h]` (binary), start-up/shut-down indicators `u`, `v`,
//! and assigned FCR `Pfcr[m,h]`. Per hour: injected PV `Pinj[h]`, sudden and
//! PV disturbance terms `Psud[h]`, `Ppvb[h]`, and battery FCR `Pbat[h]`.
//! Global: PV area `A_pv` (thousand m², so `I * A` is in MW), installed PV
//! `Ppv_inst` and installed battery `Pbat_inst` (MW).
//!
//! The objective is in M$: installation costs plus the discounted fuel bill
//! (fuel price including CO2) of one representative period scaled to a year.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::problem::{MilpProblem, Relation, VarId};
use super::ScenarioMode;
use crate::domain::{fcr_capacity, EconomicParams, PlantConfig};
use crate::error::{Error, Result};
use crate::ramps::RampHull;

pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// One PV area variable per hour instead of a single farm area.
    #[serde(default)]
    pub area_per_hour: bool,
    /// Weight turning the horizon into one year; `8760 / horizon` when absent.
    #[serde(default)]
    pub period_weight: Option<f64>,
    /// Add redundant rows and variables that leave integer solutions
    /// unchanged and tighten the relaxation: start/stop windows for the
    /// minimum up and down times, and per-hour copies by committed unit count.
    #[serde(default = "default_true")]
    pub tighten: bool,
}

fn default_true() -> bool {
    true
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            area_per_hour: false,
            period_weight: None,
            tighten: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingInputs {
    pub horizon: usize,
    /// Load per hour (MW).
    pub load: Vec<f64>,
    /// Mean irradiance per hour (kW/m²).
    pub irradiance_mean: Vec<f64>,
    /// Worst-case ramp envelope per hour. May be empty for modes without reserves.
    pub hulls: Vec<RampHull>,
    pub plant: PlantConfig,
    pub econ: EconomicParams,
    pub options: BuildOptions,
}

impl SizingInputs {
    pub fn new(
        load: Vec<f64>,
        irradiance_mean: Vec<f64>,
        hulls: Vec<RampHull>,
        plant: PlantConfig,
        econ: EconomicParams,
    ) -> Self {
        SizingInputs {
            horizon: load.len(),
            load,
            irradiance_mean,
            hulls,
            plant,
            econ,
            options: BuildOptions::default(),
        }
    }

    pub fn period_weight(&self) -> f64 {
        self.options
            .period_weight
            .unwrap_or(HOURS_PER_YEAR / self.horizon.max(1) as f64)
    }

    /// Present value in M$ of one unit of fuel volume burned every hour of the horizon.
    pub fn fuel_cost_weight(&self) -> f64 {
        self.econ.annuity_factor() * self.period_weight() * self.econ.fuel_price() * 1e-6
    }

    pub fn validate(&self, mode: ScenarioMode) -> Result<()> {
        self.plant.validate()?;
        self.econ.validate()?;
        if self.horizon == 0 {
            return Err(Error::Validation("horizon must be at least one hour".into()));
        }
        let mut bad = Vec::new();
        if self.load.len() != self.horizon {
            bad.push(format!("load has {} values", self.load.len()));
        }
        if self.irradiance_mean.len() != self.horizon {
            bad.push(format!("irradiance_mean has {} values", self.irradiance_mean.len()));
        }
        let hulls_optional = !mode.has_reserves() && self.hulls.is_empty();
        if !hulls_optional && self.hulls.len() != self.horizon {
            bad.push(format!("hulls has {} entries", self.hulls.len()));
        }
        if !bad.is_empty() {
            return Err(Error::Validation(format!(
                "series lengths differ from horizon {}: {}",
                self.horizon,
                bad.join("; ")
            )));
        }
        if let Some(h) = self.load.iter().position(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::Validation(format!(
                "load at hour {h} is {}; loads must be positive",
                self.load[h]
            )));
        }
        if let Some(h) = self
            .irradiance_mean
            .iter()
            .position(|i| !(*i >= 0.0 && i.is_finite()))
        {
            return Err(Error::Validation(format!(
                "irradiance at hour {h} is {}",
                self.irradiance_mean[h]
            )));
        }
        for hull in &self.hulls {
            hull.check_invariants()?;
        }
        if let Some(w) = self.options.period_weight {
            if !(w > 0.0) {
                return Err(Error::Validation(format!("period weight must be positive, got {w}")));
            }
        }
        Ok(())
    }
}

/// Constraint families of the sizing problem, in build order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    Balance,
    PvInjection,
    PvInstalled,
    FcrCap,
    GenMax,
    GenMin,
    StatusChange,
    StartStopExclusive,
    MinUp,
    MinDown,
    MinUpWindow,
    MinDownWindow,
    SuddenLower,
    PvDisturbance,
    PvDisturbanceCap,
    FrrUp,
    FrrDown,
    BatteryFcr,
    BatteryTrip,
    BatteryInstalled,
    CountLink,
    CountCopy,
}

/// Where each decision symbol lives in the problem. Generator-indexed tables are `[m][h]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelIndex {
    pub gen_power: Vec<Vec<VarId>>,
    pub commitment: Vec<Vec<VarId>>,
    pub startup: Vec<Vec<VarId>>,
    pub shutdown: Vec<Vec<VarId>>,
    pub gen_fcr: Option<Vec<Vec<VarId>>>,
    /// One entry, or one per hour with `area_per_hour`.
    pub pv_area: Option<Vec<VarId>>,
    pub pv_injected: Option<Vec<VarId>>,
    pub pv_installed: Option<VarId>,
    pub bat_fcr: Option<Vec<VarId>>,
    pub bat_installed: Option<VarId>,
    pub sudden: Option<Vec<VarId>>,
    pub pv_disturbance: Option<Vec<VarId>>,
    /// Auxiliary variables of the per-count copies.
    #[serde(default)]
    pub count_aux: Vec<VarId>,
    pub rows: BTreeMap<ConstraintFamily, Vec<usize>>,
}

impl ModelIndex {
    pub fn area(&self, hour: usize) -> Option<VarId> {
        self.pv_area
            .as_ref()
            .map(|a| if a.len() == 1 { a[0] } else { a[hour] })
    }

    pub fn rows_of(&self, family: ConstraintFamily) -> &[usize] {
        self.rows.get(&family).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingModel {
    pub mode: ScenarioMode,
    pub problem: MilpProblem,
    pub index: ModelIndex,
    /// FCR cap per generator (MW), from droop, band and base.
    pub fcr_caps: Vec<f64>,
}

struct Builder {
    problem: MilpProblem,
    rows: BTreeMap<ConstraintFamily, Vec<usize>>,
}

impl Builder {
    fn row(
        &mut self,
        family: ConstraintFamily,
        name: String,
        terms: Vec<(VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        let idx = self.problem.add_constraint(name, terms, relation, rhs);
        self.rows.entry(family).or_default().push(idx);
    }
}

/// Build the sizing MILP for one scenario mode.
pub fn build_problem(mode: ScenarioMode, inputs: &SizingInputs) -> Result<SizingModel> {
    use ConstraintFamily::*;
    inputs.validate(mode)?;

    let plant = &inputs.plant;
    let gens = &plant.generators;
    let n_h = inputs.horizon;
    let fuel_w = inputs.fuel_cost_weight();
    let d_pv = plant.d_pv;
    let fcr_caps = gens
        .iter()
        .map(|g| fcr_capacity(g, plant))
        .collect::<Result<Vec<_>>>()?;

    let mut b = Builder {
        problem: MilpProblem::new(format!("sizing_{}", mode.as_str())),
        rows: BTreeMap::new(),
    };
    let mut index = ModelIndex::default();

    // generator variables
    for (m, g) in gens.iter().enumerate() {
        let mut pw = Vec::with_capacity(n_h);
        let mut rho = Vec::with_capacity(n_h);
        let mut up = Vec::with_capacity(n_h);
        let mut dn = Vec::with_capacity(n_h);
        for h in 0..n_h {
            pw.push(b.problem.add_var(format!("P[{m},{h}]"), 0.0, g.p_max, fuel_w * g.fuel_slope()));
            rho.push(b.problem.add_binary(format!("rho[{m},{h}]"), fuel_w * g.fuel_intercept()));
            up.push(b.problem.add_var(format!("u[{m},{h}]"), 0.0, 1.0, 0.0));
            dn.push(b.problem.add_var(format!("v[{m},{h}]"), 0.0, 1.0, 0.0));
        }
        index.gen_power.push(pw);
        index.commitment.push(rho);
        index.startup.push(up);
        index.shutdown.push(dn);
    }
    if mode.has_gen_fcr() {
        let fcr = gens
            .iter()
            .enumerate()
            .map(|(m, _)| {
                (0..n_h)
                    .map(|h| b.problem.add_var(format!("Pfcr[{m},{h}]"), 0.0, fcr_caps[m], 0.0))
                    .collect()
            })
            .collect();
        index.gen_fcr = Some(fcr);
    }

    // PV variables
    if mode.has_pv() {
        let areas = if inputs.options.area_per_hour {
            (0..n_h)
                .map(|h| b.problem.add_var(format!("A_pv[{h}]"), 0.0, f64::INFINITY, 0.0))
                .collect()
        } else {
            vec![b.problem.add_var("A_pv", 0.0, f64::INFINITY, 0.0)]
        };
        index.pv_area = Some(areas);
        index.pv_installed = Some(b.problem.add_var(
            "Ppv_inst",
            0.0,
            f64::INFINITY,
            inputs.econ.c_pv * 1e-3,
        ));
        index.pv_injected = Some(
            (0..n_h)
                .map(|h| b.problem.add_var(format!("Pinj[{h}]"), 0.0, f64::INFINITY, 0.0))
                .collect(),
        );
    }

    // reserve variables
    if mode.has_reserves() {
        let p_sud_max = gens.iter().map(|g| g.p_max).fold(f64::INFINITY, f64::min);
        index.sudden = Some(
            (0..n_h)
                .map(|h| b.problem.add_var(format!("Psud[{h}]"), 0.0, p_sud_max, 0.0))
                .collect(),
        );
        index.pv_disturbance = Some(
            (0..n_h)
                .map(|h| b.problem.add_var(format!("Ppvb[{h}]"), 0.0, f64::INFINITY, 0.0))
                .collect(),
        );
        index.bat_fcr = Some(
            (0..n_h)
                .map(|h| b.problem.add_var(format!("Pbat[{h}]"), 0.0, f64::INFINITY, 0.0))
                .collect(),
        );
        index.bat_installed = Some(b.problem.add_var(
            "Pbat_inst",
            0.0,
            f64::INFINITY,
            inputs.econ.c_bat * 1e-3,
        ));
    }

    for h in 0..n_h {
        let irr = inputs.irradiance_mean[h];

        // power balance
        let mut terms: Vec<(VarId, f64)> = index.gen_power.iter().map(|p| (p[h], 1.0)).collect();
        if let Some(inj) = &index.pv_injected {
            terms.push((inj[h], 1.0));
        }
        b.row(Balance, format!("balance[{h}]"), terms, Relation::Ge, inputs.load[h]);

        // PV availability and installed capacity
        if let (Some(inj), Some(area), Some(inst)) =
            (&index.pv_injected, index.area(h), index.pv_installed)
        {
            b.row(
                PvInjection,
                format!("pv_inj[{h}]"),
                vec![(inj[h], 1.0), (area, -d_pv * irr)],
                Relation::Le,
                0.0,
            );
            b.row(
                PvInstalled,
                format!("pv_inst[{h}]"),
                vec![(inst, 1.0), (area, -irr)],
                Relation::Ge,
                0.0,
            );
        }

        for (m, g) in gens.iter().enumerate() {
            let p = index.gen_power[m][h];
            let rho = index.commitment[m][h];
            let fcr = index.gen_fcr.as_ref().map(|f| f[m][h]);

            if let Some(fcr) = fcr {
                b.row(
                    FcrCap,
                    format!("fcr_cap[{m},{h}]"),
                    vec![(fcr, 1.0), (rho, -fcr_caps[m])],
                    Relation::Le,
                    0.0,
                );
            }
            let mut hi = vec![(p, 1.0), (rho, -g.p_max)];
            let mut lo = vec![(p, 1.0), (rho, -g.p_min)];
            if let Some(fcr) = fcr {
                hi.push((fcr, 1.0));
                lo.push((fcr, -1.0));
            }
            b.row(GenMax, format!("gen_max[{m},{h}]"), hi, Relation::Le, 0.0);
            b.row(GenMin, format!("gen_min[{m},{h}]"), lo, Relation::Ge, 0.0);

            // commitment logic; every unit has been on for long enough before h = 0
            let u = index.startup[m][h];
            let v = index.shutdown[m][h];
            let mut status = vec![(u, 1.0), (v, -1.0), (rho, -1.0)];
            let status_rhs = if h == 0 {
                -1.0
            } else {
                status.push((index.commitment[m][h - 1], 1.0));
                0.0
            };
            b.row(StatusChange, format!("status[{m},{h}]"), status, Relation::Eq, status_rhs);
            b.row(
                StartStopExclusive,
                format!("startstop[{m},{h}]"),
                vec![(u, 1.0), (v, 1.0)],
                Relation::Le,
                1.0,
            );

            let window = |t: u32| -> (Vec<(VarId, f64)>, f64) {
                let t = t as usize;
                let first = h as isize - t as isize;
                let history = (-first).max(0) as f64;
                let terms = (first.max(0) as usize..h)
                    .map(|k| (index.commitment[m][k], 1.0))
                    .collect();
                (terms, history)
            };
            let (mut up_terms, history) = window(g.t_up);
            if !up_terms.is_empty() {
                up_terms.push((v, -(g.t_up as f64)));
                b.row(MinUp, format!("min_up[{m},{h}]"), up_terms, Relation::Ge, -history);
            }
            let (mut dn_terms, history) = window(g.t_dn);
            dn_terms.push((u, g.t_dn as f64));
            b.row(
                MinDown,
                format!("min_dn[{m},{h}]"),
                dn_terms,
                Relation::Le,
                g.t_dn as f64 - history,
            );
            if inputs.options.tighten {
                let since = |t: u32| (h + 1).saturating_sub(t as usize)..=h;
                let mut terms: Vec<(VarId, f64)> =
                    since(g.t_up).map(|k| (index.startup[m][k], 1.0)).collect();
                terms.push((rho, -1.0));
                b.row(MinUpWindow, format!("min_up_w[{m},{h}]"), terms, Relation::Le, 0.0);
                let mut terms: Vec<(VarId, f64)> =
                    since(g.t_dn).map(|k| (index.shutdown[m][k], 1.0)).collect();
                terms.push((rho, 1.0));
                b.row(MinDownWindow, format!("min_dn_w[{m},{h}]"), terms, Relation::Le, 1.0);
            }
        }

        if !mode.has_reserves() {
            continue;
        }
        let sud = index.sudden.as_ref().expect("reserve vars")[h];
        let pvb = index.pv_disturbance.as_ref().expect("reserve vars")[h];
        let bat = index.bat_fcr.as_ref().expect("reserve vars")[h];
        let bat_inst = index.bat_installed.expect("reserve vars");
        let area = index.area(h).expect("pv vars");
        let inj = index.pv_injected.as_ref().expect("pv vars")[h];
        let hull = &inputs.hulls[h];

        // sudden disturbance: the largest dispatched unit may trip
        for (m, p) in index.gen_power.iter().enumerate() {
            b.row(
                SuddenLower,
                format!("sudden[{m},{h}]"),
                vec![(sud, 1.0), (p[h], -1.0)],
                Relation::Ge,
                0.0,
            );
        }

        // worst-case PV disturbance over the hour's ramp envelope
        for (r, ramp) in hull.events.iter().enumerate() {
            b.row(
                PvDisturbance,
                format!("pv_dist[{h},{r}]"),
                vec![(pvb, 1.0), (area, -d_pv * ramp.drop)],
                Relation::Ge,
                0.0,
            );
        }
        b.row(
            PvDisturbanceCap,
            format!("pv_dist_cap[{h}]"),
            vec![(pvb, 1.0), (inj, -1.0)],
            Relation::Le,
            0.0,
        );

        // FRR headroom in both directions
        let mut up: Vec<(VarId, f64)> = vec![(sud, -1.0), (pvb, -1.0)];
        let mut down: Vec<(VarId, f64)> = vec![(sud, -1.0), (pvb, -1.0)];
        for (m, g) in gens.iter().enumerate() {
            up.push((index.commitment[m][h], g.p_max));
            up.push((index.gen_power[m][h], -1.0));
            down.push((index.gen_power[m][h], 1.0));
            down.push((index.commitment[m][h], -g.p_min));
        }
        b.row(FrrUp, format!("frr_up[{h}]"), up, Relation::Ge, 0.0);
        b.row(FrrDown, format!("frr_dn[{h}]"), down, Relation::Ge, 0.0);

        // battery FCR for the trip alone, then trip + ramp deficit not covered
        // by GT FCR and FRR ramping
        let mut terms = vec![(bat, 1.0), (sud, -1.0)];
        if mode == ScenarioMode::DynamicFc {
            terms.extend(index.gen_fcr.as_ref().expect("fcr vars").iter().map(|f| (f[h], 1.0)));
        }
        b.row(BatteryTrip, format!("bat_trip[{h}]"), terms, Relation::Ge, 0.0);
        for (r, ramp) in hull.events.iter().enumerate() {
            let mut terms = vec![(bat, 1.0), (sud, -1.0), (area, -d_pv * ramp.drop)];
            for (m, g) in gens.iter().enumerate() {
                terms.push((index.commitment[m][h], g.rr_frr * ramp.duration));
                if mode == ScenarioMode::DynamicFc {
                    let fcr = index.gen_fcr.as_ref().expect("fcr vars")[m][h];
                    terms.push((fcr, 1.0));
                }
            }
            b.row(BatteryFcr, format!("bat_fcr[{h},{r}]"), terms, Relation::Ge, 0.0);
        }
        b.row(
            BatteryInstalled,
            format!("bat_inst[{h}]"),
            vec![(bat_inst, 1.0), (bat, -1.0)],
            Relation::Ge,
            0.0,
        );

        if inputs.options.tighten {
            add_count_copies(&mut b, &mut index, mode, inputs, &fcr_caps, h);
        }
    }

    index.rows = b.rows;
    Ok(SizingModel {
        mode,
        problem: b.problem,
        index,
        fcr_caps,
    })
}

/// Sum of the `n` largest (or smallest) entries.
fn extreme_sum(values: &[f64], n: usize, largest: bool) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    if largest {
        v.reverse();
    }
    v.iter().take(n).sum()
}

/// Disaggregate hour `h` by the number `n` of committed units.
///
/// Each copy carries the hourly quantities under a weight `y[n]` and is
/// bounded with aggregate unit data for `n` units (the `n` largest limits,
/// the `n` smallest minima). With `y` at a vertex the copy equals the
/// original hour, so no integer solution is cut off. In the relaxation the
/// balance, FRR and trip rows must hold in every copy, which rules out
/// mixing a feasible unit count with an infeasible one.
fn add_count_copies(
    b: &mut Builder,
    index: &mut ModelIndex,
    mode: ScenarioMode,
    inputs: &SizingInputs,
    fcr_caps: &[f64],
    h: usize,
) {
    use ConstraintFamily::{CountCopy, CountLink};
    let gens = &inputs.plant.generators;
    let d_pv = inputs.plant.d_pv;
    let irr = inputs.irradiance_mean[h];
    let hull = &inputs.hulls[h];
    let p_max: Vec<f64> = gens.iter().map(|g| g.p_max).collect();
    let p_min: Vec<f64> = gens.iter().map(|g| g.p_min).collect();
    let rr: Vec<f64> = gens.iter().map(|g| g.rr_frr).collect();
    let p_sud_max = p_max.iter().copied().fold(f64::INFINITY, f64::min);
    let sud = index.sudden.as_ref().expect("reserve vars")[h];
    let pvb = index.pv_disturbance.as_ref().expect("reserve vars")[h];
    let bat = index.bat_fcr.as_ref().expect("reserve vars")[h];
    let inj = index.pv_injected.as_ref().expect("pv vars")[h];
    let area = index.area(h).expect("pv vars");
    let fcr = index.gen_fcr.as_ref().map(|f| f.iter().map(|row| row[h]).collect::<Vec<_>>());

    let mut link_y = Vec::new();
    let mut link_count: Vec<(VarId, f64)> = index.commitment.iter().map(|c| (c[h], 1.0)).collect();
    let mut link_s: Vec<(VarId, f64)> = index.gen_power.iter().map(|p| (p[h], 1.0)).collect();
    let mut link_f: Vec<(VarId, f64)> = fcr.iter().flatten().map(|&f| (f, 1.0)).collect();
    let mut link_j = vec![(inj, 1.0)];
    let mut link_q = vec![(sud, 1.0)];
    let mut link_w = vec![(pvb, 1.0)];
    let mut link_b = vec![(bat, 1.0)];
    let mut link_a = vec![(area, 1.0)];

    for n in 0..=gens.len() {
        let mut var = |name: &str, upper: f64| {
            let v = b.problem.add_var(format!("{name}[{h},{n}]"), 0.0, upper, 0.0);
            index.count_aux.push(v);
            v
        };
        let y = var("y", 1.0);
        let s = var("S", f64::INFINITY);
        let j = var("J", f64::INFINITY);
        let q = var("Q", p_sud_max);
        let w = var("W", f64::INFINITY);
        let bt = var("B", f64::INFINITY);
        let a = var("Acnt", f64::INFINITY);
        let f = fcr.as_ref().map(|_| var("F", f64::INFINITY));

        link_y.push((y, -1.0));
        link_count.push((y, -(n as f64)));
        link_s.push((s, -1.0));
        if let Some(f) = f {
            link_f.push((f, -1.0));
        }
        link_j.push((j, -1.0));
        link_q.push((q, -1.0));
        link_w.push((w, -1.0));
        link_b.push((bt, -1.0));
        link_a.push((a, -1.0));

        let top = extreme_sum(&p_max, n, true);
        let bottom = extreme_sum(&p_min, n, false);
        let mut row = |tag: &str, terms: Vec<(VarId, f64)>, rel: Relation| {
            b.row(CountCopy, format!("cnt_{tag}[{h},{n}]"), terms, rel, 0.0);
        };
        let mut hi = vec![(s, 1.0), (y, -top)];
        let mut lo = vec![(s, 1.0), (y, -bottom)];
        if let Some(f) = f {
            hi.push((f, 1.0));
            lo.push((f, -1.0));
            row("fcr", vec![(f, 1.0), (y, -extreme_sum(fcr_caps, n, true))], Relation::Le);
        }
        row("max", hi, Relation::Le);
        row("min", lo, Relation::Ge);
        row("bal", vec![(s, 1.0), (j, 1.0), (y, -inputs.load[h])], Relation::Ge);
        row("inj", vec![(j, 1.0), (a, -d_pv * irr)], Relation::Le);
        row("sud_cap", vec![(q, 1.0), (y, -p_sud_max)], Relation::Le);
        if n > 0 {
            row("sud", vec![(q, n as f64), (s, -1.0)], Relation::Ge);
        }
        row("pvb_cap", vec![(w, 1.0), (j, -1.0)], Relation::Le);
        row("frr_up", vec![(y, top), (s, -1.0), (q, -1.0), (w, -1.0)], Relation::Ge);
        row("frr_dn", vec![(s, 1.0), (y, -bottom), (q, -1.0), (w, -1.0)], Relation::Ge);
        let mut trip = vec![(bt, 1.0), (q, -1.0)];
        if mode == ScenarioMode::DynamicFc {
            if let Some(f) = f {
                trip.push((f, 1.0));
            }
        }
        row("trip", trip, Relation::Ge);
        for (r, ramp) in hull.events.iter().enumerate() {
            row(&format!("pvb{r}"), vec![(w, 1.0), (a, -d_pv * ramp.drop)], Relation::Ge);
            let mut terms = vec![
                (bt, 1.0),
                (q, -1.0),
                (a, -d_pv * ramp.drop),
                (y, extreme_sum(&rr, n, true) * ramp.duration),
            ];
            if mode == ScenarioMode::DynamicFc {
                if let Some(f) = f {
                    terms.push((f, 1.0));
                }
            }
            row(&format!("bat{r}"), terms, Relation::Ge);
        }
    }

    b.row(CountLink, format!("cnt_one[{h}]"), link_y, Relation::Eq, -1.0);
    for (tag, terms) in [
        ("n", link_count),
        ("S", link_s),
        ("F", link_f),
        ("J", link_j),
        ("Q", link_q),
        ("W", link_w),
        ("B", link_b),
        ("A", link_a),
    ] {
        if terms.len() > 1 {
            b.row(CountLink, format!("cnt_link_{tag}[{h}]"), terms, Relation::Eq, 0.0);
        }
    }
}

/// Solved decisions of a sizing model, laid out per hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dispatch {
    pub mode: ScenarioMode,
    pub horizon: usize,
    /// `[m][h]`, 0/1.
    pub commitment: Vec<Vec<u8>>,
    /// `[m][h]` (MW).
    pub gen_power: Vec<Vec<f64>>,
    /// `[m][h]` (MW); zeros when the mode has no generator FCR.
    pub gen_fcr: Vec<Vec<f64>>,
    pub pv_injected: Vec<f64>,
    /// PV area per hour (m²).
    pub pv_area_m2: Vec<f64>,
    pub pv_installed: f64,
    pub bat_installed: f64,
    pub bat_fcr: Vec<f64>,
    pub sudden: Vec<f64>,
    pub pv_disturbance: Vec<f64>,
}

impl SizingModel {
    /// Read a full assignment back into per-hour tables.
    pub fn dispatch(&self, values: &[f64]) -> Result<Dispatch> {
        if values.len() != self.problem.num_vars() {
            return Err(Error::Validation(format!(
                "assignment has {} values for {} variables",
                values.len(),
                self.problem.num_vars()
            )));
        }
        let n_h = self.index.commitment.first().map_or(0, Vec::len);
        let get = |v: VarId| values[v.0];
        let table = |t: &Vec<Vec<VarId>>| -> Vec<Vec<f64>> {
            t.iter().map(|row| row.iter().map(|&v| get(v)).collect()).collect()
        };
        let per_hour = |t: &Option<Vec<VarId>>| -> Vec<f64> {
            t.as_ref()
                .map_or_else(|| vec![0.0; n_h], |row| row.iter().map(|&v| get(v)).collect())
        };
        let n_m = self.index.gen_power.len();
        Ok(Dispatch {
            mode: self.mode,
            horizon: n_h,
            commitment: self
                .index
                .commitment
                .iter()
                .map(|row| row.iter().map(|&v| u8::from(get(v) > 0.5)).collect())
                .collect(),
            gen_power: table(&self.index.gen_power),
            gen_fcr: self
                .index
                .gen_fcr
                .as_ref()
                .map_or_else(|| vec![vec![0.0; n_h]; n_m], table),
            pv_injected: per_hour(&self.index.pv_injected),
            pv_area_m2: (0..n_h)
                .map(|h| self.index.area(h).map_or(0.0, |a| get(a) * 1e3))
                .collect(),
            pv_installed: self.index.pv_installed.map_or(0.0, get),
            bat_installed: self.index.bat_installed.map_or(0.0, get),
            bat_fcr: per_hour(&self.index.bat_fcr),
            sudden: per_hour(&self.index.sudden),
            pv_disturbance: per_hour(&self.index.pv_disturbance),
        })
    }
}
