//! Time-domain frequency simulation of the isolated grid.
//!
//! The grid is one aggregated rotating mass obeying the normalized swing
//! equation
//!
//! ```text
//! (1 + df) * M * d(df)/dt = (p_gen + p_bat - p_load) / s_base - D_load * df
//! ```
//!
//! with `M = sum(2 H p_max / s_base)` over the units providing inertia.
//! Each unit responds with an instantaneous droop share (FCR), capped at its
//! assigned reserve, plus a restoring share (FRR) that integrates toward
//! nominal frequency at no more than its ramp rate. The battery follows a
//! saturated droop. Integration is classical fixed-step RK4.

mod scenario;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{FrequencyLimits, GeneratorSpec};
use crate::error::{Error, Result};

pub use scenario::{binding_hour, worst_case_configs, WorstCase};

/// |df| above which the run is declared unstable (p.u.).
pub const INSTABILITY_THRESHOLD: f64 = 0.5;

/// Frequency deviation (p.u.) at which FRR reaches its full ramp rate.
pub const FRR_DEADBAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceEvent {
    /// Load increase of `magnitude` MW from time `t` on (a unit trip is a positive step).
    LoadStep { t: f64, magnitude: f64 },
    /// Generation lost linearly: `total_drop` MW over `duration` s starting at `t0`.
    PowerRamp {
        t0: f64,
        duration: f64,
        total_drop: f64,
    },
}

impl DisturbanceEvent {
    pub fn start(&self) -> f64 {
        match *self {
            DisturbanceEvent::LoadStep { t, .. } => t,
            DisturbanceEvent::PowerRamp { t0, .. } => t0,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            DisturbanceEvent::LoadStep { t, .. } => t,
            DisturbanceEvent::PowerRamp { t0, duration, .. } => t0 + duration,
        }
    }

    /// Extra load (MW) at time `t`; steps count only once `stepped` says so.
    fn load_at(&self, t: f64, stepped: bool) -> f64 {
        match *self {
            DisturbanceEvent::LoadStep { magnitude, .. } => {
                if stepped {
                    magnitude
                } else {
                    0.0
                }
            }
            DisturbanceEvent::PowerRamp {
                t0,
                duration,
                total_drop,
            } => total_drop * ((t - t0) / duration).clamp(0.0, 1.0),
        }
    }
}

/// Which governor shares are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernorMode {
    FcrOnly,
    FrrOnly,
    #[default]
    Combined,
}

/// A unit online during the simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommittedUnit {
    pub spec: GeneratorSpec,
    /// Pre-disturbance operating point (MW).
    pub p0: f64,
    /// Cap on the droop share (MW).
    pub fcr_limit: f64,
    /// Per-unit damping `D_m`.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub units: Vec<CommittedUnit>,
    /// Number of leading units whose inertia counts; all when absent.
    pub inertia_units: Option<usize>,
    /// Inertia units remaining after the first load step, when inertia drops with a trip.
    pub inertia_units_after_trip: Option<usize>,
    /// Battery power rating (MW).
    pub battery_power: f64,
    /// Battery droop (p.u.): full power at `|df| = battery_droop`.
    pub battery_droop: f64,
    pub freq: FrequencyLimits,
    /// Power base of the swing equation (MW).
    pub s_base: f64,
    pub dt: f64,
    pub t_end: f64,
    pub events: Vec<DisturbanceEvent>,
    /// Load damping (p.u.).
    pub load_damping: f64,
    pub governor: GovernorMode,
    /// Cap the droop share at `fcr_limit` and outputs at unit limits.
    /// Disable for a pure linear droop.
    pub saturate_fcr: bool,
    /// Time after the last event end before the steady-state band applies (s).
    pub transient_window: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(Error::InvalidArgument("simulation needs at least one committed unit".into()));
        }
        if !(self.dt > 0.0) || !(self.s_base > 0.0) || !(self.battery_droop > 0.0) {
            return Err(Error::InvalidArgument(
                "dt, s_base and battery_droop must be positive".into(),
            ));
        }
        if !(self.battery_power >= 0.0) || !(self.load_damping >= 0.0) {
            return Err(Error::InvalidArgument(
                "battery_power and load_damping must be non-negative".into(),
            ));
        }
        for w in self.events.windows(2) {
            if w[1].start() < w[0].start() {
                return Err(Error::InvalidArgument("events must be sorted by time".into()));
            }
        }
        for e in &self.events {
            if let DisturbanceEvent::PowerRamp { duration, .. } = e {
                if !(*duration > 0.0) {
                    return Err(Error::InvalidArgument("ramp duration must be positive".into()));
                }
            }
            if !(e.start() >= 0.0) || e.start() >= self.t_end {
                return Err(Error::InvalidArgument(format!(
                    "event at t = {} s lies outside [0, t_end = {} s)",
                    e.start(),
                    self.t_end
                )));
            }
        }
        for u in &self.units {
            if !(u.spec.p_min..=u.spec.p_max).contains(&u.p0) {
                return Err(Error::InvalidArgument(format!(
                    "{}: operating point {} MW outside [{}, {}]",
                    u.spec.name, u.p0, u.spec.p_min, u.spec.p_max
                )));
            }
        }
        if self.inertia(false) <= 0.0 {
            return Err(Error::InvalidArgument("system inertia must be positive".into()));
        }
        self.freq.validate()
    }

    /// Aggregated inertia `M` (s), before or after the trip.
    pub fn inertia(&self, tripped: bool) -> f64 {
        let count = if tripped {
            self.inertia_units_after_trip.or(self.inertia_units)
        } else {
            self.inertia_units
        }
        .unwrap_or(self.units.len())
        .min(self.units.len());
        self.units[..count]
            .iter()
            .map(|u| 2.0 * u.spec.inertia_h * u.spec.p_max / self.s_base)
            .sum()
    }

    /// End of the last event (s), 0 without events.
    pub fn last_event_end(&self) -> f64 {
        self.events.iter().map(DisturbanceEvent::end).fold(0.0, f64::max)
    }
}

/// Simulation settings carried by a case file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Time of the worst-case trip (s).
    pub event_time: f64,
    pub transient_window: f64,
    /// Battery droop (p.u.); the steady-state band when absent.
    pub battery_droop: Option<f64>,
    pub governor: GovernorMode,
    pub load_damping: f64,
    /// Drop the tripped unit's inertia after the trip.
    pub post_trip_inertia: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            dt: 0.01,
            t_end: 120.0,
            event_time: 10.0,
            transient_window: 10.0,
            battery_droop: None,
            governor: GovernorMode::Combined,
            load_damping: 0.0,
            post_trip_inertia: false,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.t_end > self.event_time && self.event_time >= 0.0) {
            return Err(Error::InvalidArgument(
                "sim: need dt > 0 and 0 <= event_time < t_end".into(),
            ));
        }
        if !(self.transient_window >= 0.0) || !(self.load_damping >= 0.0) {
            return Err(Error::InvalidArgument(
                "sim: transient_window and load_damping must be non-negative".into(),
            ));
        }
        if let Some(d) = self.battery_droop {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument("sim: battery_droop must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Sampled trajectories. All vectors share the time grid; `gen_power` is `[unit][sample]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub f_nom: f64,
    pub time: Vec<f64>,
    pub df_pu: Vec<f64>,
    pub gen_names: Vec<String>,
    pub gen_power: Vec<Vec<f64>>,
    pub battery_power: Vec<f64>,
    pub load: Vec<f64>,
    /// Generation plus battery minus load (MW).
    pub imbalance: Vec<f64>,
    /// Time from which the steady-state band applies (s).
    pub steady_from: f64,
}

impl FrequencyTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn df_hz(&self) -> Vec<f64> {
        self.df_pu.iter().map(|d| d * self.f_nom).collect()
    }

    /// Lowest frequency reached (Hz).
    pub fn nadir_hz(&self) -> f64 {
        self.f_nom * (1.0 + self.df_pu.iter().copied().fold(0.0, f64::min))
    }

    pub fn max_abs_df(&self) -> f64 {
        self.df_pu.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Plot-ready CSV: time, deviation in Hz, one column per device, load and imbalance.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Validation(format!("writing trace CSV: {e}"));
        let mut header = vec!["t_s".to_string(), "df_Hz".to_string()];
        header.extend(self.gen_names.iter().map(|n| format!("{n}_MW")));
        header.extend(["battery_MW", "load_MW", "imbalance_MW"].map(String::from));
        w.write_record(&header).map_err(err)?;
        for k in 0..self.len() {
            let mut row = vec![
                format!("{:.4}", self.time[k]),
                format!("{:.6}", self.df_pu[k] * self.f_nom),
            ];
            row.extend(self.gen_power.iter().map(|g| format!("{:.5}", g[k])));
            row.push(format!("{:.5}", self.battery_power[k]));
            row.push(format!("{:.5}", self.load[k]));
            row.push(format!("{:.6}", self.imbalance[k]));
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Validation(format!("writing trace CSV: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

struct Model<'a> {
    cfg: &'a SimConfig,
    base_load: f64,
}

/// Device outputs for a given state.
struct Outputs {
    gen: Vec<f64>,
    battery: f64,
}

impl Model<'_> {
    fn fcr(&self, u: &CommittedUnit, df: f64) -> f64 {
        if self.cfg.governor == GovernorMode::FrrOnly {
            return 0.0;
        }
        let demand = -u.damping * self.cfg.s_base * df;
        if self.cfg.saturate_fcr {
            demand.clamp(-u.fcr_limit, u.fcr_limit)
        } else {
            demand
        }
    }

    fn outputs(&self, df: f64, frr: &[f64]) -> Outputs {
        let gen = self
            .cfg
            .units
            .iter()
            .zip(frr)
            .map(|(u, r)| {
                let p = u.p0 + self.fcr(u, df) + r;
                if self.cfg.saturate_fcr {
                    p.clamp(u.spec.p_min, u.spec.p_max)
                } else {
                    p
                }
            })
            .collect();
        let cap = self.cfg.battery_power;
        let battery = (-df / self.cfg.battery_droop * cap).clamp(-cap, cap);
        Outputs { gen, battery }
    }

    fn load(&self, t: f64, step_time: f64) -> f64 {
        self.base_load
            + self
                .cfg
                .events
                .iter()
                .map(|e| e.load_at(t, e.start() <= step_time + 1e-9))
                .sum::<f64>()
    }

    /// State derivative. `state = [df, frr_0, ..]`.
    fn derivative(&self, t: f64, step_time: f64, m: f64, state: &[f64], out: &mut [f64]) {
        let df = state[0];
        let frr = &state[1..];
        let o = self.outputs(df, frr);
        let pg: f64 = o.gen.iter().sum::<f64>() + o.battery;
        let rhs = (pg - self.load(t, step_time)) / self.cfg.s_base - self.cfg.load_damping * df;
        out[0] = rhs / ((1.0 + df) * m);
        let frr_on = self.cfg.governor != GovernorMode::FcrOnly;
        for (i, u) in self.cfg.units.iter().enumerate() {
            let rate = if frr_on {
                u.spec.rr_frr * (-df / FRR_DEADBAND).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            // stop integrating into a limit the unit already sits on
            let p = o.gen[i];
            let blocked = (rate > 0.0 && p >= u.spec.p_max) || (rate < 0.0 && p <= u.spec.p_min);
            out[1 + i] = if blocked { 0.0 } else { rate };
        }
    }
}

/// Integrate the grid response over `[0, t_end]`.
///
/// Returns [`Error::Unstable`] with the trace so far when `|df|` exceeds
/// [`INSTABILITY_THRESHOLD`].
pub fn simulate(cfg: &SimConfig) -> Result<FrequencyTrace> {
    cfg.validate()?;
    let model = Model {
        cfg,
        base_load: cfg.units.iter().map(|u| u.p0).sum(),
    };
    let n_units = cfg.units.len();
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let first_step = cfg
        .events
        .iter()
        .find(|e| matches!(e, DisturbanceEvent::LoadStep { .. }))
        .map(DisturbanceEvent::start);

    let mut trace = FrequencyTrace {
        f_nom: cfg.freq.f_nom,
        time: Vec::with_capacity(steps + 1),
        df_pu: Vec::with_capacity(steps + 1),
        gen_names: cfg
            .units
            .iter()
            .enumerate()
            .map(|(i, u)| {
                if u.spec.name.is_empty() {
                    format!("G{}", i + 1)
                } else {
                    u.spec.name.clone()
                }
            })
            .collect(),
        gen_power: vec![Vec::with_capacity(steps + 1); n_units],
        battery_power: Vec::with_capacity(steps + 1),
        load: Vec::with_capacity(steps + 1),
        imbalance: Vec::with_capacity(steps + 1),
        steady_from: cfg.last_event_end() + cfg.transient_window,
    };
    let record = |trace: &mut FrequencyTrace, t: f64, state: &[f64]| {
        let o = model.outputs(state[0], &state[1..]);
        let load = model.load(t, t);
        trace.time.push(t);
        trace.df_pu.push(state[0]);
        for (g, p) in trace.gen_power.iter_mut().zip(&o.gen) {
            g.push(*p);
        }
        trace.battery_power.push(o.battery);
        trace.load.push(load);
        trace.imbalance.push(o.gen.iter().sum::<f64>() + o.battery - load);
    };

    let dim = 1 + n_units;
    let mut state = vec![0.0; dim];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    record(&mut trace, 0.0, &state);
    for k in 0..steps {
        let t = k as f64 * cfg.dt;
        let tripped = first_step.is_some_and(|ts| ts <= t + 1e-9);
        let m = cfg.inertia(tripped);
        let h = cfg.dt;
        model.derivative(t, t, m, &state, &mut k1);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        model.derivative(t + 0.5 * h, t, m, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        model.derivative(t + 0.5 * h, t, m, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = state[i] + h * k3[i];
        }
        model.derivative(t + h, t, m, &tmp, &mut k4);
        for i in 0..dim {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (k + 1) as f64 * cfg.dt;
        if !state[0].is_finite() || state[0].abs() > INSTABILITY_THRESHOLD {
            let df = state[0];
            return Err(Error::Unstable {
                time: t_next,
                df,
                trace: Box::new(trace),
            });
        }
        record(&mut trace, t_next, &state);
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitVerdict {
    pub pass: bool,
    pub nadir_hz: f64,
    pub max_abs_df: f64,
    /// First time after which `|df|` stays within a tenth of the steady-state band;
    /// `None` if it never settles within the trace.
    pub settling_time: Option<f64>,
    /// Largest `|df|` after the transient window.
    pub steady_state_df: f64,
}

/// Check the transient and steady-state bands on a trace.
pub fn verify_limits(trace: &FrequencyTrace, limits: &FrequencyLimits) -> LimitVerdict {
    let max_abs_df = trace.max_abs_df();
    let steady_state_df = trace
        .time
        .iter()
        .zip(&trace.df_pu)
        .filter(|(t, _)| **t >= trace.steady_from)
        .fold(0.0, |m: f64, (_, d)| m.max(d.abs()));
    let band = 0.1 * limits.r_ss;
    let settling_time = match trace.df_pu.iter().rposition(|d| d.abs() > band) {
        None => Some(0.0),
        Some(k) if k + 1 < trace.len() => Some(trace.time[k + 1]),
        Some(_) => None,
    };
    let reached_window = trace.time.last().is_some_and(|t| *t >= trace.steady_from);
    let pass = max_abs_df <= limits.r_tr && steady_state_df <= limits.r_ss && reached_window;
    LimitVerdict {
        pass,
        nadir_hz: trace.nadir_hz(),
        max_abs_df,
        settling_time,
        steady_state_df,
    }
}

/// Verdict for a simulation result; an unstable run is judged on its partial trace.
pub fn verify_run(result: &Result<FrequencyTrace>, limits: &FrequencyLimits) -> Result<LimitVerdict> {
    match result {
        Ok(trace) => Ok(verify_limits(trace, limits)),
        Err(Error::Unstable { trace, .. }) => {
            let mut v = verify_limits(trace, limits);
            v.pass = false;
            Ok(v)
        }
        Err(e) => Err(Error::Validation(format!("simulation failed: {e}"))),
    }
}

/// Smallest total per-unit damping that holds a loss of `p_b` MW within the steady-state band.
pub fn min_damping(p_b: f64, limits: &FrequencyLimits, s_base: f64) -> Result<f64> {
    if !(limits.r_ss > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "steady-state band must be positive, got {}",
            limits.r_ss
        )));
    }
    if !(s_base > 0.0) || !(p_b >= 0.0) {
        return Err(Error::InvalidArgument(
            "need s_base > 0 and a non-negative loss".into(),
        ));
    }
    Ok(p_b / (limits.r_ss * s_base) / limits.fcr_derating())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::domain::fixtures::gt;

    /// Three units with 7.5 MW droop share each at the band edge, battery 10.8 MW,
    /// trip of 22.5 MW at 10 s plus a 22.656 MW PV ramp over 19 s.
    pub fn worst_case(battery: f64, fcr_limit: f64) -> SimConfig {
        let freq = FrequencyLimits::new(50.0, 0.01, 0.05, false).unwrap();
        let unit = CommittedUnit {
            spec: gt(45.0, 0.1),
            p0: 22.5,
            fcr_limit,
            damping: 10.0,
        };
        SimConfig {
            units: vec![unit; 3],
            inertia_units: None,
            inertia_units_after_trip: None,
            battery_power: battery,
            battery_droop: 0.01,
            freq,
            s_base: 75.0,
            dt: 0.01,
            t_end: 120.0,
            events: vec![
                DisturbanceEvent::LoadStep {
                    t: 10.0,
                    magnitude: 22.5,
                },
                DisturbanceEvent::PowerRamp {
                    t0: 10.0,
                    duration: 19.0,
                    total_drop: 22.656,
                },
            ],
            load_damping: 0.0,
            governor: GovernorMode::Combined,
            saturate_fcr: true,
            transient_window: 10.0,
        }
    }
}
