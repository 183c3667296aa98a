//! Worst-case simulation set-ups derived from a sizing solution.
//!
//! At the hour with the largest battery requirement, every committed unit
//! stays online and the loss of the largest unit is applied as a load step
//! of the sudden-disturbance size, together with one PV ramp from that hour's
//! envelope. Each unit's droop share is capped at its assigned FCR, and the
//! battery runs at its installed rating.

use serde::{Deserialize, Serialize};

use super::{CommittedUnit, DisturbanceEvent, SimConfig, SimSettings};
use crate::domain::{damping_of, PlantConfig};
use crate::error::{Error, Result};
use crate::model::{battery_fcr_requirement, Dispatch, ScenarioMode};
use crate::ramps::{RampEvent, RampHull};

/// One simulation per ramp of the binding hour (or a trip-only run for an empty envelope).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub hour: usize,
    pub p_sud: f64,
    /// Battery requirement at this hour (MW), by the reserve algebra.
    pub requirement: f64,
    pub runs: Vec<(Option<RampEvent>, SimConfig)>,
}

fn check_shapes(dispatch: &Dispatch, hulls: &[RampHull]) -> Result<()> {
    if hulls.len() != dispatch.horizon {
        return Err(Error::Validation(format!(
            "solution covers {} hours but the hull file covers {}",
            dispatch.horizon,
            hulls.len()
        )));
    }
    for (h, hull) in hulls.iter().enumerate() {
        if let Some(hh) = hull.hour {
            if hh != h {
                return Err(Error::Validation(format!(
                    "hull at position {h} is labelled hour {hh}"
                )));
            }
        }
    }
    Ok(())
}

fn sudden_loss(dispatch: &Dispatch, h: usize) -> f64 {
    let largest = (0..dispatch.gen_power.len())
        .filter(|&m| dispatch.commitment[m][h] == 1)
        .map(|m| dispatch.gen_power[m][h])
        .fold(0.0, f64::max);
    largest.max(dispatch.sudden[h])
}

/// Battery requirement at hour `h` over all its ramps (trip alone for an empty envelope).
fn hour_requirement(
    dispatch: &Dispatch,
    hull: &RampHull,
    plant: &PlantConfig,
    h: usize,
) -> f64 {
    let committed: Vec<usize> = (0..dispatch.gen_power.len())
        .filter(|&m| dispatch.commitment[m][h] == 1)
        .collect();
    let fcr: f64 = if dispatch.mode == ScenarioMode::DynamicFc {
        committed.iter().map(|&m| dispatch.gen_fcr[m][h]).sum()
    } else {
        0.0
    };
    let rr: f64 = committed.iter().map(|&m| plant.generators[m].rr_frr).sum();
    let p_sud = sudden_loss(dispatch, h);
    let area_m2 = dispatch.pv_area_m2[h];
    let ramp_req = |e: &RampEvent| {
        let dp = plant.d_pv * e.drop * area_m2 * 1e-3;
        battery_fcr_requirement(p_sud, fcr, dp, rr * e.duration)
    };
    hull.events
        .iter()
        .map(ramp_req)
        .fold(battery_fcr_requirement(p_sud, fcr, 0.0, 0.0), f64::max)
}

/// Hour with the largest battery requirement; earliest on ties.
pub fn binding_hour(dispatch: &Dispatch, hulls: &[RampHull], plant: &PlantConfig) -> Result<usize> {
    check_shapes(dispatch, hulls)?;
    let mut best = (0, f64::NEG_INFINITY);
    for (h, hull) in hulls.iter().enumerate() {
        let r = hour_requirement(dispatch, hull, plant, h);
        if r > best.1 {
            best = (h, r);
        }
    }
    Ok(best.0)
}

/// Operating points for the committed units: total output shared in proportion to rating.
fn rebalance(dispatch: &Dispatch, plant: &PlantConfig, committed: &[usize], h: usize) -> Vec<f64> {
    let total: f64 = committed.iter().map(|&m| dispatch.gen_power[m][h]).sum();
    let rating: f64 = committed.iter().map(|&m| plant.generators[m].p_max).sum();
    committed
        .iter()
        .map(|&m| {
            let g = &plant.generators[m];
            (total * g.p_max / rating).clamp(g.p_min, g.p_max)
        })
        .collect()
}

/// Build the worst-case simulations for a solved dispatch.
pub fn worst_case_configs(
    dispatch: &Dispatch,
    hulls: &[RampHull],
    plant: &PlantConfig,
    settings: &SimSettings,
) -> Result<WorstCase> {
    settings.validate()?;
    let h = binding_hour(dispatch, hulls, plant)?;
    let committed: Vec<usize> = (0..dispatch.gen_power.len())
        .filter(|&m| dispatch.commitment[m][h] == 1)
        .collect();
    if committed.is_empty() {
        return Err(Error::Validation(format!("no unit is committed at hour {h}")));
    }
    let p0 = rebalance(dispatch, plant, &committed, h);
    let units = committed
        .iter()
        .zip(p0)
        .map(|(&m, p0)| {
            Ok(CommittedUnit {
                spec: plant.generators[m].clone(),
                p0,
                fcr_limit: dispatch.gen_fcr[m][h].max(0.0),
                damping: damping_of(&plant.generators[m], plant)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = units.len();
    let p_sud = sudden_loss(dispatch, h);
    let trip = DisturbanceEvent::LoadStep {
        t: settings.event_time,
        magnitude: p_sud,
    };
    let base = SimConfig {
        units,
        inertia_units: None,
        inertia_units_after_trip: settings.post_trip_inertia.then(|| n.saturating_sub(1).max(1)),
        battery_power: dispatch.bat_installed.max(0.0),
        battery_droop: settings.battery_droop.unwrap_or(plant.freq.r_ss),
        freq: plant.freq.clone(),
        s_base: plant.s_base(),
        dt: settings.dt,
        t_end: settings.t_end,
        events: vec![trip],
        load_damping: settings.load_damping,
        governor: settings.governor,
        saturate_fcr: true,
        transient_window: settings.transient_window,
    };
    let with_room = |mut cfg: SimConfig| {
        let needed = cfg.last_event_end() + cfg.transient_window + 10.0;
        cfg.t_end = cfg.t_end.max(needed);
        cfg
    };

    let hull = &hulls[h];
    let runs = if hull.is_empty() {
        vec![(None, with_room(base))]
    } else {
        hull.events
            .iter()
            .map(|e| {
                let mut cfg = base.clone();
                cfg.events.push(DisturbanceEvent::PowerRamp {
                    t0: settings.event_time,
                    duration: e.duration,
                    total_drop: plant.d_pv * e.drop * dispatch.pv_area_m2[h] * 1e-3,
                });
                (Some(*e), with_room(cfg))
            })
            .collect()
    };
    Ok(WorstCase {
        hour: h,
        p_sud,
        requirement: hour_requirement(dispatch, hull, plant, h),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::plant;
    use crate::sim::{simulate, verify_limits};

    fn dispatch(mode: ScenarioMode, fcr: f64, bat: f64) -> Dispatch {
        Dispatch {
            mode,
            horizon: 2,
            commitment: vec![vec![1, 1], vec![1, 1], vec![1, 1], vec![0, 0]],
            gen_power: vec![vec![30.0, 22.5], vec![20.0, 22.5], vec![25.0, 22.5], vec![0.0; 2]],
            gen_fcr: vec![vec![fcr, fcr], vec![fcr, fcr], vec![fcr, fcr], vec![0.0; 2]],
            pv_injected: vec![0.0, 30.0],
            pv_area_m2: vec![46200.0; 2],
            pv_installed: 40.0,
            bat_installed: bat,
            bat_fcr: vec![0.0, bat],
            sudden: vec![30.0, 22.5],
            pv_disturbance: vec![0.0, 22.7],
        }
    }

    fn hulls() -> Vec<RampHull> {
        let ev = |duration, drop| RampEvent {
            hour: 1,
            duration,
            drop,
        };
        vec![
            RampHull::empty(Some(0)),
            RampHull {
                hour: Some(1),
                events: vec![ev(19.0, 0.613), ev(48.0, 0.878)],
            },
        ]
    }

    #[test]
    fn picks_hour_with_largest_requirement() {
        let p = plant(Some(75.0), false);
        let d = dispatch(ScenarioMode::StaticFc, 0.0, 33.3);
        assert_eq!(binding_hour(&d, &hulls(), &p).unwrap(), 1);
        let wc = worst_case_configs(&d, &hulls(), &p, &SimSettings::default()).unwrap();
        assert_eq!(wc.runs.len(), 2);
        assert!((wc.requirement - 33.3).abs() < 0.01, "{}", wc.requirement);
        let cfg = &wc.runs[0].1;
        assert_eq!(cfg.units.len(), 3);
        assert!(cfg.units.iter().all(|u| (u.p0 - 22.5).abs() < 1e-12));
    }

    #[test]
    fn covered_requirement_passes() {
        let p = plant(Some(75.0), false);
        let d = dispatch(ScenarioMode::DynamicFc, 7.5, 10.8);
        let wc = worst_case_configs(&d, &hulls(), &p, &SimSettings::default()).unwrap();
        for (_, cfg) in &wc.runs {
            let v = verify_limits(&simulate(cfg).unwrap(), &cfg.freq);
            assert!(v.pass, "{v:?}");
        }
    }

    #[test]
    fn empty_hull_simulates_trip_only() {
        let p = plant(Some(75.0), false);
        let d = dispatch(ScenarioMode::DynamicFc, 7.5, 10.8);
        let hulls = vec![RampHull::empty(Some(0)), RampHull::empty(Some(1))];
        let wc = worst_case_configs(&d, &hulls, &p, &SimSettings::default()).unwrap();
        assert_eq!(wc.runs.len(), 1);
        assert!(wc.runs[0].0.is_none());
        assert_eq!(wc.runs[0].1.events.len(), 1);
    }

    #[test]
    fn mismatched_hulls_are_rejected() {
        let p = plant(None, false);
        let d = dispatch(ScenarioMode::DynamicFc, 4.5, 10.8);
        assert!(binding_hour(&d, &hulls()[..1], &p).is_err());
        let mut shifted = hulls();
        shifted[1].hour = Some(5);
        assert!(binding_hour(&d, &shifted, &p).is_err());
    }
}
