#![allow(dead_code)]

use islandgrid::domain::{FrequencyLimits, GeneratorSpec};
use islandgrid::sim::{CommittedUnit, DisturbanceEvent, GovernorMode, SimConfig};

pub fn gas_turbine() -> GeneratorSpec {
    GeneratorSpec {
        name: "GT".into(),
        p_min: 13.5,
        p_max: 45.0,
        droop: 0.1,
        inertia_h: 5.51,
        rr_frr: 0.208,
        t_up: 6,
        t_dn: 6,
        fuel_a: 13782.0,
        fuel_b: 5523.0,
        fuel_scale: 1.0,
    }
}

/// Three turbines at 22.5 MW, a 22.5 MW trip at 10 s and a 22.656 MW PV ramp over 19 s.
pub fn worst_case(battery: f64, fcr_per_unit: f64, dt: f64) -> SimConfig {
    let unit = CommittedUnit {
        spec: gas_turbine(),
        p0: 22.5,
        fcr_limit: fcr_per_unit,
        damping: 10.0,
    };
    SimConfig {
        units: vec![unit; 3],
        inertia_units: None,
        inertia_units_after_trip: None,
        battery_power: battery,
        battery_droop: 0.01,
        freq: FrequencyLimits::new(50.0, 0.01, 0.05, false).unwrap(),
        s_base: 75.0,
        dt,
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
