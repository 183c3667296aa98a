//! Swing-equation replay of a turbine trip during a 19 s PV ramp, with and
//! without battery and turbine FCR, at two time steps.
//!
//! cargo run --example worst_case_frequency

use islandgrid::domain::{FrequencyLimits, GeneratorSpec};
use islandgrid::sim::{
    simulate, verify_run, CommittedUnit, DisturbanceEvent, GovernorMode, SimConfig,
};
use islandgrid::study::output_root;

fn scenario(battery: f64, fcr_per_unit: f64, dt: f64) -> islandgrid::Result<SimConfig> {
    let gt = GeneratorSpec {
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
    };
    let unit = CommittedUnit {
        spec: gt,
        p0: 22.5,
        fcr_limit: fcr_per_unit,
        damping: 10.0,
    };
    Ok(SimConfig {
        units: vec![unit; 3],
        inertia_units: None,
        inertia_units_after_trip: None,
        battery_power: battery,
        battery_droop: 0.01,
        freq: FrequencyLimits::new(50.0, 0.01, 0.05, false)?,
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
    })
}

fn main() -> islandgrid::Result<()> {
    for (label, battery, fcr) in [
        ("battery 10.8 MW + GT FCR", 10.8, 7.5),
        ("no reserves", 0.0, 0.0),
    ] {
        for dt in [0.01, 0.005] {
            let cfg = scenario(battery, fcr, dt)?;
            let v = verify_run(&simulate(&cfg), &cfg.freq)?;
            println!(
                "{label:<25} dt {dt:<6} nadir {:.4} Hz  max |df| {:.4} pu  {}",
                v.nadir_hz,
                v.max_abs_df,
                if v.pass {
                    "within limits"
                } else {
                    "LIMITS BROKEN"
                }
            );
        }
    }

    let cfg = scenario(10.8, 7.5, 0.01)?;
    let out = output_root(None).join("examples");
    std::fs::create_dir_all(&out).map_err(|e| islandgrid::Error::io(&out, e))?;
    let path = out.join("worst_case_trace.csv");
    simulate(&cfg)?.save_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
