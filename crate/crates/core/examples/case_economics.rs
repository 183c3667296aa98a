//! Load the bundled four-turbine case and print its derived quantities:
//! turbine damping and FCR capacity, fuel cost, annuity and CAPEX of a few builds.
//!
//! cargo run --example case_economics [-- path/to/case.toml]

use std::path::PathBuf;

use islandgrid::config::CaseConfig;
use islandgrid::domain::{damping_of, fcr_capacity};
use islandgrid::sim::min_damping;

fn main() -> islandgrid::Result<()> {
    let case = match std::env::args().nth(1) {
        Some(p) => CaseConfig::load(&PathBuf::from(p))?,
        None => CaseConfig::reference(),
    };
    let plant = &case.plant;
    for g in &plant.generators {
        println!(
            "{}: {}-{} MW, damping {:.1} pu, FCR capacity {:.2} MW, fuel {:.1} + {:.1}/MW per h",
            g.name,
            g.p_min,
            g.p_max,
            damping_of(g, plant)?,
            fcr_capacity(g, plant)?,
            g.fuel_intercept(),
            g.fuel_slope()
        );
    }
    let largest = plant.generators.iter().map(|g| g.p_max).fold(0.0, f64::max);
    println!(
        "damping needed to hold a {largest} MW loss within {} pu: {:.1} pu",
        plant.freq.r_ss,
        min_damping(largest, &plant.freq, plant.s_base())?
    );

    let econ = &case.economics;
    println!(
        "annuity factor {:.3}, fuel incl. CO2 {:.3} $/unit",
        econ.annuity_factor(),
        econ.fuel_price()
    );
    for (pv, bat) in [(0.0, 0.0), (129.76, 0.0), (62.0, 33.3), (62.0, 10.8)] {
        println!(
            "CAPEX PV {pv:>6.2} MW + battery {bat:>4.1} MW = {:>5.2} M$",
            econ.capex_musd(pv, bat)
        );
    }
    Ok(())
}
