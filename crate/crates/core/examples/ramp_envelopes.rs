//! Extract hourly and global worst-case ramp envelopes from a synthetic day of
//! 1 s irradiance and write them as CSV.
//!
//! cargo run --example ramp_envelopes

use std::fs::File;

use islandgrid::data::synthetic_irradiance;
use islandgrid::ramps::io::write_hull_csv;
use islandgrid::ramps::{extract_scenarios, RampParams};
use islandgrid::study::output_root;

fn main() -> islandgrid::Result<()> {
    let series = synthetic_irradiance(1, 2010);
    let sc = extract_scenarios(&series, &RampParams::default())?;

    for hull in sc.hourly.iter().filter(|h| !h.is_empty()) {
        let pts: Vec<String> = hull
            .events
            .iter()
            .map(|e| format!("({:.0} s, {:.3})", e.duration, e.drop))
            .collect();
        println!("hour {:>2}: {}", hull.hour.unwrap_or(0), pts.join(" "));
    }
    println!("global envelope:");
    for e in &sc.global.events {
        println!(
            "  {:>5.0} s  {:.3} kW/m2  ({:.4} kW/m2/s, hour {})",
            e.duration,
            e.drop,
            e.rate(),
            e.hour
        );
    }

    let out = output_root(None).join("examples");
    std::fs::create_dir_all(&out).map_err(|e| islandgrid::Error::io(&out, e))?;
    let path = out.join("hulls_hourly.csv");
    write_hull_csv(
        &sc.hourly,
        File::create(&path).map_err(|e| islandgrid::Error::io(&path, e))?,
    )?;
    println!("wrote {}", path.display());
    Ok(())
}
