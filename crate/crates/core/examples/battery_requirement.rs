//! Battery FCR needed when one gas turbine trips during each reference PV ramp,
//! with and without crediting the turbines' own FCR.
//!
//! cargo run --example battery_requirement

use islandgrid::data::REFERENCE_RAMPS;
use islandgrid::model::{battery_fcr_requirement, short_term_feasibility, PowerRamp};
use islandgrid::ramps::{pv_power_drop, RampEvent};

fn main() -> islandgrid::Result<()> {
    let p_sud = 22.5; // one turbine at half load
    let rr = [0.208; 3]; // FRR ramp rate of three committed turbines (MW/s)
    let gt_fcr = 22.5; // total turbine FCR when credited
    let (d_pv, area_m2) = (0.8, 46_200.0);

    println!("ramp    dT(s)  dI(kW/m2)  dP(MW)  static(MW)  dynamic(MW)  ramp w/o battery");
    for (k, (duration, drop)) in REFERENCE_RAMPS.into_iter().enumerate() {
        let event = RampEvent {
            hour: 11,
            duration,
            drop,
        };
        let dp = pv_power_drop(&event, d_pv, area_m2)?;
        let frr: f64 = rr.iter().sum::<f64>() * duration;
        let stat = battery_fcr_requirement(p_sud, 0.0, dp, frr);
        let dynamic = battery_fcr_requirement(p_sud, gt_fcr, dp, frr);
        let covered = short_term_feasibility(&rr, &[7.5; 3], &PowerRamp { duration, drop: dp });
        println!(
            "r{}   {duration:>6.0}  {drop:>9.3}  {dp:>6.2}  {stat:>10.2}  {dynamic:>11.2}  {covered}",
            k + 1
        );
    }
    Ok(())
}
