//! Export a two-hour sizing model as fixed-width MPS, read it back and confirm
//! nothing changed. Long names are mapped to short ones with a side table.
//!
//! cargo run --example mps_round_trip

use std::path::Path;

use islandgrid::config::CaseConfig;
use islandgrid::data::REFERENCE_RAMPS;
use islandgrid::model::{build_problem, ScenarioMode, SizingInputs};
use islandgrid::ramps::{RampEvent, RampHull};
use islandgrid::solve::{export_mps, parse_mps};
use islandgrid::study::output_root;

fn main() -> islandgrid::Result<()> {
    let case = CaseConfig::reference();
    let hull = |hour| RampHull {
        hour: Some(hour),
        events: REFERENCE_RAMPS
            .iter()
            .map(|&(duration, drop)| RampEvent {
                hour,
                duration,
                drop,
            })
            .collect(),
    };
    let mut inputs = SizingInputs::new(
        vec![130.0, 135.0],
        vec![0.7, 0.8],
        vec![hull(0), hull(1)],
        case.plant,
        case.economics,
    );
    inputs.options = case.build;
    let model = build_problem(ScenarioMode::DynamicFc, &inputs)?;
    let p = &model.problem;
    println!(
        "{} variables ({} integer), {} rows",
        p.num_vars(),
        p.num_integer(),
        p.num_constraints()
    );

    let doc = export_mps(p)?;
    let out = output_root(None).join("examples");
    std::fs::create_dir_all(&out).map_err(|e| islandgrid::Error::io(&out, e))?;
    doc.write_files(&out, "dynamic_fc_2h")?;

    let mut back = parse_mps(&doc.text, Path::new("dynamic_fc_2h.mps"))?;
    doc.names.restore(&mut back);
    back.name = p.name.clone();
    println!(
        "{} renamed columns, {} renamed rows, round trip identical: {}",
        doc.names.columns.len(),
        doc.names.rows.len(),
        back == *p
    );
    println!("wrote {}", out.join("dynamic_fc_2h.mps").display());
    Ok(())
}
