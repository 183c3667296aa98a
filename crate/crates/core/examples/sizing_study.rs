//! Size PV and battery for all four reserve modes on synthetic data, check every
//! solution, replay the binding hour and print the indicator table.
//!
//! cargo run --release --example sizing_study -- [hours]

use islandgrid::report::write_indicator_table;
use islandgrid::study::{cmd_size, output_root, StudySpec};

fn main() -> islandgrid::Result<()> {
    let hours: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("hours must be a positive integer"))
        .unwrap_or(24);
    let mut spec = StudySpec::new(output_root(None).join("examples").join("study"));
    spec.horizon = Some(hours);
    let outcome = cmd_size(&spec)?;
    for m in &outcome.modes {
        let r = &m.report;
        println!(
            "{:<11} gap {:.4}  PV {:>7.2} MW  battery {:>6.2} MW  checks {}  ({:.1} s)",
            r.mode.as_str(),
            r.gap,
            r.pv_installed_mw,
            r.bat_installed_mw,
            if r.checks_pass() { "pass" } else { "FAIL" },
            m.seconds
        );
    }
    write_indicator_table(&outcome.reports(), std::io::stdout().lock())?;
    println!("outputs in {}", spec.out_dir.display());
    Ok(())
}
