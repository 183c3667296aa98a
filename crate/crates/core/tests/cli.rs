use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use islandgrid::data::{synthetic_irradiance, synthetic_load, write_load_csv};
use islandgrid::ramps::io::write_irradiance_csv;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_islandgrid"))
        .args(args)
        .env("ISLANDGRID_OUT", out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_inputs(dir: &Path) -> (PathBuf, PathBuf) {
    let irr = dir.join("irradiance.csv");
    write_irradiance_csv(&synthetic_irradiance(1, 5), fs::File::create(&irr).unwrap()).unwrap();
    let load = dir.join("load.csv");
    write_load_csv(&synthetic_load(24, 5), fs::File::create(&load).unwrap()).unwrap();
    (irr, load)
}

/// Files under `dir`, relative paths sorted.
fn tree(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn ramps_writes_envelopes() {
    let tmp = tempfile::tempdir().unwrap();
    let (irr, _) = write_inputs(tmp.path());
    let out = tmp.path().join("out");
    let o = run(&out, &["ramps", irr.to_str().unwrap(), "--horizon", "24"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hourly = fs::read_to_string(out.join("hulls_hourly.csv")).unwrap();
    assert!(hourly.starts_with("hour,duration_s,drop_kW_m2\n"));
    assert!(hourly.lines().count() > 1);
    assert!(out.join("hull_global.csv").is_file());
}

#[test]
fn size_simulate_report_round_trip_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (irr, load) = write_inputs(tmp.path());
    let size = |out: &Path| {
        run(
            out,
            &[
                "size",
                "--irradiance",
                irr.to_str().unwrap(),
                "--load",
                load.to_str().unwrap(),
                "--horizon",
                "24",
                "--mode",
                "static_fc,dynamic_fc",
            ],
        )
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = size(&a);
    assert!(
        oa.status.success(),
        "{}\n{}",
        String::from_utf8_lossy(&oa.stdout),
        stderr(&oa)
    );
    let ob = size(&b);
    assert!(ob.status.success(), "{}", stderr(&ob));

    let files = tree(&a);
    assert_eq!(files, tree(&b));
    for rel in [
        "report.json",
        "indicators.csv",
        "static_fc/model.mps",
        "dynamic_fc/dispatch.json",
    ] {
        assert!(files.contains(&PathBuf::from(rel)), "missing {rel}");
    }
    for rel in &files {
        let (x, y) = (
            fs::read(a.join(rel)).unwrap(),
            fs::read(b.join(rel)).unwrap(),
        );
        if rel == Path::new("report.json") {
            let (x, y) = (String::from_utf8(x).unwrap(), String::from_utf8(y).unwrap());
            assert_eq!(without_timestamp(&x), without_timestamp(&y));
        } else {
            assert!(x == y, "{} differs between runs", rel.display());
        }
    }

    let o = run(&a, &["report"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(
        table.starts_with("indicator,static_fc,dynamic_fc\n"),
        "{table}"
    );

    let sim_out = tmp.path().join("sim");
    let o = run(
        &sim_out,
        &[
            "simulate",
            a.join("dynamic_fc/dispatch.json").to_str().unwrap(),
            a.join("hulls_hourly.csv").to_str().unwrap(),
            "--dt",
            "0.02",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(sim_out.join("verdicts.json").is_file());
    assert!(sim_out.join("trace_0.csv").is_file());
}

#[test]
fn failing_checks_give_exit_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("report.json");
    let doc = r#"{"generated_at": "2024-01-01T00:00:00Z", "reports": [{
        "mode": "static_fc", "status": "optimal", "horizon": 1,
        "pv_installed_mw": 0.0, "bat_installed_mw": 0.0, "pv_area_m2": 0.0,
        "capex_musd": 0.0, "fuel_per_year": 0.0, "co2_per_year": 0.0,
        "lcoe_usd_per_mwh": 0.0, "total_cost_musd": 0.0, "objective": 0.0, "gap": 0.0,
        "feasibility": {"feasible": false, "violations": 1, "max_violation": 1.0, "tolerance": 1e-6, "worst": "balance[0]"},
        "simulation": null, "warnings": []}]}"#;
    fs::write(&report, doc).unwrap();
    let o = run(tmp.path(), &["report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn errors_name_the_file_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let missing = tmp.path().join("nowhere.csv");
    let o = run(&out, &["ramps", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.csv"), "{}", stderr(&o));

    let bad = tmp.path().join("bad.csv");
    fs::write(
        &bad,
        "time,irradiance\n2010-06-01T00:00:00,0.5\n2010-06-01T00:00:01,oops\n",
    )
    .unwrap();
    let o = run(&out, &["ramps", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.csv:3"), "{}", stderr(&o));

    let cfg = tmp.path().join("case.toml");
    fs::write(&cfg, "[plant]\np_base = \"big\"\n").unwrap();
    let o = run(
        &out,
        &["size", "--horizon", "2", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("case.toml"), "{}", stderr(&o));

    let o = run(&out, &["size", "--mode", "fastest"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("fastest"), "{}", stderr(&o));
}
