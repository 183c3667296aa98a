//! Input series: hourly load profiles and synthetic desk-study data.
//!
//! The synthetic week combines a clear-sky bell with seeded cloud passages
//! and is quantized to 1 W/m², like a logging pyranometer. It is meant for
//! exercising the pipeline end to end, not as a site resource assessment.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ramps::{io::read_timeseries, IrradianceSeries};

/// The worst-case ramps of the reference hour: (duration s, drop kW/m²).
pub const REFERENCE_RAMPS: [(f64, f64); 4] = [(2.0, 0.061), (19.0, 0.613), (36.0, 0.778), (48.0, 0.878)];

/// Hourly load (MW).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub start: NaiveDateTime,
    pub values: Vec<f64>,
}

impl LoadProfile {
    pub fn new(start: NaiveDateTime, values: Vec<f64>) -> Result<Self> {
        if let Some((h, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "load at hour {h} is {v}; loads must be positive"
            )));
        }
        Ok(LoadProfile { start, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Parse an hourly `timestamp,load_MW` CSV.
pub fn read_load_csv<R: Read>(reader: R, path: &Path) -> Result<LoadProfile> {
    let rows = read_timeseries(reader, path)?;
    let Some(&(_, start, _)) = rows.first() else {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "no load rows".into(),
        });
    };
    for w in rows.windows(2) {
        if (w[1].1 - w[0].1).num_seconds() != 3600 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: w[1].0,
                message: format!("expected hourly steps, got {} then {}", w[0].1, w[1].1),
            });
        }
    }
    if let Some(&(line, _, v)) = rows.iter().find(|r| !(r.2 > 0.0 && r.2.is_finite())) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("load {v} must be positive"),
        });
    }
    LoadProfile::new(start, rows.into_iter().map(|r| r.2).collect())
}

pub fn load_load_csv(path: &Path) -> Result<LoadProfile> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_load_csv(std::io::BufReader::new(f), path)
}

pub fn write_load_csv<W: Write>(profile: &LoadProfile, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::Validation(format!("writing load CSV: {e}"));
    w.write_record(["timestamp", "load_MW"]).map_err(err)?;
    for (h, v) in profile.values.iter().enumerate() {
        let t = profile.start + chrono::Duration::hours(h as i64);
        w.write_record([t.format("%Y-%m-%dT%H:%M:%S").to_string(), format!("{v:.3}")])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("writing load CSV: {e}")))?;
    Ok(())
}

pub fn default_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2010, 3, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

/// Clear-sky irradiance (kW/m²) at `hour_of_day` (fractional), zero at night.
pub fn clear_sky(hour_of_day: f64) -> f64 {
    const SUNRISE: f64 = 6.0;
    const SUNSET: f64 = 18.0;
    if hour_of_day <= SUNRISE || hour_of_day >= SUNSET {
        return 0.0;
    }
    let x = (hour_of_day - SUNRISE) / (SUNSET - SUNRISE);
    (std::f64::consts::PI * x).sin().powf(1.2)
}

fn quantize(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// One hour at 1 s whose ramp envelope is exactly [`REFERENCE_RAMPS`]:
/// isolated linear descents from a 1.0 kW/m² plateau, each followed by a recovery.
pub fn reference_hour(start: NaiveDateTime) -> IrradianceSeries {
    let mut v = vec![1.0; 3600];
    let mut t = 300;
    for (duration, drop) in REFERENCE_RAMPS {
        let n = duration as usize;
        for i in 1..=n {
            v[t + i] = 1.0 - drop * i as f64 / duration;
        }
        // hold, then climb back over twice the descent time
        let bottom = 1.0 - drop;
        for i in 1..=60 {
            v[t + n + i] = bottom;
        }
        let up = 2 * n;
        for i in 1..=up {
            v[t + n + 60 + i] = bottom + drop * i as f64 / up as f64;
        }
        t += n + 60 + up + 400;
    }
    IrradianceSeries::new(start, 1.0, v).expect("valid reference hour")
}

/// A week (or `days` days) of 1 s irradiance with seeded cloud passages.
/// Hour 11 of the first day is replaced by [`reference_hour`] scaled to its clear-sky level.
pub fn synthetic_irradiance(days: usize, seed: u64) -> IrradianceSeries {
    let start = default_start();
    let n = days * 86_400;
    let mut v: Vec<f64> = (0..n)
        .map(|i| clear_sky((i % 86_400) as f64 / 3600.0))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for day in 0..days {
        let base = day * 86_400;
        let passes = rng.gen_range(3..12);
        let mut t = 7 * 3600 + rng.gen_range(0..3600);
        for _ in 0..passes {
            let down = rng.gen_range(2..60usize);
            let hold = rng.gen_range(30..600usize);
            let up = rng.gen_range(10..120usize);
            let depth: f64 = rng.gen_range(0.2..0.8);
            let end = t + down + hold + up;
            if end >= 17 * 3600 {
                break;
            }
            for k in 0..(down + hold + up) {
                let f = if k < down {
                    depth * (k + 1) as f64 / down as f64
                } else if k < down + hold {
                    depth
                } else {
                    depth * (1.0 - (k - down - hold + 1) as f64 / up as f64)
                };
                v[base + t + k] *= 1.0 - f;
            }
            t = end + rng.gen_range(300..5400);
        }
    }
    let reference = reference_hour(start);
    let h11 = 11 * 3600;
    let level = clear_sky(11.5);
    for (i, r) in reference.values.iter().enumerate() {
        v[h11 + i] = r * level;
    }
    let values = v.into_iter().map(quantize).collect();
    IrradianceSeries::new(start, 1.0, values).expect("valid synthetic series")
}

/// Daily load cycle between about 110 and 140 MW with seeded noise.
pub fn synthetic_load(hours: usize, seed: u64) -> LoadProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let values = (0..hours)
        .map(|h| {
            let hod = (h % 24) as f64;
            let cycle = 124.0 + 14.0 * (2.0 * std::f64::consts::PI * (hod - 9.0) / 24.0).sin();
            let noise: f64 = rng.gen_range(-1.5..1.5);
            ((cycle + noise) * 1000.0).round() / 1000.0
        })
        .collect();
    LoadProfile::new(default_start(), values).expect("positive load")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramps::{extract_scenarios, RampParams};

    #[test]
    fn reference_hour_reproduces_envelope() {
        let s = reference_hour(default_start());
        let sc = extract_scenarios(&s, &RampParams::default()).unwrap();
        let got: Vec<(f64, f64)> = sc.hourly[0].events.iter().map(|e| (e.duration, e.drop)).collect();
        assert_eq!(got.len(), 4);
        for ((d, i), (ed, ei)) in got.iter().zip(REFERENCE_RAMPS) {
            assert_eq!(*d, ed);
            assert!((i - ei).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_week_is_deterministic() {
        let a = synthetic_irradiance(2, 7);
        let b = synthetic_irradiance(2, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 86_400);
        assert!(a.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(a.values[3 * 3600], 0.0);
        assert_ne!(a, synthetic_irradiance(2, 8));
        let load = synthetic_load(48, 7);
        assert!(load.values.iter().all(|v| (107.0..=140.0).contains(v)));
    }

    #[test]
    fn load_csv_round_trip_and_errors() {
        let load = synthetic_load(5, 1);
        let mut buf = Vec::new();
        write_load_csv(&load, &mut buf).unwrap();
        let back = read_load_csv(&buf[..], Path::new("load.csv")).unwrap();
        assert_eq!(back.values, load.values);
        let text = "timestamp,load\n2010-03-01T00:00:00,120\n2010-03-01T02:00:00,121\n";
        match read_load_csv(text.as_bytes(), Path::new("load.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "2010-03-01T00:00:00,120\n2010-03-01T01:00:00,-1\n";
        assert!(read_load_csv(text.as_bytes(), Path::new("load.csv")).is_err());
    }
}
