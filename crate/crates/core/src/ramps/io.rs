//! CSV input/output for irradiance series and ramp envelopes.
//!
//! Irradiance files have two columns, an ISO-8601 timestamp and an irradiance
//! in kW/m², with a constant step. A header row is optional. Envelope files
//! have the header `hour,duration_s,drop_kW_m2`; the global envelope leaves
//! `hour` set to the hour the event came from.

use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;

use super::{IrradianceSeries, RampEvent, RampHull};
use crate::error::{Error, Result};

pub const HULL_HEADER: [&str; 3] = ["hour", "duration_s", "drop_kW_m2"];

pub(crate) fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = chrono::DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Read a timestamped two-column CSV into `(time, value)` pairs.
/// Each row carries its 1-based line number in the file.
pub(crate) fn read_timeseries<R: Read>(
    reader: R,
    path: &Path,
) -> Result<Vec<(usize, NaiveDateTime, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(idx + 1, |p| p.line() as usize);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        if rec.len() < 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected 2 columns, found {}", rec.len()),
            });
        }
        let ts = parse_timestamp(&rec[0]);
        let value = rec[1].parse::<f64>();
        match (ts, value) {
            (Some(ts), Ok(v)) => rows.push((line, ts, v)),
            // a header row is tolerated only as the first record
            (None, Err(_)) if idx == 0 => continue,
            (None, _) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid timestamp {:?}", &rec[0]),
                })
            }
            (_, Err(e)) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: format!("invalid value {:?}: {e}", &rec[1]),
                })
            }
        }
    }
    Ok(rows)
}

/// Parse an irradiance CSV, checking the step is constant.
pub fn read_irradiance_csv<R: Read>(reader: R, path: &Path) -> Result<IrradianceSeries> {
    let rows = read_timeseries(reader, path)?;
    if rows.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows.len().max(1),
            message: "need at least two samples".into(),
        });
    }
    let step = (rows[1].1 - rows[0].1).num_milliseconds();
    if step <= 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows[1].0,
            message: "timestamps must increase".into(),
        });
    }
    for w in rows.windows(2) {
        if (w[1].1 - w[0].1).num_milliseconds() != step {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: w[1].0,
                message: format!("non-uniform step at {}", w[1].1),
            });
        }
    }
    if let Some(&(line, _, v)) = rows.iter().find(|(_, _, v)| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("irradiance {v} is negative or not finite"),
        });
    }
    IrradianceSeries::new(
        rows[0].1,
        step as f64 / 1000.0,
        rows.into_iter().map(|(_, _, v)| v).collect(),
    )
}

pub fn load_irradiance_csv(path: &Path) -> Result<IrradianceSeries> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_irradiance_csv(std::io::BufReader::new(f), path)
}

pub fn write_irradiance_csv<W: Write>(series: &IrradianceSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Validation(format!("writing irradiance CSV: {e}"));
    w.write_record(["timestamp", "irradiance_kW_m2"]).map_err(csv_err)?;
    let step_ms = (series.dt * 1000.0).round() as i64;
    for (i, v) in series.values.iter().enumerate() {
        let t = series.start + chrono::Duration::milliseconds(step_ms * i as i64);
        w.write_record([t.format("%Y-%m-%dT%H:%M:%S%.3f").to_string(), v.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Validation(format!("writing irradiance CSV: {e}")))?;
    Ok(())
}

/// Write envelopes as rows of `hour,duration_s,drop_kW_m2`. Hourly envelopes
/// use their own hour; global envelope rows use each event's source hour.
pub fn write_hull_csv<'a, W: Write>(
    hulls: impl IntoIterator<Item = &'a RampHull>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Validation(format!("writing hull CSV: {e}"));
    w.write_record(HULL_HEADER).map_err(csv_err)?;
    for hull in hulls {
        for e in &hull.events {
            let hour = hull.hour.unwrap_or(e.hour);
            w.write_record([hour.to_string(), e.duration.to_string(), e.drop.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::Validation(format!("writing hull CSV: {e}")))?;
    Ok(())
}

/// Read hull rows back as flat events in file order.
pub fn read_hull_csv<R: Read>(reader: R, path: &Path) -> Result<Vec<RampEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != HULL_HEADER {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header {}", HULL_HEADER.join(",")),
        });
    }
    let mut events = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 3 {
            return Err(err(format!("expected 3 columns, found {}", rec.len())));
        }
        let hour = rec[0]
            .parse::<usize>()
            .map_err(|e| err(format!("hour {:?}: {e}", &rec[0])))?;
        let duration = rec[1]
            .parse::<f64>()
            .map_err(|e| err(format!("duration {:?}: {e}", &rec[1])))?;
        let drop = rec[2]
            .parse::<f64>()
            .map_err(|e| err(format!("drop {:?}: {e}", &rec[2])))?;
        if !(duration > 0.0) || !(drop >= 0.0) {
            return Err(err("duration must be positive and drop non-negative".into()));
        }
        events.push(RampEvent {
            hour,
            duration,
            drop,
        });
    }
    Ok(events)
}

pub fn load_hull_csv(path: &Path) -> Result<Vec<RampEvent>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_hull_csv(std::io::BufReader::new(f), path)
}

/// Group flat hull rows into one envelope per hour for `horizon` hours.
pub fn group_by_hour(events: &[RampEvent], horizon: usize) -> Result<Vec<RampHull>> {
    let mut hulls: Vec<RampHull> = (0..horizon).map(|h| RampHull::empty(Some(h))).collect();
    for e in events {
        let slot = hulls.get_mut(e.hour).ok_or_else(|| {
            Error::Validation(format!(
                "hull row for hour {} lies outside the {horizon}-hour horizon",
                e.hour
            ))
        })?;
        slot.events.push(*e);
    }
    for h in &mut hulls {
        h.events.sort_by(|a, b| a.duration.total_cmp(&b.duration));
        h.check_invariants()?;
    }
    Ok(hulls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("irr.csv")
    }

    #[test]
    fn reads_uniform_series_with_header() {
        let text = "timestamp,irradiance\n2010-03-01T11:00:00,0.5\n2010-03-01T11:00:01,0.4\n2010-03-01 11:00:02,0.3\n";
        let s = read_irradiance_csv(text.as_bytes(), &p()).unwrap();
        assert_eq!(s.dt, 1.0);
        assert_eq!(s.values, vec![0.5, 0.4, 0.3]);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let text = "2010-03-01T11:00:00,0.5\n2010-03-01T11:00:01,abc\n";
        match read_irradiance_csv(text.as_bytes(), &p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let text = "2010-03-01T11:00:00,0.5\n2010-03-01T11:00:01,0.5\n2010-03-01T11:00:03,0.5\n";
        match read_irradiance_csv(text.as_bytes(), &p()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("non-uniform"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "2010-03-01T11:00:00,0.5\nyesterday,0.5\n";
        assert!(matches!(
            read_irradiance_csv(text.as_bytes(), &p()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn hull_csv_round_trip() {
        let hull = RampHull {
            hour: Some(3),
            events: vec![
                RampEvent {
                    hour: 3,
                    duration: 2.0,
                    drop: 0.061,
                },
                RampEvent {
                    hour: 3,
                    duration: 19.0,
                    drop: 0.613,
                },
            ],
        };
        let mut buf = Vec::new();
        write_hull_csv([&hull], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("hour,duration_s,drop_kW_m2\n3,2,0.061\n"));
        let back = read_hull_csv(&buf[..], &p()).unwrap();
        assert_eq!(back, hull.events);
        let grouped = group_by_hour(&back, 5).unwrap();
        assert_eq!(grouped[3], hull);
        assert!(grouped[0].is_empty());
        assert!(group_by_hour(&back, 2).is_err());
    }

    #[test]
    fn empty_hull_csv_has_header_only() {
        let mut buf = Vec::new();
        write_hull_csv([&RampHull::empty(None)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "hour,duration_s,drop_kW_m2\n");
    }
}
