//! Worst-case solar ramp scenarios from high-resolution irradiance data.
//!
//! The pipeline is: cut the series into whole hours, detect descending ramps
//! in each hour, reduce each hour's events to the upper envelope of
//! (duration, drop), and merge the hourly envelopes into a global one.

mod detect;
mod hull;
pub mod io;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use detect::{detect_ramps, moving_average};
pub use hull::{global_hull, hull_reduce};

/// Longest sampling period that still resolves cloud-passage ramps (s).
pub const MAX_RAMP_SAMPLE_PERIOD: f64 = 5.0;

/// Uniformly sampled irradiance (kW/m²).
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceSeries {
    pub start: NaiveDateTime,
    /// Sample period (s).
    pub dt: f64,
    pub values: Vec<f64>,
}

impl IrradianceSeries {
    pub fn new(start: NaiveDateTime, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample period must be positive, got {dt}"
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidArgument(format!(
                "irradiance sample {i} is {v}; samples must be finite and non-negative"
            )));
        }
        Ok(IrradianceSeries { start, dt, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of samples in one hour; errors unless `dt` divides 3600 s.
    pub fn samples_per_hour(&self) -> Result<usize> {
        let n = 3600.0 / self.dt;
        let rounded = n.round();
        if rounded < 1.0 || (n - rounded).abs() > 1e-9 * n {
            return Err(Error::InvalidArgument(format!(
                "sample period {} s does not divide one hour",
                self.dt
            )));
        }
        Ok(rounded as usize)
    }

    /// Mean irradiance of the series (kW/m²), 0 when empty.
    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values.iter().sum::<f64>() / self.values.len() as f64
        }
    }
}

/// One whole hour of samples, tagged with its hour index from the series start.
#[derive(Debug, Clone, PartialEq)]
pub struct HourSlice {
    pub hour: usize,
    pub series: IrradianceSeries,
}

/// A descending irradiance ramp: drop `drop` (kW/m²) over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampEvent {
    pub hour: usize,
    /// Ramp duration (s).
    pub duration: f64,
    /// Irradiance drop (kW/m²).
    pub drop: f64,
}

impl RampEvent {
    /// Constant rate of change over the ramp (kW/m² per s).
    pub fn rate(&self) -> f64 {
        self.drop / self.duration
    }
}

/// Upper concave envelope of ramp events, sorted by increasing duration.
///
/// Durations and drops are strictly increasing and consecutive segment
/// slopes strictly decreasing. `hour` is `None` for the global envelope.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RampHull {
    pub hour: Option<usize>,
    pub events: Vec<RampEvent>,
}

impl RampHull {
    pub fn empty(hour: Option<usize>) -> Self {
        RampHull {
            hour,
            events: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Check the ordering and concavity invariants.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.events.windows(2) {
            if !(w[1].duration > w[0].duration && w[1].drop > w[0].drop) {
                return Err(Error::Validation(format!(
                    "hull events not strictly increasing: {:?} then {:?}",
                    w[0], w[1]
                )));
            }
        }
        for w in self.events.windows(3) {
            let s1 = (w[1].drop - w[0].drop) / (w[1].duration - w[0].duration);
            let s2 = (w[2].drop - w[1].drop) / (w[2].duration - w[1].duration);
            if !(s2 < s1) {
                return Err(Error::Validation(format!(
                    "hull not concave around duration {} s",
                    w[1].duration
                )));
            }
        }
        Ok(())
    }
}

/// Detection parameters. The defaults keep every unsmoothed descent of at least 0.01 kW/m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampParams {
    /// Smallest irradiance drop kept as an event (kW/m²).
    pub min_drop: f64,
    /// Moving-average window in samples (1 disables smoothing).
    pub smooth_window: usize,
}

impl Default for RampParams {
    fn default() -> Self {
        RampParams {
            min_drop: 0.01,
            smooth_window: 1,
        }
    }
}

/// Cut a series into contiguous whole hours; a trailing partial hour is dropped.
pub fn slice_hours(series: &IrradianceSeries) -> Result<Vec<HourSlice>> {
    let per_hour = series.samples_per_hour()?;
    Ok(series
        .values
        .chunks_exact(per_hour)
        .enumerate()
        .map(|(hour, chunk)| HourSlice {
            hour,
            series: IrradianceSeries {
                start: series.start + Duration::hours(hour as i64),
                dt: series.dt,
                values: chunk.to_vec(),
            },
        })
        .collect())
}

/// PV power drop (MW) for an irradiance drop over `area_m2` of panels.
pub fn pv_power_drop(event: &RampEvent, d_pv: f64, area_m2: f64) -> Result<f64> {
    if !(area_m2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "PV area must be non-negative, got {area_m2}"
        )));
    }
    // kW/m² * m² = kW
    Ok(d_pv * event.drop * area_m2 * 1e-3)
}

/// Per-hour envelopes plus the global envelope for a whole series.
#[derive(Debug, Clone, PartialEq)]
pub struct RampScenarios {
    pub hourly: Vec<RampHull>,
    pub global: RampHull,
    /// Mean irradiance of each whole hour (kW/m²).
    pub hourly_mean: Vec<f64>,
}

/// Run the full extraction: slice, detect, reduce per hour, merge.
pub fn extract_scenarios(series: &IrradianceSeries, params: &RampParams) -> Result<RampScenarios> {
    if series.dt > MAX_RAMP_SAMPLE_PERIOD {
        return Err(Error::InvalidArgument(format!(
            "sample period {} s is too coarse for ramp extraction (max {} s)",
            series.dt, MAX_RAMP_SAMPLE_PERIOD
        )));
    }
    let slices = slice_hours(series)?;
    let hourly: Vec<RampHull> = slices
        .iter()
        .map(|slice| {
            let mut hull = hull_reduce(&detect_ramps(slice, params));
            hull.hour = Some(slice.hour);
            hull
        })
        .collect();
    let hourly_mean = slices.iter().map(|s| s.series.mean()).collect();
    let global = global_hull(&hourly);
    Ok(RampScenarios {
        hourly,
        global,
        hourly_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2010, 3, 1)
            .unwrap()
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    fn series(n: usize) -> IrradianceSeries {
        IrradianceSeries::new(t0(), 1.0, vec![0.5; n]).unwrap()
    }

    #[test]
    fn slicing_exact_and_remainder() {
        let s = slice_hours(&series(7200)).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|h| h.series.len() == 3600));
        assert_eq!(s[1].hour, 1);
        assert_eq!(s[1].series.start, t0() + Duration::hours(1));

        let s = slice_hours(&series(5400)).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].series.len(), 3600);

        assert_eq!(slice_hours(&series(3600)).unwrap().len(), 1);
        assert!(slice_hours(&series(1000)).unwrap().is_empty());
    }

    #[test]
    fn slices_reproduce_prefix() {
        let values: Vec<f64> = (0..9000).map(|i| (i % 97) as f64 / 97.0).collect();
        let s = IrradianceSeries::new(t0(), 2.0, values.clone()).unwrap();
        let joined: Vec<f64> = slice_hours(&s)
            .unwrap()
            .into_iter()
            .flat_map(|h| h.series.values)
            .collect();
        assert_eq!(joined.len(), 9000 / 1800 * 1800);
        assert_eq!(&joined[..], &values[..joined.len()]);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(IrradianceSeries::new(t0(), 0.0, vec![]).is_err());
        assert!(IrradianceSeries::new(t0(), 1.0, vec![0.1, -0.2]).is_err());
        assert!(IrradianceSeries::new(t0(), 1.0, vec![f64::NAN]).is_err());
        let odd = IrradianceSeries::new(t0(), 7.0, vec![0.0; 10]).unwrap();
        assert!(slice_hours(&odd).is_err());
        let coarse = IrradianceSeries::new(t0(), 10.0, vec![0.0; 720]).unwrap();
        assert!(extract_scenarios(&coarse, &RampParams::default()).is_err());
    }

    #[test]
    fn pv_drop_examples() {
        let ev = |drop| RampEvent {
            hour: 0,
            duration: 19.0,
            drop,
        };
        assert!((pv_power_drop(&ev(0.613), 0.8, 46200.0).unwrap() - 22.65648).abs() < 1e-9);
        assert_eq!(pv_power_drop(&ev(0.0), 0.8, 46200.0).unwrap(), 0.0);
        assert!((pv_power_drop(&ev(0.878), 1.0, 1000.0).unwrap() - 0.878).abs() < 1e-12);
        assert!(pv_power_drop(&ev(0.5), 0.8, -1.0).is_err());
    }

    #[test]
    fn pv_drop_is_linear() {
        let e1 = RampEvent {
            hour: 0,
            duration: 5.0,
            drop: 0.2,
        };
        let e2 = RampEvent { drop: 0.6, ..e1 };
        let a = pv_power_drop(&e1, 0.8, 1000.0).unwrap();
        assert!((pv_power_drop(&e2, 0.8, 1000.0).unwrap() - 3.0 * a).abs() < 1e-12);
        assert!((pv_power_drop(&e1, 0.8, 5000.0).unwrap() - 5.0 * a).abs() < 1e-12);
    }

    #[test]
    fn hull_invariant_checker() {
        let ok = RampHull {
            hour: Some(11),
            events: [(2.0, 0.061), (19.0, 0.613), (36.0, 0.778), (48.0, 0.878)]
                .iter()
                .map(|&(duration, drop)| RampEvent {
                    hour: 11,
                    duration,
                    drop,
                })
                .collect(),
        };
        ok.check_invariants().unwrap();
        let mut bad = ok.clone();
        bad.events[2].drop = 0.95;
        assert!(bad.check_invariants().is_err());
    }
}
