use super::{HourSlice, RampEvent, RampParams};

/// Trailing moving average; the output has `len - window + 1` samples.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    if values.len() < window {
        return Vec::new();
    }
    if window == 1 {
        return values.to_vec();
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut sum: f64 = values[..window].iter().sum();
    out.push(sum / window as f64);
    for i in window..values.len() {
        sum += values[i] - values[i - window];
        out.push(sum / window as f64);
    }
    out
}

/// Find descending ramps in one hour.
///
/// A ramp is a maximal run of strictly decreasing samples of the smoothed
/// series, i.e. it starts at a local maximum and ends at the next local
/// minimum. Plateaus end a ramp. Runs dropping less than `min_drop` are
/// discarded.
pub fn detect_ramps(slice: &HourSlice, params: &RampParams) -> Vec<RampEvent> {
    let smoothed = moving_average(&slice.series.values, params.smooth_window);
    let dt = slice.series.dt;
    let mut events = Vec::new();
    let mut i = 0;
    while i + 1 < smoothed.len() {
        if smoothed[i + 1] < smoothed[i] {
            let start = i;
            while i + 1 < smoothed.len() && smoothed[i + 1] < smoothed[i] {
                i += 1;
            }
            let drop = smoothed[start] - smoothed[i];
            if drop > 0.0 && drop >= params.min_drop {
                events.push(RampEvent {
                    hour: slice.hour,
                    duration: (i - start) as f64 * dt,
                    drop,
                });
            }
        } else {
            i += 1;
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ramps::IrradianceSeries;
    use chrono::NaiveDate;

    fn slice(values: Vec<f64>) -> HourSlice {
        let start = NaiveDate::from_ymd_opt(2010, 3, 1)
            .unwrap()
            .and_hms_opt(11, 0, 0)
            .unwrap();
        HourSlice {
            hour: 11,
            series: IrradianceSeries::new(start, 1.0, values).unwrap(),
        }
    }

    /// Flat at `top`, then a linear descent of `drop` over `steps` samples, then flat.
    fn descent(top: f64, drop: f64, steps: usize, lead: usize, tail: usize) -> Vec<f64> {
        let mut v = vec![top; lead];
        v.extend((0..=steps).map(|k| top - drop * k as f64 / steps as f64));
        v.extend(std::iter::repeat_n(top - drop, tail));
        v
    }

    fn params() -> RampParams {
        RampParams {
            min_drop: 0.01,
            smooth_window: 1,
        }
    }

    #[test]
    fn flat_series_has_no_ramps() {
        assert!(detect_ramps(&slice(vec![1.0; 3600]), &params()).is_empty());
    }

    #[test]
    fn single_linear_descent() {
        let v = descent(1.0, 0.6, 19, 1000, 3600 - 1020);
        let ev = detect_ramps(&slice(v), &params());
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].duration, 19.0);
        assert!((ev[0].drop - 0.6).abs() < 1e-12);
        assert_eq!(ev[0].hour, 11);
    }

    #[test]
    fn two_separated_descents() {
        let mut v = descent(1.0, 0.1, 2, 500, 300);
        let tail = descent(0.9, 0.6, 36, 0, 0);
        v.extend(&tail[1..]);
        let bottom = *v.last().unwrap();
        v.resize(3600, bottom);
        let ev = detect_ramps(&slice(v), &params());
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[0].duration, 2.0);
        assert!((ev[0].drop - 0.1).abs() < 1e-12);
        assert_eq!(ev[1].duration, 36.0);
        assert!((ev[1].drop - 0.6).abs() < 1e-12);
    }

    #[test]
    fn min_drop_filters_small_ripples() {
        let mut v = vec![0.8; 3600];
        v[100] = 0.795;
        v[2000] = 0.5;
        let ev = detect_ramps(&slice(v), &params());
        assert_eq!(ev.len(), 1);
        assert!((ev[0].drop - 0.3).abs() < 1e-12);
        assert_eq!(ev[0].duration, 1.0);
    }

    #[test]
    fn smoothing_stretches_duration_not_drop() {
        let v = descent(1.0, 0.6, 19, 1000, 3600 - 1020);
        let p = RampParams {
            smooth_window: 5,
            ..params()
        };
        let ev = detect_ramps(&slice(v), &p);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].duration, 23.0);
        assert!((ev[0].drop - 0.6).abs() < 1e-9);
    }

    #[test]
    fn moving_average_edges() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 1), vec![1.0, 2.0, 3.0]);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 2), vec![1.5, 2.5]);
        assert!(moving_average(&[1.0], 3).is_empty());
    }
}
