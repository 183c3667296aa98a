//! Closed-form reserve checks used outside the optimization.

use serde::{Deserialize, Serialize};

/// A ramp expressed in power: `drop` MW lost linearly over `duration` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerRamp {
    pub duration: f64,
    pub drop: f64,
}

/// Battery FCR (MW) needed to cover a unit trip and a PV ramp at once.
///
/// The deficit is the sudden loss not covered by generator FCR plus the ramp
/// drop not covered by generator FRR over the ramp duration
/// (`total_frr_ramp = sum(rr_frr) * duration` over committed units), floored at zero.
pub fn battery_fcr_requirement(p_sud: f64, total_gt_fcr: f64, dp_pv: f64, total_frr_ramp: f64) -> f64 {
    (p_sud - total_gt_fcr + dp_pv - total_frr_ramp).max(0.0)
}

/// Whether generator FRR ramping plus FCR covers a PV ramp without storage.
pub fn short_term_feasibility(frr_ramps: &[f64], fcr: &[f64], ramp: &PowerRamp) -> bool {
    let frr: f64 = frr_ramps.iter().map(|rr| rr * ramp.duration).sum();
    let fcr: f64 = fcr.iter().sum();
    frr + fcr >= ramp.drop
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn requirement_examples() {
        let frr_19: f64 = 3.0 * 0.208 * 19.0;
        assert!((frr_19 - 11.856).abs() < 1e-12);
        assert!((battery_fcr_requirement(22.5, 0.0, 22.656, frr_19) - 33.3).abs() < 1e-9);
        assert!((battery_fcr_requirement(22.5, 22.5, 22.656, frr_19) - 10.8).abs() < 1e-9);
        assert_eq!(battery_fcr_requirement(22.5, 22.5, 22.752, 3.0 * 0.208 * 48.0), 0.0);
        assert_eq!(battery_fcr_requirement(0.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn feasibility_examples() {
        let rr = [0.208; 3];
        let ramp = PowerRamp {
            duration: 19.0,
            drop: 22.656,
        };
        assert!(short_term_feasibility(&rr, &[7.5; 3], &ramp));
        assert!(!short_term_feasibility(&rr, &[0.0; 3], &ramp));
        let flat = PowerRamp {
            duration: 5.0,
            drop: 0.0,
        };
        assert!(short_term_feasibility(&[0.0], &[0.0], &flat));
    }

    proptest! {
        #[test]
        fn fcr_never_increases_requirement(
            p_sud in 0.0f64..50.0, fcr in 0.0f64..50.0, dp in 0.0f64..80.0, frr in 0.0f64..40.0
        ) {
            let with = battery_fcr_requirement(p_sud, fcr, dp, frr);
            let without = battery_fcr_requirement(p_sud, 0.0, dp, frr);
            prop_assert!(with <= without);
            prop_assert!((with - (without - fcr).max(0.0)).abs() < 1e-9);
        }
    }
}
