//! Physical and economic parameters of the plant, plus the per-unit and
//! reserve-capacity algebra shared by the model builder and the simulator.
//!
//! Units: powers in MW, frequencies in Hz unless a value is explicitly
//! per-unit, irradiance in kW/m², times in seconds (dynamics) or hours
//! (commitment). Per-unit frequency deviations are relative to `f_nom`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permitted frequency bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLimits {
    /// Rated frequency (Hz).
    pub f_nom: f64,
    /// Steady-state band, per-unit of `f_nom`.
    pub r_ss: f64,
    /// Transient band, per-unit of `f_nom`.
    pub r_tr: f64,
    /// Size FCR with the `(1 - r_tr)` correction for deviations above 1 %.
    #[serde(default)]
    pub robust_mode: bool,
}

impl FrequencyLimits {
    pub fn new(f_nom: f64, r_ss: f64, r_tr: f64, robust_mode: bool) -> Result<Self> {
        let limits = FrequencyLimits {
            f_nom,
            r_ss,
            r_tr,
            robust_mode,
        };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_nom > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "f_nom must be positive, got {}",
                self.f_nom
            )));
        }
        if !(self.r_ss > 0.0 && self.r_ss <= self.r_tr && self.r_tr < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "frequency bands must satisfy 0 < r_ss <= r_tr < 1, got r_ss = {}, r_tr = {}",
                self.r_ss, self.r_tr
            )));
        }
        Ok(())
    }

    /// Lowest frequency allowed in steady state (Hz).
    pub fn steady_state_floor_hz(&self) -> f64 {
        self.f_nom * (1.0 - self.r_ss)
    }

    /// Lowest frequency allowed during transients (Hz).
    pub fn transient_floor_hz(&self) -> f64 {
        self.f_nom * (1.0 - self.r_tr)
    }

    /// Multiplier applied to FCR capacity: `1 - r_tr` in robust mode, 1 otherwise.
    pub fn fcr_derating(&self) -> f64 {
        if self.robust_mode {
            1.0 - self.r_tr
        } else {
            1.0
        }
    }
}

fn default_scale() -> f64 {
    1.0
}

/// A dispatchable thermal unit (gas turbine in the reference case).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub name: String,
    pub p_min: f64,
    pub p_max: f64,
    /// Droop, per-unit frequency change for a full-range power change.
    pub droop: f64,
    /// Inertia constant (s).
    pub inertia_h: f64,
    /// FRR ramp rate (MW/s).
    pub rr_frr: f64,
    /// Minimum up time (h).
    pub t_up: u32,
    /// Minimum down time (h).
    pub t_dn: u32,
    /// Fuel-curve slope (volume/h per MW), before `fuel_scale`.
    pub fuel_a: f64,
    /// Fuel-curve intercept (volume/h), charged only while committed.
    pub fuel_b: f64,
    /// Unit conversion applied to both fuel coefficients.
    #[serde(default = "default_scale")]
    pub fuel_scale: f64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let label = if self.name.is_empty() {
            "generator"
        } else {
            &self.name
        };
        if !(self.p_min >= 0.0 && self.p_min < self.p_max) {
            return Err(Error::InvalidArgument(format!(
                "{label}: need 0 <= p_min < p_max, got p_min = {}, p_max = {}",
                self.p_min, self.p_max
            )));
        }
        if !(self.droop > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{label}: droop must be positive, got {}",
                self.droop
            )));
        }
        if !(self.rr_frr >= 0.0) || !(self.inertia_h >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{label}: rr_frr and inertia_h must be non-negative"
            )));
        }
        if self.t_up < 1 || self.t_dn < 1 {
            return Err(Error::InvalidArgument(format!(
                "{label}: minimum up/down times must be at least 1 h"
            )));
        }
        Ok(())
    }

    /// Effective fuel slope, `fuel_a * fuel_scale`.
    pub fn fuel_slope(&self) -> f64 {
        self.fuel_a * self.fuel_scale
    }

    /// Effective no-load fuel use, `fuel_b * fuel_scale`.
    pub fn fuel_intercept(&self) -> f64 {
        self.fuel_b * self.fuel_scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub generators: Vec<GeneratorSpec>,
    /// Normalization power for damping (MW).
    pub p_base: f64,
    /// PV derating factor.
    pub d_pv: f64,
    pub freq: FrequencyLimits,
    /// Base converting per-unit damping to MW; `p_base` when absent.
    #[serde(default)]
    pub s_base: Option<f64>,
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::InvalidArgument("plant has no generators".into()));
        }
        if !(self.p_base > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "p_base must be positive, got {}",
                self.p_base
            )));
        }
        if !(self.d_pv > 0.0 && self.d_pv <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "d_pv must lie in (0, 1], got {}",
                self.d_pv
            )));
        }
        if let Some(s) = self.s_base {
            if !(s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "s_base must be positive, got {s}"
                )));
            }
        }
        self.freq.validate()?;
        self.generators.iter().try_for_each(GeneratorSpec::validate)
    }

    pub fn s_base(&self) -> f64 {
        self.s_base.unwrap_or(self.p_base)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    /// PV installation cost ($/kW).
    pub c_pv: f64,
    /// Battery installation cost ($/kW).
    pub c_bat: f64,
    /// Fuel price ($/volume).
    pub c_fuel: f64,
    /// CO2 price ($/t).
    pub c_co2: f64,
    /// Emission factor (t CO2 per volume of fuel).
    pub co2_factor: f64,
    /// Discount rate (fraction per year).
    pub discount_rate: f64,
    /// Project lifetime (years).
    pub lifetime_years: u32,
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        let costs = [self.c_pv, self.c_bat, self.c_fuel, self.c_co2, self.co2_factor];
        if costs.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidArgument(
                "costs and emission factor must be non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.discount_rate) {
            return Err(Error::InvalidArgument(format!(
                "discount rate must lie in [0, 1), got {}",
                self.discount_rate
            )));
        }
        if self.lifetime_years < 1 {
            return Err(Error::InvalidArgument("lifetime must be at least 1 year".into()));
        }
        Ok(())
    }

    /// Sum of discount factors `(1 + e)^-y` for `y = 0..=lifetime_years`.
    pub fn annuity_factor(&self) -> f64 {
        (0..=self.lifetime_years)
            .map(|y| (1.0 + self.discount_rate).powi(-(y as i32)))
            .sum()
    }

    /// Cost of one unit of fuel including its CO2 penalty ($/volume).
    pub fn fuel_price(&self) -> f64 {
        self.c_fuel + self.co2_factor * self.c_co2
    }

    /// Installation cost in M$ of the given PV and battery ratings (MW).
    pub fn capex_musd(&self, pv_mw: f64, bat_mw: f64) -> f64 {
        // MW * 1000 kW/MW * $/kW / 1e6 $/M$
        (pv_mw * self.c_pv + bat_mw * self.c_bat) * 1e-3
    }
}

pub fn to_per_unit(value: f64, base: f64) -> Result<f64> {
    if !(base > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "per-unit base must be positive, got {base}"
        )));
    }
    Ok(value / base)
}

pub fn from_per_unit(value: f64, base: f64) -> Result<f64> {
    if !(base > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "per-unit base must be positive, got {base}"
        )));
    }
    Ok(value * base)
}

/// Per-unit damping `D_m = p_max / (droop * p_base)`.
pub fn damping_of(gen: &GeneratorSpec, plant: &PlantConfig) -> Result<f64> {
    if !(gen.droop > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "droop must be positive, got {}",
            gen.droop
        )));
    }
    if !(plant.p_base > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "p_base must be positive, got {}",
            plant.p_base
        )));
    }
    Ok(gen.p_max / (gen.droop * plant.p_base))
}

/// Cap on a unit's FCR assignment (MW): `D_m * r_ss * s_base`, derated by
/// `1 - r_tr` in robust mode.
pub fn fcr_capacity(gen: &GeneratorSpec, plant: &PlantConfig) -> Result<f64> {
    let d = damping_of(gen, plant)?;
    Ok(d * plant.freq.r_ss * plant.s_base() * plant.freq.fcr_derating())
}

/// Fuel consumption (volume/h) of a committed unit dispatched at `p` MW.
pub fn fuel_rate(gen: &GeneratorSpec, p: f64) -> Result<f64> {
    if !(0.0..=gen.p_max).contains(&p) {
        return Err(Error::Domain(format!(
            "dispatch {p} MW outside [0, {}] MW",
            gen.p_max
        )));
    }
    Ok(gen.fuel_slope() * p + gen.fuel_intercept())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn gt(p_max: f64, droop: f64) -> GeneratorSpec {
        GeneratorSpec {
            name: "GT".into(),
            p_min: 13.5,
            p_max,
            droop,
            inertia_h: 5.51,
            rr_frr: 0.208,
            t_up: 6,
            t_dn: 6,
            fuel_a: 13782.0,
            fuel_b: 5523.0,
            fuel_scale: 1.0,
        }
    }

    pub fn plant(s_base: Option<f64>, robust: bool) -> PlantConfig {
        PlantConfig {
            generators: vec![gt(45.0, 0.1); 4],
            p_base: 45.0,
            d_pv: 0.8,
            freq: FrequencyLimits::new(50.0, 0.01, 0.05, robust).unwrap(),
            s_base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn per_unit_conversion() {
        assert!(close(to_per_unit(0.5, 50.0).unwrap(), 0.01));
        assert_eq!(to_per_unit(0.0, 50.0).unwrap(), 0.0);
        assert_eq!(to_per_unit(45.0, 45.0).unwrap(), 1.0);
        assert!(matches!(to_per_unit(1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(to_per_unit(1.0, -3.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn damping_examples() {
        let p = plant(None, false);
        assert!(close(damping_of(&gt(45.0, 0.1), &p).unwrap(), 10.0));
        assert!(close(damping_of(&gt(45.0, 1.0), &p).unwrap(), 1.0));
        assert!(close(damping_of(&gt(90.0, 0.1), &p).unwrap(), 20.0));
        assert!(damping_of(&gt(45.0, 0.0), &p).is_err());
    }

    #[test]
    fn fcr_capacity_examples() {
        let g = gt(45.0, 0.1);
        assert!(close(fcr_capacity(&g, &plant(None, false)).unwrap(), 4.5));
        assert!(close(fcr_capacity(&g, &plant(None, true)).unwrap(), 4.275));
        let mut zero_band = plant(None, false);
        zero_band.freq.r_ss = 0.0;
        assert_eq!(fcr_capacity(&g, &zero_band).unwrap(), 0.0);
    }

    #[test]
    fn fuel_rate_examples() {
        let g = gt(45.0, 0.1);
        assert_eq!(fuel_rate(&g, 0.0).unwrap(), 5523.0);
        assert_eq!(fuel_rate(&g, 1.0).unwrap(), 19305.0);
        let mut free = g.clone();
        free.fuel_a = 0.0;
        free.fuel_b = 0.0;
        assert_eq!(fuel_rate(&free, 17.0).unwrap(), 0.0);
        let mut half = g.clone();
        half.fuel_scale = 0.5;
        assert_eq!(fuel_rate(&half, 1.0).unwrap(), 9652.5);
        assert!(matches!(fuel_rate(&g, 46.0), Err(Error::Domain(_))));
        assert!(matches!(fuel_rate(&g, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn limits_validation() {
        assert!(FrequencyLimits::new(50.0, 0.02, 0.01, false).is_err());
        assert!(FrequencyLimits::new(0.0, 0.01, 0.03, false).is_err());
        assert!(FrequencyLimits::new(50.0, 0.01, 1.0, false).is_err());
        let l = FrequencyLimits::new(50.0, 0.01, 0.03, false).unwrap();
        assert!(close(l.steady_state_floor_hz(), 49.5));
        assert!(close(l.transient_floor_hz(), 48.5));
    }

    #[test]
    fn capex_of_sample_builds() {
        let econ = EconomicParams {
            c_pv: 400.0,
            c_bat: 250.0,
            c_fuel: 1.01,
            c_co2: 120.0,
            co2_factor: 0.0019,
            discount_rate: 0.03,
            lifetime_years: 20,
        };
        assert!(close(econ.capex_musd(62.0, 10.8), 27.5));
        assert!((econ.capex_musd(129.76, 0.0) - 51.9).abs() < 0.05);
        assert!((econ.capex_musd(62.0, 33.3) - 33.1).abs() < 0.05);
        assert_eq!(econ.capex_musd(0.0, 0.0), 0.0);
        // 21 terms, y = 0..=20
        let direct: f64 = (0..=20).map(|y| 1.03f64.powi(-y)).sum();
        assert!(close(econ.annuity_factor(), direct));
    }

    proptest! {
        #[test]
        fn fcr_capacity_monotone(
            r1 in 0.001f64..0.05, dr in 0.0f64..0.05,
            pmax in 1.0f64..200.0, dp in 0.0f64..50.0,
            droop in 0.01f64..0.5, dd in 0.0f64..0.2,
            s in 1.0f64..200.0, ds in 0.0f64..50.0,
        ) {
            let base = |r_ss: f64, p_max: f64, droop: f64, s_base: f64| {
                let mut p = plant(Some(s_base), false);
                p.freq.r_ss = r_ss;
                p.freq.r_tr = 0.5;
                fcr_capacity(&gt(p_max, droop), &p).unwrap()
            };
            let v = base(r1, pmax, droop, s);
            prop_assert!(base(r1 + dr, pmax, droop, s) >= v);
            prop_assert!(base(r1, pmax + dp, droop, s) >= v);
            prop_assert!(base(r1, pmax, droop, s + ds) >= v);
            prop_assert!(base(r1, pmax, droop + dd, s) <= v);
        }

        #[test]
        fn robust_is_exact_derating(r_ss in 0.001f64..0.05, extra in 0.0f64..0.4) {
            let r_tr = r_ss + extra;
            let mut p = plant(None, false);
            p.freq.r_ss = r_ss;
            p.freq.r_tr = r_tr;
            let plain = fcr_capacity(&gt(45.0, 0.1), &p).unwrap();
            p.freq.robust_mode = true;
            let robust = fcr_capacity(&gt(45.0, 0.1), &p).unwrap();
            prop_assert!((robust - plain * (1.0 - r_tr)).abs() <= 1e-12 * plain.max(1.0));
        }

        #[test]
        fn per_unit_round_trip(x in -1e6f64..1e6, base in 1e-3f64..1e6) {
            let back = from_per_unit(to_per_unit(x, base).unwrap(), base).unwrap();
            prop_assert!((back - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300));
        }
    }
}
