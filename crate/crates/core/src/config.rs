//! Case configuration files (TOML).
//!
//! A case file holds the plant, economics, ramp detection and model build
//! settings. The reference case ships inside the crate and is what
//! [`CaseConfig::reference`] returns.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{EconomicParams, PlantConfig};
use crate::error::{Error, Result};
use crate::model::BuildOptions;
use crate::ramps::RampParams;
use crate::sim::SimSettings;

/// Text of the bundled reference case.
pub const REFERENCE_CASE: &str = include_str!("../configs/isolated_og_plant.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseConfig {
    pub plant: PlantConfig,
    pub economics: EconomicParams,
    #[serde(default)]
    pub ramps: RampParams,
    #[serde(default)]
    pub build: BuildOptions,
    #[serde(default)]
    pub sim: SimSettings,
}

impl CaseConfig {
    /// The bundled four-turbine case.
    pub fn reference() -> Self {
        Self::from_toml_str(REFERENCE_CASE, Path::new("isolated_og_plant.toml"))
            .expect("bundled case file is valid")
    }

    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self> {
        let cfg: CaseConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.economics.validate()?;
        if self.ramps.smooth_window < 1 || !(self.ramps.min_drop >= 0.0) {
            return Err(Error::InvalidArgument(
                "ramps: smooth_window must be >= 1 and min_drop >= 0".into(),
            ));
        }
        self.sim.validate()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Validation(format!("serializing case: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_case_values() {
        let c = CaseConfig::reference();
        assert_eq!(c.plant.generators.len(), 4);
        assert_eq!(c.plant.generators[0].p_max, 45.0);
        assert_eq!(c.plant.generators[0].rr_frr, 0.208);
        assert_eq!(c.plant.freq.f_nom * c.plant.freq.r_ss, 0.5);
        assert_eq!(c.plant.s_base(), 45.0);
        assert_eq!(c.economics.lifetime_years, 20);
        assert_eq!(c.ramps, RampParams::default());
    }

    #[test]
    fn toml_round_trip() {
        let c = CaseConfig::reference();
        let text = c.to_toml_string().unwrap();
        let back = CaseConfig::from_toml_str(&text, Path::new("x.toml")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_values_name_the_file() {
        let text = REFERENCE_CASE.replace("d_pv = 0.8", "d_pv = 1.8");
        let err = CaseConfig::from_toml_str(&text, Path::new("bad.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.toml") && msg.contains("d_pv"), "{msg}");
        let err = CaseConfig::from_toml_str("[plant]\n", Path::new("short.toml")).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }
}
