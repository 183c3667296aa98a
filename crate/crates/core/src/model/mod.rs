//! Frequency-constrained sizing MILP and the closed-form reserve checks.

mod build;
pub mod problem;
mod reserve;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use build::{
    build_problem, BuildOptions, ConstraintFamily, Dispatch, ModelIndex, SizingInputs, SizingModel,
};
pub use problem::{Constraint, MilpProblem, Relation, VarId, Variable};
pub use reserve::{battery_fcr_requirement, short_term_feasibility, PowerRamp};

use crate::error::Error;

/// Which reserve constraints the sizing problem carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    /// Existing gas turbines only, no PV or battery.
    Baseline,
    /// PV without any frequency constraints.
    NoFc,
    /// Full reserve constraints; generator FCR ignored when sizing the battery.
    StaticFc,
    /// Full reserve constraints with generator FCR credited to the battery requirement.
    DynamicFc,
}

impl ScenarioMode {
    pub const ALL: [ScenarioMode; 4] = [
        ScenarioMode::Baseline,
        ScenarioMode::NoFc,
        ScenarioMode::StaticFc,
        ScenarioMode::DynamicFc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioMode::Baseline => "baseline",
            ScenarioMode::NoFc => "no_fc",
            ScenarioMode::StaticFc => "static_fc",
            ScenarioMode::DynamicFc => "dynamic_fc",
        }
    }

    pub fn has_pv(self) -> bool {
        !matches!(self, ScenarioMode::Baseline)
    }

    /// Sudden/PV disturbance, FRR capacity and battery FCR families present.
    pub fn has_reserves(self) -> bool {
        matches!(self, ScenarioMode::StaticFc | ScenarioMode::DynamicFc)
    }

    /// Generator FCR variables present.
    pub fn has_gen_fcr(self) -> bool {
        !matches!(self, ScenarioMode::NoFc)
    }
}

impl fmt::Display for ScenarioMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "baseline" | "base" => Ok(ScenarioMode::Baseline),
            "nofc" => Ok(ScenarioMode::NoFc),
            "staticfc" | "static" => Ok(ScenarioMode::StaticFc),
            "dynamicfc" | "dynamic" => Ok(ScenarioMode::DynamicFc),
            _ => Err(Error::InvalidArgument(format!(
                "unknown scenario mode {s:?} (expected baseline, no_fc, static_fc or dynamic_fc)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_names_parse() {
        for m in ScenarioMode::ALL {
            assert_eq!(m.as_str().parse::<ScenarioMode>().unwrap(), m);
        }
        assert_eq!("No FC".parse::<ScenarioMode>().unwrap(), ScenarioMode::NoFc);
        assert_eq!("Dynamic-FC".parse::<ScenarioMode>().unwrap(), ScenarioMode::DynamicFc);
        assert!("fast".parse::<ScenarioMode>().is_err());
    }
}
