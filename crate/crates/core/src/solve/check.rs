//! Independent feasibility check of an assignment against a problem.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::problem::MilpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Row,
    LowerBound,
    UpperBound,
    Integrality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Constraint or variable name.
    pub name: String,
    /// Left-hand side activity (rows) or variable value.
    pub activity: f64,
    /// Right-hand side or bound.
    pub limit: f64,
    /// Signed slack; negative means violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
    /// Objective of the assignment as checked.
    pub objective: f64,
}

impl ViolationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().fold(0.0, |m, v| m.max(-v.slack))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.is_feasible() {
            let _ = writeln!(out, "feasible (tol {:e}), objective {}", self.tolerance, self.objective);
            return out;
        }
        let _ = writeln!(
            out,
            "{} violation(s) beyond tol {:e}, worst {}",
            self.violations.len(),
            self.tolerance,
            self.max_violation()
        );
        for v in &self.violations {
            let _ = writeln!(
                out,
                "{:?} {}: activity {} limit {} slack {}",
                v.kind, v.name, v.activity, v.limit, v.slack
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Validation(format!("writing violation CSV: {e}"));
        w.write_record(["kind", "name", "activity", "limit", "slack"]).map_err(err)?;
        for v in &self.violations {
            let kind = serde_json::to_value(v.kind)?;
            w.write_record([
                kind.as_str().unwrap_or_default().to_string(),
                v.name.clone(),
                v.activity.to_string(),
                v.limit.to_string(),
                v.slack.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Validation(format!("writing violation CSV: {e}")))?;
        Ok(())
    }
}

/// List every row, bound and integrality requirement that `values` breaks by more than `tol`.
pub fn check_feasible(problem: &MilpProblem, values: &[f64], tol: f64) -> Result<ViolationReport> {
    if values.len() != problem.num_vars() {
        return Err(Error::Validation(format!(
            "assignment has {} values for {} variables",
            values.len(),
            problem.num_vars()
        )));
    }
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Validation(format!(
            "value of {} is not finite",
            problem.variables[i].name
        )));
    }
    let mut violations = Vec::new();
    for (v, &x) in problem.variables.iter().zip(values) {
        if x < v.lower - tol {
            violations.push(Violation {
                kind: ViolationKind::LowerBound,
                name: v.name.clone(),
                activity: x,
                limit: v.lower,
                slack: x - v.lower,
            });
        }
        if x > v.upper + tol {
            violations.push(Violation {
                kind: ViolationKind::UpperBound,
                name: v.name.clone(),
                activity: x,
                limit: v.upper,
                slack: v.upper - x,
            });
        }
        if v.integer && (x - x.round()).abs() > tol {
            violations.push(Violation {
                kind: ViolationKind::Integrality,
                name: v.name.clone(),
                activity: x,
                limit: x.round(),
                slack: -(x - x.round()).abs(),
            });
        }
    }
    for c in &problem.constraints {
        let act = c.activity(values);
        let viol = c.violation(act);
        if viol > tol {
            violations.push(Violation {
                kind: ViolationKind::Row,
                name: c.name.clone(),
                activity: act,
                limit: c.rhs,
                slack: -viol,
            });
        }
    }
    Ok(ViolationReport {
        tolerance: tol,
        violations,
        objective: problem.objective_value(values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::problem::Relation;

    #[test]
    fn knapsack_zero_is_feasible() {
        let mut p = MilpProblem::new("knap");
        let x = p.add_binary("x", -1.0);
        let y = p.add_binary("y", -1.0);
        p.add_constraint("cap", [(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        let r = check_feasible(&p, &[0.0, 0.0], 1e-9).unwrap();
        assert!(r.is_feasible());
        assert_eq!(r.objective, 0.0);
        let r = check_feasible(&p, &[1.0, 1.0], 1e-9).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].name, "cap");
        assert!((r.violations[0].slack + 0.5).abs() < 1e-12);
        let r = check_feasible(&p, &[0.5, 2.0], 1e-9).unwrap();
        let kinds: Vec<ViolationKind> = r.violations.iter().map(|v| v.kind).collect();
        assert_eq!(
            kinds,
            vec![ViolationKind::Integrality, ViolationKind::UpperBound, ViolationKind::Row]
        );
        assert!(check_feasible(&p, &[0.0], 1e-9).is_err());
    }

    #[test]
    fn csv_and_text() {
        let mut p = MilpProblem::new("t");
        let x = p.add_var("x", 0.0, 10.0, 1.0);
        p.add_constraint("need", [(x, 1.0)], Relation::Ge, 3.0);
        let r = check_feasible(&p, &[1.0], 1e-9).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "kind,name,activity,limit,slack\nrow,need,1,3,-2\n"
        );
        assert!(r.to_text().contains("Row need"));
    }
}
