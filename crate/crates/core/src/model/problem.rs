//! Solver-agnostic sparse mixed-integer linear program (minimization).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// A row `sum(coef * var) <relation> rhs`. Terms are sorted by variable and
/// free of duplicates and zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `activity` violates the row (0 when satisfied).
    pub fn violation(&self, activity: f64) -> f64 {
        match self.relation {
            Relation::Le => (activity - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - activity).max(0.0),
            Relation::Eq => (activity - self.rhs).abs(),
        }
    }
}

/// Merge duplicate variables, drop zero coefficients and sort by variable.
pub fn normalize_terms(terms: impl IntoIterator<Item = (VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut terms: Vec<(VarId, f64)> = terms.into_iter().collect();
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    for (v, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += c,
            _ => out.push((v, c)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MilpProblem {
    pub name: String,
    pub variables: Vec<Variable>,
    /// Dense objective coefficients, one per variable.
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
}

impl MilpProblem {
    pub fn new(name: impl Into<String>) -> Self {
        MilpProblem {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn num_integer(&self) -> usize {
        self.variables.iter().filter(|v| v.integer).count()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.push_var(name.into(), lower, upper, cost, false)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> VarId {
        self.push_var(name.into(), 0.0, 1.0, cost, true)
    }

    pub fn add_integer(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.push_var(name.into(), lower, upper, cost, true)
    }

    fn push_var(&mut self, name: String, lower: f64, upper: f64, cost: f64, integer: bool) -> VarId {
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name,
            lower,
            upper,
            integer,
        });
        self.objective.push(cost);
        id
    }

    /// Add to a variable's objective coefficient.
    pub fn add_cost(&mut self, var: VarId, cost: f64) {
        self.objective[var.0] += cost;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms: normalize_terms(terms),
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, x)| c * x)
                .sum::<f64>()
    }

    /// Check structural invariants: bounds ordered, rows reference declared
    /// variables, objective sized to the variable list.
    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.variables.len() {
            return Err(Error::Validation(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.variables.len()
            )));
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(Error::Validation(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        for c in &self.constraints {
            if let Some((v, _)) = c.terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
                return Err(Error::Validation(format!(
                    "constraint {} references undeclared variable #{}",
                    c.name, v.0
                )));
            }
            if !c.rhs.is_finite() || c.terms.iter().any(|(_, k)| !k.is_finite()) {
                return Err(Error::Validation(format!(
                    "constraint {} has a non-finite coefficient",
                    c.name
                )));
            }
        }
        Ok(())
    }

    /// Human-readable dump: one variable or constraint per line, by name.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "problem {}", self.name);
        let _ = writeln!(
            out,
            "# {} variables ({} integer), {} constraints",
            self.num_vars(),
            self.num_integer(),
            self.num_constraints()
        );
        let mut obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| format!("{c:+} {}", self.variables[i].name))
            .collect();
        if self.objective_offset != 0.0 {
            obj.push(format!("{:+}", self.objective_offset));
        }
        let _ = writeln!(out, "minimize {}", obj.join(" "));
        for v in &self.variables {
            let _ = writeln!(
                out,
                "var {} in [{}, {}]{}",
                v.name,
                v.lower,
                v.upper,
                if v.integer { " integer" } else { "" }
            );
        }
        for c in &self.constraints {
            let lhs: Vec<String> = c
                .terms
                .iter()
                .map(|(v, k)| format!("{k:+} {}", self.variables[v.0].name))
                .collect();
            let _ = writeln!(
                out,
                "{}: {} {} {}",
                c.name,
                lhs.join(" "),
                c.relation.symbol(),
                c.rhs
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn terms_are_normalized() {
        let t = normalize_terms([(VarId(2), 1.0), (VarId(0), 3.0), (VarId(2), -1.0), (VarId(1), 0.5)]);
        assert_eq!(t, vec![(VarId(0), 3.0), (VarId(1), 0.5)]);
    }

    #[test]
    fn validation_catches_bad_bounds_and_references() {
        let mut p = MilpProblem::new("t");
        let x = p.add_var("x", 0.0, 1.0, 1.0);
        p.add_constraint("c", [(x, 1.0)], Relation::Le, 1.0);
        p.validate().unwrap();
        p.variables[0].lower = 2.0;
        assert!(p.validate().is_err());
        p.variables[0].lower = 0.0;
        p.constraints[0].terms.push((VarId(7), 1.0));
        assert!(p.validate().is_err());
    }

    #[test]
    fn text_dump_names_everything() {
        let mut p = MilpProblem::new("knap");
        let x = p.add_binary("x", -1.0);
        let y = p.add_binary("y", -1.0);
        p.add_constraint("cap", [(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        let text = p.to_text();
        assert!(text.contains("cap: +1 x +1 y <= 1.5"));
        assert!(text.contains("var x in [0, 1] integer"));
        assert!(text.contains("minimize -1 x -1 y"));
    }
}
