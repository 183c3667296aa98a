//! LP relaxations through `microlp`.
//!
//! Every variable is handed to the engine as continuous; integrality is
//! enforced by the tree search, which tightens bounds on a copy of the
//! solved root relaxation so each child re-solves from a warm basis.

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable as LpVar};

use crate::error::{Error, Result};
use crate::model::problem::{MilpProblem, Relation, VarId};

/// A bound tightening applied on top of the root relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundChange {
    Fix(VarId, f64),
    Upper(VarId, f64),
    Lower(VarId, f64),
}

impl BoundChange {
    pub fn var(&self) -> VarId {
        match *self {
            BoundChange::Fix(v, _) | BoundChange::Upper(v, _) | BoundChange::Lower(v, _) => v,
        }
    }

    pub fn describe(&self, problem: &MilpProblem) -> String {
        match *self {
            BoundChange::Fix(v, x) => format!("{} = {x}", problem.var(v).name),
            BoundChange::Upper(v, x) => format!("{} <= {x}", problem.var(v).name),
            BoundChange::Lower(v, x) => format!("{} >= {x}", problem.var(v).name),
        }
    }
}

/// Solved relaxation: engine state plus the values in model order.
#[derive(Clone)]
pub struct Relaxation {
    /// Engine state to warm-start children from; dropped to bound memory.
    state: Option<microlp::Solution>,
    pub objective: f64,
    pub values: Vec<f64>,
}

impl Relaxation {
    pub fn is_warm(&self) -> bool {
        self.state.is_some()
    }

    pub fn drop_state(&mut self) {
        self.state = None;
    }
}

#[allow(clippy::large_enum_variant)]
pub enum LpOutcome {
    Solved(Relaxation),
    Infeasible,
    Unbounded,
}

pub struct LpEngine<'a> {
    problem: &'a MilpProblem,
    vars: Vec<LpVar>,
    lp: Option<Problem>,
}

fn op(rel: Relation) -> ComparisonOp {
    match rel {
        Relation::Le => ComparisonOp::Le,
        Relation::Ge => ComparisonOp::Ge,
        Relation::Eq => ComparisonOp::Eq,
    }
}

/// How rows are handed to the engine. The engine's pivoting is sensitive to
/// row order and scaling, so a second layout gives an independent attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Rows in model order, each scaled by a power of two to unit magnitude.
    Scaled,
    /// Rows in reverse order, unscaled.
    Reversed,
}

/// Load `problem` into a fresh engine with the given variable bounds.
fn load(problem: &MilpProblem, bounds: &[(f64, f64)], layout: Layout) -> (Problem, Vec<LpVar>) {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<LpVar> = bounds
        .iter()
        .zip(&problem.objective)
        .map(|(b, c)| lp.add_var(*c, *b))
        .collect();
    let mut rows: Vec<_> = problem
        .constraints
        .iter()
        .filter(|c| !c.terms.is_empty())
        .collect();
    if layout == Layout::Reversed {
        rows.reverse();
    }
    for c in rows {
        let scale = match layout {
            Layout::Scaled => {
                let big = c.terms.iter().fold(0.0f64, |m, (_, k)| m.max(k.abs()));
                2f64.powi(-(big.log2().round() as i32))
            }
            Layout::Reversed => 1.0,
        };
        let terms: Vec<(LpVar, f64)> = c
            .terms
            .iter()
            .map(|(v, k)| (vars[v.0], k * scale))
            .collect();
        lp.add_constraint(&terms[..], op(c.relation), c.rhs * scale);
    }
    (lp, vars)
}

/// Variable bounds after applying `changes`; `None` if some range is empty.
fn tightened(problem: &MilpProblem, changes: &[BoundChange]) -> Option<Vec<(f64, f64)>> {
    let mut bounds: Vec<(f64, f64)> = problem.variables.iter().map(|v| (v.lower, v.upper)).collect();
    for ch in changes {
        let b = &mut bounds[ch.var().0];
        match *ch {
            BoundChange::Fix(_, x) => *b = (x, x),
            BoundChange::Upper(_, x) => b.1 = b.1.min(x),
            BoundChange::Lower(_, x) => b.0 = b.0.max(x),
        }
    }
    bounds.iter().all(|(lo, up)| lo <= up).then_some(bounds)
}

impl<'a> LpEngine<'a> {
    pub fn new(problem: &'a MilpProblem) -> Self {
        let nonempty = problem.constraints.iter().any(|c| !c.terms.is_empty());
        if !nonempty {
            return LpEngine {
                problem,
                vars: Vec::new(),
                lp: None,
            };
        }
        let bounds = tightened(problem, &[]).unwrap_or_else(|| {
            problem.variables.iter().map(|v| (v.lower, v.upper)).collect()
        });
        let (lp, vars) = load(problem, &bounds, Layout::Scaled);
        LpEngine {
            problem,
            vars,
            lp: Some(lp),
        }
    }

    /// Whether relaxations carry a warm-startable engine state.
    pub fn has_rows(&self) -> bool {
        self.lp.is_some()
    }

    fn numeric(&self, detail: String, changes: &[BoundChange]) -> Error {
        let context = if changes.is_empty() {
            "root".to_string()
        } else {
            changes
                .iter()
                .map(|c| c.describe(self.problem))
                .collect::<Vec<_>>()
                .join(", ")
        };
        Error::NumericFailure { detail, context }
    }

    fn map(&self, r: std::result::Result<microlp::Solution, microlp::Error>, changes: &[BoundChange]) -> Result<LpOutcome> {
        match r {
            Ok(sol) => {
                let values: Vec<f64> = self.vars.iter().map(|v| sol[*v]).collect();
                Ok(LpOutcome::Solved(Relaxation {
                    objective: self.problem.objective_value(&values),
                    values,
                    state: Some(sol),
                }))
            }
            Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
            Err(microlp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
            Err(microlp::Error::InternalError(msg)) => Err(self.numeric(msg, changes)),
        }
    }

    pub fn solve_root(&self) -> Result<LpOutcome> {
        match &self.lp {
            Some(lp) => self.map(lp.solve(), &[]),
            None => Ok(self.solve_bounds_only(&[])),
        }
    }

    /// Re-solve `base` (the root or an ancestor) with extra bound changes.
    pub fn resolve(&self, base: &Relaxation, changes: &[BoundChange], all: &[BoundChange]) -> Result<LpOutcome> {
        let Some(state) = &base.state else {
            return Ok(self.solve_bounds_only(all));
        };
        let mut sol = state.clone();
        for ch in changes {
            let r = match *ch {
                BoundChange::Fix(v, x) => sol.fix_var(self.vars[v.0], x),
                BoundChange::Upper(v, x) => {
                    sol.add_constraint(&[(self.vars[v.0], 1.0)][..], ComparisonOp::Le, x)
                }
                BoundChange::Lower(v, x) => {
                    sol.add_constraint(&[(self.vars[v.0], 1.0)][..], ComparisonOp::Ge, x)
                }
            };
            match r {
                Ok(s) => sol = s,
                Err(e) => return self.map(Err(e), all),
            }
        }
        self.map(Ok(sol), all)
    }

    /// Solve from scratch with the changes folded into the variable bounds.
    pub fn solve_fresh(&self, changes: &[BoundChange], layout: Layout) -> Result<LpOutcome> {
        if self.lp.is_none() {
            return Ok(self.solve_bounds_only(changes));
        }
        let Some(bounds) = tightened(self.problem, changes) else {
            return Ok(LpOutcome::Infeasible);
        };
        let (lp, vars) = load(self.problem, &bounds, layout);
        debug_assert_eq!(vars, self.vars);
        self.map(lp.solve(), changes)
    }

    /// Without rows each variable sits at its cheapest bound.
    fn solve_bounds_only(&self, changes: &[BoundChange]) -> LpOutcome {
        let mut values = Vec::with_capacity(self.problem.num_vars());
        for (i, (v, c)) in self.problem.variables.iter().zip(&self.problem.objective).enumerate() {
            let (mut lo, mut up) = (v.lower, v.upper);
            for ch in changes.iter().filter(|ch| ch.var().0 == i) {
                match *ch {
                    BoundChange::Fix(_, x) => {
                        lo = x;
                        up = x;
                    }
                    BoundChange::Upper(_, x) => up = up.min(x),
                    BoundChange::Lower(_, x) => lo = lo.max(x),
                }
            }
            if lo > up {
                return LpOutcome::Infeasible;
            }
            let x = if *c > 0.0 {
                lo
            } else if *c < 0.0 {
                up
            } else if lo.is_finite() {
                lo
            } else if up.is_finite() {
                up
            } else {
                0.0
            };
            if !x.is_finite() {
                return LpOutcome::Unbounded;
            }
            values.push(x);
        }
        LpOutcome::Solved(Relaxation {
            objective: self.problem.objective_value(&values),
            values,
            state: None,
        })
    }
}
