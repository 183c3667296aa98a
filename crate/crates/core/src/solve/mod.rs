//! Mixed-integer solve by best-first branch-and-bound, plus MPS exchange
//! and an independent feasibility checker.
//!
//! Before branching, a dive from the root relaxation looks for a first
//! incumbent. It fixes near-integral variables in batches, falls back to one
//! variable at a time, flips a variable whose rounding is infeasible, and
//! gives up when both directions fail. A second dive rounding up follows if
//! the first finds nothing. The tree then runs depth-first until an incumbent
//! exists and best-bound afterwards, branching on the most fractional
//! variable. Children are solved when created, warm-started from their
//! parent, so every open node carries an exact bound.

mod check;
mod lp;
pub mod mps;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::problem::{MilpProblem, VarId};

pub use check::{check_feasible, Violation, ViolationKind, ViolationReport};
pub use lp::BoundChange;
use lp::{Layout, LpEngine, LpOutcome, Relaxation};
pub use mps::{export_mps, parse_mps, MpsDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Search tree exhausted.
    Optimal,
    /// Stopped with the relative gap within tolerance.
    FeasibleWithinGap,
    Infeasible,
    Unbounded,
    /// Node or time limit reached; an incumbent may or may not exist.
    IterationLimit,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleWithinGap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative optimality gap at which the search stops.
    pub gap_tol: f64,
    /// Distance to the nearest integer still counted as integral.
    pub int_tol: f64,
    /// Row tolerance used when checking the returned assignment.
    pub feas_tol: f64,
    pub node_limit: usize,
    pub time_limit: Option<Duration>,
    /// Run the diving heuristic before branching.
    pub dive: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 0.01,
            int_tol: 1e-6,
            feas_tol: 1e-7,
            node_limit: 100_000,
            time_limit: None,
            dive: true,
        }
    }
}

impl SolverOptions {
    pub fn with_gap(gap_tol: f64) -> Self {
        SolverOptions {
            gap_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gap tolerance must be positive, got {}",
                self.gap_tol
            )));
        }
        if !(self.int_tol > 0.0 && self.int_tol < 0.5) || !(self.feas_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "need 0 < int_tol < 0.5 and feas_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Result of a solve. `values` is empty when no incumbent was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound.
    pub bound: f64,
    /// `(objective - bound) / |objective|`.
    pub gap: f64,
    pub nodes: usize,
    pub lp_solves: usize,
}

impl Solution {
    fn empty(status: SolveStatus, nodes: usize, lp_solves: usize) -> Self {
        let objective = match status {
            SolveStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        Solution {
            status,
            values: Vec::new(),
            objective,
            bound: if status == SolveStatus::Infeasible { f64::INFINITY } else { f64::NEG_INFINITY },
            gap: f64::INFINITY,
            nodes,
            lp_solves,
        }
    }

    pub fn has_assignment(&self) -> bool {
        !self.values.is_empty()
    }

    pub fn value(&self, v: VarId) -> f64 {
        self.values[v.0]
    }
}

pub fn relative_gap(objective: f64, bound: f64) -> f64 {
    if objective == bound {
        0.0
    } else {
        (objective - bound).max(0.0) / objective.abs().max(1e-10)
    }
}

struct Node {
    id: usize,
    changes: Vec<BoundChange>,
    relax: Relaxation,
}

impl Node {
    fn bound(&self) -> f64 {
        self.relax.objective
    }
}

/// Open nodes kept with a warm engine state; older ones are re-solved from the root.
const WARM_NODES: usize = 256;

#[derive(Clone, Copy)]
enum Rounding {
    Nearest,
    Up,
}

struct Search<'a> {
    problem: &'a MilpProblem,
    opts: &'a SolverOptions,
    engine: LpEngine<'a>,
    integers: Vec<VarId>,
    root: Option<Relaxation>,
    lp_solves: usize,
    incumbent: Option<(f64, Vec<f64>)>,
}

impl Search<'_> {
    fn fractionality(&self, x: f64) -> f64 {
        (x - x.round()).abs()
    }

    /// Integer variables off-integral in `values`, with their fractionality.
    fn fractional(&self, values: &[f64]) -> Vec<(VarId, f64)> {
        self.integers
            .iter()
            .map(|&v| (v, self.fractionality(values[v.0])))
            .filter(|(_, f)| *f > self.opts.int_tol)
            .collect()
    }

    /// Solve `base` plus `new`. Infeasibility and numerical breakdowns of a
    /// warm start are rechecked from scratch before they are trusted.
    fn resolve(&mut self, base: &Relaxation, new: &[BoundChange], all: &[BoundChange]) -> Result<LpOutcome> {
        self.lp_solves += 1;
        let root = self.root.as_ref().expect("root solved first");
        let first = if base.is_warm() || !self.engine.has_rows() {
            self.engine.resolve(base, new, all)
        } else {
            self.engine.resolve(root, all, all)
        };
        match first {
            Ok(LpOutcome::Infeasible) | Err(Error::NumericFailure { .. }) => self.confirm(all),
            other => other,
        }
    }

    /// Cold solves in both row layouts. Infeasible only if no layout finds a
    /// solution and at least one proves infeasibility.
    fn confirm(&mut self, all: &[BoundChange]) -> Result<LpOutcome> {
        let mut failure = None;
        let mut infeasible = false;
        for layout in [Layout::Scaled, Layout::Reversed] {
            self.lp_solves += 1;
            match self.engine.solve_fresh(all, layout) {
                Ok(LpOutcome::Infeasible) => infeasible = true,
                Ok(other) => return Ok(other),
                Err(e @ Error::NumericFailure { .. }) => failure = Some(e),
                Err(e) => return Err(e),
            }
            if !self.engine.has_rows() {
                break;
            }
        }
        match failure {
            Some(e) if !infeasible => Err(e),
            _ => Ok(LpOutcome::Infeasible),
        }
    }

    fn snap(&self, values: &[f64]) -> Vec<f64> {
        let mut out = values.to_vec();
        for &v in &self.integers {
            let var = self.problem.var(v);
            out[v.0] = out[v.0].round().clamp(var.lower, var.upper);
        }
        out
    }

    fn is_clean(&self, values: &[f64]) -> Result<bool> {
        Ok(check_feasible(self.problem, values, self.opts.feas_tol)?.is_feasible())
    }

    /// Take `values` as incumbent if it improves on it. When rounding leaves
    /// rows violated, the continuous part is re-solved with the integers fixed.
    fn offer(&mut self, values: &[f64]) -> Result<()> {
        let snapped = self.snap(values);
        let obj = self.problem.objective_value(&snapped);
        if obj >= self.cutoff() {
            return Ok(());
        }
        let candidate = if self.is_clean(&snapped)? {
            Some(snapped)
        } else {
            let fixes: Vec<BoundChange> = self
                .integers
                .iter()
                .map(|&v| BoundChange::Fix(v, snapped[v.0]))
                .collect();
            self.lp_solves += 1;
            match self.engine.solve_fresh(&fixes, Layout::Scaled) {
                Ok(LpOutcome::Solved(r)) => {
                    let polished = self.snap(&r.values);
                    self.is_clean(&polished)?.then_some(polished)
                }
                Ok(_) | Err(Error::NumericFailure { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        if let Some(values) = candidate {
            let obj = self.problem.objective_value(&values);
            if obj < self.cutoff() {
                self.incumbent = Some((obj, values));
            }
        }
        Ok(())
    }

    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - 1e-9 * obj.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    /// Look for an incumbent by fixing variables along one path. Gives up
    /// (without error) when both directions of a variable fail or the LP breaks down.
    fn dive(&mut self, root: &Relaxation, rounding: Rounding, deadline: Option<Instant>) -> Result<()> {
        let mut cur = root.clone();
        let mut path: Vec<BoundChange> = Vec::new();
        let target = |x: f64| match rounding {
            Rounding::Nearest => x.round(),
            Rounding::Up => x.ceil(),
        };
        loop {
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Ok(());
            }
            let mut frac: Vec<(VarId, f64)> = self
                .fractional(&cur.values)
                .into_iter()
                .map(|(v, _)| (v, (target(cur.values[v.0]) - cur.values[v.0]).abs()))
                .collect();
            if frac.is_empty() {
                return self.offer(&cur.values);
            }
            frac.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let batch_len = (frac.len() / 4).max(1);
            if batch_len > 1 {
                let batch: Vec<BoundChange> = frac[..batch_len]
                    .iter()
                    .map(|&(v, _)| BoundChange::Fix(v, target(cur.values[v.0])))
                    .collect();
                let all: Vec<BoundChange> = path.iter().chain(&batch).copied().collect();
                match self.resolve(&cur, &batch, &all) {
                    Ok(LpOutcome::Solved(next)) if next.objective < self.cutoff() => {
                        cur = next;
                        path = all;
                        continue;
                    }
                    Err(Error::NumericFailure { .. }) => return Ok(()),
                    Err(e) => return Err(e),
                    _ => {}
                }
            }
            let (v, _) = frac[0];
            let x = cur.values[v.0];
            let first = target(x);
            let second = if first > x { x.floor() } else { x.ceil() };
            let mut moved = false;
            for val in [first, second] {
                let var = self.problem.var(v);
                if val < var.lower || val > var.upper {
                    continue;
                }
                let ch = [BoundChange::Fix(v, val)];
                let all: Vec<BoundChange> = path.iter().chain(&ch).copied().collect();
                match self.resolve(&cur, &ch, &all) {
                    Ok(LpOutcome::Solved(next)) => {
                        if next.objective >= self.cutoff() {
                            return Ok(());
                        }
                        cur = next;
                        path = all;
                        moved = true;
                        break;
                    }
                    Ok(_) => {}
                    Err(Error::NumericFailure { .. }) => return Ok(()),
                    Err(e) => return Err(e),
                }
            }
            if !moved {
                return Ok(());
            }
        }
    }

    /// Children of a node split on `v`, the one on the side `x` leans to last.
    fn branch(&self, v: VarId, x: f64) -> [BoundChange; 2] {
        let var = self.problem.var(v);
        let (down, up) = (x.floor(), x.ceil());
        let pair = if var.lower >= 0.0 && var.upper <= 1.0 {
            [BoundChange::Fix(v, down), BoundChange::Fix(v, up)]
        } else {
            [BoundChange::Upper(v, down), BoundChange::Lower(v, up)]
        };
        if x - down >= 0.5 {
            pair
        } else {
            [pair[1], pair[0]]
        }
    }
}

/// Next node: depth-first (newest) until an incumbent exists, then lowest bound (oldest on ties).
fn select(open: &[Node], depth_first: bool) -> usize {
    let best = if depth_first {
        open.iter().enumerate().max_by_key(|(_, n)| n.id)
    } else {
        open.iter().enumerate().min_by(|(_, a), (_, b)| {
            a.bound().total_cmp(&b.bound()).then(a.id.cmp(&b.id))
        })
    };
    best.map(|(i, _)| i).expect("open list is not empty")
}

/// Solve a minimization MILP.
pub fn solve(problem: &MilpProblem, opts: &SolverOptions) -> Result<Solution> {
    problem.validate()?;
    opts.validate()?;
    let start = Instant::now();
    let deadline = opts.time_limit.map(|d| start + d);
    let mut s = Search {
        problem,
        opts,
        engine: LpEngine::new(problem),
        integers: (0..problem.num_vars())
            .filter(|&i| problem.variables[i].integer)
            .map(VarId)
            .collect(),
        root: None,
        lp_solves: 1,
        incumbent: None,
    };

    if problem
        .constraints
        .iter()
        .any(|c| c.terms.is_empty() && c.violation(0.0) > opts.feas_tol)
    {
        return Ok(Solution::empty(SolveStatus::Infeasible, 0, 0));
    }
    let first = match s.engine.solve_root() {
        Ok(LpOutcome::Infeasible) | Err(Error::NumericFailure { .. }) => s.confirm(&[]),
        other => other,
    };
    let root = match first? {
        LpOutcome::Solved(r) => r,
        LpOutcome::Infeasible => return Ok(Solution::empty(SolveStatus::Infeasible, 1, 1)),
        LpOutcome::Unbounded => return Ok(Solution::empty(SolveStatus::Unbounded, 1, 1)),
    };
    s.root = Some(root.clone());
    if opts.dive && !s.integers.is_empty() {
        s.dive(&root, Rounding::Nearest, deadline)?;
        if s.incumbent.is_none() {
            s.dive(&root, Rounding::Up, deadline)?;
        }
    }

    let mut open = vec![Node {
        id: 0,
        changes: Vec::new(),
        relax: root,
    }];
    let mut next_id = 1;
    let mut nodes = 0usize;
    let mut limit_hit = false;

    while !open.is_empty() {
        let bound = open.iter().map(Node::bound).fold(f64::INFINITY, f64::min);
        if bound >= s.cutoff() {
            open.clear();
            break;
        }
        if let Some((obj, _)) = &s.incumbent {
            if relative_gap(*obj, bound) <= opts.gap_tol {
                break;
            }
        }
        if nodes >= opts.node_limit || deadline.is_some_and(|d| Instant::now() >= d) {
            limit_hit = true;
            break;
        }
        let node = open.swap_remove(select(&open, s.incumbent.is_none()));
        if node.bound() >= s.cutoff() {
            continue;
        }
        nodes += 1;

        let frac = s.fractional(&node.relax.values);
        let Some(&(v, _)) = frac
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        else {
            s.offer(&node.relax.values)?;
            continue;
        };
        let x = node.relax.values[v.0];
        for ch in s.branch(v, x) {
            let mut all = node.changes.clone();
            all.push(ch);
            match s.resolve(&node.relax, &[ch], &all)? {
                LpOutcome::Solved(relax) => {
                    if relax.objective >= s.cutoff() {
                        continue;
                    }
                    if s.fractional(&relax.values).is_empty() {
                        s.offer(&relax.values)?;
                        continue;
                    }
                    open.push(Node {
                        id: next_id,
                        changes: all,
                        relax,
                    });
                    next_id += 1;
                }
                LpOutcome::Infeasible => {}
                LpOutcome::Unbounded => {
                    return Ok(Solution::empty(SolveStatus::Unbounded, nodes, s.lp_solves));
                }
            }
        }
        if open.len() > WARM_NODES {
            let keep_from = next_id.saturating_sub(WARM_NODES);
            for n in open.iter_mut().filter(|n| n.id < keep_from) {
                n.relax.drop_state();
            }
        }
    }

    let open_bound = open.iter().map(Node::bound).fold(f64::INFINITY, f64::min);
    let lp_solves = s.lp_solves;
    Ok(match s.incumbent {
        Some((objective, values)) => {
            let bound = open_bound.min(objective);
            let status = if open.is_empty() {
                SolveStatus::Optimal
            } else if limit_hit && relative_gap(objective, bound) > opts.gap_tol {
                SolveStatus::IterationLimit
            } else {
                SolveStatus::FeasibleWithinGap
            };
            Solution {
                status,
                gap: relative_gap(objective, bound),
                values,
                objective,
                bound,
                nodes,
                lp_solves,
            }
        }
        None if limit_hit => {
            let mut sol = Solution::empty(SolveStatus::IterationLimit, nodes, lp_solves);
            sol.bound = open_bound;
            sol
        }
        None => Solution::empty(SolveStatus::Infeasible, nodes, lp_solves),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::problem::Relation;

    fn knapsack() -> MilpProblem {
        // max x + y  <=>  min -x - y
        let mut p = MilpProblem::new("knap");
        let x = p.add_binary("x", -1.0);
        let y = p.add_binary("y", -1.0);
        p.add_constraint("cap", [(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        p
    }

    #[test]
    fn knapsack_objective_and_relaxation() {
        let p = knapsack();
        let sol = solve(&p, &SolverOptions::with_gap(1e-9)).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective + 1.0).abs() < 1e-9);
        let mut relaxed = p.clone();
        relaxed.variables.iter_mut().for_each(|v| v.integer = false);
        let lp = solve(&relaxed, &SolverOptions::default()).unwrap();
        assert!((lp.objective + 1.5).abs() < 1e-9);
        assert!(sol.bound <= sol.objective + 1e-12);
    }

    #[test]
    fn fixed_variables_without_rows() {
        let mut p = MilpProblem::new("const");
        p.add_var("a", 2.0, 2.0, 3.0);
        p.add_integer("b", -1.0, -1.0, 1.0);
        p.objective_offset = 0.5;
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 5.5);
        assert_eq!(sol.values, vec![2.0, -1.0]);
    }

    #[test]
    fn infeasible_and_unbounded_are_statuses() {
        let mut p = MilpProblem::new("inf");
        let x = p.add_binary("x", 1.0);
        p.add_constraint("c", [(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SolveStatus::Infeasible);

        let mut p = MilpProblem::new("unb");
        let x = p.add_var("x", 0.0, f64::INFINITY, -1.0);
        let y = p.add_binary("y", 0.0);
        p.add_constraint("c", [(x, 1.0), (y, -1.0)], Relation::Ge, 0.0);
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SolveStatus::Unbounded);

        let mut p = MilpProblem::new("parity");
        let a = p.add_integer("a", 0.0, 10.0, 0.0);
        p.add_constraint("half", [(a, 2.0)], Relation::Eq, 3.0);
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn general_integers_branch_on_bounds() {
        // min -x - 2y, 3x + 4y <= 14.5, x,y in 0..10 integer: best is x=2, y=2 (-6) vs x=0,y=3 (-6)
        let mut p = MilpProblem::new("gi");
        let x = p.add_integer("x", 0.0, 10.0, -1.0);
        let y = p.add_integer("y", 0.0, 10.0, -2.0);
        p.add_constraint("c", [(x, 3.0), (y, 4.0)], Relation::Le, 14.5);
        let sol = solve(&p, &SolverOptions::with_gap(1e-9)).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..=10 {
            for b in 0..=10 {
                if 3.0 * a as f64 + 4.0 * b as f64 <= 14.5 {
                    best = best.min(-(a as f64) - 2.0 * b as f64);
                }
            }
        }
        assert!((sol.objective - best).abs() < 1e-9, "{} vs {best}", sol.objective);
    }

    #[test]
    fn node_limit_is_reported() {
        let mut p = MilpProblem::new("lim");
        let vars: Vec<VarId> = (0..8).map(|i| p.add_binary(format!("x{i}"), -(i as f64 + 1.0))).collect();
        p.add_constraint("c", vars.iter().map(|&v| (v, 2.0)), Relation::Le, 7.0);
        let opts = SolverOptions {
            node_limit: 0,
            dive: false,
            gap_tol: 1e-9,
            ..Default::default()
        };
        let sol = solve(&p, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::IterationLimit);
        assert!(!sol.has_assignment());
    }

    #[test]
    fn rejects_bad_options() {
        assert!(solve(&knapsack(), &SolverOptions::with_gap(0.0)).is_err());
    }

    #[test]
    fn deterministic() {
        let p = knapsack();
        let a = solve(&p, &SolverOptions::with_gap(1e-9)).unwrap();
        let b = solve(&p, &SolverOptions::with_gap(1e-9)).unwrap();
        assert_eq!(a, b);
    }
}
