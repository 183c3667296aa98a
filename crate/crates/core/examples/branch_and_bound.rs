//! Solve a small capital-budgeting MILP with the built-in branch and bound,
//! then audit the answer with the independent feasibility check.
//!
//! cargo run --example branch_and_bound

use islandgrid::model::{MilpProblem, Relation};
use islandgrid::solve::{check_feasible, solve, SolverOptions};

fn main() -> islandgrid::Result<()> {
    // pick projects (value, cost) under a budget; at most one of the last two;
    // a continuous loan tops up the budget at a price
    let projects = [
        (12.0, 5.0),
        (9.0, 4.0),
        (7.0, 3.0),
        (15.0, 7.0),
        (14.0, 6.0),
    ];
    let mut p = MilpProblem::new("budget");
    let picks: Vec<_> = projects
        .iter()
        .enumerate()
        .map(|(i, (value, _))| p.add_binary(format!("pick{i}"), -value))
        .collect();
    let loan = p.add_var("loan", 0.0, 4.0, 1.5);
    let mut budget: Vec<_> = picks
        .iter()
        .zip(&projects)
        .map(|(&x, (_, c))| (x, *c))
        .collect();
    budget.push((loan, -1.0));
    p.add_constraint("budget", budget, Relation::Le, 12.0);
    p.add_constraint(
        "exclusive",
        [(picks[3], 1.0), (picks[4], 1.0)],
        Relation::Le,
        1.0,
    );

    let sol = solve(&p, &SolverOptions::with_gap(1e-9))?;
    println!(
        "{:?}: objective {:.3}, bound {:.3}, {} nodes, {} LP solves",
        sol.status, sol.objective, sol.bound, sol.nodes, sol.lp_solves
    );
    for (v, x) in p.variables.iter().zip(&sol.values) {
        println!("  {:<10} {x:.3}", v.name);
    }
    print!("{}", check_feasible(&p, &sol.values, 1e-9)?.to_text());
    Ok(())
}
