//! A bounded solution by Picard iteration, checked by the independent
//! residual and forward-recurrence oracles.
//!
//! Run with `cargo run --example bounded_solution`.

use qdiff::solver::{solve_bounded, SolveConfig};
use qdiff::verify::{forward_recurrence, residual};
use qdiff::{ProblemSpec, Result};

pub fn run_example() -> Result<()> {
    let p = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex2.json"
    )))?;
    let res = solve_bounded(
        &p,
        &SolveConfig {
            m: 1.0,
            window_len: 300,
            ..Default::default()
        },
    )?;
    println!(
        "n0 = {}, kappa = {:.6}, {} iterations, defect {:.2e}, residual {:.2e} (a priori ≤ {:.2e})",
        res.n0, res.kappa, res.iterations, res.defect, res.residual_sup, res.residual_bound
    );
    let x = &res.solution;
    println!(
        "x on [{}, {}], sup |x| = {:.6e}",
        x.start,
        x.end(),
        x.sup_norm()
    );

    // seed the recurrence with the first β + 2 values and compare 50 steps
    let seed = x.slice(x.start, x.start + p.beta() + 1)?;
    let run = forward_recurrence(&p, &seed, 50)?;
    let drift = (seed.end() + 1..=run.end())
        .map(|n| (run.get(n) - x.get(n)).abs())
        .fold(0.0, f64::max);
    println!("forward recurrence drift over 50 steps: {drift:.2e}");

    let rep = residual(&p, &run, run.start + p.beta(), run.end() - 2)?;
    println!("residual of the recurrence output: {:.2e}", rep.sup);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
