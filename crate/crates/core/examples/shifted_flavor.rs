//! The operator pair for `inf q_n > 1`, which reads `x_{n+τ}` and divides by
//! `q_{n+τ}`.
//!
//! Run with `cargo run --example shifted_flavor`.

use qdiff::series::Flavor;
use qdiff::solver::{solve_bounded, SolveConfig};
use qdiff::{ProblemSpec, Result};

pub fn run_example() -> Result<()> {
    let p = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/shifted.json"
    )))?;
    let res = solve_bounded(
        &p,
        &SolveConfig {
            flavor: Flavor::Shifted,
            window_len: 200,
            ..Default::default()
        },
    )?;
    println!(
        "q ≡ 2: n0 = {}, kappa = {:.4}, {} iterations, residual {:.2e} on [{}, {}]",
        res.n0,
        res.kappa,
        res.iterations,
        res.residual_sup,
        res.residual_range.0,
        res.residual_range.1
    );
    // the last τ entries read past the window; their error is reported, not hidden
    println!(
        "truncation error (worst index): {:.3e}",
        res.truncation_error
    );
    for n in res.solution.start..res.solution.start + 5 {
        println!("  x_{n} = {:+.12e}", res.solution.get(n));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
