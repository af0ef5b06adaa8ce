//! A solution in the unit ball of `l^1`, its `l^2` norm and tail profile.
//!
//! Run with `cargo run --example lp_solution`.

use qdiff::lp::{lp_norm, solve_lp, LpConfig};
use qdiff::{ProblemSpec, Result};

pub fn run_example() -> Result<()> {
    let p = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex2.json"
    )))?;
    let res = solve_lp(&p, &LpConfig::default())?;
    println!(
        "n0 = {}, kappa_p = {:.4}, ‖x‖_1 = {:.6e}, ‖x‖_2 = {:.6e}, residual {:.2e}",
        res.solve.n0,
        res.kappa_p,
        res.norm,
        lp_norm(&res.solve.solution, 2.0)?,
        res.solve.residual_sup
    );
    println!("tail profile t(l) = Σ_(n≥l) |x_n|:");
    for (l, t) in &res.tail_profile {
        println!("  l = {l:4}: {t:.6e}");
    }
    println!(
        "bound on the mass beyond the window: {:.3e}",
        res.neglected_tail_bound
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
