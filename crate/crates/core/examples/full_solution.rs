//! Backward extension of a bounded solution down to index `max(τ, σ)`.
//!
//! Run with `cargo run --example full_solution`.

use qdiff::solver::{backfill, relation_defect, solve_bounded, SolveConfig};
use qdiff::verify::residual;
use qdiff::{ProblemSpec, Result};

pub fn run_example() -> Result<()> {
    let p = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex1_forced.json"
    )))?;
    // the auxiliary problem with q scaled by w_k, k = 13
    let k = 13;
    let w = 1.0 - 0.625f64.powi(k);
    let m = (0.9 * w).powi(k);
    let cfg = SolveConfig {
        m,
        scale: w,
        tol_fp: 1e-14,
        window_len: 260,
        ..Default::default()
    };
    let res = solve_bounded(&p, &cfg)?;
    let full = backfill(&p, &res)?;
    println!(
        "tail window starts at {}; full solution covers [{}, {}]",
        res.solution.start,
        full.start,
        full.end()
    );
    for n in full.start..full.start + 6 {
        println!("  x_{n} = {:+.12e}", full.get(n));
    }
    let scaled = p.with_q_scale(w);
    let from = p.beta() + p.tau;
    let rep = residual(&scaled, &full, from, res.horizon - 2)?;
    let defect = relation_defect(&p, &full, w, res.horizon, from, res.horizon)?;
    println!(
        "scaled equation residual on [{from}, {}]: {:.2e}; fixed-point relation defect {:.2e}",
        res.horizon - 2,
        rep.sup,
        defect
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
