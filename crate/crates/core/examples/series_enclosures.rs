//! Rigorous enclosures of the double and triple series behind the existence
//! conditions, and the search for the starting index `n0`.
//!
//! Run with `cargo run --example series_enclosures`.

use qdiff::model::RationalForm;
use qdiff::series::{double_tail, find_n0_lp, lp_series, ScanOptions, SeriesOptions};
use qdiff::{ProblemSpec, Result, SequenceSpec};

pub fn run_example() -> Result<()> {
    // r_n = (-1)^n, a_n = (3/4) 2^{-n}: the double tail is 3 · 2^{-k}
    let r = SequenceSpec::alternating(1.0);
    let a = SequenceSpec::geometric(0.75, 0.5);
    let zero = SequenceSpec::zero();
    println!("double tail of |a| P + |b| with P = 1:");
    for k in [1, 5, 10, 20] {
        let e = double_tail(&r, &a, &zero, 1.0, k, SeriesOptions::with_tol(1e-12))?;
        println!(
            "  k = {k:2}: [{:.15e}, {:.15e}]  (3·2^-k = {:.15e})",
            e.lo,
            e.hi,
            3.0 * 0.5f64.powi(k as i32)
        );
    }

    // the triple sum Σ_{n≥1} Σ_{s≥n} Σ_{t≥s} 2^{-t} telescopes to 4
    let a2 = SequenceSpec::geometric(1.0, 0.5);
    let e = lp_series(&r, &a2, 1.0, 1, SeriesOptions::with_tol(1e-10))?;
    println!(
        "l^1 series of 2^-t from n0 = 1: [{:.12}, {:.12}]",
        e.lo, e.hi
    );

    // the b-part 1/(n(n+1)(n+2)(n+3)) has double tail 1/(6 n (n+1)); its
    // polynomial remainder limits the width reachable within the term budget
    let b = SequenceSpec::rational(RationalForm::Rising4, 1.0);
    for n in [1, 2, 10] {
        let e = double_tail(&r, &zero, &b, 0.0, n, SeriesOptions::with_tol(1e-8))?;
        let exact = 1.0 / (6.0 * n as f64 * (n + 1) as f64);
        println!(
            "  S_b({n:2}) = [{:.14e}, {:.14e}]  closed form {exact:.14e}",
            e.lo, e.hi
        );
    }

    let ex2 = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex2.json"
    )))?;
    let (n0, lhs) = find_n0_lp(&ex2, 1.0, ScanOptions::default())?;
    println!(
        "first n0 with the l^1 ball condition on the second example: {n0} (lhs ≤ {:.6})",
        lhs.hi
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
