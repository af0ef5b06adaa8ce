//! The two oracles that never touch the fixed-point machinery: the pointwise
//! residual and the forward recurrence, pinned by a manufactured solution.
//!
//! Run with `cargo run --example residual_oracles`.

use qdiff::verify::{forward_recurrence, local_scale, residual};
use qdiff::{FunctionSpec, ProblemSpec, Result, SequenceSpec, Window};

pub fn run_example() -> Result<()> {
    // audit of x_n = (-1)^n on the first example
    let ex1 = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex1.json"
    )))?;
    let x = Window::from_fn(1, 40, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
    let rep = residual(&ex1, &x, 4, 30)?;
    println!(
        "x_n = (-1)^n with f = sin^6: sup residual {:.6e} at n = {}",
        rep.sup, rep.argmax
    );
    println!(
        "  expected (3/4) 2^-n (1 - sin^6 1) at n = 4: {:.6e}",
        0.75 / 16.0 * (1.0 - 1f64.sin().powi(6))
    );
    let mut rescaled = ex1.clone();
    rescaled.f = FunctionSpec::SinePower {
        power: 6,
        scale: std::f64::consts::FRAC_PI_2,
        amplitude: 1.0,
    };
    println!(
        "  with sin^6(π x / 2) instead: {:.2e}",
        residual(&rescaled, &x, 4, 30)?.sup
    );

    // manufactured solution x_n = 2^{-n}: choose b so the residual vanishes
    let x_of = |n: i64| 0.5f64.powi(n as i32);
    let y_of = |n: i64| x_of(n) + 0.5 * x_of(n - 2);
    let b: Vec<f64> = (1..=80)
        .map(|n| y_of(n + 2) - 2.0 * y_of(n + 1) + y_of(n))
        .collect();
    let p = ProblemSpec {
        tau: 2,
        sigma: 0,
        r: SequenceSpec::constant(1.0),
        a: SequenceSpec::zero(),
        b: SequenceSpec::finite_table(b),
        q: SequenceSpec::constant(0.5),
        f: FunctionSpec::zero(),
        f_meta: None,
    };
    let out = forward_recurrence(&p, &Window::from_fn(1, 4, x_of), 40)?;
    let err = out
        .iter()
        .map(|(n, v)| (v - x_of(n)).abs())
        .fold(0.0, f64::max);
    println!("manufactured 2^-n reproduced by the recurrence to {err:.2e}");
    let rep = residual(&p, &out, 3, out.end() - 2)?;
    let worst = rep
        .per_index
        .iter()
        .enumerate()
        .map(|(i, r)| local_scale(&p, &out, 3 + i as i64).map(|s| r.abs() / s))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("recurrence output residual relative to local scale: {worst:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
