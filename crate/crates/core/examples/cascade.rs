//! The `q_n → 1` cascade: certify the decay hypothesis, solve the scaled
//! auxiliary problems for consecutive `k`, and inspect the limit candidate.
//!
//! Run with `cargo run --example cascade`.

use qdiff::approx::{approximate_limit, ApproxConfig};
use qdiff::{ProblemSpec, Result};

pub fn run_example() -> Result<()> {
    let p = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex1_forced.json"
    )))?;
    for common_n0 in [false, true] {
        let rep = approximate_limit(
            &p,
            &ApproxConfig {
                common_n0,
                ..Default::default()
            },
        )?;
        println!(
            "common n0 = {common_n0}: k0 = {}, D = {}",
            rep.hsb.k0, rep.hsb.d
        );
        for s in &rep.solves {
            println!(
                "  k = {:2}  n0 = {:2}  M_k = {:.4}  sup tail |x| = {:.3e}  sup |x| = {:.6}",
                s.k, s.n0, s.m_k, s.tail_sup, s.full_sup
            );
        }
        for (k, d) in &rep.max_differences {
            println!("  max |x^{}_n - x^{k}_n| = {d:.3e}", k + 1);
        }
        println!("  {}", rep.note);
        println!(
            "  limit residual {:.2e}, unscaled relation defect {:.2e} ≤ {:.2e}, uniform bound {:.3} holds: {}",
            rep.limit_residual,
            rep.limit_relation_defect,
            rep.relation_defect_bound,
            rep.uniform_bound,
            rep.uniform_bound_holds
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
