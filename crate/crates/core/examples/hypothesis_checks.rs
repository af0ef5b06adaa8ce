//! Hypothesis verdicts with witnesses, including the two families showing
//! that the tail and partial-sum summability conditions are not comparable.
//!
//! Run with `cargo run --example hypothesis_checks`.

use qdiff::model::RationalForm;
use qdiff::series::{check_hypotheses, CheckOptions, HypothesisId};
use qdiff::{FunctionSpec, ProblemSpec, Result, SequenceSpec};

fn family(r: SequenceSpec, a: SequenceSpec) -> ProblemSpec {
    ProblemSpec {
        tau: 2,
        sigma: 1,
        r,
        a,
        b: SequenceSpec::zero(),
        q: SequenceSpec::constant(0.5),
        f: FunctionSpec::sine_power(6),
        f_meta: None,
    }
}

pub fn run_example() -> Result<()> {
    let ex1 = ProblemSpec::from_json(include_str!(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/problems/ex1.json"
    )))?;
    let opts = CheckOptions {
        c: Some(0.9),
        rho: Some(0.625),
        ..Default::default()
    };
    println!("first example:");
    for rep in check_hypotheses(&ex1, &HypothesisId::ALL, &opts) {
        println!("  {:6} {:?}: {}", rep.id.as_str(), rep.verdict, rep.detail);
        if let Some(h) = &rep.witnesses.hsb {
            println!(
                "         k0 = {}, D = {}, ratio trend {:.3} -> {:.3e}",
                h.k0, h.d, h.ratio_at_k0, h.ratio_at_end
            );
        }
    }

    let which = [HypothesisId::Hs, HypothesisId::HsPrime];
    let first = family(
        SequenceSpec::power(1.0, 0.5),
        SequenceSpec::rational(RationalForm::OddPair, 1.0),
    );
    let second = family(
        SequenceSpec::geometric(1.0, 2.0),
        SequenceSpec::power(1.0, 1.0),
    );
    for (name, p) in [
        ("r = sqrt n, a = 1/((2n-1)(2n+1))", first),
        ("r = 2^n, a = n", second),
    ] {
        let reps = check_hypotheses(&p, &which, &CheckOptions::default());
        let verdicts: Vec<String> = reps
            .iter()
            .map(|r| format!("{} {:?}", r.id, r.verdict))
            .collect();
        println!("{name}: {}", verdicts.join(", "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
