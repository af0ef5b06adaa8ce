//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the console.
//! The process exits nonzero when any criterion fails.

// `ensure!(a < b)` must also fail when a comparison involves NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::{Duration, Instant};

use qdiff::approx::{approximate_limit, check_hsb, ApproxConfig};
use qdiff::lp::{lp_norm, solve_lp, LpConfig};
use qdiff::model::RationalForm;
use qdiff::operators::{a_double_tail, OperatorConfig, Plan};
use qdiff::series::{
    check_hypotheses, double_tail, find_n0, lp_series, CheckOptions, Flavor, HypothesisId,
    ScanOptions, SeriesOptions, Verdict,
};
use qdiff::solver::{backfill_window, solve_bounded, SolveConfig};
use qdiff::verify::{forward_recurrence, local_scale, residual};
use qdiff::{FunctionSpec, ProblemSpec, SequenceSpec, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, check and wall-clock budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture(name: &str) -> ProblemSpec {
    let path = format!("{}/problems/{name}.json", env!("CARGO_MANIFEST_DIR"));
    ProblemSpec::load(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn err(e: qdiff::Error) -> String {
    e.to_string()
}

/// Auxiliary-problem parameters from the cascade hypothesis.
const C: f64 = 0.9;
const RHO: f64 = 0.625;

fn series_anchors() -> Outcome {
    let ex1 = fixture("ex1");
    for k in 1..=20 {
        let e = double_tail(
            &ex1.r,
            &ex1.a,
            &ex1.b,
            1.0,
            k,
            SeriesOptions::with_tol(1e-12),
        )
        .map_err(err)?;
        let exact = 3.0 * 0.5f64.powi(k as i32);
        ensure!(
            e.contains(exact) && e.width() <= 1e-12,
            "k = {k}: {e:?} vs {exact}"
        );
    }
    let ex2 = fixture("ex2");
    let e = lp_series(&ex2.r, &ex2.a, 1.0, 1, SeriesOptions::with_tol(1e-10)).map_err(err)?;
    ensure!(
        e.contains(4.0) && e.width() <= 1e-10,
        "triple sum {e:?} does not enclose 4"
    );
    Ok(format!(
        "3·2^-k enclosed for k = 1..20; triple sum in [{:.12}, {:.12}]",
        e.lo, e.hi
    ))
}

fn summability_incomparability() -> Outcome {
    let family = |r: SequenceSpec, a: SequenceSpec| ProblemSpec {
        tau: 2,
        sigma: 1,
        r,
        a,
        b: SequenceSpec::zero(),
        q: SequenceSpec::constant(0.5),
        f: FunctionSpec::sine_power(6),
        f_meta: None,
    };
    let which = [HypothesisId::Hs, HypothesisId::HsPrime];
    let verdicts = |p: &ProblemSpec| {
        check_hypotheses(p, &which, &CheckOptions::default())
            .iter()
            .map(|r| r.verdict)
            .collect::<Vec<_>>()
    };
    let first = verdicts(&family(
        SequenceSpec::power(1.0, 0.5),
        SequenceSpec::rational(RationalForm::OddPair, 1.0),
    ));
    let second = verdicts(&family(
        SequenceSpec::geometric(1.0, 2.0),
        SequenceSpec::power(1.0, 1.0),
    ));
    ensure!(
        first == [Verdict::Holds, Verdict::Fails],
        "first family: {first:?}"
    );
    ensure!(
        second == [Verdict::Fails, Verdict::Holds],
        "second family: {second:?}"
    );
    Ok("(1/((2n-1)(2n+1)), sqrt n): H_s holds, H'_s fails; (n, 2^n): the reverse".into())
}

fn random_ball_window(rng: &mut ChaCha8Rng, start: i64, len: usize, m: f64) -> Window {
    Window::from_fn(start, len, |_| rng.gen_range(-m..=m))
}

fn operator_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ex1 = fixture("ex1_forced");
    let k = 13;
    let w = 1.0 - RHO.powi(k);
    let cases = [
        (fixture("ex2"), 1.0, 1.0, Flavor::Tail),
        (ex1, w, (C * w).powi(k), Flavor::Tail),
        (fixture("shifted"), 1.0, 1.0, Flavor::Shifted),
    ];
    let mut worst_t1: f64 = 0.0;
    let mut worst_t2: f64 = 0.0;
    for (p, scale, m, flavor) in &cases {
        let (n0, _) = find_n0(
            p,
            *m,
            *flavor,
            ScanOptions {
                scale: *scale,
                ..Default::default()
            },
        )
        .map_err(err)?;
        let start = n0 + p.beta();
        let horizon = start + 119;
        let cfg = OperatorConfig {
            n0,
            horizon,
            scale: *scale,
            flavor: *flavor,
            radius: *m,
        };
        let plan = Plan::new(p, cfg).map_err(err)?;
        let (_, l) = plan.f_bounds();
        let sa = a_double_tail(p, *flavor, n0).map_err(err)?;
        let q_star = match flavor {
            Flavor::Shifted => 1.0 / (scale * p.q.extremes().inf),
            _ => scale * p.q.extremes().sup_abs(),
        };
        let t2_factor = match flavor {
            Flavor::Shifted => l * sa / (scale * p.q.extremes().inf),
            _ => l * sa,
        };
        for _ in 0..200 {
            let x = random_ball_window(&mut rng, start, 120, *m);
            let y = random_ball_window(&mut rng, start, 120, *m);
            let dist = x.sup_distance(&y);
            let d1 = plan
                .t1(&x)
                .map_err(err)?
                .value
                .sup_distance(&plan.t1(&y).map_err(err)?.value);
            ensure!(
                d1 <= (q_star + 1e-12) * dist,
                "T1 factor {} exceeds q* = {q_star}",
                d1 / dist
            );
            worst_t1 = worst_t1.max(d1 / dist / q_star);
            let d2 = plan
                .t2(&x)
                .map_err(err)?
                .value
                .sup_distance(&plan.t2(&y).map_err(err)?.value);
            ensure!(
                d2 <= t2_factor * dist * (1.0 + 1e-12) + 1e-15,
                "T2 Lipschitz {} exceeds {t2_factor}",
                d2 / dist
            );
            if t2_factor > 0.0 {
                worst_t2 = worst_t2.max(d2 / dist / t2_factor);
            }
            let image = plan.combine(&x, &y).map_err(err)?;
            let budget = m + image.truncation_error() + 1e-12 * m;
            ensure!(
                image.value.sup_norm() <= budget,
                "T1 x + T2 y left the ball: {} > {budget}",
                image.value.sup_norm()
            );
        }
    }
    Ok(format!(
        "3 problems × 200 pairs; worst T1 ratio/q* = {worst_t1:.6}, worst T2 ratio/bound = {worst_t2:.6}"
    ))
}

/// Solve the auxiliary problem at `k`, then compare a forward recurrence
/// against the solution for 50 steps.
fn auxiliary_solve(p: &ProblemSpec, k: i32) -> Result<(f64, f64, usize, f64), String> {
    let w = 1.0 - RHO.powi(k);
    let m = (C * w).powi(k);
    let cfg = SolveConfig {
        m,
        scale: w,
        n0: Some(k as i64),
        tol_fp: 1e-14,
        window_len: 260,
        ..Default::default()
    };
    let res = solve_bounded(p, &cfg).map_err(err)?;
    let (lo, hi) = res.residual_range;
    let scaled = p.with_q_scale(w);
    let x = &res.solution;
    let seed = x.slice(x.start, x.start + p.beta() + 1).map_err(err)?;
    let run = forward_recurrence(&scaled, &seed, 50).map_err(err)?;
    let drift = (seed.end() + 1..=run.end())
        .map(|n| (run.get(n) - x.get(n)).abs())
        .fold(0.0, f64::max);
    Ok((res.defect, res.residual_sup, (hi - lo + 1) as usize, drift))
}

fn bounded_solve() -> Outcome {
    let mut lines = Vec::new();
    for name in ["ex1", "ex1_forced"] {
        let p = fixture(name);
        let k0 = check_hsb(&p, C, RHO, 1.0, 100_000).map_err(err)?.k0;
        let (defect, res, count, drift) = auxiliary_solve(&p, k0 as i32)?;
        ensure!(defect < 1e-10, "{name}: defect {defect:e}");
        ensure!(res < 1e-8, "{name}: residual {res:e}");
        ensure!(
            count >= 200,
            "{name}: residual checked on only {count} indices"
        );
        ensure!(drift < 1e-6, "{name}: recurrence drift {drift:e}");
        lines.push(format!("{name} k={k0}: defect {defect:.1e}, residual {res:.1e} on {count} indices, drift {drift:.1e}"));
    }
    Ok(lines.join("; "))
}

/// Least `k0` found by scanning the closed-form inequality up to 2000.
fn closed_form_k0() -> i64 {
    let holds =
        |k: i64| 3.0 * (8.0f64 / 9.0).powi(k as i32) < (1.0 - RHO.powi(k as i32)).powi(k as i32);
    (1..2000)
        .find(|&k| (k..2000).all(holds))
        .expect("inequality eventually holds")
}

/// Regression value for the first example.
const EX1_K0: i64 = 11;

fn hsb_certification() -> Outcome {
    let h = check_hsb(&fixture("ex1"), C, RHO, 1.0, 100_000).map_err(err)?;
    for k in h.k0..=h.scanned_to {
        let lhs = 3.0 * (8.0f64 / 9.0).powi(k as i32);
        let rhs = (1.0 - RHO.powi(k as i32)).powi(k as i32);
        ensure!(lhs < rhs, "closed-form inequality fails at k = {k}");
    }
    ensure!(
        h.k0 == closed_form_k0(),
        "k0 = {} but the closed-form scan gives {}",
        h.k0,
        closed_form_k0()
    );
    ensure!(
        h.k0 == EX1_K0,
        "k0 = {} differs from the pinned {EX1_K0}",
        h.k0
    );
    Ok(format!(
        "k0 = {} (D = {}), inequality checked on [{}, {}]",
        h.k0, h.d, h.k0, h.scanned_to
    ))
}

/// Pinned limit-residual thresholds (measured values are about 0 and 5.9e-7).
const EX1_LIMIT_RESIDUAL: f64 = 1e-12;
const FORCED_LIMIT_RESIDUAL: f64 = 1e-6;

fn cascade() -> Outcome {
    let mut lines = Vec::new();
    for (name, threshold) in [
        ("ex1", EX1_LIMIT_RESIDUAL),
        ("ex1_forced", FORCED_LIMIT_RESIDUAL),
    ] {
        let p = fixture(name);
        // distinct n0 select distinct solutions; a common start isolates w_k
        let cfg = ApproxConfig {
            common_n0: name != "ex1",
            ..Default::default()
        };
        let rep = approximate_limit(&p, &cfg).map_err(err)?;
        let maxima: Vec<f64> = rep.max_differences.iter().map(|d| d.1).collect();
        let decreasing = if maxima.iter().all(|d| *d == 0.0) {
            true
        } else {
            maxima.windows(2).all(|w| w[1] < w[0])
        };
        ensure!(
            decreasing && rep.converged,
            "{name}: maxima {maxima:?} ({})",
            rep.note
        );
        ensure!(
            rep.limit_residual < threshold,
            "{name}: limit residual {:e} ≥ {threshold:e}",
            rep.limit_residual
        );
        for s in &rep.solves {
            ensure!(
                s.tail_sup <= s.m_k,
                "{name}: k = {}: sup tail {} > M_k = {}",
                s.k,
                s.tail_sup,
                s.m_k
            );
        }
        ensure!(
            rep.uniform_bound_holds,
            "{name}: uniform bound {} violated",
            rep.uniform_bound
        );
        ensure!(
            rep.limit_relation_defect <= rep.relation_defect_bound,
            "{name}: relation defect over its bound"
        );
        let last = maxima.last().copied().unwrap_or(0.0);
        lines.push(format!(
            "{name} k={}..{}: last max diff {last:.1e}, limit residual {:.1e}",
            rep.hsb.k0,
            rep.hsb.k0 + 6,
            rep.limit_residual
        ));
    }
    Ok(lines.join("; "))
}

fn lp_solve() -> Outcome {
    let res = solve_lp(&fixture("ex2"), &LpConfig::default()).map_err(err)?;
    ensure!(res.norm <= 1.0, "‖x‖_1 = {}", res.norm);
    ensure!(
        res.solve.residual_sup < 1e-8,
        "residual {:e}",
        res.solve.residual_sup
    );
    ensure!(
        res.tail_profile.windows(2).all(|w| w[1].1 < w[0].1),
        "tail profile not strictly decreasing"
    );
    let two = lp_norm(&res.solve.solution, 2.0).map_err(err)?;
    ensure!(
        two.is_finite() && two <= res.norm,
        "‖x‖_2 = {two} vs ‖x‖_1 = {}",
        res.norm
    );
    Ok(format!(
        "‖x‖_1 = {:.4e}, ‖x‖_2 = {two:.4e}, residual {:.1e}",
        res.norm, res.solve.residual_sup
    ))
}

fn oracle_cross_validation() -> Outcome {
    // the recurrence output satisfies the equation up to rounding
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for name in ["ex1_forced", "ex2", "shifted"] {
        let p = fixture(name);
        let seed = Window::from_fn(1, (p.beta() + 2) as usize, |_| rng.gen_range(-0.5..0.5));
        let out = forward_recurrence(&p, &seed, 60).map_err(err)?;
        let from = (seed.end() - 1).max(p.beta() + 1);
        let rep = residual(&p, &out, from, out.end() - 2).map_err(err)?;
        for (i, r) in rep.per_index.iter().enumerate() {
            let scale = local_scale(&p, &out, from + i as i64).map_err(err)?;
            worst = worst.max(r.abs() / scale);
        }
    }
    ensure!(
        worst <= 1e-12,
        "recurrence residual {worst:e} × local scale"
    );

    // manufactured round trip: compact-support x, matching b, recurrence forward, backfill back
    let (tau, sigma, support) = (3, 1, 24);
    let xs: Vec<f64> = (1..=support).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let x_of = |n: i64| {
        if (1..=support).contains(&n) {
            xs[(n - 1) as usize]
        } else {
            0.0
        }
    };
    let r = SequenceSpec::alternating(1.0);
    let a = SequenceSpec::geometric(0.5, 0.5);
    let q = SequenceSpec::constant(0.5);
    let f = FunctionSpec::sine_power(1);
    let y_of = |n: i64| x_of(n) + 0.5 * x_of(n - tau);
    let rr = |n: i64| r.eval(n).unwrap();
    let len = support + tau + 4;
    let b: Vec<f64> = (1..=len)
        .map(|n| {
            rr(n + 1) * (y_of(n + 2) - y_of(n + 1))
                - rr(n) * (y_of(n + 1) - y_of(n))
                - a.eval(n).unwrap() * f.eval(x_of(n - sigma))
        })
        .collect();
    let p = ProblemSpec {
        tau,
        sigma,
        r,
        a,
        b: SequenceSpec::finite_table(b),
        q,
        f,
        f_meta: None,
    };
    let seed = Window::from_fn(1, (p.beta() + 2) as usize, x_of);
    let horizon = len + 20;
    let out = forward_recurrence(&p, &seed, (horizon - seed.end()) as usize).map_err(err)?;
    let forward_err = out
        .iter()
        .map(|(n, v)| (v - x_of(n)).abs())
        .fold(0.0, f64::max);
    ensure!(
        forward_err < 1e-9,
        "recurrence misses the manufactured x by {forward_err:e}"
    );
    let tail_start = support + 5;
    let tail = out.slice(tail_start, horizon).map_err(err)?;
    let back = backfill_window(&p, &tail, Flavor::Tail, 1.0, horizon).map_err(err)?;
    let back_err = (p.beta()..tail_start)
        .map(|n| (back.get(n) - x_of(n)).abs())
        .fold(0.0, f64::max);
    ensure!(
        back_err < 1e-9,
        "backfill recovers the prefix only to {back_err:e}"
    );
    Ok(format!("recurrence residual ≤ {worst:.1e} × local scale; round trip errors {forward_err:.1e} / {back_err:.1e}"))
}

fn shifted_flavor() -> Outcome {
    let cfg = SolveConfig {
        flavor: Flavor::Shifted,
        window_len: 200,
        ..Default::default()
    };
    let res = solve_bounded(&fixture("shifted"), &cfg).map_err(err)?;
    ensure!(res.residual_sup < 1e-8, "residual {:e}", res.residual_sup);
    ensure!(res.solution.sup_norm() > 0.0, "trivial solution");
    Ok(format!(
        "q ≡ 2: kappa {:.3}, residual {:.1e} on {:?}",
        res.kappa, res.residual_sup, res.residual_range
    ))
}

fn claim_audit() -> Outcome {
    let p = fixture("ex1");
    let x = Window::from_fn(1, 40, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
    let rep = residual(&p, &x, 4, 30).map_err(err)?;
    let sup = rep.per_index.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    ensure!(
        sup == rep.sup,
        "reported sup {} differs from the per-index max {sup}",
        rep.sup
    );
    ensure!(
        (rep.per_index[(rep.argmax - rep.from) as usize].abs() - sup).abs() == 0.0,
        "argmax inconsistent"
    );
    for (i, r) in rep.per_index.iter().enumerate() {
        let n = rep.from + i as i64;
        let predicted = 0.75 * 0.5f64.powi(n as i32) * (1.0 - 1f64.sin().powi(6));
        ensure!(
            (r - predicted).abs() < 1e-14,
            "n = {n}: {r} vs predicted {predicted}"
        );
    }
    Ok(format!(
        "x_n = (-1)^n leaves residual {:.4e} at n = {} (claim does not hold for f = sin^6; recorded)",
        rep.sup, rep.argmax
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 series anchors", series_anchors, Duration::from_secs(1)),
        (
            "2 summability incomparability",
            summability_incomparability,
            Duration::from_secs(1),
        ),
        (
            "3 operator properties",
            operator_properties,
            Duration::from_secs(10),
        ),
        ("4 bounded solve", bounded_solve, Duration::from_secs(30)),
        (
            "5 cascade hypothesis",
            hsb_certification,
            Duration::from_secs(60),
        ),
        ("6 approximation cascade", cascade, Duration::from_secs(300)),
        ("7 l^p solve", lp_solve, Duration::from_secs(30)),
        (
            "8 oracle cross-validation",
            oracle_cross_validation,
            Duration::from_secs(10),
        ),
        ("9 shifted flavor", shifted_flavor, Duration::from_secs(10)),
        ("10 claim audit", claim_audit, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => {
                Err(format!("{detail} (took {elapsed:.2?}, budget {budget:?})"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {elapsed:>10.2?}  {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {elapsed:>10.2?}  {why}");
            }
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
