//! Property tests for the invariants the toolkit relies on: serialization
//! round trips, operator contraction and Lipschitz bounds, ball invariance,
//! soundness and monotonicity of series enclosures, and the residual oracle.

use proptest::prelude::*;

use qdiff::lp::lp_norm;
use qdiff::model::{RationalForm, TailKeyword, TailMajorant};
use qdiff::operators::{a_double_tail, OperatorConfig, Plan};
use qdiff::series::{
    double_tail, find_n0, lp_series, partial_double_tail, Flavor, ScanOptions, SeriesOptions,
};
use qdiff::verify::residual;
use qdiff::{FunctionSpec, ProblemSpec, SequenceKind, SequenceSpec, Window};

/// Relative slack for comparing enclosures with brute-force sums, which
/// carry their own rounding.
const SLACK: f64 = 1e-12;

fn sound(lo: f64, hi: f64, exact: f64) -> bool {
    lo <= exact + SLACK * exact.abs() && exact <= hi + SLACK * exact.abs()
}

// ---------------------------------------------------------------- strategies

fn any_sequence() -> impl Strategy<Value = SequenceSpec> {
    let form = prop_oneof![
        Just(RationalForm::OddPair),
        Just(RationalForm::Rising2),
        Just(RationalForm::Rising4)
    ];
    prop_oneof![
        (-2.0..2.0f64, -0.95..0.95f64).prop_map(|(c, rho)| SequenceSpec::geometric(c, rho)),
        (-2.0..2.0f64, -4.0..1.0f64).prop_map(|(c, alpha)| SequenceSpec::power(c, alpha)),
        (-2.0..2.0f64).prop_map(SequenceSpec::alternating),
        (form, 0.1..3.0f64).prop_map(|(form, c)| SequenceSpec::rational(form, c)),
        (0.05..0.95f64, 0.1..2.0f64).prop_map(|(rho, c)| SequenceSpec::one_minus_geometric(c, rho)),
        (-2.0..2.0f64).prop_map(SequenceSpec::constant),
        (
            prop::collection::vec(-1.0..1.0f64, 1..12),
            prop::option::of(prop_oneof![
                Just(TailMajorant::Keyword(TailKeyword::FiniteSupport)),
                (0.0..1.0f64).prop_map(|t| TailMajorant::Values(vec![t])),
            ]),
        )
            .prop_map(|(values, tail_majorant)| {
                let tail_majorant = tail_majorant.map(|m| match m {
                    // a user majorant needs one entry per table index
                    TailMajorant::Values(_) => {
                        let mut acc = 0.0;
                        let mut t: Vec<f64> = values
                            .iter()
                            .rev()
                            .map(|v| {
                                acc += v.abs();
                                acc
                            })
                            .collect();
                        t.reverse();
                        TailMajorant::Values(t)
                    }
                    keyword => keyword,
                });
                SequenceSpec::new(SequenceKind::Table {
                    start: 1,
                    values,
                    tail_majorant,
                })
            }),
    ]
}

fn any_function() -> impl Strategy<Value = FunctionSpec> {
    prop_oneof![
        (-2.0..2.0f64, -1.0..1.0f64)
            .prop_map(|(slope, intercept)| FunctionSpec::Linear { slope, intercept }),
        (1u32..8, 0.1..2.0f64, 0.1..2.0f64).prop_map(|(power, scale, amplitude)| {
            FunctionSpec::SinePower {
                power,
                scale,
                amplitude,
            }
        }),
        prop::collection::vec(-1.0..1.0f64, 1..5)
            .prop_map(|coeffs| FunctionSpec::Polynomial { coeffs }),
    ]
}

/// Problems on which the tail-flavor operators are well defined: `|q| < 1`,
/// summable `a` and `b`, and `r` bounded away from zero.
fn contractive_problem() -> impl Strategy<Value = ProblemSpec> {
    (
        0i64..4,
        0i64..4,
        0.5..3.0f64,
        (0.05..1.0f64, 0.2..0.7f64),
        (-0.5..0.5f64, 0.2..0.7f64),
        -0.8..0.8f64,
        1u32..7,
    )
        .prop_map(
            |(tau, sigma, r, (ac, arho), (bc, brho), q, power)| ProblemSpec {
                tau,
                sigma,
                r: SequenceSpec::constant(r),
                a: SequenceSpec::geometric(ac, arho),
                b: SequenceSpec::geometric(bc, brho),
                q: SequenceSpec::constant(q),
                f: FunctionSpec::sine_power(power),
                f_meta: None,
            },
        )
}

fn window_pair(start: i64, len: usize, radius: f64) -> impl Strategy<Value = (Window, Window)> {
    let v = move || prop::collection::vec(-radius..radius, len);
    (v(), v()).prop_map(move |(x, y)| {
        (
            Window::new(start, x).unwrap(),
            Window::new(start, y).unwrap(),
        )
    })
}

fn sup_diff(u: &Window, v: &Window) -> f64 {
    u.sup_distance(v)
}

fn lp_diff(u: &Window, v: &Window, p: f64) -> f64 {
    let d = Window::new(
        u.start,
        u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect(),
    )
    .unwrap();
    lp_norm(&d, p).unwrap()
}

// ------------------------------------------------------------ serialization

proptest! {
    #[test]
    fn problem_json_round_trips(
        r in any_sequence(),
        a in any_sequence(),
        b in any_sequence(),
        q in any_sequence(),
        f in any_function(),
        tau in 0i64..6,
        sigma in -3i64..6,
    ) {
        let spec = ProblemSpec { tau, sigma, r, a, b, q, f, f_meta: None };
        // structurally invalid specs (a vanishing r, a bare table) are
        // rejected on load; everything else must survive the round trip
        if spec.validate().is_ok() {
            let back = ProblemSpec::from_json(&spec.to_json()).unwrap();
            prop_assert_eq!(back, spec);
        }
    }

    #[test]
    fn sequence_json_round_trips(s in any_sequence()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: SequenceSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }
}

// ---------------------------------------------------------------- operators

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn t1_contracts_by_q_star(problem in contractive_problem(), pair in window_pair(1, 48, 1.0)) {
        let (x, y) = pair;
        let cfg = OperatorConfig::new(problem.beta() + 1, x.end(), Flavor::Tail);
        let plan = Plan::new(&problem, cfg).unwrap();
        let q_star = problem.q.extremes().sup_abs();
        let (tx, ty) = (plan.t1(&x).unwrap().value, plan.t1(&y).unwrap().value);
        prop_assert!(sup_diff(&tx, &ty) <= q_star * sup_diff(&x, &y) * (1.0 + 1e-12));
        for p in [1.0, 1.5, 2.0, 3.0] {
            prop_assert!(lp_diff(&tx, &ty, p) <= q_star * lp_diff(&x, &y, p) * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn t2_is_lipschitz_with_the_a_series(problem in contractive_problem(), pair in window_pair(1, 48, 1.0)) {
        let (x, y) = pair;
        let n0 = problem.beta() + 1;
        let plan = Plan::new(&problem, OperatorConfig::new(n0, x.end(), Flavor::Tail)).unwrap();
        let (_, lip) = plan.f_bounds();
        let bound = lip * a_double_tail(&problem, Flavor::Tail, n0).unwrap();
        let (tx, ty) = (plan.t2(&x).unwrap().value, plan.t2(&y).unwrap().value);
        prop_assert!(sup_diff(&tx, &ty) <= bound * sup_diff(&x, &y) * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn operator_keeps_the_ball(problem in contractive_problem(), m in 0.5..2.0f64, seed in any::<u64>()) {
        let n0 = match find_n0(&problem, m, Flavor::Tail, ScanOptions { scan_limit: 2000, ..Default::default() }) {
            Ok((n0, _)) => n0,
            Err(_) => return Ok(()),
        };
        let len = (n0 + problem.beta() + 40) as usize;
        // a cheap deterministic fill of the ball, zero before the start index
        let start = n0 + problem.beta();
        let mut state = seed | 1;
        let x = Window::from_fn(1, len, |n| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            if n < start { 0.0 } else { m * ((state % 2001) as f64 / 1000.0 - 1.0) }
        });
        let plan = Plan::new(&problem, OperatorConfig::new(n0, x.end(), Flavor::Tail).with_radius(m)).unwrap();
        let tx = plan.step(&x).unwrap();
        prop_assert!(tx.value.sup_norm() <= m * (1.0 + 1e-12), "sup {} > M {}", tx.value.sup_norm(), m);
    }

    #[test]
    fn power_mean_inequality(u in 0.0..1e3f64, v in 0.0..1e3f64, p in 1.0..6.0f64) {
        let lhs = (u + v).powf(p);
        let rhs = 2f64.powf(p - 1.0) * (u.powf(p) + v.powf(p));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn lp_norm_matches_direct_sum(values in prop::collection::vec(-10.0..10.0f64, 1..64), p in 1.0..5.0f64) {
        let w = Window::new(3, values.clone()).unwrap();
        let direct = values.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        let got = lp_norm(&w, p).unwrap();
        prop_assert!((got - direct).abs() <= 1e-12 * direct.max(1e-300));
        // the l^p norm dominates the sup norm
        prop_assert!(got >= w.sup_norm() * (1.0 - 1e-12));
    }
}

// ------------------------------------------------------ series enclosures

/// Finite-support tables with a positive `r` from one of the closed forms.
fn finite_instance() -> impl Strategy<Value = (SequenceSpec, Vec<f64>, Vec<f64>, f64)> {
    let r = prop_oneof![
        (0.2..3.0f64).prop_map(SequenceSpec::constant),
        (0.2..3.0f64, 0.0..2.0f64).prop_map(|(c, alpha)| SequenceSpec::power(c, alpha)),
        (0.2..3.0f64, 1.0..2.5f64).prop_map(|(c, rho)| SequenceSpec::geometric(c, rho)),
    ];
    (
        r,
        prop::collection::vec(-1.0..1.0f64, 1..16),
        prop::collection::vec(-1.0..1.0f64, 1..16),
        0.0..2.0f64,
    )
}

fn table(values: &[f64]) -> SequenceSpec {
    SequenceSpec::finite_table(values.to_vec())
}

fn abs_at(v: &[f64], t: i64) -> f64 {
    v.get((t - 1) as usize).map_or(0.0, |x| x.abs())
}

/// Brute-force `Σ_{s=n}^{end} |1/r_s| inner(s)`.
fn outer_sum(r: &SequenceSpec, n: i64, end: i64, inner: impl Fn(i64) -> f64) -> f64 {
    (n..=end).map(|s| inner(s) / r.eval(s).unwrap().abs()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn double_tail_encloses_brute_force((r, a, b, q) in finite_instance(), n in 1i64..20) {
        let support = a.len().max(b.len()) as i64;
        let g = |t: i64| abs_at(&a, t) * q + abs_at(&b, t);
        let exact = outer_sum(&r, n, support, |s| (s..=support).map(g).sum());
        let e = double_tail(&r, &table(&a), &table(&b), q, n, SeriesOptions::default_for(exact)).unwrap();
        prop_assert!(sound(e.lo, e.hi, exact), "[{:e}, {:e}] misses {:e}", e.lo, e.hi, exact);
    }

    #[test]
    fn partial_double_tail_encloses_brute_force(
        (a, b, q) in (prop::collection::vec(-1.0..1.0f64, 1..16), prop::collection::vec(-1.0..1.0f64, 1..16), 0.0..2.0f64),
        c in 0.2..3.0f64,
        rho in 1.5..3.0f64,
        sigma in 0i64..4,
        n in 1i64..20,
    ) {
        // geometric r makes the outer sum converge; past the support the
        // inner partial sum is constant, so the rest is a geometric series
        let r = SequenceSpec::geometric(c, rho);
        let g = |t: i64| abs_at(&a, t) * q + abs_at(&b, t);
        let first = sigma.max(1);
        let inner = |s: i64| (first..s).map(g).sum::<f64>();
        let support = a.len().max(b.len()) as i64 + 1;
        let head_end = support.max(n);
        let head = outer_sum(&r, n, head_end, inner);
        let full_inner = inner(head_end + 1);
        let tail = full_inner / (c * rho.powi((head_end + 1) as i32)) / (1.0 - 1.0 / rho);
        let exact = head + tail;
        let e = partial_double_tail(&r, &table(&a), &table(&b), q, sigma, n, SeriesOptions::default_for(exact)).unwrap();
        prop_assert!(sound(e.lo, e.hi, exact), "[{:e}, {:e}] misses {:e}", e.lo, e.hi, exact);
    }

    #[test]
    fn triple_sum_encloses_brute_force((r, a, _, _) in finite_instance(), n0 in 1i64..10, p in prop_oneof![Just(1.0), Just(2.0), 1.0..3.0f64]) {
        let support = a.len() as i64;
        let s = |n: i64| outer_sum(&r, n, support, |s| (s..=support).map(|t| abs_at(&a, t)).sum());
        let exact: f64 = (n0..=support).map(|n| s(n).powf(p)).sum();
        let e = lp_series(&r, &table(&a), p, n0, SeriesOptions::default_for(exact)).unwrap();
        prop_assert!(sound(e.lo, e.hi, exact), "[{:e}, {:e}] misses {:e}", e.lo, e.hi, exact);
    }

    #[test]
    fn double_tail_upper_end_is_monotone(
        c in 0.2..3.0f64,
        alpha in 0.0..2.0f64,
        (ac, arho) in (0.01..2.0f64, 0.1..0.9f64),
        (bc, beta) in (0.01..2.0f64, -6.0..-3.5f64),
        q in 0.0..2.0f64,
        n in 1i64..200,
    ) {
        let (r, a, b) = (SequenceSpec::power(c, alpha), SequenceSpec::geometric(ac, arho), SequenceSpec::power(bc, beta));
        let rough = double_tail(&r, &a, &b, q, n, SeriesOptions { tol: f64::INFINITY, max_terms: 1 << 10 }).unwrap();
        let opts = SeriesOptions { tol: 1e-5 * rough.hi, max_terms: 1 << 20 };
        let here = double_tail(&r, &a, &b, q, n, opts).unwrap();
        let next = double_tail(&r, &a, &b, q, n + 1, opts).unwrap();
        prop_assert!(next.hi <= here.hi, "S({}).hi = {:e} > S({}).hi = {:e}", n + 1, next.hi, n, here.hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn find_n0_is_minimal(problem in contractive_problem(), m in 0.2..2.0f64) {
        let opts = ScanOptions { scan_limit: 5000, ..Default::default() };
        let Ok((n0, at)) = find_n0(&problem, m, Flavor::Tail, opts) else { return Ok(()) };
        let threshold = (1.0 - problem.q.extremes().sup_abs()) * m;
        let (q_bound, _) = problem.f_local_bounds(m);
        prop_assert!(n0 > problem.beta());
        prop_assert!(at.hi < threshold);
        let series = |n| double_tail(&problem.r, &problem.a, &problem.b, q_bound, n, SeriesOptions::with_tol(1e-3 * threshold)).unwrap();
        prop_assert!(series(n0).lo < threshold);
        if n0 > problem.beta() + 1 {
            // the previous index is not certified: its true value sits above
            // the threshold up to the enclosure tolerance
            prop_assert!(series(n0 - 1).hi >= threshold * (1.0 - 1e-12));
        }
    }
}

// ----------------------------------------------------------------- residual

proptest! {
    #[test]
    fn residual_is_linear_in_b(problem in contractive_problem(), k in -3.0..3.0f64, values in prop::collection::vec(-1.0..1.0f64, 30)) {
        let x = Window::new(1, values).unwrap();
        let (from, to) = (problem.beta() + 1, x.end() - 2);
        let base = residual(&problem, &x, from, to).unwrap();
        let scaled = ProblemSpec { b: problem.b.scaled(k), ..problem.clone() };
        let moved = residual(&scaled, &x, from, to).unwrap();
        // R(x; k b) = R(x; b) + (1 - k) b
        for (i, n) in (from..=to).enumerate() {
            let b = problem.b.eval(n).unwrap();
            let want = base.per_index[i] + (1.0 - k) * b;
            prop_assert!((moved.per_index[i] - want).abs() <= 1e-12 * (1.0 + want.abs() + b.abs()));
        }
        // for the zero sequence and f(0) = 0 the residual is exactly -b
        let zero = Window::zeros(1, 30);
        let at_zero = residual(&scaled, &zero, from, to).unwrap();
        for (i, n) in (from..=to).enumerate() {
            prop_assert_eq!(at_zero.per_index[i], -scaled.b.eval(n).unwrap());
        }
    }
}
