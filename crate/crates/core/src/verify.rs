//! Independent checks against the equation itself.
//!
//! Nothing here touches the operators or the series engine: [`residual`]
//! evaluates `Δ(r_n Δ(x_n + q_n x_{n-τ})) - a_n f(x_{n-σ}) - b_n` by finite
//! differences, and [`forward_recurrence`] integrates the equation forward
//! from a seed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Window};

/// Pointwise residuals on `[from, to]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub from: i64,
    pub to: i64,
    pub per_index: Vec<f64>,
    pub sup: f64,
    /// Index where the sup is attained.
    pub argmax: i64,
}

impl ResidualReport {
    /// CSV with header `n,residual`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "residual"])?;
        for (i, r) in self.per_index.iter().enumerate() {
            wtr.write_record([(self.from + i as i64).to_string(), format!("{r:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `x` extended with explicit zeros down to index `from`.
pub fn pad_prefix(x: &Window, from: i64) -> Window {
    if from >= x.start {
        return x.clone();
    }
    let mut values = vec![0.0; (x.start - from) as usize];
    values.extend_from_slice(&x.values);
    Window {
        start: from,
        values,
    }
}

/// Largest range `[from, to]` on which [`residual`] can be evaluated for `x`.
pub fn residual_range(problem: &ProblemSpec, x: &Window) -> (i64, i64) {
    let from = (x.start + problem.tau).max(x.start + problem.sigma).max(1);
    (from, x.end() - 2)
}

fn y(problem: &ProblemSpec, x: &Window, m: i64) -> Result<f64> {
    Ok(x.get(m) + problem.q.eval(m)? * x.get(m - problem.tau))
}

/// Residual of the equation at every `n ∈ [from, to]`.
///
/// The window must contain every index read: `n - τ`, `n - σ` and `n + 2`.
pub fn residual(problem: &ProblemSpec, x: &Window, from: i64, to: i64) -> Result<ResidualReport> {
    if problem.sigma < 0 {
        return Err(Error::Unsupported(
            "the residual oracle requires sigma >= 0".into(),
        ));
    }
    if from > to {
        return Err(Error::Invalid(format!(
            "empty residual range [{from}, {to}]"
        )));
    }
    if from < 1 {
        return Err(Error::Index {
            index: from,
            reason: "equation indices start at 1".into(),
        });
    }
    let lowest = from - problem.beta();
    if lowest < x.start || to + 2 > x.end() {
        return Err(Error::Index {
            index: if lowest < x.start { lowest } else { to + 2 },
            reason: format!(
                "window [{}, {}] does not cover [{lowest}, {}]",
                x.start,
                x.end(),
                to + 2
            ),
        });
    }
    let mut per_index = Vec::with_capacity((to - from + 1) as usize);
    let (mut sup, mut argmax) = (0.0, from);
    for n in from..=to {
        let (y0, y1, y2) = (
            y(problem, x, n)?,
            y(problem, x, n + 1)?,
            y(problem, x, n + 2)?,
        );
        let lhs = problem.r.eval(n + 1)? * (y2 - y1) - problem.r.eval(n)? * (y1 - y0);
        let rhs =
            problem.a.eval(n)? * problem.f.eval(x.get(n - problem.sigma)) + problem.b.eval(n)?;
        let res = lhs - rhs;
        if res.abs() > sup {
            sup = res.abs();
            argmax = n;
        }
        per_index.push(res);
    }
    Ok(ResidualReport {
        from,
        to,
        per_index,
        sup,
        argmax,
    })
}

/// Extend `seed` forward by `steps` indices using
///
/// ```text
/// z_{n+1} = z_n + a_n f(x_{n-σ}) + b_n,   y_{n+1} = y_n + z_n / r_n,
/// x_{n+1} = y_{n+1} - q_{n+1} x_{n+1-τ},
/// ```
///
/// with `y_n = x_n + q_n x_{n-τ}` and `z_n = r_n Δy_n`. The seed must hold at
/// least `β + 2` consecutive values. The equation then holds at every index
/// from `seed.end() - 1` on.
pub fn forward_recurrence(problem: &ProblemSpec, seed: &Window, steps: usize) -> Result<Window> {
    let (tau, sigma) = (problem.tau, problem.sigma);
    if sigma < 0 {
        return Err(Error::Unsupported(
            "sigma < 0 makes the recurrence implicit".into(),
        ));
    }
    let need = (problem.beta() + 2) as usize;
    if seed.len() < need {
        return Err(Error::Precondition(format!(
            "seed needs at least beta + 2 = {need} values"
        )));
    }
    let last = seed.end();
    if last - 1 < 1 {
        return Err(Error::Index {
            index: last - 1,
            reason: "equation indices start at 1".into(),
        });
    }
    let mut x = seed.clone();
    x.values.reserve(steps);
    let mut yn = y(problem, &x, last)?;
    let mut zn = problem.r.eval(last - 1)? * (yn - y(problem, &x, last - 1)?)
        + problem.a.eval(last - 1)? * problem.f.eval(x.get(last - 1 - sigma))
        + problem.b.eval(last - 1)?;
    for n in last..last + steps as i64 {
        let y_next = yn + zn / problem.r.eval(n)?;
        let x_next = y_next - problem.q.eval(n + 1)? * x.get(n + 1 - tau);
        x.values.push(x_next);
        zn += problem.a.eval(n)? * problem.f.eval(x.get(n - sigma)) + problem.b.eval(n)?;
        yn = y_next;
    }
    Ok(x)
}

/// Magnitude of the terms entering the residual at `n`, used to scale
/// round-off tolerances.
pub fn local_scale(problem: &ProblemSpec, x: &Window, n: i64) -> Result<f64> {
    let mut s: f64 = 0.0;
    for m in n..=n + 2 {
        let yv = x.get(m).abs() + problem.q.eval(m)?.abs() * x.get(m - problem.tau).abs();
        s = s.max(yv * (problem.r.eval(n)?.abs() + problem.r.eval(n + 1)?.abs()));
    }
    let rhs = problem.a.eval(n)?.abs() * problem.f.eval(x.get(n - problem.sigma)).abs()
        + problem.b.eval(n)?.abs();
    Ok(s.max(rhs).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FunctionSpec, SequenceSpec};

    fn ex1() -> ProblemSpec {
        ProblemSpec::from_json(
            r#"{"tau":3,"sigma":1,"r":{"kind":"alternating","c":1},"a":{"kind":"geometric","c":0.75,"rho":0.5},
               "b":{"kind":"constant","c":0},"q":{"kind":"one-minus-geometric","rho":0.5},"f":{"kind":"sine-power","power":6}}"#,
        )
        .unwrap()
    }

    #[test]
    fn zero_window_has_zero_residual() {
        let x = Window::zeros(1, 40);
        let (from, to) = residual_range(&ex1(), &x);
        assert_eq!(residual(&ex1(), &x, from, to).unwrap().sup, 0.0);
    }

    #[test]
    fn alternating_sequence_on_example_one() {
        // x_n = (-1)^n leaves (3/4) 2^{-n} (1 - sin^6 1) behind
        let p = ex1();
        let x = Window::from_fn(1, 40, |n| if n % 2 == 0 { 1.0 } else { -1.0 });
        let rep = residual(&p, &x, 4, 30).unwrap();
        for (i, r) in rep.per_index.iter().enumerate() {
            let n = 4 + i as i32;
            let expected = 0.75 * 0.5f64.powi(n) * (1.0 - 1f64.sin().powi(6));
            assert!((r - expected).abs() < 1e-14, "n={n}: {r} vs {expected}");
        }
        // with sin(π x / 2) instead the claim holds exactly
        let mut rescaled = p.clone();
        rescaled.f = FunctionSpec::SinePower {
            power: 6,
            scale: std::f64::consts::FRAC_PI_2,
            amplitude: 1.0,
        };
        assert!(residual(&rescaled, &x, 4, 30).unwrap().sup < 1e-15);
    }

    #[test]
    fn residual_is_linear_in_b() {
        let p = ex1();
        let mut q = p.clone();
        q.b = SequenceSpec::geometric(0.3, 0.9);
        let x = Window::from_fn(1, 30, |n| (n as f64).cos() / n as f64);
        let r0 = residual(&p, &x, 4, 27).unwrap();
        let r1 = residual(&q, &x, 4, 27).unwrap();
        for (i, (u, v)) in r0.per_index.iter().zip(&r1.per_index).enumerate() {
            let delta = q.b.eval(4 + i as i64).unwrap();
            assert!((v - u + delta).abs() < 1e-15);
        }
    }

    #[test]
    fn coverage_and_sigma_errors() {
        let p = ex1();
        let x = Window::zeros(5, 10);
        assert!(matches!(residual(&p, &x, 5, 10), Err(Error::Index { .. })));
        let mut neg = p.clone();
        neg.sigma = -1;
        assert!(matches!(
            residual(&neg, &x, 8, 10),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            forward_recurrence(&neg, &x, 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn constant_continuation() {
        let p = ProblemSpec {
            tau: 1,
            sigma: 0,
            r: SequenceSpec::constant(1.0),
            a: SequenceSpec::zero(),
            b: SequenceSpec::zero(),
            q: SequenceSpec::zero(),
            f: FunctionSpec::zero(),
            f_meta: None,
        };
        let seed = Window::from_fn(1, 3, |_| 2.5);
        let out = forward_recurrence(&p, &seed, 20).unwrap();
        assert!(out.values.iter().all(|v| *v == 2.5));
    }

    #[test]
    fn manufactured_solution_is_reproduced() {
        // x_n = 2^{-n}, q ≡ 1/2, r ≡ 1, f = 0, b chosen to make the residual vanish
        let x_of = |n: i64| 0.5f64.powi(n as i32);
        let tau = 2;
        let y_of = |n: i64| x_of(n) + 0.5 * x_of(n - tau);
        let b: Vec<f64> = (1..=80)
            .map(|n| (y_of(n + 2) - y_of(n + 1)) - (y_of(n + 1) - y_of(n)))
            .collect();
        let p = ProblemSpec {
            tau,
            sigma: 0,
            r: SequenceSpec::constant(1.0),
            a: SequenceSpec::zero(),
            b: SequenceSpec::finite_table(b),
            q: SequenceSpec::constant(0.5),
            f: FunctionSpec::zero(),
            f_meta: None,
        };
        let seed = Window::from_fn(1, 4, x_of);
        let out = forward_recurrence(&p, &seed, 40).unwrap();
        for (n, v) in out.iter() {
            assert!((v - x_of(n)).abs() < 1e-15 * 4.0, "n={n}");
        }
        let (from, to) = residual_range(&p, &out);
        assert!(residual(&p, &out, from, to).unwrap().sup < 1e-15);
    }
}
