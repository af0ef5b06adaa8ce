//! Bounded solutions by Picard iteration of `T1 + T2`, and their backward
//! extension to full solutions.
//!
//! The iteration starts from the zero sequence and runs on the window
//! `[n0 + β, H]`. Convergence is certified up front: the solve only starts
//! once `κ = w q* + L S_a(n0) < 1` (for the shifted flavor
//! `κ = (1 + L S_a(n0)) / (w inf q)`), enlarging `n0` when needed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FunctionSpec, ProblemSpec, Window};
use crate::operators::{a_double_tail, OperatorConfig, Plan, Truncated};
use crate::series::{
    coefficient_series, find_n0, neutral_factor, Flavor, ScanOptions, SeriesOptions,
};
use crate::verify::{pad_prefix, residual};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    /// Ball radius `M`.
    pub m: f64,
    pub tol_fp: f64,
    pub tol_res: f64,
    pub max_iter: usize,
    /// Number of indices in the solution window.
    pub window_len: usize,
    /// Pin the last window index (overrides `window_len`).
    pub window_end: Option<i64>,
    pub flavor: Flavor,
    /// Multiplier `w` on `q`.
    pub scale: f64,
    /// Use this `n0` instead of scanning for one.
    pub n0: Option<i64>,
    pub scan_limit: i64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            m: 1.0,
            tol_fp: 1e-12,
            tol_res: 1e-8,
            max_iter: 100_000,
            window_len: 256,
            window_end: None,
            flavor: Flavor::Tail,
            scale: 1.0,
            n0: None,
            scan_limit: crate::series::DEFAULT_SCAN_LIMIT,
        }
    }
}

impl SolveConfig {
    fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        if !(self.m > 0.0) {
            return Err(Error::Precondition(format!(
                "M must be positive, got {}",
                self.m
            )));
        }
        if !(self.tol_fp > 0.0 && self.tol_res > 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        if !(self.scale > 0.0) {
            return Err(Error::Precondition(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        let min_len = (problem.tau + problem.sigma.abs() + 10) as usize;
        if self.window_end.is_none() && self.window_len < min_len {
            return Err(Error::Precondition(format!(
                "window_len must be at least tau + |sigma| + 10 = {min_len}"
            )));
        }
        Ok(())
    }
}

/// A converged window with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub solution: Window,
    pub n0: i64,
    pub m: f64,
    pub flavor: Flavor,
    pub scale: f64,
    pub horizon: i64,
    /// Certified contraction constant.
    pub kappa: f64,
    pub iterations: usize,
    /// `sup |x - (T1 x + T2 x)|` over the enforced range.
    pub defect: f64,
    /// Sup of the equation residual over `residual_range`.
    pub residual_sup: f64,
    /// A priori bound `c · defect + rounding` on `residual_sup`.
    pub residual_bound: f64,
    pub residual_range: (i64, i64),
    /// Distance bound between the truncated and the exact operators.
    pub truncation_error: f64,
    /// `(Q, L)` used for the ball.
    pub f_bounds: (f64, f64),
}

impl SolveResult {
    pub fn operator_config(&self) -> OperatorConfig {
        OperatorConfig {
            n0: self.n0,
            horizon: self.horizon,
            scale: self.scale,
            flavor: self.flavor,
            radius: self.m,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results always serialize")
    }
}

/// `(Q, L)` on `[-m, m]`.
///
/// Every builtin nonlinearity has analytic bounds; the dense-grid estimator
/// [`crate::model::function::grid_estimate`] serves as a cross-check.
pub fn estimate_f_meta(f: &FunctionSpec, m: f64) -> (f64, f64) {
    f.local_bounds(m)
}

/// Contraction constant at `n0`.
pub fn contraction_constant(
    problem: &ProblemSpec,
    n0: i64,
    m: f64,
    flavor: Flavor,
    scale: f64,
) -> Result<f64> {
    let factor = neutral_factor(problem, flavor, scale)?;
    let (_, l) = problem.f_local_bounds(m);
    let sa = if l == 0.0 {
        0.0
    } else {
        a_double_tail(problem, flavor, n0)?
    };
    Ok(match flavor {
        Flavor::Tail | Flavor::Partial => factor + l * sa,
        Flavor::Shifted => factor * (1.0 + l * sa),
    })
}

fn ball_threshold(problem: &ProblemSpec, m: f64, flavor: Flavor, scale: f64) -> Result<f64> {
    Ok((1.0 - neutral_factor(problem, flavor, scale)?) * m)
}

/// Check `S(n0).hi < (1 - q*) M` (the ball condition) for a given `n0`.
pub fn ball_condition_holds(
    problem: &ProblemSpec,
    n0: i64,
    m: f64,
    flavor: Flavor,
    scale: f64,
) -> Result<bool> {
    let threshold = ball_threshold(problem, m, flavor, scale)?;
    let (q, _) = problem.f_local_bounds(m);
    let s = coefficient_series(problem, q, flavor)?
        .enclose_best(n0, SeriesOptions::with_tol(1e-3 * threshold))?;
    Ok(s.hi < threshold)
}

fn choose_n0(problem: &ProblemSpec, cfg: &SolveConfig) -> Result<(i64, f64)> {
    let mut n0 = match cfg.n0 {
        Some(n0) => {
            if n0 <= problem.beta() {
                return Err(Error::Precondition(format!(
                    "n0 = {n0} must exceed beta = {}",
                    problem.beta()
                )));
            }
            if !ball_condition_holds(problem, n0, cfg.m, cfg.flavor, cfg.scale)? {
                return Err(Error::Precondition(format!(
                    "ball condition fails at n0 = {n0}"
                )));
            }
            n0
        }
        None => {
            let opts = ScanOptions {
                scan_limit: cfg.scan_limit,
                scale: cfg.scale,
                ..Default::default()
            };
            find_n0(problem, cfg.m, cfg.flavor, opts)?.0
        }
    };
    loop {
        let kappa = contraction_constant(problem, n0, cfg.m, cfg.flavor, cfg.scale)?;
        if kappa < 1.0 {
            return Ok((n0, kappa));
        }
        if cfg.n0.is_some() {
            return Err(Error::NotContractive { kappa });
        }
        if n0 >= cfg.scan_limit {
            return Err(Error::NotContractive { kappa });
        }
        // S_a shrinks with n0, so a larger start eventually certifies
        n0 += 1 + n0 / 8;
    }
}

/// Indices where the truncated fixed-point relation is enforced.
pub fn enforced_range(problem: &ProblemSpec, cfg: &OperatorConfig) -> (i64, i64) {
    let start = cfg.start(problem);
    match cfg.flavor {
        Flavor::Tail | Flavor::Partial => (start, cfg.horizon),
        Flavor::Shifted => (start, cfg.horizon - problem.tau),
    }
}

/// Indices where the equation follows from the enforced relation.
fn equation_range(problem: &ProblemSpec, cfg: &OperatorConfig) -> (i64, i64) {
    let start = cfg.start(problem);
    let lo = match cfg.flavor {
        Flavor::Tail | Flavor::Partial => start,
        Flavor::Shifted => start + problem.tau,
    };
    (lo, cfg.horizon - 2)
}

/// `sup |x_n - (T1 x + T2 x)_n|` over the enforced range.
pub fn fixed_point_defect(problem: &ProblemSpec, x: &Window, cfg: OperatorConfig) -> Result<f64> {
    let plan = Plan::new(problem, cfg)?;
    defect_with(&plan, problem, x)
}

fn defect_with(plan: &Plan<'_>, problem: &ProblemSpec, x: &Window) -> Result<f64> {
    let image = plan.step(x)?.value;
    let (lo, hi) = enforced_range(problem, plan.config());
    Ok(
        (lo.max(x.start)..=hi.min(x.end()))
            .fold(0.0, |m, n| m.max((x.get(n) - image.get(n)).abs())),
    )
}

/// Constant `c` with `|residual_n| ≤ c · defect` on the equation range.
fn defect_to_residual(problem: &ProblemSpec, plan: &Plan<'_>, lo: i64, hi: i64) -> Result<f64> {
    let mut c: f64 = 0.0;
    for n in lo..=hi {
        let rn = problem.r.eval(n)?.abs();
        let rn1 = problem.r.eval(n + 1)?.abs();
        let k = match plan.config().flavor {
            Flavor::Shifted => (n..=n + 2).map(|m| plan.wq(m).abs()).fold(0.0, f64::max),
            _ => 1.0,
        };
        c = c.max(2.0 * (rn + rn1) * k);
    }
    Ok(c)
}

/// Picard iteration `x^{k+1} = T1 x^k + T2 x^k` from `x^0 = 0` until the
/// step drops below `tol_fp`. `check` sees every iterate (ball tests).
///
/// Returns the last iterate, the iteration count and its truncation error.
pub(crate) fn picard(
    plan: &Plan<'_>,
    tol_fp: f64,
    max_iter: usize,
    mut check: impl FnMut(&Truncated, usize) -> Result<()>,
) -> Result<(Window, usize, f64)> {
    let start = plan.start();
    let len = (plan.config().horizon - start + 1) as usize;
    let mut x = Window::zeros(start, len);
    let mut iterations = 0;
    loop {
        let next = plan.step(&x)?;
        iterations += 1;
        check(&next, iterations)?;
        let step = next.value.sup_distance(&x);
        let trunc = next.truncation_error();
        x = next.value;
        if step < tol_fp {
            return Ok((x, iterations, trunc));
        }
        if iterations >= max_iter {
            return Err(Error::MaxIterations {
                iterations,
                last_step: step,
            });
        }
    }
}

/// Defect, residual and residual bound of a converged window.
pub(crate) struct Certificate {
    pub defect: f64,
    pub residual_sup: f64,
    pub residual_bound: f64,
    pub residual_range: (i64, i64),
}

pub(crate) fn certify(
    problem: &ProblemSpec,
    plan: &Plan<'_>,
    x: &Window,
    tol_res: f64,
) -> Result<Certificate> {
    let cfg = plan.config();
    let defect = defect_with(plan, problem, x)?;
    let scaled = problem.with_q_scale(cfg.scale);
    let (lo, hi) = equation_range(problem, cfg);
    let full = pad_prefix(x, 1);
    let report = residual(&scaled, &full, lo, hi)?;
    let c = defect_to_residual(problem, plan, lo, hi)?;
    let magnitude = x.sup_norm().max(cfg.radius).max(1.0);
    let residual_bound = c * defect + 1e-13 * magnitude;
    if report.sup > tol_res {
        return Err(Error::Residual {
            residual: report.sup,
            tol: tol_res,
        });
    }
    Ok(Certificate {
        defect,
        residual_sup: report.sup,
        residual_bound,
        residual_range: (lo, hi),
    })
}

/// Construct a bounded solution of the (scaled) problem.
pub fn solve_bounded(problem: &ProblemSpec, cfg: &SolveConfig) -> Result<SolveResult> {
    problem.validate()?;
    cfg.validate(problem)?;
    let (n0, kappa) = choose_n0(problem, cfg)?;
    let start = n0 + problem.beta();
    let horizon = cfg.window_end.unwrap_or(start + cfg.window_len as i64 - 1);
    if horizon < start + problem.tau + 3 {
        return Err(Error::Precondition(format!(
            "window end {horizon} leaves no room after n0 + beta = {start}"
        )));
    }
    let ocfg = OperatorConfig {
        n0,
        horizon,
        scale: cfg.scale,
        flavor: cfg.flavor,
        radius: cfg.m,
    };
    let plan = Plan::new(problem, ocfg)?;

    let (x, iterations, truncation_error) = picard(&plan, cfg.tol_fp, cfg.max_iter, |next, it| {
        let bound = cfg.m + next.truncation_error() + 1e-12 * cfg.m;
        let sup = next.value.sup_norm();
        if sup > bound {
            return Err(Error::BallViolation(format!(
                "sup |x| = {sup} exceeds M + truncation = {bound} at iteration {it}"
            )));
        }
        Ok(())
    })?;
    let cert = certify(problem, &plan, &x, cfg.tol_res)?;
    Ok(SolveResult {
        solution: x,
        n0,
        m: cfg.m,
        flavor: cfg.flavor,
        scale: cfg.scale,
        horizon,
        kappa,
        iterations,
        defect: cert.defect,
        residual_sup: cert.residual_sup,
        residual_bound: cert.residual_bound,
        residual_range: cert.residual_range,
        truncation_error,
        f_bounds: plan.f_bounds(),
    })
}

/// Extend `x` (whose relation `x_n + w q_n x_{n-τ} = T2(n)` holds from
/// `x.start` for the tail flavor, or from `x.start + τ` for the shifted one)
/// down to index `β` with `x_{n-τ} = (-x_n + T2(n)) / (w q_n)`, descending
/// from `n = x.start + τ - 1`.
///
/// The sums in `T2` end at `horizon`, matching the solve.
pub fn backfill_window(
    problem: &ProblemSpec,
    x: &Window,
    flavor: Flavor,
    scale: f64,
    horizon: i64,
) -> Result<Window> {
    let (tau, sigma) = (problem.tau, problem.sigma);
    if !(tau > sigma && sigma >= 0) {
        return Err(Error::Precondition(format!(
            "backfill needs tau > sigma >= 0, got tau = {tau}, sigma = {sigma}"
        )));
    }
    if flavor == Flavor::Partial {
        return Err(Error::Unsupported(
            "backfill with inner partial sums is implicit (T2 depends on the prefix being filled)"
                .into(),
        ));
    }
    let beta = problem.beta();
    if x.start <= beta {
        return Ok(x.clone());
    }
    if x.end() > horizon {
        return Err(Error::Precondition(
            "window extends past the horizon".into(),
        ));
    }
    let top = x.start + tau - 1;
    let mut out = pad_prefix(x, beta);
    let (mut inner, mut outer) = (0.0, 0.0);
    for n in (beta + tau..=horizon).rev() {
        let g = problem.a.eval(n)? * problem.f.eval(out.get(n - sigma)) + problem.b.eval(n)?;
        inner += g;
        outer += inner / problem.r.eval(n)?;
        if n <= top {
            let wq = scale * problem.q.eval(n)?;
            if wq == 0.0 {
                return Err(Error::Precondition(format!("q_{n} = 0; cannot divide")));
            }
            out.set(n - tau, (-out.get(n) + outer) / wq);
        }
    }
    Ok(out)
}

/// Backward extension of a tail-flavor or shifted solve to a full solution.
pub fn backfill(problem: &ProblemSpec, res: &SolveResult) -> Result<Window> {
    backfill_window(problem, &res.solution, res.flavor, res.scale, res.horizon)
}

/// `sup |x_n + w q_n x_{n-τ} - T2_H(n)|` over `n ∈ [from, to]`, evaluated
/// directly per index.
pub fn relation_defect(
    problem: &ProblemSpec,
    x: &Window,
    scale: f64,
    horizon: i64,
    from: i64,
    to: i64,
) -> Result<f64> {
    let g = |t: i64| -> Result<f64> {
        Ok(problem.a.eval(t)? * problem.f.eval(x.get(t - problem.sigma)) + problem.b.eval(t)?)
    };
    let mut tails = vec![0.0; (horizon - from + 2).max(1) as usize];
    // tails[s - from] = Σ_{t=s}^{H} g_t
    for s in (from..=horizon).rev() {
        tails[(s - from) as usize] = tails[(s - from + 1) as usize] + g(s)?;
    }
    let mut worst: f64 = 0.0;
    for n in from..=to {
        let mut t2 = 0.0;
        for s in n..=horizon {
            t2 += tails[(s - from) as usize] / problem.r.eval(s)?;
        }
        let lhs = x.get(n) + scale * problem.q.eval(n)? * x.get(n - problem.tau);
        worst = worst.max((lhs - t2).abs());
    }
    Ok(worst)
}
