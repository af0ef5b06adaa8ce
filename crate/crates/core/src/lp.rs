//! Solutions in the unit ball of `l^p`.
//!
//! The iteration is the same Picard scheme as [`crate::solver`], but the
//! ball is `{x : x_n = 0 for n < n0 + β, ‖x‖_p ≤ 1}` and the contraction
//! constant is measured in the `l^p` norm:
//!
//! ```text
//! κ_p = q* + L · (Σ_{n≥n0} S_a(n)^p)^{1/p}.
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Window};
use crate::operators::{OperatorConfig, Plan};
use crate::series::{a_lp_tail, find_n0_lp_with, lp_mass_tail, Flavor, ScanOptions};
use crate::solver::{certify, picard, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpConfig {
    pub p: f64,
    pub tol_fp: f64,
    pub tol_res: f64,
    pub max_iter: usize,
    pub window_len: usize,
    /// Number of geometric checkpoints in the tail profile.
    pub checkpoints: usize,
    /// [`Flavor::Tail`] or [`Flavor::Partial`].
    pub flavor: Flavor,
    pub n0: Option<i64>,
    pub scan_limit: i64,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            p: 1.0,
            tol_fp: 1e-13,
            tol_res: 1e-8,
            max_iter: 100_000,
            window_len: 256,
            checkpoints: 8,
            flavor: Flavor::Tail,
            n0: None,
            scan_limit: crate::series::DEFAULT_SCAN_LIMIT,
        }
    }
}

/// `(Σ |x_n|^p)^{1/p}` over the window.
pub fn lp_norm(x: &Window, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!(
            "p must be at least 1, got {p}"
        )));
    }
    if p == 1.0 {
        return Ok(x.values.iter().map(|v| v.abs()).sum());
    }
    Ok(x.values
        .iter()
        .map(|v| v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p))
}

/// `t(l) = Σ_{n≥l} |x_n|^p` at each checkpoint `l`.
pub fn lp_tail_profile(x: &Window, p: f64, checkpoints: &[i64]) -> Vec<(i64, f64)> {
    // suffix sums, so each checkpoint costs O(1)
    let mut suffix = vec![0.0; x.len() + 1];
    for i in (0..x.len()).rev() {
        suffix[i] = suffix[i + 1] + x.values[i].abs().powf(p);
    }
    checkpoints
        .iter()
        .map(|&l| {
            let i = (l - x.start).clamp(0, x.len() as i64) as usize;
            (l, suffix[i])
        })
        .collect()
}

/// `start, start + 1, start + 3, start + 7, …` up to `depth` points inside the window.
pub fn geometric_checkpoints(x: &Window, depth: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(depth);
    let mut offset = 0i64;
    while out.len() < depth && x.start + offset <= x.end() {
        out.push(x.start + offset);
        offset = 2 * offset + 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpResult {
    pub p: f64,
    pub solve: SolveResult,
    pub norm: f64,
    /// Certified `l^p` contraction constant.
    pub kappa_p: f64,
    pub tail_profile: Vec<(i64, f64)>,
    /// Bound on `Σ_{n>H} |x_n|^p` for the untruncated fixed point, computed
    /// from the last `τ` window entries and the coefficient series.
    pub neglected_tail_bound: f64,
}

impl LpResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results always serialize")
    }
}

fn choose_n0(
    problem: &ProblemSpec,
    cfg: &LpConfig,
    q_star: f64,
    lipschitz: f64,
) -> Result<(i64, f64)> {
    let mut n0 = match cfg.n0 {
        Some(n0) if n0 <= problem.beta() => {
            return Err(Error::Precondition(format!(
                "n0 = {n0} must exceed beta = {}",
                problem.beta()
            )))
        }
        Some(n0) => n0,
        None => {
            let opts = ScanOptions {
                scan_limit: cfg.scan_limit,
                ..Default::default()
            };
            find_n0_lp_with(problem, cfg.p, cfg.flavor, opts)?.0
        }
    };
    loop {
        let sa = if lipschitz == 0.0 {
            0.0
        } else {
            a_lp_tail(problem, cfg.p, cfg.flavor, n0)?
        };
        let kappa = q_star + lipschitz * sa.powf(1.0 / cfg.p);
        if kappa < 1.0 {
            return Ok((n0, kappa));
        }
        if cfg.n0.is_some() || n0 >= cfg.scan_limit {
            return Err(Error::NotContractive { kappa });
        }
        n0 += 1 + n0 / 8;
    }
}

/// Construct a solution in the unit `l^p` ball.
pub fn solve_lp(problem: &ProblemSpec, cfg: &LpConfig) -> Result<LpResult> {
    problem.validate()?;
    let p = cfg.p;
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!(
            "p must be at least 1, got {p}"
        )));
    }
    if cfg.flavor == Flavor::Shifted {
        return Err(Error::Unsupported(
            "l^p solutions use the tail or partial flavor".into(),
        ));
    }
    let q_star = problem.q.extremes().sup_abs();
    let bound = 2f64.powf(1.0 - p);
    if !(q_star < bound) {
        return Err(Error::Precondition(format!(
            "sup |q_n| = {q_star} is not below 2^(1-p) = {bound}"
        )));
    }
    if let Some(n0) = cfg.n0 {
        // an explicit n0 still has to satisfy the ball condition
        let lhs = 4f64.powf(p - 1.0) * lp_mass_tail(problem, p, cfg.flavor, n0)?;
        let threshold = 1.0 - 2f64.powf(p - 1.0) * q_star;
        if !(lhs < threshold) {
            return Err(Error::Precondition(format!(
                "l^p ball condition fails: {lhs} ≥ {threshold}"
            )));
        }
    }
    let (_, lipschitz) = problem.f_local_bounds(1.0);
    let (n0, kappa_p) = choose_n0(problem, cfg, q_star, lipschitz)?;
    let start = n0 + problem.beta();
    let horizon = start + cfg.window_len as i64 - 1;
    if horizon < start + problem.tau + 3 {
        return Err(Error::Precondition("window too short".into()));
    }
    // sup |x_n| ≤ ‖x‖_p ≤ 1, so the sup-norm radius is 1
    let ocfg = OperatorConfig {
        n0,
        horizon,
        scale: 1.0,
        flavor: cfg.flavor,
        radius: 1.0,
    };
    let plan = Plan::new(problem, ocfg)?;
    let (x, iterations, truncation_error) = picard(&plan, cfg.tol_fp, cfg.max_iter, |next, it| {
        let norm = lp_norm(&next.value, p)?;
        let slack = lp_norm(&next.error, p)? + 1e-12;
        if norm > 1.0 + slack {
            return Err(Error::BallViolation(format!(
                "‖x‖_{p} = {norm} exceeds 1 + {slack} at iteration {it}"
            )));
        }
        Ok(())
    })?;
    let cert = certify(problem, &plan, &x, cfg.tol_res)?;
    let norm = lp_norm(&x, p)?;
    let tail_profile = lp_tail_profile(&x, p, &geometric_checkpoints(&x, cfg.checkpoints));
    let last_block = lp_tail_profile(&x, p, &[horizon - problem.tau + 1])[0].1;
    let c = 2f64.powf(p - 1.0) * q_star.powf(p);
    let neglected_tail_bound = (c * last_block
        + 4f64.powf(p - 1.0) * lp_mass_tail(problem, p, cfg.flavor, horizon + 1)?)
        / (1.0 - c);
    let solve = SolveResult {
        solution: x,
        n0,
        m: 1.0,
        flavor: cfg.flavor,
        scale: 1.0,
        horizon,
        kappa: kappa_p,
        iterations,
        defect: cert.defect,
        residual_sup: cert.residual_sup,
        residual_bound: cert.residual_bound,
        residual_range: cert.residual_range,
        truncation_error,
        f_bounds: plan.f_bounds(),
    };
    Ok(LpResult {
        p,
        solve,
        norm,
        kappa_p,
        tail_profile,
        neglected_tail_bound,
    })
}
