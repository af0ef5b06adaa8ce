//! The `q_n → 1` cascade.
//!
//! When `sup q_n = 1` the contraction argument breaks down, so the equation
//! is approached through auxiliary problems with `q` replaced by `w_k q`,
//! `w_k = 1 - ρ^k`. Each auxiliary problem is solved in the ball of radius
//! `M_k = D (C w_k)^k`, extended backwards to a full solution, and the
//! cascade is inspected coordinate by coordinate for a limit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Enclosure, ProblemSpec, Window};
use crate::series::{find_n0, DoubleSeries, Flavor, Inner, ScanOptions};
use crate::solver::{
    backfill, ball_condition_holds, relation_defect, solve_bounded, SolveConfig, SolveResult,
};
use crate::verify::residual;

/// Number of consecutive scanned indices the cascade inequality must hold on.
pub const HSB_PERSISTENCE: i64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxConfig {
    /// `C ∈ (0, 1)`.
    pub c: f64,
    /// Schedule `w_k = 1 - ρ^k`.
    pub rho: f64,
    /// First and last `k`; `None` means `k0` and `k0 + 6`.
    pub k_min: Option<i64>,
    pub k_max: Option<i64>,
    /// Coordinate tolerance for declaring the cascade converged.
    pub tol_c: f64,
    /// Template for the auxiliary solves (`m`, `scale`, `n0`, `window_end` are set per `k`).
    pub solve: SolveConfig,
    pub scan_limit: i64,
    /// Solve every member from the largest admissible `n0` instead of
    /// `n0 = k`. Distinct starts select distinct solutions, which can make
    /// the coordinate differences non-monotone; a common start isolates the
    /// effect of `w_k`. The ball condition is monotone in `n0`, so the
    /// common start is admissible for every member.
    pub common_n0: bool,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        Self {
            c: 0.9,
            rho: 0.625,
            k_min: None,
            k_max: None,
            tol_c: 1e-6,
            solve: SolveConfig {
                tol_fp: 1e-13,
                ..Default::default()
            },
            scan_limit: 100_000,
            common_n0: false,
        }
    }
}

impl ApproxConfig {
    pub fn w(&self, k: i64) -> f64 {
        1.0 - self.rho.powf(k as f64)
    }

    /// `M_k = D (C w_k)^k`.
    pub fn radius(&self, k: i64, d: f64) -> f64 {
        d * (self.c * self.w(k)).powf(k as f64)
    }
}

/// Certificate `S(k).hi ≤ D (1 - w_k)(C w_k)^k` for every scanned `k ≥ k0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsbWitness {
    pub c: f64,
    pub rho: f64,
    pub d: f64,
    pub k0: i64,
    /// Global bound `P` of `f` used in the series.
    pub p_bound: f64,
    /// Last `k` at which the inequality was checked.
    pub scanned_to: i64,
    /// `S(k0).hi / (D (1 - w_k0)(C w_k0)^k0)`.
    pub ratio_at_k0: f64,
    /// Same ratio at `scanned_to` (the trend).
    pub ratio_at_end: f64,
    /// Geometric rate of the analytic upper envelope of `S`, when known.
    pub envelope_rate: Option<f64>,
}

fn log_rhs(k: i64, c: f64, rho: f64, d: f64) -> f64 {
    let kf = k as f64;
    let w = 1.0 - rho.powf(kf);
    d.ln() + kf * rho.ln() + kf * (c * w).ln()
}

fn envelope_rate(series: &DoubleSeries<'_>) -> Option<f64> {
    series
        .outer_envelope()
        .terms
        .iter()
        .map(|t| t.rho)
        .reduce(f64::max)
}

/// Find the least `k0` from which `S(k).hi ≤ (1 - w_k)(C w_k)^k` (`D = 1`)
/// holds for [`HSB_PERSISTENCE`] consecutive indices, where `S` is the double
/// tail of `|a| P + |b|`.
///
/// Returns [`Error::Precondition`] when an analytic lower bound shows the
/// inequality must eventually fail, and [`Error::ScanExhausted`] when no
/// `k0` is found below `scan_limit`.
pub fn check_hsb(
    problem: &ProblemSpec,
    c: f64,
    rho: f64,
    p_bound: f64,
    scan_limit: i64,
) -> Result<HsbWitness> {
    if !(c > 0.0 && c < 1.0) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Invalid(format!(
            "need C, rho in (0, 1); got C = {c}, rho = {rho}"
        )));
    }
    let d = 1.0;
    let series = DoubleSeries::new(
        &problem.r,
        vec![(&problem.a, p_bound), (&problem.b, 1.0)],
        Inner::Tail,
    )?;
    let target = rho * c;
    if series.is_zero() {
        return Ok(HsbWitness {
            c,
            rho,
            d,
            k0: 1,
            p_bound,
            scanned_to: 1,
            ratio_at_k0: 0.0,
            ratio_at_end: 0.0,
            envelope_rate: None,
        });
    }
    if let Some(low) = series.lower_term() {
        if low.term.rho > target || (low.term.rho == target && low.term.alpha > 0.0) {
            return Err(Error::Precondition(format!(
                "S(k) ≥ {}·k^{}·{}^k decays slower than (rho C)^k = {target}^k",
                low.term.c, low.term.alpha, low.term.rho
            )));
        }
    }
    let rate = envelope_rate(&series);

    let mut k0: Option<i64> = None;
    let mut first_ratio = 0.0;
    let mut lo = 1;
    let mut chunk: i64 = 64;
    while lo <= scan_limit {
        let hi = (lo + chunk - 1).min(scan_limit);
        let profile = relative_profile(&series, lo, hi)?;
        for (i, e) in profile.iter().enumerate() {
            let k = lo + i as i64;
            let log_ratio = e.hi.ln() - log_rhs(k, c, rho, d);
            if log_ratio <= 0.0 {
                if k0.is_none() {
                    k0 = Some(k);
                    first_ratio = log_ratio.exp();
                }
                let start = k0.unwrap();
                if k - start + 1 >= HSB_PERSISTENCE {
                    return Ok(HsbWitness {
                        c,
                        rho,
                        d,
                        k0: start,
                        p_bound,
                        scanned_to: k,
                        ratio_at_k0: first_ratio,
                        ratio_at_end: log_ratio.exp(),
                        envelope_rate: rate,
                    });
                }
            } else {
                k0 = None;
            }
        }
        lo = hi + 1;
        chunk = (chunk * 2).min(4096);
    }
    Err(Error::ScanExhausted {
        limit: scan_limit,
        detail: format!("cascade inequality did not persist for {HSB_PERSISTENCE} indices"),
    })
}

/// Profile of `S` on `[lo, hi]` whose upper ends are accurate relative to `S(hi)`.
fn relative_profile(series: &DoubleSeries<'_>, lo: i64, hi: i64) -> Result<Vec<Enclosure>> {
    let mut cutoff = (hi + 64).max(series.min_cutoff());
    loop {
        if let Some(p) = series.profile(lo, cutoff)? {
            let last = p[(hi - lo) as usize];
            if last.width() <= 1e-6 * last.hi || cutoff - lo > crate::series::DEFAULT_MAX_TERMS {
                return Ok(p.into_iter().take((hi - lo + 1) as usize).collect());
            }
        }
        cutoff = lo + 2 * (cutoff - lo);
    }
}

/// One member of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSolve {
    pub k: i64,
    pub w: f64,
    pub m_k: f64,
    /// True when `n0 = k` was admissible.
    pub n0_is_k: bool,
    pub result: SolveResult,
    /// The solution extended down to index `β`.
    pub full: Window,
    /// `sup |x_n|` over the tail window `n ≥ n0 + β`.
    pub tail_sup: f64,
    /// `sup |x_n|` over the full window.
    pub full_sup: f64,
}

fn choose_aux_n0(problem: &ProblemSpec, k: i64, cfg: &ApproxConfig, d: f64) -> Result<(i64, bool)> {
    let (w, m) = (cfg.w(k), cfg.radius(k, d));
    if k > problem.beta() && ball_condition_holds(problem, k, m, Flavor::Tail, w)? {
        return Ok((k, true));
    }
    let opts = ScanOptions {
        scan_limit: cfg.scan_limit,
        scale: w,
        ..Default::default()
    };
    Ok((find_n0(problem, m, Flavor::Tail, opts)?.0, false))
}

fn check_c_below_q(problem: &ProblemSpec, c: f64) -> Result<()> {
    // backfill divides by q_n for n ≥ β + τ
    let from = problem.beta() + problem.tau;
    let inf = problem.q.extremes_from(from).inf;
    if !(c < inf) {
        return Err(Error::Precondition(format!(
            "C = {c} is not below inf_(n ≥ {from}) q_n = {inf}"
        )));
    }
    Ok(())
}

/// Solve the auxiliary problem for one `k` and extend it to a full solution.
pub fn solve_auxiliary(
    problem: &ProblemSpec,
    k: i64,
    cfg: &ApproxConfig,
    witness: &HsbWitness,
) -> Result<AuxSolve> {
    solve_aux_with_end(problem, k, cfg, witness.d, None)
}

fn solve_aux_with_end(
    problem: &ProblemSpec,
    k: i64,
    cfg: &ApproxConfig,
    d: f64,
    n0: Option<(i64, bool)>,
) -> Result<AuxSolve> {
    check_c_below_q(problem, cfg.c)?;
    let (w, m_k) = (cfg.w(k), cfg.radius(k, d));
    let (n0, n0_is_k) = match n0 {
        Some(v) => v,
        None => choose_aux_n0(problem, k, cfg, d)?,
    };
    let solve = SolveConfig {
        m: m_k,
        scale: w,
        n0: Some(n0),
        flavor: Flavor::Tail,
        ..cfg.solve
    };
    let result = solve_bounded(problem, &solve)?;
    let full = backfill(problem, &result)?;
    Ok(AuxSolve {
        k,
        w,
        m_k,
        n0_is_k,
        tail_sup: result.solution.sup_norm(),
        full_sup: full.sup_norm(),
        result,
        full,
    })
}

/// Per-`k` summary kept in the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSummary {
    pub k: i64,
    pub w: f64,
    pub m_k: f64,
    pub n0: i64,
    pub n0_is_k: bool,
    pub kappa: f64,
    pub iterations: usize,
    pub defect: f64,
    pub residual_sup: f64,
    pub tail_sup: f64,
    /// `|x^k_n| ≤ M_k` on the tail window (up to truncation).
    pub tail_bound_ok: bool,
    pub full_sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub hsb: HsbWitness,
    pub solves: Vec<AuxSummary>,
    /// Common index range of the full solutions.
    pub range: (i64, i64),
    /// `(k, max_n |x^{k+1}_n - x^k_n|)`.
    pub max_differences: Vec<(i64, f64)>,
    /// Rows `d_k(n)` for every adjacent pair, aligned with `range`.
    #[serde(skip)]
    pub differences: Vec<Vec<f64>>,
    /// Nonincreasing maxima ending below `tol_c`.
    pub converged: bool,
    pub note: String,
    pub limit: Window,
    /// Residual of the limit candidate against the unscaled equation.
    pub limit_residual: f64,
    /// Unscaled relation defect of the candidate and its a priori bound.
    pub limit_relation_defect: f64,
    pub relation_defect_bound: f64,
    /// `(1/(C w_1)) (2D + D Σ(1 - w_i) + Σ_{j<k0} S(j))`.
    pub uniform_bound: f64,
    pub uniform_bound_holds: bool,
    #[serde(skip)]
    pub solutions: Vec<AuxSolve>,
}

impl ApproxReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// CSV `k,n,d` of the coordinate differences.
    pub fn write_differences_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["k", "n", "d"])?;
        for (row, (k, _)) in self.differences.iter().zip(&self.max_differences) {
            for (i, d) in row.iter().enumerate() {
                wtr.write_record([
                    k.to_string(),
                    (self.range.0 + i as i64).to_string(),
                    format!("{d:e}"),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

fn uniform_bound(problem: &ProblemSpec, cfg: &ApproxConfig, h: &HsbWitness) -> Result<f64> {
    let series = DoubleSeries::new(
        &problem.r,
        vec![(&problem.a, h.p_bound), (&problem.b, 1.0)],
        Inner::Tail,
    )?;
    let head: f64 = if h.k0 > 1 {
        series
            .profile(1, (h.k0 + 64).max(series.min_cutoff()))?
            .map_or(f64::INFINITY, |p| {
                p[..(h.k0 - 1) as usize].iter().map(|e| e.hi).sum()
            })
    } else {
        0.0
    };
    let d = h.d;
    Ok((2.0 * d + d * cfg.rho / (1.0 - cfg.rho) + head) / (cfg.c * cfg.w(1)))
}

/// Run the cascade over `k_min..=k_max` and extract a limit candidate.
pub fn approximate_limit(problem: &ProblemSpec, cfg: &ApproxConfig) -> Result<ApproxReport> {
    problem.validate()?;
    let p_bound = problem
        .f_global_bound()
        .ok_or_else(|| Error::Precondition("the cascade needs a globally bounded f".into()))?;
    let hsb = check_hsb(problem, cfg.c, cfg.rho, p_bound, cfg.scan_limit)?;
    check_c_below_q(problem, cfg.c)?;
    let k_min = cfg.k_min.unwrap_or(hsb.k0).max(hsb.k0);
    let k_max = cfg.k_max.unwrap_or(k_min + 6);
    if k_max <= k_min {
        return Err(Error::Invalid(format!(
            "k range [{k_min}, {k_max}] needs at least two members"
        )));
    }
    let ks: Vec<i64> = (k_min..=k_max).collect();
    let mut n0s = ks
        .par_iter()
        .map(|&k| choose_aux_n0(problem, k, cfg, hsb.d))
        .collect::<Result<Vec<_>>>()?;
    if cfg.common_n0 {
        let common = n0s.iter().map(|(n, _)| *n).max().unwrap();
        for (k, n0) in ks.iter().zip(n0s.iter_mut()) {
            *n0 = (common, common == *k);
        }
    }
    let beta = problem.beta();
    let latest = n0s.iter().map(|(n, _)| n + beta).max().unwrap();
    let end = latest + cfg.solve.window_len as i64 - 1;
    let template = ApproxConfig {
        solve: SolveConfig {
            window_end: Some(end),
            ..cfg.solve
        },
        ..*cfg
    };
    let solutions = ks
        .par_iter()
        .zip(&n0s)
        .map(|(&k, &n0)| solve_aux_with_end(problem, k, &template, hsb.d, Some(n0)))
        .collect::<Result<Vec<_>>>()?;

    let range = (beta, end);
    let mut differences = Vec::new();
    let mut max_differences = Vec::new();
    for pair in solutions.windows(2) {
        let row: Vec<f64> = (range.0..=range.1)
            .map(|n| (pair[1].full.get(n) - pair[0].full.get(n)).abs())
            .collect();
        max_differences.push((pair[0].k, row.iter().copied().fold(0.0, f64::max)));
        differences.push(row);
    }
    let nonincreasing = max_differences.windows(2).all(|w| w[1].1 <= w[0].1);
    let last_max = max_differences.last().map_or(0.0, |d| d.1);
    let converged = nonincreasing && last_max < cfg.tol_c;
    let note = if converged {
        "coordinate differences decrease below tol_c".to_string()
    } else {
        format!("no numerical convergence detected (nonincreasing: {nonincreasing}, last max difference {last_max:e})")
    };

    let last = solutions.last().unwrap();
    let limit = last.full.clone();
    let limit_residual = residual(problem, &limit, beta + problem.tau, end - 2)?.sup;
    let limit_relation_defect =
        relation_defect(problem, &limit, 1.0, end, beta + problem.tau, end)?;
    let scaled_defect = relation_defect(problem, &limit, last.w, end, beta + problem.tau, end)?;
    let q_star = problem.q.extremes().sup_abs();
    let relation_defect_bound = scaled_defect + q_star * (1.0 - last.w) * last.full_sup + 1e-14;

    let uniform = uniform_bound(problem, cfg, &hsb)?;
    let uniform_bound_holds = solutions.iter().all(|s| s.full_sup <= uniform);
    let solves = solutions
        .iter()
        .map(|s| AuxSummary {
            k: s.k,
            w: s.w,
            m_k: s.m_k,
            n0: s.result.n0,
            n0_is_k: s.n0_is_k,
            kappa: s.result.kappa,
            iterations: s.result.iterations,
            defect: s.result.defect,
            residual_sup: s.result.residual_sup,
            tail_sup: s.tail_sup,
            tail_bound_ok: s.tail_sup <= s.m_k + s.result.truncation_error,
            full_sup: s.full_sup,
        })
        .collect();
    Ok(ApproxReport {
        hsb,
        solves,
        range,
        max_differences,
        differences,
        converged,
        note,
        limit,
        limit_residual,
        limit_relation_defect,
        relation_defect_bound,
        uniform_bound: uniform,
        uniform_bound_holds,
        solutions,
    })
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

    /// Smallest k with 3 (8/9)^k < (1 - (5/8)^k)^k holding from there on (checked to 400).
    fn hand_k0() -> i64 {
        let holds = |k: i64| {
            3.0 * (8.0f64 / 9.0).powi(k as i32) < (1.0 - 0.625f64.powi(k as i32)).powi(k as i32)
        };
        (1..400).find(|&k| (k..400).all(holds)).unwrap()
    }

    #[test]
    fn example_one_cascade_inequality() {
        let h = check_hsb(&ex1(), 0.9, 0.625, 1.0, 10_000).unwrap();
        assert_eq!(h.k0, hand_k0());
        assert_eq!(h.k0, 11);
        assert_eq!(h.d, 1.0);
        assert!(h.ratio_at_end < h.ratio_at_k0);
    }

    #[test]
    fn zero_coefficients_give_k0_one() {
        let mut p = ex1();
        p.a = SequenceSpec::zero();
        let h = check_hsb(&p, 0.9, 0.625, 1.0, 100).unwrap();
        assert_eq!((h.k0, h.d), (1, 1.0));
    }

    #[test]
    fn polynomial_tails_fail() {
        let mut p = ex1();
        p.a = SequenceSpec::power(1.0, -4.0);
        assert!(matches!(
            check_hsb(&p, 0.9, 0.625, 1.0, 10_000),
            Err(Error::Precondition(_))
        ));
        // n^{-2} makes the series itself diverge
        p.a = SequenceSpec::power(1.0, -2.0);
        assert!(matches!(
            check_hsb(&p, 0.9, 0.625, 1.0, 10_000),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn zero_problem_cascade_is_zero() {
        let mut p = ex1();
        p.a = SequenceSpec::zero();
        let cfg = ApproxConfig {
            solve: SolveConfig {
                window_len: 60,
                ..ApproxConfig::default().solve
            },
            ..Default::default()
        };
        let rep = approximate_limit(&p, &cfg).unwrap();
        assert_eq!(rep.limit.sup_norm(), 0.0);
        assert_eq!(rep.limit_residual, 0.0);
    }

    #[test]
    fn forced_example_cascade_runs() {
        let mut p = ex1();
        p.b = SequenceSpec::geometric(0.25, 0.5);
        p.f = FunctionSpec::sine_power(6);
        let cfg = ApproxConfig {
            solve: SolveConfig {
                window_len: 120,
                ..ApproxConfig::default().solve
            },
            ..Default::default()
        };
        let rep = approximate_limit(&p, &cfg).unwrap();
        assert!(rep.solves.iter().all(|s| s.tail_bound_ok));
        assert!(rep.uniform_bound_holds);
        assert!(rep.limit_relation_defect <= rep.relation_defect_bound);
        let common = approximate_limit(
            &p,
            &ApproxConfig {
                common_n0: true,
                ..cfg
            },
        )
        .unwrap();
        assert!(common.max_differences.windows(2).all(|w| w[1].1 < w[0].1));
        assert!(common
            .solves
            .iter()
            .all(|s| s.n0 == common.solves.last().unwrap().n0));
    }
}
