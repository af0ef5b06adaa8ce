//! Operator splittings `T1 + T2` evaluated on finite windows.
//!
//! All infinite sums are cut at the horizon `H`. Values of `x` outside the
//! input window read as zero. Each operator returns, next to its value, a
//! per-index bound on the distance to the untruncated operator applied to
//! any sequence that agrees with the window and stays in the ball of radius
//! `cfg.radius`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ProblemSpec, Window};
use crate::series::{coefficient_series, DoubleSeries, Flavor, Inner, SeriesOptions};

/// Where and how the operators are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorConfig {
    pub n0: i64,
    /// Last index of every inner and outer sum.
    pub horizon: i64,
    /// Multiplier `w` on `q`; `1` is the original problem.
    pub scale: f64,
    pub flavor: Flavor,
    /// Radius of the sup-norm ball the inputs live in.
    pub radius: f64,
}

impl OperatorConfig {
    pub fn new(n0: i64, horizon: i64, flavor: Flavor) -> Self {
        Self {
            n0,
            horizon,
            scale: 1.0,
            flavor,
            radius: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// First index where the operators act, `n0 + β`.
    pub fn start(&self, problem: &ProblemSpec) -> i64 {
        self.n0 + problem.beta()
    }
}

/// An operator value together with its truncation-error profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated {
    pub value: Window,
    pub error: Window,
}

impl Truncated {
    pub fn truncation_error(&self) -> f64 {
        self.error.sup_norm()
    }
}

/// Coefficients and remainder bounds precomputed for repeated evaluation.
pub struct Plan<'a> {
    problem: &'a ProblemSpec,
    cfg: OperatorConfig,
    start: i64,
    q_bound: f64,
    lipschitz: f64,
    /// `a_t`, `b_t`, `1/r_t` at `t = 1..=H` (slot `t - 1`).
    a: Vec<f64>,
    b: Vec<f64>,
    rinv: Vec<f64>,
    /// `w q_n` at `n = 1..=H+τ`.
    wq: Vec<f64>,
    /// Bound on the inner sum beyond `H` (tail flavors).
    inner_rem: f64,
    /// Bound on the outer sum beyond `H`.
    outer_rem: f64,
}

impl<'a> Plan<'a> {
    pub fn new(problem: &'a ProblemSpec, cfg: OperatorConfig) -> Result<Self> {
        let start = cfg.start(problem);
        if cfg.n0 < 1 {
            return Err(Error::Precondition(format!(
                "n0 must be at least 1, got {}",
                cfg.n0
            )));
        }
        if cfg.horizon < start {
            return Err(Error::Precondition(format!(
                "horizon {} precedes the first index {start}",
                cfg.horizon
            )));
        }
        if !(cfg.scale > 0.0) || !(cfg.radius > 0.0) {
            return Err(Error::Precondition(
                "scale and radius must be positive".into(),
            ));
        }
        let h = cfg.horizon;
        let coeff = |seq: &crate::model::SequenceSpec| {
            (1..=h).map(|t| seq.eval(t)).collect::<Result<Vec<_>>>()
        };
        let a = coeff(&problem.a)?;
        let b = coeff(&problem.b)?;
        let rinv = coeff(&problem.r)?.into_iter().map(f64::recip).collect();
        let wq = (1..=h + problem.tau)
            .map(|n| problem.q.eval(n).map(|q| cfg.scale * q))
            .collect::<Result<Vec<_>>>()?;
        if cfg.flavor == Flavor::Shifted {
            if let Some(m) =
                (start + problem.tau..=h + problem.tau).find(|&m| !(wq[(m - 1) as usize] > 1.0))
            {
                return Err(Error::Precondition(format!(
                    "shifted operators need w q_n > 1, but w q_{m} = {}",
                    wq[(m - 1) as usize]
                )));
            }
        }
        let (q_bound, lipschitz) = problem.f_local_bounds(cfg.radius);
        let series = coefficient_series(problem, q_bound, cfg.flavor)?;
        let outer_rem = remainder(&series, h + 1)?;
        let inner_rem = match cfg.flavor {
            Flavor::Partial => 0.0,
            _ => q_bound * problem.a.abs_tail(h + 1)?.hi + problem.b.abs_tail(h + 1)?.hi,
        };
        Ok(Self {
            problem,
            cfg,
            start,
            q_bound,
            lipschitz,
            a,
            b,
            rinv,
            wq,
            inner_rem,
            outer_rem,
        })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.cfg
    }

    /// First index where the operators act.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// `(Q, L)` on the ball of radius `cfg.radius`.
    pub fn f_bounds(&self) -> (f64, f64) {
        (self.q_bound, self.lipschitz)
    }

    fn coef(v: &[f64], t: i64) -> f64 {
        v[(t - 1) as usize]
    }

    pub(crate) fn wq(&self, n: i64) -> f64 {
        Self::coef(&self.wq, n)
    }

    fn check_window(&self, x: &Window) -> Result<()> {
        if x.end() > self.cfg.horizon || x.start < 1 {
            return Err(Error::Precondition(format!(
                "window [{}, {}] must lie in [1, {}]",
                x.start,
                x.end(),
                self.cfg.horizon
            )));
        }
        Ok(())
    }

    fn g(&self, x: &Window, t: i64) -> f64 {
        Self::coef(&self.a, t) * self.problem.f.eval(x.get(t - self.problem.sigma))
            + Self::coef(&self.b, t)
    }

    /// Error bound for replacing an unknown `f(x_{t-σ})` (read past the window) by `f(0)`.
    fn miss(&self, x: &Window, t: i64) -> f64 {
        if t - self.problem.sigma > x.end() {
            2.0 * self.q_bound * Self::coef(&self.a, t).abs()
        } else {
            0.0
        }
    }

    /// `Σ_{s=n}^{H} (1/r_s) Σ_{t=s}^{H} g_t` with errors, for `n ∈ [lo, H]`.
    fn tail_sums(&self, x: &Window, lo: i64) -> (Vec<f64>, Vec<f64>) {
        let h = self.cfg.horizon;
        let len = (h - lo + 1).max(0) as usize;
        let (mut vals, mut errs) = (vec![0.0; len], vec![0.0; len]);
        let (mut inner, mut inner_err) = (0.0, self.inner_rem);
        let (mut outer, mut outer_err) = (0.0, self.outer_rem);
        for s in (lo..=h).rev() {
            inner += self.g(x, s);
            inner_err += self.miss(x, s);
            let u = Self::coef(&self.rinv, s);
            outer += inner * u;
            outer_err += inner_err * u.abs();
            vals[(s - lo) as usize] = outer;
            errs[(s - lo) as usize] = outer_err;
        }
        (vals, errs)
    }

    /// `-Σ_{s=n}^{H} (1/r_s) Σ_{t=σ'}^{s-1} g_t` with errors, for `n ∈ [lo, H]`.
    fn partial_sums(&self, x: &Window, lo: i64) -> (Vec<f64>, Vec<f64>) {
        let h = self.cfg.horizon;
        let first = self.problem.sigma.max(1);
        let len = (h - lo + 1).max(0) as usize;
        let (mut inner, mut inner_err) = (vec![0.0; len], vec![0.0; len]);
        let (mut acc, mut acc_err) = (0.0, 0.0);
        for t in first..lo {
            acc += self.g(x, t);
            acc_err += self.miss(x, t);
        }
        for s in lo..=h {
            inner[(s - lo) as usize] = acc;
            inner_err[(s - lo) as usize] = acc_err;
            if s >= first {
                acc += self.g(x, s);
                acc_err += self.miss(x, s);
            }
        }
        let (mut vals, mut errs) = (vec![0.0; len], vec![0.0; len]);
        let (mut outer, mut outer_err) = (0.0, self.outer_rem);
        for s in (lo..=h).rev() {
            let i = (s - lo) as usize;
            let u = Self::coef(&self.rinv, s);
            outer += inner[i] * u;
            outer_err += inner_err[i] * u.abs();
            vals[i] = -outer;
            errs[i] = outer_err;
        }
        (vals, errs)
    }

    /// The contraction part.
    pub fn t1(&self, x: &Window) -> Result<Truncated> {
        self.check_window(x)?;
        let tau = self.problem.tau;
        let mut value = Window::zeros(x.start, x.len());
        let mut error = Window::zeros(x.start, x.len());
        for n in x.indices().filter(|&n| n >= self.start) {
            match self.cfg.flavor {
                Flavor::Tail | Flavor::Partial => value.set(n, -self.wq(n) * x.get(n - tau)),
                Flavor::Shifted => {
                    let wq = self.wq(n + tau);
                    value.set(n, -x.get(n + tau) / wq);
                    if n + tau > x.end() {
                        error.set(n, self.cfg.radius / wq);
                    }
                }
            }
        }
        Ok(Truncated { value, error })
    }

    /// The summation part.
    pub fn t2(&self, x: &Window) -> Result<Truncated> {
        self.check_window(x)?;
        let mut value = Window::zeros(x.start, x.len());
        let mut error = Window::zeros(x.start, x.len());
        let lo = self.start.max(x.start);
        if lo > x.end() {
            return Ok(Truncated { value, error });
        }
        let h = self.cfg.horizon;
        match self.cfg.flavor {
            Flavor::Tail | Flavor::Partial => {
                let (vals, errs) = if self.cfg.flavor == Flavor::Tail {
                    self.tail_sums(x, lo)
                } else {
                    self.partial_sums(x, lo)
                };
                for n in lo..=x.end() {
                    value.set(n, vals[(n - lo) as usize]);
                    error.set(n, errs[(n - lo) as usize]);
                }
            }
            Flavor::Shifted => {
                let tau = self.problem.tau;
                let m_lo = lo + tau;
                let (vals, errs) = self.tail_sums(x, m_lo.min(h + 1));
                for n in lo..=x.end() {
                    let m = n + tau;
                    let (v, e) = if m <= h {
                        let i = (m - m_lo.min(h + 1)) as usize;
                        (vals[i], errs[i])
                    } else {
                        (0.0, self.outer_rem)
                    };
                    let wq = self.wq(m);
                    value.set(n, v / wq);
                    error.set(n, e / wq);
                }
            }
        }
        Ok(Truncated { value, error })
    }

    /// `T1 x + T2 y`.
    pub fn combine(&self, x: &Window, y: &Window) -> Result<Truncated> {
        let p = self.t1(x)?;
        let q = self.t2(y)?;
        if p.value.start != q.value.start || p.value.len() != q.value.len() {
            return Err(Error::Precondition(
                "T1 and T2 inputs must share an index range".into(),
            ));
        }
        Ok(Truncated {
            value: Window {
                start: p.value.start,
                values: add(&p.value.values, &q.value.values),
            },
            error: Window {
                start: p.error.start,
                values: add(&p.error.values, &q.error.values),
            },
        })
    }

    /// `T1 x + T2 x`.
    pub fn step(&self, x: &Window) -> Result<Truncated> {
        self.combine(x, x)
    }
}

fn add(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

fn remainder(series: &DoubleSeries<'_>, from: i64) -> Result<f64> {
    if series.is_zero() {
        return Ok(0.0);
    }
    let first = series
        .profile(from, (from + 64).max(series.min_cutoff()))?
        .map(|p| p[0].hi)
        .unwrap_or(1.0);
    Ok(series
        .enclose_best(from, SeriesOptions::with_tol(1e-6 * first.max(1e-300)))?
        .hi)
}

/// `(T1 x)_n = -w q_n x_{n-τ}` for `n ≥ n0 + β` (or the shifted variant).
pub fn apply_t1(problem: &ProblemSpec, x: &Window, cfg: OperatorConfig) -> Result<Window> {
    Ok(Plan::new(problem, cfg)?.t1(x)?.value)
}

/// `(T2 x)_n = Σ_{s≥n} (1/r_s) Σ_{t≥s} (a_t f(x_{t-σ}) + b_t)`, truncated at the horizon.
pub fn apply_t2_tail(problem: &ProblemSpec, x: &Window, cfg: OperatorConfig) -> Result<Truncated> {
    Plan::new(
        problem,
        OperatorConfig {
            flavor: Flavor::Tail,
            ..cfg
        },
    )?
    .t2(x)
}

/// `(T2 x)_n = -Σ_{s≥n} (1/r_s) Σ_{t=σ}^{s-1} (a_t f(x_{t-σ}) + b_t)`, truncated at the horizon.
pub fn apply_t2_partial(
    problem: &ProblemSpec,
    x: &Window,
    cfg: OperatorConfig,
) -> Result<Truncated> {
    Plan::new(
        problem,
        OperatorConfig {
            flavor: Flavor::Partial,
            ..cfg
        },
    )?
    .t2(x)
}

/// `-(1/q_{n+τ}) x_{n+τ} + (1/q_{n+τ}) Σ_{s≥n+τ} (1/r_s) Σ_{t≥s} (…)` for `inf q_n > 1`.
pub fn apply_shifted(problem: &ProblemSpec, x: &Window, cfg: OperatorConfig) -> Result<Truncated> {
    Plan::new(
        problem,
        OperatorConfig {
            flavor: Flavor::Shifted,
            ..cfg
        },
    )?
    .step(x)
}

/// `S_a(n) = Σ_{s≥n} |1/r_s| Σ |a_t|` for the flavor's inner sum (upper end).
pub fn a_double_tail(problem: &ProblemSpec, flavor: Flavor, n: i64) -> Result<f64> {
    let inner = match flavor {
        Flavor::Partial => Inner::Partial(problem.sigma.max(1)),
        _ => Inner::Tail,
    };
    let s = DoubleSeries::new(&problem.r, vec![(&problem.a, 1.0)], inner)?;
    crate::series::upper_end(&s, n.max(1))
}
