//! Rigorous enclosures for the series in the existence conditions.
//!
//! Every series here has the shape
//!
//! ```text
//! S(n) = Σ_{s≥n} |1/r_s| · I(s),
//!   I(s) = Σ_{t≥s} c_t          (tail flavor)
//!   I(s) = Σ_{t=σ}^{s-1} c_t    (partial flavor)
//! ```
//!
//! with `c_t = Σ_i w_i |seq_i(t)|`. The sum is evaluated exactly up to a
//! cutoff `N`; the inner tail at `N` is enclosed by the sequences' closed-form
//! tails and the outer remainder `Σ_{s≥N}` is bounded with analytic
//! envelopes. The cutoff doubles until the requested width is met.

pub mod hypotheses;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Enclosure, Envelope, LowerBound, ProblemSpec, SequenceSpec, Summability};

pub use hypotheses::{
    check_hypotheses, CheckOptions, HypothesisId, HypothesisReport, Verdict, Witnesses,
};

/// Default term budget for a single enclosure.
pub const DEFAULT_MAX_TERMS: i64 = 1 << 22;

/// Default scan limit for `n0` / `k0` searches.
pub const DEFAULT_SCAN_LIMIT: i64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    /// Target enclosure width.
    pub tol: f64,
    /// Maximum number of explicitly summed terms.
    pub max_terms: i64,
}

impl SeriesOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }

    /// `10⁻¹² · max(1, first_term)`.
    pub fn default_for(first_term: f64) -> Self {
        Self::with_tol(1e-12 * first_term.abs().max(1.0))
    }
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self::with_tol(1e-12)
    }
}

/// Which inner sum is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// `Σ_{t≥s}`
    Tail,
    /// `Σ_{t=σ}^{s-1}`
    Partial,
    /// Tail sums behind the `1/q_{n+τ}` shift (for `inf q_n > 1`).
    Shifted,
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tail" => Ok(Flavor::Tail),
            "partial" => Ok(Flavor::Partial),
            "shifted" => Ok(Flavor::Shifted),
            other => Err(Error::Invalid(format!(
                "unknown flavor {other:?} (tail|partial|shifted)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Inner {
    Tail,
    /// Inner sum starts at this index (clamped to 1).
    Partial(i64),
}

fn inflate(x: f64, ops: i64) -> f64 {
    // a sum of nonnegative terms is zero only when every term is
    if x == 0.0 {
        return 0.0;
    }
    x * (1.0 + (ops as f64 + 16.0) * 2.0 * f64::EPSILON) + f64::MIN_POSITIVE
}

fn deflate(x: f64, ops: i64) -> f64 {
    (x * (1.0 - (ops as f64 + 16.0) * 2.0 * f64::EPSILON)).max(0.0)
}

/// `S(n) = Σ_{s≥n} |1/r_s| I(s)` for a weighted sum of sequences.
pub(crate) struct DoubleSeries<'a> {
    r: &'a SequenceSpec,
    parts: Vec<(&'a SequenceSpec, f64)>,
    inner: Inner,
    /// Upper envelope of `|1/r_s| · I(s)`.
    outer: Envelope,
    /// Lower bound of `|1/r_s| · I(s)`, when one is known.
    low: Option<LowerBound>,
}

impl<'a> DoubleSeries<'a> {
    pub fn new(
        r: &'a SequenceSpec,
        parts: Vec<(&'a SequenceSpec, f64)>,
        inner: Inner,
    ) -> Result<Self> {
        let parts: Vec<_> = parts
            .into_iter()
            .filter(|(s, w)| *w != 0.0 && !s.is_zero())
            .collect();
        let mut inner_env = Envelope::zero();
        let mut inner_low: Option<LowerBound> = None;
        for (seq, w) in &parts {
            let (env, low) = match inner {
                Inner::Tail => {
                    match seq.summability() {
                        Summability::Divergent => {
                            return Err(Error::Divergent(format!(
                                "inner tail of {} diverges",
                                seq.label()
                            )))
                        }
                        Summability::Unknown => {
                            return Err(Error::UnknownTail(format!(
                                "no tail majorant for {}",
                                seq.label()
                            )))
                        }
                        Summability::Summable => {}
                    }
                    (seq.tail_envelope()?, seq.tail_lower())
                }
                Inner::Partial(lo) => (seq.partial_envelope(lo)?, seq.partial_lower(lo)),
            };
            inner_env = inner_env.add(&env.scale(*w));
            if let Some(l) = low {
                let scaled = LowerBound::new(l.term.c * w.abs(), l.term.alpha, l.term.rho, l.from);
                inner_low = match (inner_low, scaled) {
                    (None, s) => s,
                    (Some(a), Some(b))
                        if b.term.rho > a.term.rho
                            || (b.term.rho == a.term.rho && b.term.alpha > a.term.alpha) =>
                    {
                        Some(b)
                    }
                    (a, _) => a,
                };
            }
        }
        let outer = if parts.is_empty() {
            Envelope::zero()
        } else {
            r.recip_envelope()?.mul(&inner_env)
        };
        let low = match (r.recip_lower(), inner_low) {
            (Some(u), Some(i)) if !parts.is_empty() => Some(u.mul(&i)),
            _ => None,
        };
        if !outer.is_summable() {
            if low.is_some_and(|l| l.diverges()) {
                return Err(Error::Divergent(format!(
                    "Σ |1/r_s| I(s) diverges (terms ≥ {:?})",
                    low.map(|l| l.term)
                )));
            }
            return Err(Error::UnknownTail(
                "outer series envelope is not summable".into(),
            ));
        }
        Ok(Self {
            r,
            parts,
            inner,
            outer,
            low,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Upper envelope of the outer terms.
    pub fn outer_envelope(&self) -> &Envelope {
        &self.outer
    }

    /// Lower bound of the outer terms; `S(n)` dominates it termwise.
    pub fn lower_term(&self) -> Option<LowerBound> {
        self.low
    }

    fn c(&self, t: i64) -> f64 {
        self.parts.iter().map(|(s, w)| w.abs() * s.abs_at(t)).sum()
    }

    fn inner_tail(&self, n: i64) -> Result<Enclosure> {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for (s, w) in &self.parts {
            let e = s.abs_tail(n)?;
            lo += w.abs() * e.lo;
            hi += w.abs() * e.hi;
        }
        Ok(Enclosure::new(lo, hi))
    }

    /// Smallest cutoff that the remainder bound accepts.
    pub fn min_cutoff(&self) -> i64 {
        self.outer.tail_start()
    }

    /// Enclosures of `S(n)` for `n ∈ [from, cutoff)`.
    ///
    /// Returns `None` when the remainder bound is unavailable at `cutoff`.
    pub fn profile(&self, from: i64, cutoff: i64) -> Result<Option<Vec<Enclosure>>> {
        let from = from.max(1);
        let cutoff = cutoff.max(from + 1);
        if self.is_zero() {
            return Ok(Some(vec![Enclosure::point(0.0); (cutoff - from) as usize]));
        }
        let Some(remainder) = self.outer.tail_sum(cutoff)? else {
            return Ok(None);
        };
        let len = (cutoff - from) as usize;
        let mut inner_lo = vec![0.0; len];
        let mut inner_hi = vec![0.0; len];
        match self.inner {
            Inner::Tail => {
                let tail = self.inner_tail(cutoff)?;
                let (mut lo, mut hi) = (tail.lo, tail.hi);
                for i in (0..len).rev() {
                    let c = self.c(from + i as i64);
                    lo += c;
                    hi += c;
                    inner_lo[i] = lo;
                    inner_hi[i] = hi;
                }
            }
            Inner::Partial(lower) => {
                let lower = lower.max(1);
                let mut acc: f64 = (lower..from).map(|t| self.c(t)).sum();
                for i in 0..len {
                    inner_lo[i] = acc;
                    inner_hi[i] = acc;
                    let t = from + i as i64;
                    if t >= lower {
                        acc += self.c(t);
                    }
                }
            }
        }
        let ops = cutoff - from
            + match self.inner {
                Inner::Tail => 0,
                Inner::Partial(_) => from,
            };
        let mut out = vec![Enclosure::point(0.0); len];
        let (mut s_lo, mut s_hi) = (0.0, remainder);
        for i in (0..len).rev() {
            let u = self.r.eval(from + i as i64)?.recip().abs();
            s_lo += u * inner_lo[i];
            s_hi += u * inner_hi[i];
            out[i] = Enclosure::new(deflate(s_lo, 3 * ops), inflate(s_hi, 3 * ops));
        }
        Ok(Some(out))
    }

    fn initial_cutoff(&self, to: i64) -> i64 {
        (to + 32).max(self.min_cutoff())
    }

    /// Profile on `[from, to]` whose width at `from` is at most `tol`, or the
    /// best one reachable within `max_terms`.
    pub fn profile_to_tol(
        &self,
        from: i64,
        to: i64,
        opts: SeriesOptions,
    ) -> Result<(Vec<Enclosure>, bool)> {
        let mut cutoff = self.initial_cutoff(to);
        let mut best: Option<Vec<Enclosure>> = None;
        loop {
            if let Some(p) = self.profile(from, cutoff)? {
                let met = p[0].width() <= opts.tol;
                let p: Vec<Enclosure> = p.into_iter().take((to - from + 1) as usize).collect();
                if met {
                    return Ok((p, true));
                }
                best = Some(p);
            }
            let span = cutoff - from;
            if span >= opts.max_terms {
                let best = best.ok_or_else(|| {
                    Error::UnknownTail("remainder bound unavailable within budget".into())
                })?;
                return Ok((best, false));
            }
            cutoff = from + (2 * span).min(opts.max_terms.max(1));
        }
    }

    pub fn enclose(&self, n: i64, opts: SeriesOptions) -> Result<Enclosure> {
        let (p, met) = self.profile_to_tol(n, n, opts)?;
        if met {
            Ok(p[0])
        } else {
            Err(Error::ToleranceNotMet {
                tol: opts.tol,
                terms: opts.max_terms as u64,
                best: p[0],
            })
        }
    }

    /// Enclosure of `S(n)`, accepting a wider result when the budget runs out.
    pub fn enclose_best(&self, n: i64, opts: SeriesOptions) -> Result<Enclosure> {
        match self.enclose(n, opts) {
            Err(Error::ToleranceNotMet { best, .. }) => Ok(best),
            other => other,
        }
    }

    /// Enclosures of `Σ_{m≥n} S(m)^p` for `n ∈ [from, cutoff)`.
    pub fn lp_profile(&self, from: i64, cutoff: i64, p: f64) -> Result<Option<Vec<Enclosure>>> {
        let from = from.max(1);
        if self.is_zero() {
            return Ok(Some(vec![
                Enclosure::point(0.0);
                (cutoff.max(from + 1) - from) as usize
            ]));
        }
        let tail_env = self.outer.tail()?.powf(p);
        if !tail_env.is_summable() {
            let low = match (self.r.recip_lower(), self.lower_inner()) {
                (Some(u), Some(i)) => Some(u.mul(&i).powf(p)),
                _ => None,
            };
            if low.is_some_and(|l| l.diverges()) {
                return Err(Error::Divergent(format!("Σ_n S(n)^{p} diverges")));
            }
            return Err(Error::UnknownTail(format!(
                "no summable envelope for S(n)^{p}"
            )));
        }
        let cutoff = cutoff.max(tail_env.tail_start()).max(from + 1);
        let Some(remainder) = tail_env.tail_sum(cutoff)? else {
            return Ok(None);
        };
        let Some(s) = self.profile(from, cutoff)? else {
            return Ok(None);
        };
        let ops = 3 * (cutoff - from);
        let mut out = vec![Enclosure::point(0.0); s.len()];
        let (mut lo, mut hi) = (0.0, remainder);
        for i in (0..s.len()).rev() {
            lo += s[i].lo.powf(p);
            hi += s[i].hi.powf(p);
            out[i] = Enclosure::new(deflate(lo, ops), inflate(hi, ops));
        }
        Ok(Some(out))
    }

    fn lower_inner(&self) -> Option<LowerBound> {
        self.parts.iter().find_map(|(s, w)| {
            let l = match self.inner {
                Inner::Tail => s.tail_lower(),
                Inner::Partial(lo) => s.partial_lower(lo),
            }?;
            LowerBound::new(l.term.c * w.abs(), l.term.alpha, l.term.rho, l.from)
        })
    }

    pub fn lp_profile_to_tol(
        &self,
        from: i64,
        to: i64,
        p: f64,
        opts: SeriesOptions,
    ) -> Result<(Vec<Enclosure>, bool)> {
        let mut cutoff = self.initial_cutoff(to);
        let mut best = None;
        loop {
            if let Some(prof) = self.lp_profile(from, cutoff, p)? {
                let met = prof[0].width() <= opts.tol;
                let prof: Vec<Enclosure> =
                    prof.into_iter().take((to - from + 1) as usize).collect();
                if met {
                    return Ok((prof, true));
                }
                best = Some(prof);
            }
            let span = cutoff - from;
            if span >= opts.max_terms {
                let best = best.ok_or_else(|| {
                    Error::UnknownTail("remainder bound unavailable within budget".into())
                })?;
                return Ok((best, false));
            }
            cutoff = from + (2 * span).min(opts.max_terms.max(1));
        }
    }
}

/// Encloses `Σ_{s≥n} |1/r_s| Σ_{t≥s} (|a_t| Q + |b_t|)`.
pub fn double_tail(
    r: &SequenceSpec,
    a: &SequenceSpec,
    b: &SequenceSpec,
    q_bound: f64,
    n: i64,
    opts: SeriesOptions,
) -> Result<Enclosure> {
    DoubleSeries::new(r, vec![(a, q_bound), (b, 1.0)], Inner::Tail)?.enclose(n, opts)
}

/// Encloses `Σ_{s≥n} |1/r_s| Σ_{t=σ}^{s-1} (|a_t| Q + |b_t|)`; the inner sum
/// starts at `max(σ, 1)` since coefficients are indexed from 1.
pub fn partial_double_tail(
    r: &SequenceSpec,
    a: &SequenceSpec,
    b: &SequenceSpec,
    q_bound: f64,
    sigma: i64,
    n: i64,
    opts: SeriesOptions,
) -> Result<Enclosure> {
    DoubleSeries::new(
        r,
        vec![(a, q_bound), (b, 1.0)],
        Inner::Partial(sigma.max(1)),
    )?
    .enclose(n, opts)
}

/// Encloses `Σ_{n≥n0} (Σ_{s≥n} |1/r_s| Σ_{t≥s} |c_t|)^p`.
pub fn lp_series(
    r: &SequenceSpec,
    c: &SequenceSpec,
    p: f64,
    n0: i64,
    opts: SeriesOptions,
) -> Result<Enclosure> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!(
            "p must be at least 1, got {p}"
        )));
    }
    let series = DoubleSeries::new(r, vec![(c, 1.0)], Inner::Tail)?;
    let (prof, met) = series.lp_profile_to_tol(n0, n0, p, opts)?;
    if met {
        Ok(prof[0])
    } else {
        Err(Error::ToleranceNotMet {
            tol: opts.tol,
            terms: opts.max_terms as u64,
            best: prof[0],
        })
    }
}

/// Options for the `n0` scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub scan_limit: i64,
    /// Multiplier `w` applied to `q` (auxiliary problems use `w < 1`).
    pub scale: f64,
    pub max_terms: i64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            scan_limit: DEFAULT_SCAN_LIMIT,
            scale: 1.0,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

/// Contraction factor of the neutral part and the admissible remainder for
/// `T1 x + T2 y` to stay in the `M`-ball.
pub(crate) fn neutral_factor(problem: &ProblemSpec, flavor: Flavor, scale: f64) -> Result<f64> {
    let ext = problem.q.extremes();
    match flavor {
        Flavor::Tail | Flavor::Partial => {
            let q_star = scale * ext.sup_abs();
            if !(q_star < 1.0) {
                return Err(Error::Precondition(format!(
                    "sup |w q_n| = {q_star} is not below 1"
                )));
            }
            Ok(q_star)
        }
        Flavor::Shifted => {
            let q_inf = scale * ext.inf;
            if !(q_inf > 1.0) {
                return Err(Error::Precondition(format!(
                    "inf w q_n = {q_inf} is not above 1"
                )));
            }
            Ok(1.0 / q_inf)
        }
    }
}

pub(crate) fn coefficient_series(
    problem: &ProblemSpec,
    q_bound: f64,
    flavor: Flavor,
) -> Result<DoubleSeries<'_>> {
    let inner = match flavor {
        Flavor::Tail | Flavor::Shifted => Inner::Tail,
        Flavor::Partial => Inner::Partial(problem.sigma.max(1)),
    };
    DoubleSeries::new(
        &problem.r,
        vec![(&problem.a, q_bound), (&problem.b, 1.0)],
        inner,
    )
}

/// Scan `n ∈ [from, limit]` for the first index where `test(enclosure)` holds.
fn scan_profile(
    from: i64,
    limit: i64,
    max_terms: i64,
    mut profile: impl FnMut(i64, i64) -> Result<Vec<Enclosure>>,
    test: impl Fn(&Enclosure) -> bool,
) -> Result<(i64, Enclosure)> {
    let mut lo = from;
    let mut chunk: i64 = 64;
    let mut last = None;
    while lo <= limit {
        let hi = (lo + chunk - 1).min(limit);
        let prof = profile(lo, hi)?;
        for (i, e) in prof.iter().enumerate() {
            if test(e) {
                return Ok((lo + i as i64, *e));
            }
        }
        last = prof.last().copied();
        lo = hi + 1;
        chunk = (chunk * 2).min(max_terms.max(64));
    }
    Err(Error::ScanExhausted {
        limit,
        detail: match last {
            Some(e) => format!("largest scanned enclosure [{:e}, {:e}]", e.lo, e.hi),
            None => "nothing scanned".into(),
        },
    })
}

/// Minimal `n0 > β` with `S(n0).hi < (1 - q*) M` (`(1 - 1/q*) M` for the
/// shifted flavor), where `S` uses `Q = Q(M)`.
pub fn find_n0(
    problem: &ProblemSpec,
    m: f64,
    flavor: Flavor,
    opts: ScanOptions,
) -> Result<(i64, Enclosure)> {
    if !(m > 0.0) {
        return Err(Error::Precondition(format!(
            "ball radius must be positive, got {m}"
        )));
    }
    let factor = neutral_factor(problem, flavor, opts.scale)?;
    let (q_bound, _) = problem.f_local_bounds(m);
    let threshold = (1.0 - factor) * m;
    let series = coefficient_series(problem, q_bound, flavor)?;
    let tol = 1e-3 * threshold;
    scan_profile(
        problem.beta() + 1,
        opts.scan_limit,
        opts.max_terms,
        |lo, hi| {
            Ok(series
                .profile_to_tol(
                    lo,
                    hi,
                    SeriesOptions {
                        tol,
                        max_terms: opts.max_terms,
                    },
                )?
                .0)
        },
        |e| e.hi < threshold,
    )
}

/// Minimal `n0 > β` with `4^{p-1} (W^p A(n0).hi + B(n0).hi) < 1 - 2^{p-1} q*`.
///
/// Returns the enclosure of the left-hand side.
pub fn find_n0_lp(problem: &ProblemSpec, p: f64, opts: ScanOptions) -> Result<(i64, Enclosure)> {
    find_n0_lp_with(problem, p, Flavor::Tail, opts)
}

/// [`find_n0_lp`] with the inner sums of `A` and `B` chosen by `flavor`
/// (tail or partial).
pub fn find_n0_lp_with(
    problem: &ProblemSpec,
    p: f64,
    flavor: Flavor,
    opts: ScanOptions,
) -> Result<(i64, Enclosure)> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!(
            "p must be at least 1, got {p}"
        )));
    }
    let inner = lp_inner(problem, flavor)?;
    let q_star = opts.scale * problem.q.extremes().sup_abs();
    let bound = 2f64.powf(1.0 - p);
    if !(q_star < bound) {
        return Err(Error::Precondition(format!(
            "sup |q_n| = {q_star} is not below 2^(1-p) = {bound}"
        )));
    }
    let (w, _) = problem.f_local_bounds(1.0);
    let threshold = 1.0 - 2f64.powf(p - 1.0) * q_star;
    let k = 4f64.powf(p - 1.0);
    let sa = DoubleSeries::new(&problem.r, vec![(&problem.a, 1.0)], inner)?;
    let sb = DoubleSeries::new(&problem.r, vec![(&problem.b, 1.0)], inner)?;
    let wp = w.powf(p);
    let tol = 1e-3 * threshold;
    let so = SeriesOptions {
        tol,
        max_terms: opts.max_terms,
    };
    scan_profile(
        problem.beta() + 1,
        opts.scan_limit,
        opts.max_terms,
        |lo, hi| {
            let (pa, _) = sa.lp_profile_to_tol(lo, hi, p, so)?;
            let (pb, _) = sb.lp_profile_to_tol(lo, hi, p, so)?;
            Ok(pa
                .iter()
                .zip(&pb)
                .map(|(x, y)| Enclosure::new(k * (wp * x.lo + y.lo), k * (wp * x.hi + y.hi)))
                .collect())
        },
        |e| e.hi < threshold,
    )
}

fn lp_inner(problem: &ProblemSpec, flavor: Flavor) -> Result<Inner> {
    match flavor {
        Flavor::Tail => Ok(Inner::Tail),
        Flavor::Partial => Ok(Inner::Partial(problem.sigma.max(1))),
        Flavor::Shifted => Err(Error::Unsupported(
            "l^p solutions use the tail or partial flavor".into(),
        )),
    }
}

/// `Σ_{n≥n0} S_a(n)^p` with the flavor's inner sum (upper end), the
/// `l^p` Lipschitz factor of `T2` before the `1/p` root.
pub fn a_lp_tail(problem: &ProblemSpec, p: f64, flavor: Flavor, n0: i64) -> Result<f64> {
    let s = DoubleSeries::new(
        &problem.r,
        vec![(&problem.a, 1.0)],
        lp_inner(problem, flavor)?,
    )?;
    lp_upper(&s, n0.max(1), p)
}

/// Upper end of `S(n)` tight to about nine digits. Contraction constants
/// only need a valid upper end, so the term budget stays small.
pub(crate) fn upper_end(s: &DoubleSeries<'_>, n: i64) -> Result<f64> {
    if s.is_zero() {
        return Ok(0.0);
    }
    let rough = s
        .enclose_best(
            n,
            SeriesOptions {
                tol: f64::INFINITY,
                max_terms: 1 << 12,
            },
        )?
        .hi;
    Ok(s.enclose_best(
        n,
        SeriesOptions {
            tol: 1e-9 * rough,
            max_terms: 1 << 18,
        },
    )?
    .hi)
}

/// Upper end of `Σ_{m≥n} S(m)^p`, tight to about six digits; only the upper
/// end is used, so a wider enclosure stays valid.
fn lp_upper(s: &DoubleSeries<'_>, n: i64, p: f64) -> Result<f64> {
    if s.is_zero() {
        return Ok(0.0);
    }
    let rough = s
        .lp_profile_to_tol(
            n,
            n,
            p,
            SeriesOptions {
                tol: f64::INFINITY,
                max_terms: 1 << 12,
            },
        )?
        .0[0]
        .hi;
    Ok(s.lp_profile_to_tol(
        n,
        n,
        p,
        SeriesOptions {
            tol: 1e-6 * rough,
            max_terms: 1 << 20,
        },
    )?
    .0[0]
        .hi)
}

/// `W^p A(n) + B(n)` at `n`, upper ends: bounds the `l^p` mass of `T2`
/// beyond `n` on the unit ball (before the `4^{p-1}` factor).
pub fn lp_mass_tail(problem: &ProblemSpec, p: f64, flavor: Flavor, n: i64) -> Result<f64> {
    let inner = lp_inner(problem, flavor)?;
    let (w, _) = problem.f_local_bounds(1.0);
    let sa = DoubleSeries::new(&problem.r, vec![(&problem.a, 1.0)], inner)?;
    let sb = DoubleSeries::new(&problem.r, vec![(&problem.b, 1.0)], inner)?;
    Ok(w.powf(p) * lp_upper(&sa, n, p)? + lp_upper(&sb, n, p)?)
}

/// `S_a(n) = Σ_{s≥n} |1/r_s| Σ_{t≥s} |a_t|` (the Lipschitz factor of `T2`).
pub fn a_only_tail(problem: &ProblemSpec, flavor: Flavor, n: i64) -> Result<Enclosure> {
    let inner = match flavor {
        Flavor::Partial => Inner::Partial(problem.sigma.max(1)),
        _ => Inner::Tail,
    };
    let s = DoubleSeries::new(&problem.r, vec![(&problem.a, 1.0)], inner)?;
    let hi = upper_end(&s, n)?;
    s.enclose_best(
        n,
        SeriesOptions {
            tol: 1e-9 * hi.max(f64::MIN_POSITIVE),
            max_terms: 1 << 18,
        },
    )
}
