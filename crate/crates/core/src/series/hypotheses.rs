//! Verdicts for the hypothesis families used by the existence results.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::{DoubleSeries, Inner, SeriesOptions};
use crate::approx::{check_hsb, HsbWitness};
use crate::error::{Error, Result};
use crate::model::{Enclosure, ProblemSpec, SequenceSpec};

/// Identifier of a hypothesis family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HypothesisId {
    /// `f` is locally Lipschitz.
    Hfl,
    /// Double tails of `a` and `b` are finite.
    Hs,
    /// Double sums with inner partial sums from `σ` are finite.
    HsPrime,
    /// `sup |q_n| < 1`.
    Hq,
    /// `inf q_n > 1`.
    H1q,
    /// Double tail is `O((1 - w_k)(C w_k)^k)` for `w_k = 1 - ρ^k`.
    Hsb,
    /// `l^p` summability of the double tails.
    Hsp,
    /// `sup |q_n| ∈ (0, 2^{1-p})`.
    Hqp,
    /// `τ > σ ≥ 0`.
    H0,
    /// `τ > σ ≥ 0` and `q_n ≠ 0`.
    H0Prime,
    /// `q_n ∈ (0, 1)`, `q_n → 1`, `inf q_n > 0`.
    HqLimitOne,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 11] = [
        Self::Hfl,
        Self::Hs,
        Self::HsPrime,
        Self::Hq,
        Self::H1q,
        Self::Hsb,
        Self::Hsp,
        Self::Hqp,
        Self::H0,
        Self::H0Prime,
        Self::HqLimitOne,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hfl => "H_fl",
            Self::Hs => "H_s",
            Self::HsPrime => "H'_s",
            Self::Hq => "H_q",
            Self::H1q => "H1_q",
            Self::Hsb => "H_sb",
            Self::Hsp => "H_sp",
            Self::Hqp => "H_qp",
            Self::H0 => "H_0",
            Self::H0Prime => "H'_0",
            Self::HqLimitOne => "H_q=1",
        }
    }

    /// Parses a comma separated list such as `"Hq,Hsb"`.
    pub fn parse_list(text: &str) -> Result<Vec<Self>> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for HypothesisId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for HypothesisId {
    type Err = Error;

    /// Accepts the display names and loose spellings (`Hq`, `H1q`, `Hs'`, `H′_0`, `Hq=1`).
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| {
                if c == '′' {
                    '\''
                } else {
                    c.to_ascii_lowercase()
                }
            })
            .filter(|c| !matches!(c, '_' | '{' | '}' | '$' | '(' | ')' | '^' | '\\' | ' '))
            .collect();
        Ok(match key.as_str() {
            "hfl" => Self::Hfl,
            "hs" => Self::Hs,
            "h's" | "hs'" | "hsprime" => Self::HsPrime,
            "hq" => Self::Hq,
            "h1q" => Self::H1q,
            "hsb" => Self::Hsb,
            "hsp" => Self::Hsp,
            "hqp" => Self::Hqp,
            "h0" => Self::H0,
            "h'0" | "h0'" | "h0prime" => Self::H0Prime,
            "hq=1" | "hqeq1" => Self::HqLimitOne,
            _ => return Err(Error::Invalid(format!("unknown hypothesis id {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    UndecidableAtHorizon,
}

/// Numeric evidence behind a verdict.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witnesses {
    /// `sup |q_n|` or `inf q_n`, whichever the hypothesis concerns.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_star: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub series: BTreeMap<String, Enclosure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hsb: Option<HsbWitness>,
}

impl Witnesses {
    pub fn is_empty(&self) -> bool {
        self.q_star.is_none()
            && self.values.is_empty()
            && self.series.is_empty()
            && self.hsb.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub id: HypothesisId,
    pub verdict: Verdict,
    pub witnesses: Witnesses,
    pub detail: String,
}

/// Parameters some hypotheses need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// `C` of the cascade hypothesis.
    pub c: Option<f64>,
    /// `ρ` of the schedule `w_k = 1 - ρ^k`.
    pub rho: Option<f64>,
    /// Exponent for the `l^p` hypotheses.
    pub p: f64,
    /// Ball radius at which local bounds of `f` are reported.
    pub m: f64,
    /// Scan horizon for index searches.
    pub horizon: i64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            c: None,
            rho: None,
            p: 1.0,
            m: 1.0,
            horizon: 10_000,
        }
    }
}

fn report(
    id: HypothesisId,
    verdict: Verdict,
    witnesses: Witnesses,
    detail: impl Into<String>,
) -> HypothesisReport {
    HypothesisReport {
        id,
        verdict,
        witnesses,
        detail: detail.into(),
    }
}

/// Verdict for a family of "this series is finite" statements.
fn finiteness(id: HypothesisId, items: Vec<(&str, Result<Enclosure>)>) -> HypothesisReport {
    let mut w = Witnesses::default();
    let mut failures = Vec::new();
    let mut unknown = Vec::new();
    for (name, res) in items {
        match res {
            Ok(e) => {
                w.series.insert(name.to_string(), e);
            }
            Err(Error::ToleranceNotMet { best, .. }) => {
                w.series.insert(name.to_string(), best);
            }
            Err(Error::Divergent(msg)) => failures.push(format!("{name}: {msg}")),
            Err(e) => unknown.push(format!("{name}: {e}")),
        }
    }
    if !failures.is_empty() {
        report(id, Verdict::Fails, w, failures.join("; "))
    } else if !unknown.is_empty() {
        report(id, Verdict::UndecidableAtHorizon, w, unknown.join("; "))
    } else {
        report(id, Verdict::Holds, w, "all series certified finite")
    }
}

/// Term budget for witness enclosures. A verdict only needs a finite upper
/// end; slowly decaying tails report a wider witness instead of summing
/// millions of terms.
const WITNESS_TERMS: i64 = 1 << 16;

fn double_sum(r: &SequenceSpec, c: &SequenceSpec, inner: Inner) -> Result<Enclosure> {
    let s = DoubleSeries::new(r, vec![(c, 1.0)], inner)?;
    let first = s
        .profile(1, s.min_cutoff().max(64))?
        .map(|p| p[0].hi)
        .unwrap_or(1.0);
    s.enclose_best(
        1,
        SeriesOptions {
            tol: 1e-9 * first.max(1.0),
            max_terms: WITNESS_TERMS,
        },
    )
}

fn lp_sum(r: &SequenceSpec, c: &SequenceSpec, p: f64) -> Result<Enclosure> {
    super::lp_series(
        r,
        c,
        p,
        1,
        SeriesOptions {
            tol: 1e-9,
            max_terms: WITNESS_TERMS,
        },
    )
    .or_else(|e| match e {
        Error::ToleranceNotMet { best, .. } => Ok(best),
        other => Err(other),
    })
}

fn check_one(problem: &ProblemSpec, id: HypothesisId, opts: &CheckOptions) -> HypothesisReport {
    use HypothesisId::*;
    let ext = problem.q.extremes();
    let q_abs = ext.sup_abs();
    match id {
        Hfl => {
            let (q, l) = problem.f_local_bounds(opts.m);
            let mut w = Witnesses::default();
            w.values.insert("M".into(), opts.m);
            w.values.insert("Q".into(), q);
            w.values.insert("L".into(), l);
            if l.is_finite() {
                report(
                    id,
                    Verdict::Holds,
                    w,
                    "every builtin nonlinearity is locally Lipschitz",
                )
            } else {
                report(
                    id,
                    Verdict::Fails,
                    w,
                    "no finite Lipschitz constant on [-M, M]",
                )
            }
        }
        Hs => finiteness(
            id,
            vec![
                ("a", double_sum(&problem.r, &problem.a, Inner::Tail)),
                ("b", double_sum(&problem.r, &problem.b, Inner::Tail)),
            ],
        ),
        HsPrime => {
            let lower = Inner::Partial(problem.sigma.max(1));
            finiteness(
                id,
                vec![
                    ("a", double_sum(&problem.r, &problem.a, lower)),
                    ("b", double_sum(&problem.r, &problem.b, lower)),
                ],
            )
        }
        Hq => {
            let w = Witnesses {
                q_star: Some(q_abs),
                ..Default::default()
            };
            if q_abs < 1.0 {
                report(id, Verdict::Holds, w, format!("sup |q_n| = {q_abs} < 1"))
            } else {
                report(
                    id,
                    Verdict::Fails,
                    w,
                    format!("sup |q_n| = {q_abs} is not below 1"),
                )
            }
        }
        H1q => {
            let w = Witnesses {
                q_star: Some(ext.inf),
                ..Default::default()
            };
            if ext.inf > 1.0 {
                report(id, Verdict::Holds, w, format!("inf q_n = {} > 1", ext.inf))
            } else {
                report(
                    id,
                    Verdict::Fails,
                    w,
                    format!("inf q_n = {} is not above 1", ext.inf),
                )
            }
        }
        Hqp => {
            let bound = 2f64.powf(1.0 - opts.p);
            let mut w = Witnesses {
                q_star: Some(q_abs),
                ..Default::default()
            };
            w.values.insert("p".into(), opts.p);
            w.values.insert("2^(1-p)".into(), bound);
            if opts.p >= 1.0 && q_abs > 0.0 && q_abs < bound {
                report(
                    id,
                    Verdict::Holds,
                    w,
                    format!("q* = {q_abs} lies in (0, {bound})"),
                )
            } else {
                report(
                    id,
                    Verdict::Fails,
                    w,
                    format!("q* = {q_abs} is outside (0, {bound})"),
                )
            }
        }
        Hsp => {
            if opts.p < 1.0 {
                return report(
                    id,
                    Verdict::Fails,
                    Witnesses::default(),
                    "p must be at least 1",
                );
            }
            let mut rep = finiteness(
                id,
                vec![
                    ("a", lp_sum(&problem.r, &problem.a, opts.p)),
                    ("b", lp_sum(&problem.r, &problem.b, opts.p)),
                ],
            );
            rep.witnesses.values.insert("p".into(), opts.p);
            rep
        }
        H0 | H0Prime => {
            let mut w = Witnesses::default();
            w.values.insert("tau".into(), problem.tau as f64);
            w.values.insert("sigma".into(), problem.sigma as f64);
            let delays = problem.tau > problem.sigma && problem.sigma >= 0;
            if !delays {
                return report(id, Verdict::Fails, w, "requires tau > sigma >= 0");
            }
            if id == H0Prime {
                w.q_star = Some(q_abs);
                if !problem.q.never_zero() {
                    return report(id, Verdict::Fails, w, "q vanishes at some index");
                }
            }
            report(id, Verdict::Holds, w, "delay ordering satisfied")
        }
        HqLimitOne => {
            let w = Witnesses {
                q_star: Some(ext.inf),
                ..Default::default()
            };
            let below_one = ext.sup < 1.0 || (ext.sup == 1.0 && !ext.sup_attained);
            let ok = ext.inf > 0.0 && below_one && ext.limit == Some(1.0);
            let detail = format!(
                "inf = {}, sup = {} (attained: {}), limit = {:?}",
                ext.inf, ext.sup, ext.sup_attained, ext.limit
            );
            report(
                id,
                if ok { Verdict::Holds } else { Verdict::Fails },
                w,
                detail,
            )
        }
        Hsb => {
            let (Some(c), Some(rho)) = (opts.c, opts.rho) else {
                return report(
                    id,
                    Verdict::UndecidableAtHorizon,
                    Witnesses::default(),
                    "requires C and rho",
                );
            };
            let Some(p_bound) = problem.f_global_bound() else {
                return report(
                    id,
                    Verdict::Fails,
                    Witnesses::default(),
                    "f has no global bound P",
                );
            };
            match check_hsb(problem, c, rho, p_bound, opts.horizon) {
                Ok(h) => {
                    let detail = format!("k0 = {}, D = {}", h.k0, h.d);
                    report(
                        id,
                        Verdict::Holds,
                        Witnesses {
                            hsb: Some(h),
                            ..Default::default()
                        },
                        detail,
                    )
                }
                Err(e @ (Error::Precondition(_) | Error::Divergent(_))) => {
                    report(id, Verdict::Fails, Witnesses::default(), e.to_string())
                }
                Err(e) => report(
                    id,
                    Verdict::UndecidableAtHorizon,
                    Witnesses::default(),
                    e.to_string(),
                ),
            }
        }
    }
}

/// One verdict per requested hypothesis. Never fails: problems that cannot
/// be decided yield [`Verdict::UndecidableAtHorizon`].
pub fn check_hypotheses(
    problem: &ProblemSpec,
    which: &[HypothesisId],
    opts: &CheckOptions,
) -> Vec<HypothesisReport> {
    which
        .iter()
        .map(|id| check_one(problem, *id, opts))
        .collect()
}
