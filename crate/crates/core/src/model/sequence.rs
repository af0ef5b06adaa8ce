use serde::{Deserialize, Serialize};

use super::envelope::{Envelope, LowerBound, PowerGeometric};
use super::Enclosure;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

fn one_index() -> i64 {
    1
}

/// Closed-form rational sequences with telescoping tails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RationalForm {
    /// `1/((2n-1)(2n+1))`
    OddPair,
    /// `1/(n(n+1))`
    Rising2,
    /// `1/(n(n+1)(n+2)(n+3))`
    Rising4,
}

/// How the tail of a table is bounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TailMajorant {
    /// `"finite-support"`: the table is zero past its last entry.
    Keyword(TailKeyword),
    /// User supplied `T(n)` for each table index; zero past the end.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKeyword {
    FiniteSupport,
}

/// The closed-form vocabulary for coefficient sequences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceKind {
    /// `c · ρ^n`
    Geometric {
        c: f64,
        rho: f64,
    },
    /// `c · n^α`
    Power {
        c: f64,
        alpha: f64,
    },
    /// `c · (-1)^n`
    Alternating {
        c: f64,
    },
    /// `c · form(n)`
    Rational {
        form: RationalForm,
        #[serde(default = "one")]
        c: f64,
    },
    /// `c · (1 - ρ^n)`
    OneMinusGeometric {
        rho: f64,
        #[serde(default = "one")]
        c: f64,
    },
    Constant {
        c: f64,
    },
    /// Explicit values on `start..start+len`, zero afterwards.
    Table {
        #[serde(default = "one_index")]
        start: i64,
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail_majorant: Option<TailMajorant>,
    },
}

/// A real sequence indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub kind: SequenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Whether `Σ |term(n)|` converges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summability {
    Summable,
    Divergent,
    Unknown,
}

/// Supremum and infimum of a sequence over all `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub sup: f64,
    pub inf: f64,
    pub sup_attained: bool,
    pub inf_attained: bool,
    /// Limit, when it exists (possibly infinite).
    pub limit: Option<f64>,
}

impl Extremes {
    pub fn sup_abs(&self) -> f64 {
        self.sup.abs().max(self.inf.abs())
    }
}

fn powi(x: f64, n: i64) -> f64 {
    if let Ok(k) = i32::try_from(n) {
        x.powi(k)
    } else {
        x.powf(n as f64)
    }
}

fn signed_inf(x: f64) -> f64 {
    if x > 0.0 {
        f64::INFINITY
    } else if x < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind) -> Self {
        Self { kind, name: None }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn geometric(c: f64, rho: f64) -> Self {
        Self::new(SequenceKind::Geometric { c, rho })
    }

    pub fn power(c: f64, alpha: f64) -> Self {
        Self::new(SequenceKind::Power { c, alpha })
    }

    pub fn alternating(c: f64) -> Self {
        Self::new(SequenceKind::Alternating { c })
    }

    pub fn rational(form: RationalForm, c: f64) -> Self {
        Self::new(SequenceKind::Rational { form, c })
    }

    pub fn one_minus_geometric(c: f64, rho: f64) -> Self {
        Self::new(SequenceKind::OneMinusGeometric { rho, c })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(SequenceKind::Constant { c })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Table starting at index 1 that vanishes past its last entry.
    pub fn finite_table(values: Vec<f64>) -> Self {
        Self::new(SequenceKind::Table {
            start: 1,
            values,
            tail_majorant: Some(TailMajorant::Keyword(TailKeyword::FiniteSupport)),
        })
    }

    /// The sequence multiplied by `w`.
    pub fn scaled(&self, w: f64) -> Self {
        let kind = match &self.kind {
            SequenceKind::Geometric { c, rho } => SequenceKind::Geometric {
                c: c * w,
                rho: *rho,
            },
            SequenceKind::Power { c, alpha } => SequenceKind::Power {
                c: c * w,
                alpha: *alpha,
            },
            SequenceKind::Alternating { c } => SequenceKind::Alternating { c: c * w },
            SequenceKind::Rational { form, c } => SequenceKind::Rational {
                form: *form,
                c: c * w,
            },
            SequenceKind::OneMinusGeometric { rho, c } => SequenceKind::OneMinusGeometric {
                rho: *rho,
                c: c * w,
            },
            SequenceKind::Constant { c } => SequenceKind::Constant { c: c * w },
            SequenceKind::Table {
                start,
                values,
                tail_majorant,
            } => SequenceKind::Table {
                start: *start,
                values: values.iter().map(|v| v * w).collect(),
                tail_majorant: match tail_majorant {
                    Some(TailMajorant::Values(t)) => Some(TailMajorant::Values(
                        t.iter().map(|v| v * w.abs()).collect(),
                    )),
                    other => other.clone(),
                },
            },
        };
        Self {
            kind,
            name: self.name.clone(),
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{:?}", self.kind))
    }

    /// Term at index `n ≥ 1`.
    pub fn eval(&self, n: i64) -> Result<f64> {
        if n < 1 {
            return Err(Error::Index {
                index: n,
                reason: "sequences are indexed from 1".into(),
            });
        }
        Ok(match &self.kind {
            SequenceKind::Geometric { c, rho } => c * powi(*rho, n),
            SequenceKind::Power { c, alpha } => c * (n as f64).powf(*alpha),
            SequenceKind::Alternating { c } => {
                if n % 2 == 0 {
                    *c
                } else {
                    -c
                }
            }
            SequenceKind::Rational { form, c } => {
                let x = n as f64;
                c / match form {
                    RationalForm::OddPair => (2.0 * x - 1.0) * (2.0 * x + 1.0),
                    RationalForm::Rising2 => x * (x + 1.0),
                    RationalForm::Rising4 => x * (x + 1.0) * (x + 2.0) * (x + 3.0),
                }
            }
            SequenceKind::OneMinusGeometric { rho, c } => c * (1.0 - powi(*rho, n)),
            SequenceKind::Constant { c } => *c,
            SequenceKind::Table { start, values, .. } => {
                if n < *start {
                    return Err(Error::Index {
                        index: n,
                        reason: format!("before table start {start}"),
                    });
                }
                values.get((n - start) as usize).copied().unwrap_or(0.0)
            }
        })
    }

    /// `|term(n)|`, panicking only on indices the problem validation excludes.
    pub(crate) fn abs_at(&self, n: i64) -> f64 {
        self.eval(n).map(f64::abs).unwrap_or(0.0)
    }

    /// Whether every term is zero.
    pub fn is_zero(&self) -> bool {
        match &self.kind {
            SequenceKind::Geometric { c, .. }
            | SequenceKind::Power { c, .. }
            | SequenceKind::Alternating { c }
            | SequenceKind::Rational { c, .. }
            | SequenceKind::Constant { c } => *c == 0.0,
            SequenceKind::OneMinusGeometric { rho, c } => *c == 0.0 || *rho == 1.0,
            SequenceKind::Table { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn summability(&self) -> Summability {
        match self.abs_tail(self.first_index()) {
            Ok(_) => Summability::Summable,
            Err(Error::Divergent(_)) => Summability::Divergent,
            Err(_) => Summability::Unknown,
        }
    }

    fn first_index(&self) -> i64 {
        match &self.kind {
            SequenceKind::Table { start, .. } => (*start).max(1),
            _ => 1,
        }
    }

    fn divergent(&self) -> Error {
        Error::Divergent(format!("Σ|term| diverges for {}", self.label()))
    }

    /// Enclosure of `Σ_{t≥n} |term(t)|`.
    pub fn abs_tail(&self, n: i64) -> Result<Enclosure> {
        if n < 1 {
            return Err(Error::Index {
                index: n,
                reason: "sequences are indexed from 1".into(),
            });
        }
        if self.is_zero() {
            return Ok(Enclosure::point(0.0));
        }
        let x = n as f64;
        match &self.kind {
            SequenceKind::Geometric { c, rho } => {
                let r = rho.abs();
                if r >= 1.0 {
                    return Err(self.divergent());
                }
                Ok(Enclosure::point(c.abs() * powi(r, n) / (1.0 - r)))
            }
            SequenceKind::Power { c, alpha } => {
                if *alpha >= -1.0 {
                    return Err(self.divergent());
                }
                let e = -alpha - 1.0;
                let integral = c.abs() * x.powf(alpha + 1.0) / e;
                Ok(Enclosure::new(
                    integral,
                    integral + c.abs() * x.powf(*alpha),
                ))
            }
            SequenceKind::Alternating { .. }
            | SequenceKind::Constant { .. }
            | SequenceKind::OneMinusGeometric { .. } => Err(self.divergent()),
            SequenceKind::Rational { form, c } => {
                let v = c.abs()
                    * match form {
                        RationalForm::OddPair => 1.0 / (2.0 * (2.0 * x - 1.0)),
                        RationalForm::Rising2 => 1.0 / x,
                        RationalForm::Rising4 => 1.0 / (3.0 * x * (x + 1.0) * (x + 2.0)),
                    };
                Ok(Enclosure::point(v))
            }
            SequenceKind::Table {
                start,
                values,
                tail_majorant,
            } => {
                let Some(tm) = tail_majorant else {
                    return Err(Error::UnknownTail(format!(
                        "table {} has no tail majorant",
                        self.label()
                    )));
                };
                if n < *start {
                    return Err(Error::Index {
                        index: n,
                        reason: format!("before table start {start}"),
                    });
                }
                let off = (n - start) as usize;
                let exact: f64 = values.iter().skip(off).map(|v| v.abs()).sum();
                let hi = match tm {
                    TailMajorant::Keyword(TailKeyword::FiniteSupport) => exact,
                    TailMajorant::Values(t) => t.get(off).copied().unwrap_or(0.0).max(exact),
                };
                Ok(Enclosure::new(exact, hi))
            }
        }
    }

    /// `T(n) ≥ Σ_{t≥n} |term(t)|`, nonincreasing in `n`.
    pub fn tail_majorant(&self, n: i64) -> Result<f64> {
        self.abs_tail(n).map(|e| e.hi)
    }

    /// Upper envelope of `n ↦ Σ_{t≥n} |term(t)|`.
    pub fn tail_envelope(&self) -> Result<Envelope> {
        if self.is_zero() {
            return Ok(Envelope::zero());
        }
        // also surfaces divergence / missing majorants
        self.abs_tail(self.first_index())?;
        Ok(match &self.kind {
            SequenceKind::Geometric { c, rho } => {
                let r = rho.abs();
                Envelope::single(PowerGeometric::new(c.abs() / (1.0 - r), 0.0, r))
            }
            SequenceKind::Power { c, alpha } => {
                let e = -alpha - 1.0;
                Envelope::single(PowerGeometric::new(
                    c.abs() * (-alpha) / e,
                    alpha + 1.0,
                    1.0,
                ))
            }
            SequenceKind::Rational { form, c } => {
                let (k, a) = match form {
                    // 1/(2(2n-1)) ≤ 1/(2n)
                    RationalForm::OddPair => (0.5, -1.0),
                    RationalForm::Rising2 => (1.0, -1.0),
                    RationalForm::Rising4 => (1.0 / 3.0, -3.0),
                };
                Envelope::single(PowerGeometric::new(c.abs() * k, a, 1.0))
            }
            SequenceKind::Table { start, values, .. } => {
                Envelope::vanishing_from(start + values.len() as i64)
            }
            _ => unreachable!("divergent kinds rejected above"),
        })
    }

    /// Lower bound of `n ↦ Σ_{t≥n} |term(t)|`, if it is eventually positive.
    pub fn tail_lower(&self) -> Option<LowerBound> {
        if self.is_zero() {
            return None;
        }
        match &self.kind {
            SequenceKind::Geometric { c, rho } if rho.abs() < 1.0 => {
                LowerBound::new(c.abs() / (1.0 - rho.abs()), 0.0, rho.abs(), 1)
            }
            SequenceKind::Power { c, alpha } if *alpha < -1.0 => {
                LowerBound::new(c.abs() / (-alpha - 1.0), alpha + 1.0, 1.0, 1)
            }
            SequenceKind::Rational { form, c } => {
                let (k, a) = match form {
                    RationalForm::OddPair => (0.25, -1.0),
                    RationalForm::Rising2 => (1.0, -1.0),
                    RationalForm::Rising4 => (1.0 / 18.0, -3.0),
                };
                LowerBound::new(c.abs() * k, a, 1.0, 1)
            }
            _ => None,
        }
    }

    /// Upper envelope of `P(s) = Σ_{t=lower}^{s-1} |term(t)|`.
    pub fn partial_envelope(&self, lower: i64) -> Result<Envelope> {
        let lower = lower.max(1);
        if self.is_zero() {
            return Ok(Envelope::zero());
        }
        let pg = PowerGeometric::new;
        Ok(match &self.kind {
            SequenceKind::Geometric { c, rho } => {
                let (c, r) = (c.abs(), rho.abs());
                if r < 1.0 {
                    Envelope::single(PowerGeometric::constant(c * powi(r, lower) / (1.0 - r)))
                } else if r == 1.0 {
                    Envelope::single(pg(c, 1.0, 1.0))
                } else {
                    Envelope::single(pg(c / (r - 1.0), 0.0, r))
                }
            }
            SequenceKind::Power { c, alpha } => {
                let c = c.abs();
                let a = *alpha;
                if a >= 0.0 {
                    Envelope::single(pg(c, a + 1.0, 1.0))
                } else if a > -1.0 {
                    Envelope::single(pg(c / (a + 1.0), a + 1.0, 1.0))
                } else if a == -1.0 {
                    // 1 + ln s ≤ 2 √s
                    Envelope::single(pg(2.0 * c, 0.5, 1.0))
                } else {
                    Envelope::single(PowerGeometric::constant(c * (1.0 + 1.0 / (-a - 1.0))))
                }
            }
            SequenceKind::Alternating { c } | SequenceKind::Constant { c } => {
                Envelope::single(pg(c.abs(), 1.0, 1.0))
            }
            SequenceKind::OneMinusGeometric { rho, c } => {
                let (c, r) = (c.abs(), rho.abs());
                if r <= 1.0 {
                    Envelope::single(pg(2.0 * c, 1.0, 1.0))
                } else {
                    Envelope::from_terms(vec![pg(c, 1.0, 1.0), pg(c / (r - 1.0), 0.0, r)], 1)
                }
            }
            SequenceKind::Rational { .. } => {
                Envelope::single(PowerGeometric::constant(self.abs_tail(lower)?.hi))
            }
            SequenceKind::Table { start, values, .. } => {
                let skip = (lower - start).max(0) as usize;
                let total: f64 = values.iter().skip(skip).map(|v| v.abs()).sum();
                Envelope::single(PowerGeometric::constant(total))
            }
        })
    }

    /// Constant lower bound on `P(s)` once it becomes positive.
    pub fn partial_lower(&self, lower: i64) -> Option<LowerBound> {
        let lower = lower.max(1);
        let mut acc = 0.0;
        for t in lower..lower + 256 {
            acc += self.eval(t).ok()?.abs();
            if acc > 0.0 {
                return LowerBound::new(acc, 0.0, 1.0, t + 1);
            }
        }
        None
    }

    /// True when no term vanishes.
    pub fn never_zero(&self) -> bool {
        match &self.kind {
            SequenceKind::Geometric { c, rho } => *c != 0.0 && *rho != 0.0,
            SequenceKind::Power { c, .. }
            | SequenceKind::Alternating { c }
            | SequenceKind::Constant { c }
            | SequenceKind::Rational { c, .. } => *c != 0.0,
            SequenceKind::OneMinusGeometric { rho, c } => *c != 0.0 && rho.abs() != 1.0,
            SequenceKind::Table { .. } => false,
        }
    }

    /// Upper envelope of `|1/term(n)|`.
    pub fn recip_envelope(&self) -> Result<Envelope> {
        if !self.never_zero() {
            return Err(Error::Invalid(format!(
                "{} vanishes somewhere",
                self.label()
            )));
        }
        let pg = PowerGeometric::new;
        Ok(Envelope::single(match &self.kind {
            SequenceKind::Geometric { c, rho } => pg(1.0 / c.abs(), 0.0, 1.0 / rho.abs()),
            SequenceKind::Power { c, alpha } => pg(1.0 / c.abs(), -alpha, 1.0),
            SequenceKind::Alternating { c } | SequenceKind::Constant { c } => {
                pg(1.0 / c.abs(), 0.0, 1.0)
            }
            SequenceKind::OneMinusGeometric { rho, c } => {
                let r = rho.abs();
                if r < 1.0 {
                    pg(1.0 / (c.abs() * (1.0 - r)), 0.0, 1.0)
                } else {
                    pg(r / (c.abs() * (r - 1.0)), 0.0, 1.0 / r)
                }
            }
            SequenceKind::Rational { form, c } => {
                let (k, a) = match form {
                    RationalForm::OddPair => (4.0, 2.0),
                    RationalForm::Rising2 => (2.0, 2.0),
                    RationalForm::Rising4 => (24.0, 4.0),
                };
                pg(k / c.abs(), a, 1.0)
            }
            SequenceKind::Table { .. } => unreachable!(),
        }))
    }

    /// Lower bound of `|1/term(n)|`.
    pub fn recip_lower(&self) -> Option<LowerBound> {
        if !self.never_zero() {
            return None;
        }
        match &self.kind {
            SequenceKind::Geometric { c, rho } => {
                LowerBound::new(1.0 / c.abs(), 0.0, 1.0 / rho.abs(), 1)
            }
            SequenceKind::Power { c, alpha } => LowerBound::new(1.0 / c.abs(), -alpha, 1.0, 1),
            SequenceKind::Alternating { c } | SequenceKind::Constant { c } => {
                LowerBound::new(1.0 / c.abs(), 0.0, 1.0, 1)
            }
            SequenceKind::OneMinusGeometric { rho, c } => {
                let r = rho.abs();
                if r < 1.0 {
                    LowerBound::new(1.0 / (c.abs() * (1.0 + r)), 0.0, 1.0, 1)
                } else {
                    LowerBound::new(1.0 / (2.0 * c.abs()), 0.0, 1.0 / r, 1)
                }
            }
            SequenceKind::Rational { form, c } => {
                let (k, a) = match form {
                    RationalForm::OddPair => (3.0, 2.0),
                    RationalForm::Rising2 => (1.0, 2.0),
                    RationalForm::Rising4 => (1.0, 4.0),
                };
                LowerBound::new(k / c.abs(), a, 1.0, 1)
            }
            SequenceKind::Table { .. } => None,
        }
    }

    /// Limits of the odd- and even-indexed subsequences.
    fn parity_limits(&self) -> Option<(f64, f64)> {
        Some(match &self.kind {
            SequenceKind::Geometric { c, rho } => {
                let r = *rho;
                if r.abs() < 1.0 || *c == 0.0 {
                    (0.0, 0.0)
                } else if r == 1.0 {
                    (*c, *c)
                } else if r == -1.0 {
                    (-c, *c)
                } else if r > 1.0 {
                    (signed_inf(*c), signed_inf(*c))
                } else {
                    (signed_inf(-c), signed_inf(*c))
                }
            }
            SequenceKind::Power { c, alpha } => {
                let l = if *alpha < 0.0 {
                    0.0
                } else if *alpha == 0.0 {
                    *c
                } else {
                    signed_inf(*c)
                };
                (l, l)
            }
            SequenceKind::Alternating { c } => (-c, *c),
            SequenceKind::OneMinusGeometric { rho, c } => {
                let r = *rho;
                if r.abs() < 1.0 {
                    (*c, *c)
                } else if r == 1.0 {
                    (0.0, 0.0)
                } else if r == -1.0 {
                    (2.0 * c, 0.0)
                } else if r > 1.0 {
                    (signed_inf(-c), signed_inf(-c))
                } else {
                    (signed_inf(*c), signed_inf(-c))
                }
            }
            SequenceKind::Constant { c } => (*c, *c),
            SequenceKind::Rational { .. } => (0.0, 0.0),
            SequenceKind::Table { .. } => return None,
        })
    }

    /// Exact supremum and infimum over `n ≥ 1`.
    ///
    /// Every closed form splits into two monotone subsequences (odd and even
    /// indices), so extremes are attained at the first terms or approached
    /// at the limits.
    pub fn extremes(&self) -> Extremes {
        self.extremes_from(1)
    }

    /// Exact supremum and infimum over `n ≥ from`.
    pub fn extremes_from(&self, from: i64) -> Extremes {
        let from = from.max(1);
        if let SequenceKind::Table { start, values, .. } = &self.kind {
            let skip = (from - start).max(0) as usize;
            let mut vals: Vec<f64> = values.iter().skip(skip).copied().collect();
            // past the end the table is zero
            vals.push(0.0);
            let sup = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let inf = vals.iter().copied().fold(f64::INFINITY, f64::min);
            return Extremes {
                sup,
                inf,
                sup_attained: true,
                inf_attained: true,
                limit: Some(0.0),
            };
        }
        let (lim_odd, lim_even) = self.parity_limits().expect("closed form");
        let first_a = self.eval(from).expect("n >= 1");
        let first_b = self.eval(from + 1).expect("n >= 1");
        let firsts_max = first_a.max(first_b);
        let firsts_min = first_a.min(first_b);
        let sup = firsts_max.max(lim_odd).max(lim_even);
        let inf = firsts_min.min(lim_odd).min(lim_even);
        Extremes {
            sup,
            inf,
            sup_attained: sup.is_finite() && sup == firsts_max,
            inf_attained: inf.is_finite() && inf == firsts_min,
            limit: (lim_odd == lim_even).then_some(lim_odd),
        }
    }
}
