//! Analytic envelopes `c · n^α · ρ^n` used to bound infinite tails.
//!
//! An [`Envelope`] is a finite sum of such terms, valid from some index on.
//! Envelopes are closed under sums, products and positive powers, and their
//! tail sums have closed-form upper bounds, which is all the series module
//! needs to turn a truncated sum into a rigorous enclosure.

use crate::error::{Error, Result};

/// Nonnegative term `c · n^alpha · rho^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerGeometric {
    pub c: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl PowerGeometric {
    pub fn new(c: f64, alpha: f64, rho: f64) -> Self {
        debug_assert!(c >= 0.0 && rho >= 0.0);
        Self { c, alpha, rho }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(c, 0.0, 1.0)
    }

    pub fn eval(&self, n: i64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let n = n as f64;
        self.c * n.powf(self.alpha) * self.rho.powf(n)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(
            self.c * other.c,
            self.alpha + other.alpha,
            self.rho * other.rho,
        )
    }

    pub fn powf(&self, p: f64) -> Self {
        Self::new(self.c.powf(p), self.alpha * p, self.rho.powf(p))
    }

    pub fn is_summable(&self) -> bool {
        self.c == 0.0 || self.rho < 1.0 || (self.rho == 1.0 && self.alpha < -1.0)
    }

    /// Ratio bound `ρ (1 + 1/n)^α` between consecutive terms from `n` on.
    fn ratio_bound(&self, n: i64) -> f64 {
        if self.alpha <= 0.0 {
            self.rho
        } else {
            self.rho * (1.0 + 1.0 / n as f64).powf(self.alpha)
        }
    }

    /// Upper bound for `Σ_{t≥n} term(t)`.
    ///
    /// Returns `Ok(None)` when the ratio bound is not yet below one at `n`
    /// (a larger `n` will work) and an error for non-summable terms.
    pub fn tail_sum(&self, n: i64) -> Result<Option<f64>> {
        if self.c == 0.0 {
            return Ok(Some(0.0));
        }
        if !self.is_summable() {
            return Err(Error::Divergent(format!(
                "term {}·n^{}·{}^n is not summable",
                self.c, self.alpha, self.rho
            )));
        }
        let n = n.max(1);
        if self.rho < 1.0 {
            let theta = self.ratio_bound(n);
            if theta >= 1.0 {
                return Ok(None);
            }
            Ok(Some(self.eval(n) / (1.0 - theta)))
        } else {
            // decreasing power: g(n) + ∫_n^∞ g
            let nf = n as f64;
            let e = -self.alpha - 1.0;
            Ok(Some(
                self.c * (nf.powf(self.alpha) + nf.powf(self.alpha + 1.0) / e),
            ))
        }
    }

    /// First index from which [`tail_sum`](Self::tail_sum) is available.
    pub fn tail_start(&self) -> i64 {
        if self.c == 0.0 || self.rho >= 1.0 || self.alpha <= 0.0 || self.rho == 0.0 {
            return 1;
        }
        let threshold = self.alpha / (-self.rho.ln());
        let mut n = (threshold.floor() as i64 + 1).max(1);
        while self.ratio_bound(n) >= 1.0 {
            n += 1;
        }
        n
    }

    /// Envelope of `N ↦ Σ_{t≥N} term(t)`, valid for `N ≥ from`.
    pub fn tail_term(&self, from: i64) -> Result<Self> {
        if self.c == 0.0 {
            return Ok(*self);
        }
        if !self.is_summable() {
            return Err(Error::Divergent(format!(
                "term {}·n^{}·{}^n is not summable",
                self.c, self.alpha, self.rho
            )));
        }
        if self.rho < 1.0 {
            let theta = self.ratio_bound(from.max(1));
            debug_assert!(theta < 1.0);
            Ok(Self::new(self.c / (1.0 - theta), self.alpha, self.rho))
        } else {
            let e = -self.alpha - 1.0;
            // n^α ≤ n^{α+1} for n ≥ 1
            Ok(Self::new(self.c * (1.0 + 1.0 / e), self.alpha + 1.0, 1.0))
        }
    }
}

/// Upper envelope `Σ_i c_i n^{α_i} ρ_i^n`, valid for `n ≥ from`.
///
/// An empty term list means the bounded quantity vanishes from `from` on
/// (finite support).
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub terms: Vec<PowerGeometric>,
    pub from: i64,
}

impl Envelope {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            from: 1,
        }
    }

    /// Zero for every index `≥ from`.
    pub fn vanishing_from(from: i64) -> Self {
        Self {
            terms: Vec::new(),
            from: from.max(1),
        }
    }

    pub fn single(term: PowerGeometric) -> Self {
        Self::from_terms(vec![term], 1)
    }

    pub fn from_terms(terms: Vec<PowerGeometric>, from: i64) -> Self {
        let terms = terms.into_iter().filter(|t| t.c != 0.0).collect();
        Self {
            terms,
            from: from.max(1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, n: i64) -> f64 {
        debug_assert!(n >= self.from);
        self.terms.iter().map(|t| t.eval(n)).sum()
    }

    pub fn scale(&self, k: f64) -> Self {
        let k = k.abs();
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| PowerGeometric::new(t.c * k, t.alpha, t.rho))
                .collect(),
            self.from,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms, self.from.max(other.from))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let terms = self
            .terms
            .iter()
            .flat_map(|a| other.terms.iter().map(move |b| a.mul(b)))
            .collect();
        Self::from_terms(terms, self.from.max(other.from))
    }

    /// Envelope of the `p`-th power, using `(Σ g_i)^p ≤ m^{p-1} Σ g_i^p`.
    pub fn powf(&self, p: f64) -> Self {
        let m = self.terms.len().max(1) as f64;
        let k = m.powf(p - 1.0);
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let q = t.powf(p);
                    PowerGeometric::new(q.c * k, q.alpha, q.rho)
                })
                .collect(),
            self.from,
        )
    }

    pub fn is_summable(&self) -> bool {
        self.terms.iter().all(PowerGeometric::is_summable)
    }

    /// Smallest index at which [`tail_sum`](Self::tail_sum) is guaranteed to succeed.
    pub fn tail_start(&self) -> i64 {
        self.terms
            .iter()
            .map(PowerGeometric::tail_start)
            .max()
            .unwrap_or(1)
            .max(self.from)
    }

    /// Upper bound for the tail sum from `n`; `Ok(None)` if `n` is too small.
    pub fn tail_sum(&self, n: i64) -> Result<Option<f64>> {
        if n < self.from {
            // still check divergence so callers can fail fast
            if !self.is_summable() {
                self.terms
                    .iter()
                    .try_for_each(|t| t.tail_sum(n).map(|_| ()))?;
            }
            return Ok(None);
        }
        let mut total = 0.0;
        for t in &self.terms {
            match t.tail_sum(n)? {
                Some(v) => total += v,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    /// Envelope of `N ↦ Σ_{t≥N} g(t)`.
    pub fn tail(&self) -> Result<Self> {
        let from = self.tail_start();
        let terms = self
            .terms
            .iter()
            .map(|t| t.tail_term(from))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_terms(terms, from))
    }
}

/// Lower bound `c · n^α · ρ^n` (with `c > 0`) valid for `n ≥ from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub term: PowerGeometric,
    pub from: i64,
}

impl LowerBound {
    pub fn new(c: f64, alpha: f64, rho: f64, from: i64) -> Option<Self> {
        (c > 0.0 && rho > 0.0).then(|| Self {
            term: PowerGeometric::new(c, alpha, rho),
            from: from.max(1),
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            term: self.term.mul(&other.term),
            from: self.from.max(other.from),
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        Self {
            term: self.term.powf(p),
            from: self.from,
        }
    }

    /// True when the bounded (nonnegative) series certainly diverges.
    pub fn diverges(&self) -> bool {
        self.term.rho > 1.0 || (self.term.rho == 1.0 && self.term.alpha >= -1.0)
    }
}
