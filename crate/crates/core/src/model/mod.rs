//! Domain types shared by every other module: coefficient sequences, the
//! nonlinearity, the problem description, finite windows and enclosures.

pub mod envelope;
pub mod function;
pub mod sequence;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use envelope::{Envelope, LowerBound, PowerGeometric};
pub use function::{FunctionMeta, FunctionSpec, LocalBound};
pub use sequence::{
    Extremes, RationalForm, SequenceKind, SequenceSpec, Summability, TailKeyword, TailMajorant,
};

use crate::error::{Error, Result};

/// Interval `[lo, hi]` containing the value of an infinite series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan(), "lo {lo} > hi {hi}");
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Enclosure", 3)?;
        st.serialize_field("lo", &self.lo)?;
        st.serialize_field("hi", &self.hi)?;
        st.serialize_field("width", &self.width())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Enclosure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lo: f64,
            hi: f64,
        }
        let raw = Raw::deserialize(d)?;
        if raw.lo > raw.hi {
            return Err(serde::de::Error::custom("enclosure with lo > hi"));
        }
        Ok(Enclosure::new(raw.lo, raw.hi))
    }
}

/// Finite slice `x_start, …, x_end` of a sequence.
///
/// Indices outside `[start, end]` read as exactly zero, which encodes the
/// zero prefix of the balls the operators work in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: i64,
    pub values: Vec<f64>,
}

impl Window {
    pub fn new(start: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("window must hold at least one value".into()));
        }
        Ok(Self { start, values })
    }

    pub fn zeros(start: i64, len: usize) -> Self {
        Self {
            start,
            values: vec![0.0; len.max(1)],
        }
    }

    pub fn from_fn(start: i64, len: usize, mut f: impl FnMut(i64) -> f64) -> Self {
        Self {
            start,
            values: (0..len.max(1) as i64).map(|i| f(start + i)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.start && n <= self.end()
    }

    pub fn get(&self, n: i64) -> f64 {
        if self.contains(n) {
            self.values[(n - self.start) as usize]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, n: i64, v: f64) {
        let i = (n - self.start) as usize;
        self.values[i] = v;
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.start..=self.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.start + i as i64, *v))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `sup |self - other|` over the union of both index ranges.
    pub fn sup_distance(&self, other: &Window) -> f64 {
        let lo = self.start.min(other.start);
        let hi = self.end().max(other.end());
        (lo..=hi).fold(0.0, |m, n| m.max((self.get(n) - other.get(n)).abs()))
    }

    /// Restrict to `[from, to]` (clipped to the window).
    pub fn slice(&self, from: i64, to: i64) -> Result<Window> {
        let from = from.max(self.start);
        let to = to.min(self.end());
        if from > to {
            return Err(Error::Invalid(format!("empty slice [{from}, {to}]")));
        }
        Ok(Window {
            start: from,
            values: (from..=to).map(|n| self.get(n)).collect(),
        })
    }

    /// Write as CSV with header `n,x`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["n", "x"])?;
        for (n, v) in self.iter() {
            wtr.write_record([n.to_string(), format!("{v:e}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Read a CSV with header `n,x` and consecutive indices.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Window> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "n" || &headers[1] != "x" {
            return Err(Error::Invalid("solution CSV must have header n,x".into()));
        }
        let mut start = None;
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let n: i64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad index {:?}", &rec[0])))?;
            let x: f64 = rec[1]
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("bad value {:?}", &rec[1])))?;
            let s = *start.get_or_insert(n);
            if n != s + values.len() as i64 {
                return Err(Error::Invalid(format!(
                    "solution CSV indices must be consecutive (at n = {n})"
                )));
            }
            values.push(x);
        }
        Window::new(start.unwrap_or(1), values)
    }
}

/// The equation `Δ(r_n Δ(x_n + q_n x_{n-τ})) = a_n f(x_{n-σ}) + b_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub tau: i64,
    pub sigma: i64,
    pub r: SequenceSpec,
    pub a: SequenceSpec,
    pub b: SequenceSpec,
    pub q: SequenceSpec,
    pub f: FunctionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_meta: Option<FunctionMeta>,
}

impl ProblemSpec {
    pub fn beta(&self) -> i64 {
        self.tau.max(self.sigma)
    }

    /// Check the structural invariants.
    pub fn validate(&self) -> Result<()> {
        if self.tau < 0 {
            return Err(Error::Invalid(format!(
                "tau must be nonnegative, got {}",
                self.tau
            )));
        }
        for (field, seq) in [
            ("r", &self.r),
            ("a", &self.a),
            ("b", &self.b),
            ("q", &self.q),
        ] {
            check_finite(field, seq)?;
            if let SequenceKind::Table {
                start,
                values,
                tail_majorant,
            } = &seq.kind
            {
                if *start != 1 {
                    return Err(Error::Invalid(format!(
                        "{field}: tables must start at index 1"
                    )));
                }
                if let Some(TailMajorant::Values(t)) = tail_majorant {
                    check_user_majorant(field, values, t)?;
                }
            }
        }
        if !self.r.never_zero() {
            return Err(Error::Invalid(format!(
                "r: {} vanishes at some index",
                self.r.label()
            )));
        }
        for (field, seq) in [("a", &self.a), ("b", &self.b)] {
            if let SequenceKind::Table {
                tail_majorant: None,
                ..
            } = seq.kind
            {
                return Err(Error::Invalid(format!(
                    "{field}: table used as a coefficient needs a tail majorant"
                )));
            }
        }
        self.f.validate()?;
        if let Some(meta) = &self.f_meta {
            let bad = meta.global_bound.is_some_and(|p| !(p >= 0.0))
                || meta
                    .local
                    .iter()
                    .any(|b| !(b.m > 0.0 && b.q >= 0.0 && b.l >= 0.0));
            if bad {
                return Err(Error::Invalid(
                    "f_meta bounds must be nonnegative (m positive)".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // the field path makes schema errors point at the offending entry
        let mut de = serde_json::Deserializer::from_str(text);
        let spec: ProblemSpec = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| Error::Invalid(format!("at `{}`: {}", e.path(), e.inner())))?;
        de.end()?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem specs always serialize")
    }

    /// Global bound `P` of `f`, user-supplied or analytic.
    pub fn f_global_bound(&self) -> Option<f64> {
        self.f_meta
            .as_ref()
            .and_then(|m| m.global_bound)
            .or_else(|| self.f.global_bound())
    }

    /// `(Q, L)` on `[-m, m]`: the tightest user bound covering `m`, else analytic.
    pub fn f_local_bounds(&self, m: f64) -> (f64, f64) {
        let user = self.f_meta.as_ref().and_then(|meta| {
            meta.local
                .iter()
                .filter(|b| b.m >= m)
                .min_by(|x, y| x.m.total_cmp(&y.m))
                .map(|b| (b.q, b.l))
        });
        user.unwrap_or_else(|| self.f.local_bounds(m))
    }

    /// The auxiliary problem with `q` replaced by `w · q`.
    pub fn with_q_scale(&self, w: f64) -> Self {
        let mut p = self.clone();
        if w != 1.0 {
            p.q = self.q.scaled(w);
        }
        p
    }

    pub fn r_inv(&self, n: i64) -> f64 {
        1.0 / self.r.eval(n).expect("validated r")
    }
}

fn check_finite(field: &str, seq: &SequenceSpec) -> Result<()> {
    let params: Vec<f64> = match &seq.kind {
        SequenceKind::Geometric { c, rho } => vec![*c, *rho],
        SequenceKind::Power { c, alpha } => vec![*c, *alpha],
        SequenceKind::Alternating { c } | SequenceKind::Constant { c } => vec![*c],
        SequenceKind::Rational { c, .. } => vec![*c],
        SequenceKind::OneMinusGeometric { rho, c } => vec![*c, *rho],
        SequenceKind::Table { values, .. } => values.clone(),
    };
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Invalid(format!("{field}: non-finite parameter")));
    }
    Ok(())
}

fn check_user_majorant(field: &str, values: &[f64], majorant: &[f64]) -> Result<()> {
    if majorant.len() != values.len() {
        return Err(Error::Invalid(format!(
            "{field}: tail_majorant must have one entry per table value"
        )));
    }
    let mut suffix = 0.0;
    for i in (0..values.len()).rev() {
        suffix += values[i].abs();
        if majorant[i] < suffix * (1.0 - 1e-12) {
            return Err(Error::Invalid(format!(
                "{field}: tail_majorant[{i}] is below the actual tail"
            )));
        }
        if i + 1 < values.len() && majorant[i] < majorant[i + 1] {
            return Err(Error::Invalid(format!(
                "{field}: tail_majorant must be nonincreasing"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE_1: &str = r#"{"tau":3,"sigma":1,"r":{"kind":"alternating","c":1},"a":{"kind":"geometric","c":0.75,"rho":0.5},"b":{"kind":"constant","c":0},"q":{"kind":"one-minus-geometric","rho":0.5},"f":{"kind":"sine-power","power":6}}"#;

    #[test]
    fn parses_example_problem() {
        let p = ProblemSpec::from_json(EXAMPLE_1).unwrap();
        assert_eq!((p.tau, p.sigma, p.beta()), (3, 1, 3));
        assert_eq!(p.r.eval(3).unwrap(), -1.0);
        assert_eq!(p.q.eval(1).unwrap(), 0.5);
    }

    #[test]
    fn missing_r_is_a_schema_error() {
        let text = EXAMPLE_1.replace(r#""r":{"kind":"alternating","c":1},"#, "");
        let err = ProblemSpec::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("missing field `r`"), "{err}");
    }

    #[test]
    fn rejects_vanishing_r_and_bare_tables() {
        let text = EXAMPLE_1.replace(
            r#""r":{"kind":"alternating","c":1}"#,
            r#""r":{"kind":"constant","c":0}"#,
        );
        assert!(matches!(
            ProblemSpec::from_json(&text),
            Err(Error::Invalid(_))
        ));
        let text = EXAMPLE_1.replace(
            r#""b":{"kind":"constant","c":0}"#,
            r#""b":{"kind":"table","values":[1.0]}"#,
        );
        assert!(matches!(
            ProblemSpec::from_json(&text),
            Err(Error::Invalid(_))
        ));
        let text = EXAMPLE_1.replace(r#""tau":3"#, r#""tau":-1"#);
        assert!(matches!(
            ProblemSpec::from_json(&text),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn window_zero_outside() {
        let w = Window::new(4, vec![1.0, 2.0]).unwrap();
        assert_eq!(w.end(), 5);
        assert_eq!(w.get(3), 0.0);
        assert_eq!(w.get(5), 2.0);
        assert_eq!(w.get(6), 0.0);
        assert!(Window::new(1, vec![]).is_err());
    }

    #[test]
    fn window_csv_round_trip() {
        let w = Window::new(7, vec![0.5, -1.25e-9, 3.0]).unwrap();
        let mut buf = Vec::new();
        w.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("n,x\n7,"));
        assert_eq!(Window::read_csv(buf.as_slice()).unwrap(), w);
    }

    #[test]
    fn user_local_bounds_take_precedence() {
        let mut p = ProblemSpec::from_json(EXAMPLE_1).unwrap();
        p.f_meta = Some(FunctionMeta {
            global_bound: Some(1.0),
            local: vec![LocalBound {
                m: 2.0,
                q: 0.9,
                l: 3.0,
            }],
        });
        assert_eq!(p.f_local_bounds(1.0), (0.9, 3.0));
        assert_eq!(p.f_local_bounds(1.0), (0.9, 3.0));
        assert_eq!(
            p.f_local_bounds(3.0),
            FunctionSpec::sine_power(6).local_bounds(3.0)
        );
    }
}
