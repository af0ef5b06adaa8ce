use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// The nonlinearity `f` of the right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `slope · x + intercept`
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// `amplitude · sin(scale · x)^power`
    SinePower {
        power: u32,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `Σ coeffs[i] · x^i`
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise-linear interpolation through `(xs[i], ys[i])`, clamped to
    /// the end values outside `[xs[0], xs[last]]`.
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

/// A local bound `|f| ≤ q`, `Lip(f) ≤ l` on `[-m, m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalBound {
    pub m: f64,
    pub q: f64,
    pub l: f64,
}

/// User-supplied bounds overriding the analytic ones.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionMeta {
    /// Global bound `|f(x)| ≤ P` for all `x`.
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub global_bound: Option<f64>,
    /// Bounds valid on `[-m, m]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local: Vec<LocalBound>,
}

/// Max of `|sin^{k-1}θ · cos θ|` over `θ ∈ [0, big_theta]`.
fn sine_power_slope(k: u32, big_theta: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let peak = ((k - 1) as f64).sqrt().atan();
    let theta = big_theta.min(peak);
    // increasing on [0, peak]
    (theta.sin().powi(k as i32 - 1) * theta.cos()).abs()
}

impl FunctionSpec {
    pub fn linear(slope: f64) -> Self {
        Self::Linear {
            slope,
            intercept: 0.0,
        }
    }

    pub fn sine_power(power: u32) -> Self {
        Self::SinePower {
            power,
            scale: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn zero() -> Self {
        Self::Linear {
            slope: 0.0,
            intercept: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Linear { slope, intercept } if !slope.is_finite() || !intercept.is_finite() => {
                Err(Error::Invalid(
                    "linear f has non-finite coefficients".into(),
                ))
            }
            Self::SinePower {
                scale, amplitude, ..
            } if !scale.is_finite() || !amplitude.is_finite() => Err(Error::Invalid(
                "sine-power f has non-finite parameters".into(),
            )),
            Self::Polynomial { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => Err(
                Error::Invalid("polynomial f has non-finite coefficients".into()),
            ),
            Self::Table { xs, ys } => {
                if xs.is_empty() || xs.len() != ys.len() {
                    return Err(Error::Invalid(
                        "f table needs equally many xs and ys (at least one)".into(),
                    ));
                }
                if xs.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Invalid(
                        "f table xs must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Linear { slope, intercept } => slope * x + intercept,
            Self::SinePower {
                power,
                scale,
                amplitude,
            } => amplitude * (scale * x).sin().powi(*power as i32),
            Self::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Self::Table { xs, ys } => {
                let last = xs.len() - 1;
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= xs[last] {
                    return ys[last];
                }
                let i = xs.partition_point(|v| *v <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                ys[i] + t * (ys[i + 1] - ys[i])
            }
        }
    }

    /// Global bound `sup |f|`, if `f` is bounded.
    pub fn global_bound(&self) -> Option<f64> {
        match self {
            Self::Linear { slope, intercept } => (*slope == 0.0).then_some(intercept.abs()),
            Self::SinePower { amplitude, .. } => Some(amplitude.abs()),
            Self::Polynomial { coeffs } => {
                let degree = coeffs.iter().rposition(|c| *c != 0.0);
                match degree {
                    None => Some(0.0),
                    Some(0) => Some(coeffs[0].abs()),
                    Some(_) => None,
                }
            }
            Self::Table { ys, .. } => Some(ys.iter().fold(0.0_f64, |m, y| m.max(y.abs()))),
        }
    }

    /// Analytic `(Q, L)` with `|f| ≤ Q` and `Lip(f) ≤ L` on `[-m, m]`.
    pub fn local_bounds(&self, m: f64) -> (f64, f64) {
        match self {
            Self::Linear { slope, intercept } => (intercept.abs() + slope.abs() * m, slope.abs()),
            Self::SinePower {
                power,
                scale,
                amplitude,
            } => {
                let big_theta = scale.abs() * m;
                let s_max = if big_theta >= FRAC_PI_2 {
                    1.0
                } else {
                    big_theta.sin()
                };
                let q = amplitude.abs() * s_max.powi(*power as i32);
                let l = amplitude.abs()
                    * (*power as f64)
                    * scale.abs()
                    * sine_power_slope(*power, big_theta);
                (q, l)
            }
            Self::Polynomial { coeffs } => {
                let q = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.abs() * m.powi(i as i32))
                    .sum();
                let l = coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c.abs() * m.powi(i as i32 - 1))
                    .sum();
                (q, l)
            }
            Self::Table { xs, ys } => {
                let mut q = self.eval(-m).abs().max(self.eval(m).abs());
                let mut l: f64 = 0.0;
                for i in 0..xs.len() {
                    if xs[i].abs() <= m {
                        q = q.max(ys[i].abs());
                    }
                    if i + 1 < xs.len() && xs[i + 1] >= -m && xs[i] <= m {
                        l = l.max(((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).abs());
                    }
                }
                (q, l)
            }
        }
    }
}

/// Dense-grid estimate of `(max |f|, max |Δf/Δx|)` on `[-m, m]` with step
/// `m / 10⁴`, each inflated by the factor 1.1.
pub fn grid_estimate(f: &FunctionSpec, m: f64) -> (f64, f64) {
    const STEPS: usize = 20_000;
    let h = 2.0 * m / STEPS as f64;
    let mut q: f64 = 0.0;
    let mut l: f64 = 0.0;
    let mut prev = f.eval(-m);
    q = q.max(prev.abs());
    for i in 1..=STEPS {
        let x = -m + h * i as f64;
        let v = f.eval(x);
        q = q.max(v.abs());
        l = l.max(((v - prev) / h).abs());
        prev = v;
    }
    (1.1 * q, 1.1 * l)
}
