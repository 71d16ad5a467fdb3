//! Radial profiles `f(r)` with first and second derivatives.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::math::exp;

/// Interpolation scheme of a tabulated profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    /// Fritsch-Carlson monotone cubic Hermite; C1, no overshoot.
    #[default]
    MonotoneCubic,
}

/// `(f, f', f'')` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn constant(value: f64) -> Self {
        Self { value, d1: 0.0, d2: 0.0 }
    }
}

/// A scalar function of `r = |x|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialProfile {
    Constant {
        value: f64,
    },
    /// `scale * exp(-rate * r)`.
    Exponential {
        scale: f64,
        rate: f64,
    },
    /// `sum_k coeffs[k] r^k`.
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// Piecewise interpolant through `(r[i], values[i])`, constant outside
    /// the grid.
    Tabulated {
        r: Vec<f64>,
        values: Vec<f64>,
        #[serde(default)]
        interpolation: Interpolation,
        /// Hermite slopes; filled by [`RadialProfile::prepare`].
        #[serde(skip)]
        slopes: Vec<f64>,
    },
}

impl RadialProfile {
    pub fn constant(value: f64) -> Self {
        RadialProfile::Constant { value }
    }

    pub fn exponential(scale: f64, rate: f64) -> Self {
        RadialProfile::Exponential { scale, rate }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        RadialProfile::Polynomial { coeffs }
    }

    pub fn tabulated(r: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self, ModelError> {
        let mut p = RadialProfile::Tabulated {
            r,
            values,
            interpolation,
            slopes: Vec::new(),
        };
        p.prepare("profile")?;
        Ok(p)
    }

    /// Checks the grid and precomputes interpolation slopes.
    pub fn prepare(&mut self, name: &str) -> Result<(), ModelError> {
        match self {
            RadialProfile::Tabulated {
                r,
                values,
                interpolation,
                slopes,
            } => {
                if r.len() != values.len() || r.len() < 2 {
                    return Err(ModelError::InvalidProfile {
                        profile: String::from(name),
                        reason: String::from("tabulated profile needs at least two (r, value) pairs of equal length"),
                    });
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(ModelError::NonMonotoneGrid {
                        profile: String::from(name),
                    });
                }
                if r.iter().chain(values.iter()).any(|v| !v.is_finite()) {
                    return Err(ModelError::InvalidProfile {
                        profile: String::from(name),
                        reason: String::from("non-finite table entry"),
                    });
                }
                *slopes = match interpolation {
                    Interpolation::Linear => Vec::new(),
                    Interpolation::MonotoneCubic => fritsch_carlson(r, values),
                };
                Ok(())
            }
            RadialProfile::Constant { value } => finite(name, &[*value]),
            RadialProfile::Exponential { scale, rate } => finite(name, &[*scale, *rate]),
            RadialProfile::Polynomial { coeffs } => finite(name, coeffs),
        }
    }

    /// True when second derivatives come from an interpolant rather than a
    /// closed form.
    pub fn is_low_trust(&self) -> bool {
        matches!(self, RadialProfile::Tabulated { .. })
    }

    pub fn is_constant(&self) -> bool {
        match self {
            RadialProfile::Constant { .. } => true,
            RadialProfile::Exponential { scale, rate } => *scale == 0.0 || *rate == 0.0,
            RadialProfile::Polynomial { coeffs } => coeffs.iter().skip(1).all(|c| *c == 0.0),
            RadialProfile::Tabulated { .. } => false,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.jet(r).value
    }

    pub fn jet(&self, r: f64) -> Jet {
        match self {
            RadialProfile::Constant { value } => Jet::constant(*value),
            RadialProfile::Exponential { scale, rate } => {
                let v = scale * exp(-rate * r);
                Jet {
                    value: v,
                    d1: -rate * v,
                    d2: rate * rate * v,
                }
            }
            RadialProfile::Polynomial { coeffs } => {
                // Horner for f, f', f''.
                let mut f = 0.0;
                let mut d1 = 0.0;
                let mut d2 = 0.0;
                for c in coeffs.iter().rev() {
                    d2 = d2 * r + 2.0 * d1;
                    d1 = d1 * r + f;
                    f = f * r + c;
                }
                Jet { value: f, d1, d2 }
            }
            RadialProfile::Tabulated {
                r: grid,
                values,
                interpolation,
                slopes,
            } => tabulated_jet(grid, values, *interpolation, slopes, r),
        }
    }
}

fn finite(name: &str, v: &[f64]) -> Result<(), ModelError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::InvalidProfile {
            profile: String::from(name),
            reason: String::from("non-finite parameter"),
        })
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = alloc::vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        m[i] = if delta[i - 1] * delta[i] <= 0.0 {
            0.0
        } else {
            0.5 * (delta[i - 1] + delta[i])
        };
    }
    for i in 0..n - 1 {
        if delta[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / delta[i];
        let b = m[i + 1] / delta[i];
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / crate::math::sqrt(s);
            m[i] = t * a * delta[i];
            m[i + 1] = t * b * delta[i];
        }
    }
    m
}

fn tabulated_jet(x: &[f64], y: &[f64], interp: Interpolation, m: &[f64], r: f64) -> Jet {
    let n = x.len();
    if r <= x[0] {
        return Jet::constant(y[0]);
    }
    if r >= x[n - 1] {
        return Jet::constant(y[n - 1]);
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&r)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    };
    let h = x[i + 1] - x[i];
    let t = (r - x[i]) / h;
    match interp {
        Interpolation::Linear => Jet {
            value: y[i] + t * (y[i + 1] - y[i]),
            d1: (y[i + 1] - y[i]) / h,
            d2: 0.0,
        },
        Interpolation::MonotoneCubic => {
            let (t2, t3) = (t * t, t * t * t);
            let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
            let h10 = t3 - 2.0 * t2 + t;
            let h01 = -2.0 * t3 + 3.0 * t2;
            let h11 = t3 - t2;
            let d00 = 6.0 * t2 - 6.0 * t;
            let d10 = 3.0 * t2 - 4.0 * t + 1.0;
            let d01 = -6.0 * t2 + 6.0 * t;
            let d11 = 3.0 * t2 - 2.0 * t;
            let s00 = 12.0 * t - 6.0;
            let s10 = 6.0 * t - 4.0;
            let s01 = -12.0 * t + 6.0;
            let s11 = 6.0 * t - 2.0;
            Jet {
                value: h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1],
                d1: (d00 * y[i] + d01 * y[i + 1]) / h + d10 * m[i] + d11 * m[i + 1],
                d2: (s00 * y[i] + s01 * y[i + 1]) / (h * h) + (s10 * m[i] + s11 * m[i + 1]) / h,
            }
        }
    }
}
