//! Phase profiles `mu(r)` and the multiplier `sigma = exp(i mu sign(omega))`.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::DiagError;
use crate::calculus::bump::smooth_step;
use crate::math::{cis, norm, Vec3, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MuVariant {
    /// Zero inside `B_r1`, non-decreasing, `mu_star` beyond `r2`.
    Cowling,
    /// Zero inside `B_r1`, rises to `mu_r2` at `r2`, falls to `mu_star` at
    /// `r3` and stays there.
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuParams {
    pub r1: f64,
    pub r2: f64,
    #[serde(default)]
    pub r3: Option<f64>,
    /// Peak value at `r2`; coupled variant only.
    #[serde(default)]
    pub mu_r2: Option<f64>,
    pub mu_star: f64,
    /// `sign(omega)`, `+1` or `-1`.
    #[serde(default = "one")]
    pub sign_omega: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuProfile {
    pub variant: MuVariant,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub mu_r2: f64,
    pub mu_star: f64,
    pub sign_omega: f64,
}

fn in_open_0_pi(v: f64) -> bool {
    v > 0.0 && v < PI
}

pub fn build_mu_profile(params: MuParams, variant: MuVariant) -> Result<MuProfile, DiagError> {
    let MuParams {
        r1,
        r2,
        r3,
        mu_r2,
        mu_star,
        sign_omega,
    } = params;
    if !(r1 > 0.0 && r2 > r1) {
        return Err(DiagError::Inconsistent("radii must satisfy 0 < r1 < r2".into()));
    }
    if !in_open_0_pi(mu_star) {
        return Err(DiagError::Inconsistent("mu_star must lie in (0, pi)".into()));
    }
    let sign_omega = if sign_omega < 0.0 { -1.0 } else { 1.0 };
    match variant {
        MuVariant::Cowling => Ok(MuProfile {
            variant,
            r1,
            r2,
            r3: r2,
            mu_r2: mu_star,
            mu_star,
            sign_omega,
        }),
        MuVariant::Coupled => {
            let r3 = r3.ok_or_else(|| DiagError::Inconsistent("coupled variant needs r3".into()))?;
            if !(r3 > r2) {
                return Err(DiagError::Inconsistent("radii must satisfy r2 < r3".into()));
            }
            let mu_r2 = mu_r2.ok_or_else(|| DiagError::Inconsistent("coupled variant needs mu(r2)".into()))?;
            if !in_open_0_pi(mu_r2) {
                return Err(DiagError::Inconsistent("mu(r2) must lie in (0, pi)".into()));
            }
            if mu_star > mu_r2 {
                return Err(DiagError::Inconsistent(
                    "mu_star > mu(r2) contradicts mu non-increasing on (r2, r3)".into(),
                ));
            }
            Ok(MuProfile {
                variant,
                r1,
                r2,
                r3,
                mu_r2,
                mu_star,
                sign_omega,
            })
        }
    }
}

impl MuProfile {
    pub fn eval(&self, r: f64) -> f64 {
        if r <= self.r1 {
            return 0.0;
        }
        if r < self.r2 {
            return self.mu_r2 * smooth_step((r - self.r1) / (self.r2 - self.r1));
        }
        match self.variant {
            MuVariant::Cowling => self.mu_star,
            MuVariant::Coupled => {
                if r >= self.r3 {
                    self.mu_star
                } else {
                    let t = smooth_step((r - self.r2) / (self.r3 - self.r2));
                    self.mu_r2 + (self.mu_star - self.mu_r2) * t
                }
            }
        }
    }

    pub fn sigma(&self, x: &Vec3) -> Complex64 {
        cis(self.eval(norm(x)) * self.sign_omega)
    }

    pub fn sigma_star(&self) -> Complex64 {
        cis(self.mu_star * self.sign_omega)
    }

    /// Checks every listed property on `samples` equispaced radii in
    /// `[0, r_end + (r_end - r1)]`, plus exact endpoint values.
    pub fn verify(&self, samples: usize) -> MuCheck {
        let r_end = match self.variant {
            MuVariant::Cowling => self.r2,
            MuVariant::Coupled => self.r3,
        };
        let hi = r_end + (r_end - self.r1);
        let radii: Vec<f64> = (0..samples).map(|i| hi * i as f64 / (samples - 1) as f64).collect();
        let mut v = MuCheck {
            samples,
            ..MuCheck::default()
        };
        let mut prev: Option<(f64, f64)> = None;
        for &r in &radii {
            let m = self.eval(r);
            if !(0.0..PI).contains(&m) {
                v.range_violations += 1;
            }
            if r <= self.r1 && m != 0.0 {
                v.zero_violations += 1;
            }
            if r >= r_end && m != self.mu_star {
                v.plateau_violations += 1;
            }
            if let Some((pr, pm)) = prev {
                let rising = match self.variant {
                    MuVariant::Cowling => true,
                    MuVariant::Coupled => r <= self.r2,
                };
                let falling = self.variant == MuVariant::Coupled && pr >= self.r2 && r <= self.r3;
                if rising && m < pm {
                    v.monotonicity_violations += 1;
                }
                if falling && m > pm {
                    v.monotonicity_violations += 1;
                }
            }
            prev = Some((r, m));
        }
        v.value_at_r1 = self.eval(self.r1);
        v.value_at_r2 = self.eval(self.r2);
        v.value_at_r3 = self.eval(self.r3);
        v.endpoints_exact = v.value_at_r1 == 0.0
            && v.value_at_r2 == self.mu_r2
            && v.value_at_r3 == self.mu_star
            && self.eval(hi) == self.mu_star;
        v.pass = v.endpoints_exact
            && v.range_violations == 0
            && v.zero_violations == 0
            && v.plateau_violations == 0
            && v.monotonicity_violations == 0;
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MuCheck {
    pub samples: usize,
    pub value_at_r1: f64,
    pub value_at_r2: f64,
    pub value_at_r3: f64,
    pub endpoints_exact: bool,
    pub range_violations: usize,
    pub zero_violations: usize,
    pub plateau_violations: usize,
    pub monotonicity_violations: usize,
    pub pass: bool,
}
