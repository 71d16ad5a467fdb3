//! Pointwise ingredients of the coercivity arguments: numerical-range angles,
//! `theta`, admissible `beta`, `mu` profiles and sector inequalities.
//!
//! Everything here is a sampled certificate, not a proof.

mod mu;
mod numrange;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mu::{build_mu_profile, MuCheck, MuParams, MuProfile, MuVariant};
pub use numrange::{
    arg_extrema, numerical_range_arg_extrema, random_unit_vectors, AngleReport, ArgExtrema, PointAngles,
};

use crate::background::{BackgroundModel, Point, SamplingSpec};
use crate::math::{cis, cos, dot, hermitian_eigen, sin, tan, CMat3, Vec3, I, PI};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagError {
    #[error("omega != 0 required")]
    OmegaZero,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("inconsistent targets: {0}")]
    Inconsistent(String),
}

/// Entrywise conjugate for `omega < 0`, so that all angle statements can be
/// made for the upper half plane. The numerical range of the entrywise
/// conjugate is the mirror image of the original range.
fn mirrored(m: CMat3, sign_omega: f64) -> CMat3 {
    if sign_omega < 0.0 {
        let mut c = m;
        for row in c.0.iter_mut() {
            for z in row.iter_mut() {
                *z = z.conj();
            }
        }
        c
    } else {
        m
    }
}

/// `i omega gamma I + m1` at `x`.
pub fn damped_m1(model: &BackgroundModel, x: &Vec3) -> CMat3 {
    let s = model.derived_coefficients(Point::At(*x));
    s.m1.to_complex().add(&CMat3::scalar(I * (model.omega * s.gamma)))
}

/// `i omega gamma I + m2` at `x`.
pub fn damped_m2(model: &BackgroundModel, x: &Vec3) -> CMat3 {
    let s = model.derived_coefficients(Point::At(*x));
    s.m2.add(&CMat3::scalar(I * (model.omega * s.gamma)))
}

/// Sample points: radii in `(lo, hi]` along `+z`, or along each of the
/// sampling directions when the field is not rotation invariant.
fn sample_points(sampling: &SamplingSpec, lo: f64, hi: f64, isotropic: bool, max_radii: usize) -> Vec<Vec3> {
    let radii = sampling.radii(lo, hi, max_radii);
    if isotropic {
        radii.iter().map(|r| [0.0, 0.0, *r]).collect()
    } else {
        let dirs = sampling.sphere_directions();
        radii
            .iter()
            .flat_map(|r| dirs.iter().map(move |d| [d[0] * r, d[1] * r, d[2] * r]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport {
    pub theta: f64,
    /// `sup_x |sup arg numran(i omega gamma + m1)|` after mirroring by
    /// `sign(omega)`.
    pub max_abs_sup_arg: f64,
    pub attaining_point: Vec3,
    pub inf_arg: f64,
    /// Some point has `|inf arg| > |sup arg|`.
    pub inf_dominates: bool,
    pub mirrored: bool,
    pub points: usize,
    pub directions: usize,
    pub seed: u64,
}

/// `theta = max(0, sup_{x in B_r2} |sup arg numran(i omega gamma + m1)| - pi/2)`.
///
/// The background profiles are radial, so `m1(x)` is unitarily similar to
/// its value on the `+z` axis and the range only depends on `|x|`.
pub fn compute_theta(model: &BackgroundModel, sampling: &SamplingSpec) -> Result<ThetaReport, DiagError> {
    if model.omega == 0.0 {
        return Err(DiagError::OmegaZero);
    }
    let s = model.sign_omega();
    let points = sample_points(sampling, 0.0, model.r2, true, usize::MAX);
    let rep = numerical_range_arg_extrema(
        |x| mirrored(damped_m1(model, x), s),
        &points,
        sampling.directions,
        sampling.seed,
    );
    Ok(ThetaReport {
        theta: rep.theta,
        max_abs_sup_arg: rep.max_abs_sup_arg,
        attaining_point: rep.max_abs_sup_arg_point,
        inf_arg: rep.inf_arg,
        inf_dominates: rep.inf_dominates,
        mirrored: s < 0.0,
        points: points.len(),
        directions: sampling.directions,
        seed: sampling.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsonicReport {
    pub theta: f64,
    /// `sup |b / c_s|^2`.
    pub sup_mach_sq: f64,
    pub attaining_point: Vec3,
    /// `1 / (1 + tan^2 theta)`.
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// `||b / c_s||_inf^2 < 1 / (1 + tan^2 theta)` on samples.
pub fn check_subsonic(model: &BackgroundModel, theta: f64, sampling: &SamplingSpec) -> SubsonicReport {
    let bound = 1.0 / (1.0 + tan(theta) * tan(theta));
    let mut sup = 0.0;
    let mut at = [0.0; 3];
    if !model.b.is_zero() {
        let hi = model.b.support_radius().unwrap_or(sampling.r_max(model)).min(sampling.r_max(model));
        for x in sample_points(sampling, 0.0, hi, false, usize::MAX) {
            let b = model.b.velocity(&x);
            let c = model.cs.value(crate::math::norm(&x));
            let m = dot(&b, &b) / (c * c);
            if m > sup {
                sup = m;
                at = x;
            }
        }
    }
    SubsonicReport {
        theta,
        sup_mach_sq: sup,
        attaining_point: at,
        bound,
        margin: bound - sup,
        pass: sup < bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaVariant {
    Cowling,
    Full,
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaReport {
    pub variant: BetaVariant,
    /// Open interval in which `beta` must lie.
    pub interval: [f64; 2],
    /// Selected angle, `None` when no grid angle has a positive margin.
    pub beta: Option<f64>,
    /// Margin at `beta`, or the best margin found.
    pub margin: f64,
    pub best_beta: f64,
    pub grid: usize,
    pub gamma_min: f64,
    /// Sampled `sup ||m2(x)||_2`, for the norm-based variants.
    pub norm_m2: Option<f64>,
    pub caveat: Option<String>,
}

/// `Re(e^{-i beta}(|omega| gamma_min - i N)) = |omega| gamma_min cos(beta) - N sin(beta)`.
pub fn norm_beta_margin(beta: f64, omega_gamma: f64, norm_m2: f64) -> f64 {
    omega_gamma * cos(beta) - norm_m2 * sin(beta)
}

/// `min Re(i s e^{-i beta s} numran A)` for `s = sign(omega)`.
pub fn coupled_beta_margin(beta: f64, sign_omega: f64, inv: &CMat3) -> f64 {
    let c = I * sign_omega * cis(-beta * sign_omega);
    hermitian_eigen(&inv.scale(c)).values[0]
}

/// Picks the angle on a uniform grid of `sampling.beta_grid` points in the
/// open admissible interval that maximizes the margin.
pub fn select_beta(
    model: &BackgroundModel,
    variant: BetaVariant,
    sampling: &SamplingSpec,
) -> Result<BetaReport, DiagError> {
    if model.omega == 0.0 {
        return Err(DiagError::OmegaZero);
    }
    let n = sampling.beta_grid.max(1);
    let s = model.sign_omega();
    let r_max = sampling.r_max(model);
    let isotropic = model.rotation == [0.0; 3];
    let gamma_min = sampling
        .radii(0.0, r_max, usize::MAX)
        .iter()
        .map(|r| model.gamma.value(*r))
        .fold(f64::INFINITY, f64::min);
    let grid = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64).collect() };

    type Scan = ([f64; 2], Vec<(f64, f64)>, Option<f64>, Option<String>);
    let (interval, margins, norm_m2, caveat): Scan =
        match variant {
            BetaVariant::Cowling | BetaVariant::Full => {
                let lo = if variant == BetaVariant::Full { model.r2 } else { 0.0 };
                let norm = sample_points(sampling, lo, r_max, isotropic, usize::MAX)
                    .iter()
                    .map(|x| model.derived_coefficients(Point::At(*x)).m2.spectral_norm())
                    .fold(0.0, f64::max);
                let wg = model.omega.abs() * gamma_min;
                let ms = grid(0.0, PI / 2.0).into_iter().map(|b| (b, norm_beta_margin(b, wg, norm))).collect();
                let caveat = if variant == BetaVariant::Full {
                    Some(String::from(
                        "QQ* contribution omitted; norm of m2 sampled over the atmosphere only",
                    ))
                } else {
                    None
                };
                ([0.0, PI / 2.0], ms, Some(norm), caveat)
            }
            BetaVariant::Coupled => {
                let mut inverses: Vec<CMat3> = Vec::new();
                let mut singular = false;
                for x in sample_points(sampling, model.r2, r_max, isotropic, sampling.coupled_radii) {
                    let a = damped_m2(model, &x);
                    match a.inverse() {
                        Some(inv) => {
                            if inverses.last() != Some(&inv) {
                                inverses.push(inv);
                            }
                        }
                        None => singular = true,
                    }
                }
                let ms = grid(-PI / 2.0, 0.0)
                    .into_iter()
                    .map(|b| {
                        let m = if singular {
                            f64::NEG_INFINITY
                        } else {
                            inverses.iter().map(|inv| coupled_beta_margin(b, s, inv)).fold(f64::INFINITY, f64::min)
                        };
                        (b, m)
                    })
                    .collect();
                let caveat = if singular {
                    Some(String::from("m2 + i omega gamma singular at a sample point"))
                } else {
                    None
                };
                ([-PI / 2.0, 0.0], ms, None, caveat)
            }
        };
    let (best_beta, best) = margins
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (b, m)| if m > acc.1 { (b, m) } else { acc });
    let admissible = best > 0.0 && gamma_min > 0.0;
    Ok(BetaReport {
        variant,
        interval,
        beta: admissible.then_some(best_beta),
        margin: best,
        best_beta,
        grid: n,
        gamma_min,
        norm_m2,
        caveat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorReport {
    pub theta: f64,
    pub tau: f64,
    /// `pi/2 - sup |sign(omega) arg(e^{-i(theta+tau+mu) sign(omega)} numran(i omega gamma + m2))|`
    /// over samples in the complement of `B_r1`.
    pub worst_margin: f64,
    pub worst_point: Vec3,
    pub points: usize,
    pub pass: bool,
}

/// Checks that `sign(omega) arg(e^{-i(theta+tau+mu(|x|)) sign(omega)} xi^H (i omega gamma + m2(x)) xi)`
/// lies in `(-pi/2, pi/2)` for sampled `x` with `|x| > r1` and all unit `xi`.
pub fn pointwise_sector_check(
    model: &BackgroundModel,
    mu: &MuProfile,
    theta: f64,
    tau: f64,
    sampling: &SamplingSpec,
) -> Result<SectorReport, DiagError> {
    if !(theta + tau < PI / 2.0) {
        return Err(DiagError::Precondition(String::from("theta + tau < pi/2 required")));
    }
    if model.omega == 0.0 {
        return Err(DiagError::OmegaZero);
    }
    let s = model.sign_omega();
    let extra = random_unit_vectors(sampling.directions, sampling.seed);
    let points = sample_points(
        sampling,
        model.r1,
        sampling.r_max(model),
        model.rotation == [0.0; 3],
        usize::MAX,
    );
    let mut worst = f64::INFINITY;
    let mut worst_point = [0.0; 3];
    let mut last: Option<(CMat3, f64)> = None;
    for x in &points {
        let rot = cis(-(theta + tau + mu.eval(crate::math::norm(x))));
        let m = mirrored(damped_m2(model, x), s).scale(rot);
        let margin = match &last {
            Some((lm, v)) if *lm == m => *v,
            _ => {
                let e = arg_extrema(&m, &extra);
                let v = PI / 2.0 - e.sup_arg.abs().max(e.inf_arg.abs());
                last = Some((m, v));
                v
            }
        };
        if margin < worst {
            worst = margin;
            worst_point = *x;
        }
    }
    Ok(SectorReport {
        theta,
        tau,
        worst_margin: worst,
        worst_point,
        points: points.len(),
        pass: worst > 0.0,
    })
}
