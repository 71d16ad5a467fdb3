//! Sampled checks of the standing assumptions on a background model.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{point_jet, BackgroundModel};
use crate::diagnostics::{check_subsonic, compute_theta};
use crate::math::{cross, fibonacci_sphere, norm, scale, Vec3};

/// How suprema and infima are approximated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSpec {
    /// Radial samples per interval.
    pub radial_points: usize,
    /// Random unit vectors in `C^3` per numerical-range evaluation.
    pub directions: usize,
    /// Spatial directions for quantities that are not radially symmetric.
    pub sphere_points: usize,
    /// Outer sampling radius; `2 r3` when absent.
    pub r_max: Option<f64>,
    /// Angles scanned when selecting `beta`.
    pub beta_grid: usize,
    /// Radii used by the coupled `beta` scan, which is quadratic in cost.
    pub coupled_radii: usize,
    pub seed: u64,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            radial_points: 10_000,
            directions: 1000,
            sphere_points: 26,
            r_max: None,
            beta_grid: 10_000,
            coupled_radii: 256,
            seed: 0,
        }
    }
}

impl SamplingSpec {
    pub fn r_max(&self, model: &BackgroundModel) -> f64 {
        self.r_max.unwrap_or(2.0 * model.r3)
    }

    /// `min(radial_points, cap)` radii in `(lo, hi]`, equispaced and ending
    /// exactly at `hi`.
    pub fn radii(&self, lo: f64, hi: f64, cap: usize) -> Vec<f64> {
        let n = self.radial_points.min(cap).max(1);
        (1..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    }

    pub fn sphere_directions(&self) -> Vec<Vec3> {
        fibonacci_sphere(self.sphere_points.max(1))
    }
}

/// One checked assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    /// Non-blocking entries are informational.
    pub blocking: bool,
    pub value: f64,
    pub threshold: f64,
    /// Signed distance to failure; positive when passing.
    pub margin: f64,
    pub location: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub sampling: SamplingSpec,
    pub entries: Vec<CheckEntry>,
    /// Second derivatives of some profile come from an interpolant.
    pub low_trust: bool,
    /// All blocking entries pass.
    pub pass: bool,
}

impl ValidationReport {
    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.blocking && !e.pass)
    }
}

fn entry(name: &str, pass: bool, value: f64, threshold: f64, margin: f64, location: Option<f64>) -> CheckEntry {
    CheckEntry {
        name: String::from(name),
        pass,
        blocking: true,
        value,
        threshold,
        margin,
        location,
        note: None,
    }
}

fn argmin(samples: &[(f64, f64)]) -> (f64, f64) {
    samples
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |acc, (r, v)| if v < acc.1 || v.is_nan() { (r, v) } else { acc })
}

fn argmax(samples: &[(f64, f64)]) -> (f64, f64) {
    samples
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (r, v)| if v > acc.1 || !v.is_finite() { (r, v) } else { acc })
}

pub fn validate_assumptions(model: &BackgroundModel, sampling: &SamplingSpec) -> ValidationReport {
    let r_max = sampling.r_max(model);
    let radii = sampling.radii(0.0, r_max, usize::MAX);
    let mut entries = Vec::new();

    let sample = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> { radii.iter().map(|&r| (r, f(r))).collect() };

    let (r, v) = argmin(&sample(&|r| model.rho.value(r)));
    entries.push(entry("rho > 0", v > 0.0, v, 0.0, v, Some(r)));

    let (r, v) = argmin(&sample(&|r| model.cs.value(r)));
    entries.push(entry("cs_min > 0", v > 0.0, v, 0.0, v, Some(r)));

    let (r, v) = argmin(&sample(&|r| model.gamma.value(r)));
    entries.push(entry("gamma_min > 0", v > 0.0, v, 0.0, v, Some(r)));

    entries.push(entry(
        "omega != 0",
        model.omega != 0.0,
        model.omega,
        0.0,
        model.omega.abs(),
        None,
    ));

    let ordered = model.r1 > 0.0 && model.r1 < model.r2 && model.r2 < model.r3;
    entries.push(entry("0 < r1 < r2 < r3", ordered, model.r2 - model.r1, 0.0, (model.r2 - model.r1).min(model.r3 - model.r2), None));

    // Support of b: declared radius, then samples outside B_r1.
    let declared = model.b.support_radius();
    let mut leak: (f64, f64) = (f64::NAN, 0.0);
    if !model.b.is_zero() {
        let dirs = sampling.sphere_directions();
        for &r in radii.iter().filter(|&&r| r >= model.r1) {
            for d in &dirs {
                let b = norm(&model.b.velocity(&scale(r, d)));
                if b > leak.1 {
                    leak = (r, b);
                }
            }
        }
    }
    let supp_ok = declared.is_some_and(|s| s <= model.r1) && leak.1 == 0.0;
    let mut e = entry(
        "supp b in B_r1",
        supp_ok,
        declared.unwrap_or(f64::INFINITY),
        model.r1,
        model.r1 - declared.unwrap_or(f64::INFINITY),
        if leak.1 > 0.0 { Some(leak.0) } else { None },
    );
    if leak.1 > 0.0 {
        e.note = Some(alloc::format!("|b| = {:e} sampled outside B_r1", leak.1));
    }
    entries.push(e);

    let (r, v) = argmax(&sample(&|r| model.q_r(r).abs()));
    entries.push(entry("q bounded", v.is_finite(), v, f64::INFINITY, if v.is_finite() { 1.0 } else { -1.0 }, Some(r)));

    let (r, v) = argmax(&sample(&|r| {
        let (a, b) = model.m1_eigenvalues(r);
        a.abs().max(b.abs())
    }));
    let mut e = entry("m1 bounded", v.is_finite(), v, f64::INFINITY, if v.is_finite() { 1.0 } else { -1.0 }, Some(r));
    if model.is_low_trust() {
        e.note = Some(String::from("second derivatives from tabulated interpolant (low trust)"));
    }
    entries.push(e);

    match compute_theta(model, sampling) {
        Ok(t) => {
            let sub = check_subsonic(model, t.theta, sampling);
            let mut e = entry(
                "subsonic |b/cs|^2 < 1/(1+tan^2 theta)",
                sub.pass,
                sub.sup_mach_sq,
                sub.bound,
                sub.margin,
                Some(norm(&sub.attaining_point)),
            );
            e.note = Some(alloc::format!("theta = {:.17e}", t.theta));
            entries.push(e);
        }
        Err(err) => {
            let mut e = entry("subsonic |b/cs|^2 < 1/(1+tan^2 theta)", false, f64::NAN, f64::NAN, f64::NAN, None);
            e.note = Some(alloc::format!("theta unavailable: {err}"));
            entries.push(e);
        }
    }

    let (res, at) = hydrostatic_residual(model, &radii, sampling);
    entries.push(CheckEntry {
        name: String::from("hydrostatic residual"),
        pass: true,
        blocking: false,
        value: res,
        threshold: f64::NAN,
        margin: f64::NAN,
        location: Some(at),
        note: Some(String::from("informational; stability does not require equilibrium")),
    });

    let pass = entries.iter().all(|e| !e.blocking || e.pass);
    ValidationReport {
        sampling: *sampling,
        entries,
        low_trust: model.is_low_trust(),
        pass,
    }
}

/// `sup |rho (d_b b + 2 Omega x b + Omega x (Omega x x) - grad phi) + grad p|`
/// relative to `sup |grad p| + sup |rho grad phi|`.
fn hydrostatic_residual(model: &BackgroundModel, radii: &[f64], sampling: &SamplingSpec) -> (f64, f64) {
    let dirs = sampling.sphere_directions();
    let stride = (radii.len() / 500).max(1);
    let o = &model.rotation;
    let mut worst = 0.0;
    let mut at = 0.0;
    let mut scale_ref = 0.0f64;
    for &r in radii.iter().step_by(stride) {
        let rho = model.rho.value(r);
        for d in &dirs {
            let x = scale(r, d);
            let gp = point_jet(model.p.jet(r), &x).grad;
            let gphi = point_jet(model.phi.jet(r), &x).grad;
            let b = model.b.velocity(&x);
            let adv = model.b.advective_acceleration(&x);
            let cor = cross(o, &b);
            let cen = cross(o, &cross(o, &x));
            let mut res = [0.0; 3];
            for k in 0..3 {
                res[k] = rho * (adv[k] + 2.0 * cor[k] + cen[k] - gphi[k]) + gp[k];
            }
            let n = norm(&res);
            scale_ref = scale_ref.max(norm(&gp)).max(rho * norm(&gphi));
            if n > worst {
                worst = n;
                at = r;
            }
        }
    }
    (worst / scale_ref.max(f64::MIN_POSITIVE), at)
}
