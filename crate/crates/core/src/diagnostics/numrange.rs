//! Argument extrema of the numerical range `{xi^H M xi : |xi| = 1}` of a
//! 3x3 complex matrix.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::fields::uniform;
use crate::math::{carg, cis, hermitian_eigen, sqrt, CMat3, CVec3, Vec3, PI};

/// Supporting directions swept when locating the boundary.
const SWEEP: usize = 32;

/// `count` unit vectors in `C^3` from a fixed-seed generator.
pub fn random_unit_vectors(count: usize, seed: u64) -> Vec<CVec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = [Complex64::new(0.0, 0.0); 3];
        for c in v.iter_mut() {
            *c = Complex64::new(2.0 * uniform(&mut rng) - 1.0, 2.0 * uniform(&mut rng) - 1.0);
        }
        let n = sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        if n < 1e-3 {
            // Burn one draw so the stream does not depend on rejection luck
            // of the next vector.
            let _ = rng.next_u64();
            continue;
        }
        out.push([v[0] / n, v[1] / n, v[2] / n]);
    }
    out
}

/// Extreme arguments of the numerical range of one matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgExtrema {
    pub sup_arg: f64,
    pub inf_arg: f64,
    /// Both extrema were sharpened by bisection on the supporting line.
    pub refined: bool,
}

/// `lambda_max` (or `lambda_min`) of `Im`-part of `e^{-i phi} M`, i.e. the
/// largest (smallest) value of `Im(e^{-i phi} z)` over the range.
fn im_extreme(m: &CMat3, phi: f64, largest: bool) -> f64 {
    let rotated = m.scale(cis(-phi));
    let e = hermitian_eigen(&rotated.skew_part_over_i());
    if largest {
        e.values[2]
    } else {
        e.values[0]
    }
}

fn candidates(m: &CMat3, extra: &[CVec3]) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(extra.len() + 6 + 2 * SWEEP);
    for e in [hermitian_eigen(m), hermitian_eigen(&m.skew_part_over_i())] {
        for v in &e.vectors {
            pts.push(m.quadratic_form(v));
        }
    }
    // Boundary points: maximizers of Re(e^{-i phi} z).
    for k in 0..SWEEP {
        let phi = 2.0 * PI * k as f64 / SWEEP as f64;
        let e = hermitian_eigen(&m.scale(cis(-phi)));
        pts.push(m.quadratic_form(&e.vectors[2]));
    }
    for xi in extra {
        pts.push(m.quadratic_form(xi));
    }
    pts
}

/// Sampled extrema sharpened by bisection: `sup arg` is the smallest angle
/// `phi` with `max Im(e^{-i phi} z) <= 0` over the range, `inf arg` the largest
/// with `min Im(e^{-i phi} z) >= 0`. Valid when the range avoids the origin
/// and the negative real axis; otherwise the sampled values are returned.
pub fn arg_extrema(m: &CMat3, extra: &[CVec3]) -> ArgExtrema {
    let pts = candidates(m, extra);
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for z in &pts {
        let a = carg(*z);
        sup = sup.max(a);
        inf = inf.min(a);
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;

    let refined_sup = refine(m, sup, true, tol);
    let refined_inf = refine(m, inf, false, tol);
    ArgExtrema {
        sup_arg: refined_sup.unwrap_or(sup),
        inf_arg: refined_inf.unwrap_or(inf),
        refined: refined_sup.is_some() && refined_inf.is_some(),
    }
}

fn refine(m: &CMat3, start: f64, upper: bool, tol: f64) -> Option<f64> {
    // For the upper extremum, f(phi) = max Im(e^{-i phi} z) is >= 0 at the
    // sampled angle and becomes negative past the true supremum.
    let dir = if upper { 1.0 } else { -1.0 };
    let f = |phi: f64| {
        let v = im_extreme(m, phi, upper);
        if upper {
            v
        } else {
            -v
        }
    };
    if f(start) < -tol {
        return None;
    }
    let mut step = 1e-9;
    let mut far = start + dir * step;
    while f(far) > 0.0 {
        step *= 2.0;
        if step > PI / 2.0 {
            return None;
        }
        far = start + dir * step;
    }
    if !(-PI..=PI).contains(&far) {
        return None;
    }
    let (mut inside, mut outside) = (start, far);
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Some(0.5 * (inside + outside))
}

/// Per-point extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointAngles {
    pub point: Vec3,
    pub sup_arg: f64,
    pub inf_arg: f64,
}

/// Aggregated argument extrema over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    pub points: Vec<PointAngles>,
    pub sup_arg: f64,
    pub sup_arg_point: Vec3,
    pub inf_arg: f64,
    pub inf_arg_point: Vec3,
    /// `sup_x |sup arg numran M(x)|`.
    pub max_abs_sup_arg: f64,
    pub max_abs_sup_arg_point: Vec3,
    /// `max(0, max_abs_sup_arg - pi/2)`.
    pub theta: f64,
    /// `pi/2 - theta`.
    pub margin_to_half_pi: f64,
    /// Some point has `|inf arg| > |sup arg|`.
    pub inf_dominates: bool,
    pub directions: usize,
    pub seed: u64,
}

/// Evaluates the numerical range argument extrema of `field(x)` at every
/// point. Identical consecutive matrices reuse the previous result.
pub fn numerical_range_arg_extrema<F: FnMut(&Vec3) -> CMat3>(
    mut field: F,
    points: &[Vec3],
    directions: usize,
    seed: u64,
) -> AngleReport {
    let extra = random_unit_vectors(directions, seed);
    let mut out = Vec::with_capacity(points.len());
    let mut last: Option<(CMat3, ArgExtrema)> = None;
    for x in points {
        let m = field(x);
        let ext = match &last {
            Some((lm, le)) if *lm == m => *le,
            _ => {
                let e = arg_extrema(&m, &extra);
                last = Some((m, e));
                e
            }
        };
        out.push(PointAngles {
            point: *x,
            sup_arg: ext.sup_arg,
            inf_arg: ext.inf_arg,
        });
    }
    summarize(out, directions, seed)
}

fn summarize(points: Vec<PointAngles>, directions: usize, seed: u64) -> AngleReport {
    let mut rep = AngleReport {
        points: Vec::new(),
        sup_arg: f64::NEG_INFINITY,
        sup_arg_point: [0.0; 3],
        inf_arg: f64::INFINITY,
        inf_arg_point: [0.0; 3],
        max_abs_sup_arg: 0.0,
        max_abs_sup_arg_point: [0.0; 3],
        theta: 0.0,
        margin_to_half_pi: PI / 2.0,
        inf_dominates: false,
        directions,
        seed,
    };
    for p in &points {
        if p.sup_arg > rep.sup_arg {
            rep.sup_arg = p.sup_arg;
            rep.sup_arg_point = p.point;
        }
        if p.inf_arg < rep.inf_arg {
            rep.inf_arg = p.inf_arg;
            rep.inf_arg_point = p.point;
        }
        if p.sup_arg.abs() > rep.max_abs_sup_arg {
            rep.max_abs_sup_arg = p.sup_arg.abs();
            rep.max_abs_sup_arg_point = p.point;
        }
        if p.inf_arg.abs() > p.sup_arg.abs() {
            rep.inf_dominates = true;
        }
    }
    rep.theta = (rep.max_abs_sup_arg - PI / 2.0).max(0.0);
    rep.margin_to_half_pi = PI / 2.0 - rep.theta;
    rep.points = points;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Mat3, I};

    #[test]
    fn scalar_matrix_has_single_argument() {
        let extra = random_unit_vectors(100, 1);
        let e = arg_extrema(&CMat3::scalar(I), &extra);
        assert!((e.sup_arg - PI / 2.0).abs() < 1e-15);
        assert!((e.inf_arg - PI / 2.0).abs() < 1e-15);
        let e = arg_extrema(&CMat3::scalar(Complex64::new(-1.0, 1.0)), &extra);
        assert!((e.sup_arg - 3.0 * PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_plus_imaginary_shift_matches_eigenvalues() {
        let h = Mat3([[1.0, 0.3, -0.2], [0.3, -0.5, 0.1], [-0.2, 0.1, 0.4]]);
        let m = CMat3::from_parts(&h, &Mat3::scalar(0.7));
        let eig = crate::math::symmetric_eigenvalues(&h);
        let e = arg_extrema(&m, &random_unit_vectors(200, 2));
        assert!((e.sup_arg - carg(Complex64::new(eig[0], 0.7))).abs() < 1e-10);
        assert!((e.inf_arg - carg(Complex64::new(eig[2], 0.7))).abs() < 1e-10);
        assert!(e.refined);
    }

    #[test]
    fn random_samples_never_exceed_refined_extrema() {
        let m = CMat3([
            [Complex64::new(1.0, 0.5), Complex64::new(0.4, -0.2), Complex64::new(0.0, 0.3)],
            [Complex64::new(-0.3, 0.1), Complex64::new(0.2, 1.0), Complex64::new(0.5, 0.0)],
            [Complex64::new(0.1, 0.1), Complex64::new(0.0, -0.4), Complex64::new(-0.6, 0.8)],
        ]);
        let xs = random_unit_vectors(5000, 9);
        let e = arg_extrema(&m, &xs[..10]);
        for xi in &xs {
            let a = carg(m.quadratic_form(xi));
            assert!(a <= e.sup_arg + 1e-12 && a >= e.inf_arg - 1e-12);
        }
    }
}
