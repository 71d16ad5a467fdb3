//! The C-infinity bump `exp(-1/(1-t^2))` and its rescalings to balls and
//! annuli, with closed-form first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::math::{exp, norm, scale, Mat3, Vec3};

/// Support of a radial bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Support {
    /// Open ball `|x| < radius`.
    Ball { radius: f64 },
    /// Open annulus `inner < |x| < outer`.
    Annulus { inner: f64, outer: f64 },
}

impl Support {
    pub fn inner(&self) -> f64 {
        match self {
            Support::Ball { .. } => 0.0,
            Support::Annulus { inner, .. } => *inner,
        }
    }

    pub fn outer(&self) -> f64 {
        match self {
            Support::Ball { radius } => *radius,
            Support::Annulus { outer, .. } => *outer,
        }
    }

    pub fn contains_radius(&self, r: f64) -> bool {
        r > self.inner() && r < self.outer()
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Support::Ball { radius } => *radius > 0.0 && radius.is_finite(),
            Support::Annulus { inner, outer } => *inner > 0.0 && outer > inner && outer.is_finite(),
        }
    }
}

/// `g(s) = exp(-1/(1-s))` on `s < 1` with `(g, g', g'')`.
#[inline]
fn bump_s(s: f64) -> (f64, f64, f64) {
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 / (1.0 - s);
    let g = exp(-d);
    let h1 = -d * d;
    let h2 = -2.0 * d * d * d;
    (g, g * h1, g * (h1 * h1 + h2))
}

/// `G(t) = exp(-1/(1-t^2))` on `|t| < 1` with `(G, G', G'')`.
#[inline]
fn bump_t(t: f64) -> (f64, f64, f64) {
    if t.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 / (1.0 - t * t);
    let g = exp(-d);
    let h1 = -2.0 * t * d * d;
    let h2 = -2.0 * (1.0 + 3.0 * t * t) * d * d * d;
    (g, g * h1, g * (h1 * h1 + h2))
}

/// `exp(-1/(1-|x|^2/R^2))`, smooth through the origin.
#[derive(Debug, Clone, Copy)]
pub struct BallBump {
    radius: f64,
}

impl BallBump {
    pub fn new(radius: f64) -> Self {
        Self { radius }
    }

    fn s(&self, x: &Vec3) -> f64 {
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (self.radius * self.radius)
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        bump_s(self.s(x)).0
    }

    pub fn grad(&self, x: &Vec3) -> Vec3 {
        let (_, g1, _) = bump_s(self.s(x));
        scale(2.0 * g1 / (self.radius * self.radius), x)
    }

    pub fn hess(&self, x: &Vec3) -> Mat3 {
        let (_, g1, g2) = bump_s(self.s(x));
        let r2 = self.radius * self.radius;
        (4.0 * g2 / (r2 * r2)) * Mat3::outer(x, x) + Mat3::scalar(2.0 * g1 / r2)
    }

    pub fn laplacian(&self, x: &Vec3) -> f64 {
        let s = self.s(x);
        let (_, g1, g2) = bump_s(s);
        let r2 = self.radius * self.radius;
        4.0 * g2 * s / r2 + 6.0 * g1 / r2
    }
}

/// Radial bump supported on `inner < r < outer`.
#[derive(Debug, Clone, Copy)]
pub struct ShellBump {
    inner: f64,
    outer: f64,
}

impl ShellBump {
    pub fn new(inner: f64, outer: f64) -> Self {
        Self { inner, outer }
    }

    /// `(B, dB/dr, d2B/dr2)` at radius `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        let k = 2.0 / (self.outer - self.inner);
        let t = (2.0 * r - self.inner - self.outer) / (self.outer - self.inner);
        let (g, g1, g2) = bump_t(t);
        (g, g1 * k, g2 * k * k)
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        self.radial(norm(x)).0
    }

    pub fn grad(&self, x: &Vec3) -> Vec3 {
        let r = norm(x);
        if r == 0.0 {
            return [0.0; 3];
        }
        let (_, b1, _) = self.radial(r);
        scale(b1 / r, x)
    }

    pub fn hess(&self, x: &Vec3) -> Mat3 {
        let r = norm(x);
        if r == 0.0 {
            return Mat3::ZERO;
        }
        let (_, b1, b2) = self.radial(r);
        let n = scale(1.0 / r, x);
        let nn = Mat3::outer(&n, &n);
        b2 * nn + (b1 / r) * (Mat3::identity() - nn)
    }

    pub fn laplacian(&self, x: &Vec3) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let (_, b1, b2) = self.radial(r);
        b2 + 2.0 * b1 / r
    }
}

/// A bump on either kind of support.
#[derive(Debug, Clone, Copy)]
pub enum Bump {
    Ball(BallBump),
    Shell(ShellBump),
}

impl Bump {
    pub fn new(support: Support) -> Self {
        match support {
            Support::Ball { radius } => Bump::Ball(BallBump::new(radius)),
            Support::Annulus { inner, outer } => Bump::Shell(ShellBump::new(inner, outer)),
        }
    }

    /// `(B, grad B, hess B)` in one call.
    pub fn jet(&self, x: &Vec3) -> (f64, Vec3, Mat3) {
        match self {
            Bump::Ball(b) => (b.value(x), b.grad(x), b.hess(x)),
            Bump::Shell(b) => (b.value(x), b.grad(x), b.hess(x)),
        }
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        match self {
            Bump::Ball(b) => b.value(x),
            Bump::Shell(b) => b.value(x),
        }
    }

    pub fn grad(&self, x: &Vec3) -> Vec3 {
        match self {
            Bump::Ball(b) => b.grad(x),
            Bump::Shell(b) => b.grad(x),
        }
    }

    pub fn laplacian(&self, x: &Vec3) -> f64 {
        match self {
            Bump::Ball(b) => b.laplacian(x),
            Bump::Shell(b) => b.laplacian(x),
        }
    }
}

/// Smooth monotone transition from 0 at `t <= 0` to 1 at `t >= 1`, built
/// from `f(t) = exp(-1/t)`: `S(t) = f(t) / (f(t) + f(1-t))`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        1.0 / (1.0 + exp(1.0 / t - 1.0 / (1.0 - t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bumps_vanish_outside_support() {
        let b = BallBump::new(1.0);
        assert_eq!(b.value(&[1.0, 0.0, 0.0]), 0.0);
        assert_eq!(b.grad(&[0.0, 1.2, 0.0]), [0.0; 3]);
        let s = ShellBump::new(1.0, 2.0);
        assert_eq!(s.radial(0.5), (0.0, 0.0, 0.0));
        assert_eq!(s.radial(2.0), (0.0, 0.0, 0.0));
        assert!(s.radial(1.5).0 > 0.0);
    }

    #[test]
    fn shell_bump_radial_derivatives_match_differences() {
        let s = ShellBump::new(1.0, 2.5);
        let h = 1e-4;
        for r in [1.2, 1.5, 1.9, 2.3] {
            let (_, d1, d2) = s.radial(r);
            let fd1 = (s.radial(r + h).0 - s.radial(r - h).0) / (2.0 * h);
            let fd2 = (s.radial(r + h).1 - s.radial(r - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-7 * (1.0 + d1.abs()));
            assert!((d2 - fd2).abs() < 1e-6 * (1.0 + d2.abs()));
        }
    }

    #[test]
    fn smooth_step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }
}
