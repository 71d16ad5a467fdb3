#![allow(dead_code)]

use galbrun_core::background::{BackgroundModel, RadialProfile};
use galbrun_core::flow::Flow;
use num_complex::Complex64;
use ode_solvers::{Dopri5, System, Vector4};

/// `rho = p = e^{-4r}`, `c_s^2 = 2`, `phi = -4r`, `gamma = 0.1`, `omega = 1`.
pub fn standard_model() -> BackgroundModel {
    BackgroundModel {
        omega: 1.0,
        rotation: [0.0; 3],
        gravity: 1.0,
        r1: 0.5,
        r2: 1.0,
        r3: 1.5,
        rho: RadialProfile::exponential(1.0, 4.0),
        cs: RadialProfile::constant(2f64.sqrt()),
        p: RadialProfile::exponential(1.0, 4.0),
        phi: RadialProfile::polynomial(vec![0.0, -4.0]),
        gamma: RadialProfile::constant(0.1),
        b: Flow::None,
    }
    .new()
    .unwrap()
}

/// Exponential star with toroidal flow inside `B_r1`, rotation and
/// non-constant damping.
pub fn flowing_model() -> BackgroundModel {
    BackgroundModel {
        omega: 1.3,
        rotation: [0.05, -0.02, 0.1],
        gravity: 0.7,
        r1: 0.5,
        r2: 1.0,
        r3: 1.5,
        rho: RadialProfile::exponential(2.0, 1.5),
        cs: RadialProfile::polynomial(vec![1.3, 0.0, -0.1]),
        p: RadialProfile::exponential(3.0, 1.5),
        phi: RadialProfile::polynomial(vec![0.0, -2.25, 0.1]),
        gamma: RadialProfile::polynomial(vec![0.1, 0.02]),
        b: Flow::Toroidal {
            axis: [0.3, 0.1, 1.0],
            amplitude: 0.4,
            radius: 0.45,
        },
    }
    .new()
    .unwrap()
}

/// Exterior coefficients of the standard model in closed form: `eta =
/// -2 (r - r2)`, so `E = e^{2 eta} / rho = e^4`, `F = E / c_s^2 = e^4 / 2`,
/// and `M = m1_rr + omega^2 + i omega gamma = -8 + 1 + 0.1 i`.
pub fn standard_exterior(_r: f64) -> (Complex64, f64) {
    let e = 4f64.exp();
    (Complex64::new(e, 0.0) / Complex64::new(-7.0, 0.1), 0.5 * e)
}

/// `-(a r^2 v')' / r^2 - F v = g` written for `(v, w = a r^2 v')` with
/// complex values split into real parts.
struct Exterior<'a> {
    coef: &'a dyn Fn(f64) -> (Complex64, f64),
    g: &'a dyn Fn(f64) -> Complex64,
    forced: bool,
}

impl System<f64, Vector4<f64>> for Exterior<'_> {
    fn system(&self, r: f64, y: &Vector4<f64>, dy: &mut Vector4<f64>) {
        let (a, f) = (self.coef)(r);
        let v = Complex64::new(y[0], y[1]);
        let w = Complex64::new(y[2], y[3]);
        let g = if self.forced { (self.g)(r) } else { Complex64::new(0.0, 0.0) };
        let dv = w / (a * r * r);
        let dw = -(v * f + g) * (r * r);
        dy[0] = dv.re;
        dy[1] = dv.im;
        dy[2] = dw.re;
        dy[3] = dw.im;
    }
}

fn shoot(sys: Exterior, lo: f64, hi: f64, dx: f64, y0: Vector4<f64>) -> (Vec<f64>, Vec<Vector4<f64>>) {
    let mut s = Dopri5::new(sys, lo, hi, dx, y0, 1e-13, 1e-15);
    s.integrate().expect("shooting integration");
    let (x, y) = s.results().get();
    (x.clone(), y.clone())
}

/// Solves the exterior problem on `[lo, hi]` with `v(lo) = v_lo` and
/// `v(hi) = 0` by linear shooting; returns `(r, v)` every `dx`.
pub fn exterior_oracle(
    coef: &dyn Fn(f64) -> (Complex64, f64),
    g: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    v_lo: Complex64,
    dx: f64,
) -> Vec<(f64, Complex64)> {
    let (x, ya) = shoot(
        Exterior { coef, g, forced: true },
        lo,
        hi,
        dx,
        Vector4::new(v_lo.re, v_lo.im, 0.0, 0.0),
    );
    let (xb, yb) = shoot(
        Exterior { coef, g, forced: false },
        lo,
        hi,
        dx,
        Vector4::new(0.0, 0.0, 1.0, 0.0),
    );
    assert_eq!(x.len(), xb.len());
    let va = |y: &Vector4<f64>| Complex64::new(y[0], y[1]);
    let c = -va(ya.last().unwrap()) / va(yb.last().unwrap());
    x.iter()
        .zip(ya.iter().zip(&yb))
        .map(|(r, (a, b))| (*r, va(a) + c * va(b)))
        .collect()
}
