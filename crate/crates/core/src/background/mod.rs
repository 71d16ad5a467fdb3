//! Spherically symmetric background models and the coefficient fields derived
//! from them.

mod profile;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profile::{Interpolation, Jet, RadialProfile};
pub use validate::{validate_assumptions, CheckEntry, SamplingSpec, ValidationReport};

use crate::calculus::quadrature::integrate_adaptive;
use crate::flow::Flow;
use crate::math::{norm, scale, CMat3, Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("grid of profile `{profile}` is not strictly increasing")]
    NonMonotoneGrid { profile: String },
    #[error("radii unordered: need 0 < r1 < r2 < r3, got r1={r1}, r2={r2}, r3={r3}")]
    RadiiUnordered { r1: f64, r2: f64, r3: f64 },
    #[error("negative density sample rho({r}) = {value}")]
    NegativeDensity { r: f64, value: f64 },
    #[error("invalid profile `{profile}`: {reason}")]
    InvalidProfile { profile: String, reason: String },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("eta requested at r={r} below r2={r2}")]
    EtaDomain { r: f64, r2: f64 },
    #[error("eta integrand not finite at r={r}")]
    EtaIntegrand { r: f64 },
}

/// Stellar background: profiles of `|x|` plus a closed-form flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundModel {
    pub omega: f64,
    #[serde(rename = "Omega", default)]
    pub rotation: Vec3,
    #[serde(rename = "G")]
    pub gravity: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub rho: RadialProfile,
    pub cs: RadialProfile,
    pub p: RadialProfile,
    pub phi: RadialProfile,
    pub gamma: RadialProfile,
    #[serde(default)]
    pub b: Flow,
}

/// Value, gradient and Hessian of a radial profile at a point.
#[derive(Debug, Clone, Copy)]
pub struct PointJet {
    pub value: f64,
    pub grad: Vec3,
    pub hess: Mat3,
}

/// Lifts a radial jet to 3D. Near the origin the tangential curvature
/// `f'/r` is replaced by its limit `f''`.
pub fn point_jet(jet: Jet, x: &Vec3) -> PointJet {
    let r = norm(x);
    if r < 1e-300 {
        return PointJet {
            value: jet.value,
            grad: [0.0; 3],
            hess: Mat3::scalar(jet.d2),
        };
    }
    let n = scale(1.0 / r, x);
    let nn = Mat3::outer(&n, &n);
    PointJet {
        value: jet.value,
        grad: scale(jet.d1, &n),
        hess: jet.d2 * nn + (jet.d1 / r) * (Mat3::identity() - nn),
    }
}

/// Derived quantities at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoefficientSample {
    pub x: Vec3,
    pub r: f64,
    pub rho: f64,
    pub cs: f64,
    pub gamma: f64,
    pub q: Vec3,
    pub q_r: f64,
    /// `eta(r)`, only for `r >= r2`.
    pub eta: Option<f64>,
    pub m1: Mat3,
    pub m2: CMat3,
    pub m1_rr: f64,
    pub m1_tt: f64,
    pub m2_rr: f64,
    pub m2_tt: f64,
    /// Some second derivative came from a tabulated interpolant.
    pub low_trust: bool,
}

/// Where to evaluate [`BackgroundModel::derived_coefficients`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// On the positive `z` axis at this radius.
    Radius(f64),
    At(Vec3),
}

impl BackgroundModel {
    /// Checks radii order, profile tables and density positivity, and
    /// prepares interpolants.
    pub fn new(mut self) -> Result<Self, ModelError> {
        let (r1, r2, r3) = (self.r1, self.r2, self.r3);
        if !(r1 > 0.0 && r1 < r2 && r2 < r3 && r3.is_finite()) {
            return Err(ModelError::RadiiUnordered { r1, r2, r3 });
        }
        for (name, v) in [("omega", self.omega), ("G", self.gravity)] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter {
                    name: String::from(name),
                    reason: String::from("not finite"),
                });
            }
        }
        if !(self.gravity > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: String::from("G"),
                reason: String::from("must be positive"),
            });
        }
        self.rho.prepare("rho")?;
        self.cs.prepare("cs")?;
        self.p.prepare("p")?;
        self.phi.prepare("phi")?;
        self.gamma.prepare("gamma")?;

        let mut probes: Vec<f64> = (0..=256).map(|i| 2.0 * r3 * i as f64 / 256.0).collect();
        if let RadialProfile::Tabulated { r, .. } = &self.rho {
            probes.extend_from_slice(r);
        }
        for r in probes {
            let v = self.rho.value(r);
            if !(v > 0.0) {
                return Err(ModelError::NegativeDensity { r, value: v });
            }
        }
        Ok(self)
    }

    pub fn is_low_trust(&self) -> bool {
        self.p.is_low_trust() || self.phi.is_low_trust() || self.rho.is_low_trust() || self.cs.is_low_trust()
    }

    pub fn is_spherically_symmetric(&self) -> bool {
        self.rotation == [0.0; 3] && self.b.is_zero()
    }

    pub fn sign_omega(&self) -> f64 {
        if self.omega < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// `q_r = p' / (c_s^2 rho)`.
    pub fn q_r(&self, r: f64) -> f64 {
        let c = self.cs.value(r);
        self.p.jet(r).d1 / (c * c * self.rho.value(r))
    }

    /// Radial and tangential eigenvalues of `m1` at radius `r`.
    pub fn m1_eigenvalues(&self, r: f64) -> (f64, f64) {
        let rho = self.rho.value(r);
        let c = self.cs.value(r);
        let p = self.p.jet(r);
        let phi = self.phi.jet(r);
        let q = p.d1 / (c * c * rho);
        let rr = -(p.d2 - rho * phi.d2 - c * c * rho * q * q) / rho;
        let tt = if r < 1e-300 {
            -(p.d2 - rho * phi.d2) / rho
        } else {
            -(p.d1 / r - rho * phi.d1 / r) / rho
        };
        (rr, tt)
    }

    /// `m2_rr + i omega gamma` for the rotation-free radial reduction.
    pub fn radial_symbol(&self, r: f64) -> Complex64 {
        let (m1_rr, _) = self.m1_eigenvalues(r);
        Complex64::new(m1_rr + self.omega * self.omega, self.omega * self.gamma.value(r))
    }

    /// `(omega + i Omega x)^* (omega + i Omega x)
    ///  = (omega^2 + |Omega|^2) I - Omega Omega^T + 2 i omega [Omega]_x`.
    pub fn rotation_term(&self) -> CMat3 {
        let o = &self.rotation;
        let o2 = o[0] * o[0] + o[1] * o[1] + o[2] * o[2];
        let re = Mat3::scalar(self.omega * self.omega + o2) - Mat3::outer(o, o);
        let im = (2.0 * self.omega) * Mat3::cross_matrix(o);
        CMat3::from_parts(&re, &im)
    }

    pub fn derived_coefficients(&self, point: Point) -> CoefficientSample {
        let x = match point {
            Point::Radius(r) => [0.0, 0.0, r],
            Point::At(x) => x,
        };
        let mut s = self.coefficients_at(&x);
        if s.r >= self.r2 {
            s.eta = self.eta(s.r).ok();
        }
        s
    }

    /// Everything in [`CoefficientSample`] except `eta`, which needs a
    /// quadrature and is left `None`.
    pub fn coefficients_at(&self, x: &Vec3) -> CoefficientSample {
        let x = *x;
        let r = norm(&x);
        let rho = self.rho.value(r);
        let cs = self.cs.value(r);
        let gamma = self.gamma.value(r);
        let p = point_jet(self.p.jet(r), &x);
        let phi = point_jet(self.phi.jet(r), &x);
        let c2rho = cs * cs * rho;
        let q = scale(1.0 / c2rho, &p.grad);
        let q_r = self.p.jet(r).d1 / c2rho;
        let m1 = (-1.0 / rho) * (p.hess - rho * phi.hess - c2rho * Mat3::outer(&q, &q));
        let m2 = m1.to_complex().add(&self.rotation_term());
        let (m1_rr, m1_tt) = self.m1_eigenvalues(r);
        let w2 = self.omega * self.omega;
        CoefficientSample {
            x,
            r,
            rho,
            cs,
            gamma,
            q,
            q_r,
            eta: None,
            m1,
            m2,
            m1_rr,
            m1_tt,
            m2_rr: m1_rr + w2,
            m2_tt: m1_tt + w2,
            low_trust: self.is_low_trust(),
        }
    }

    /// `eta(r) = int_{r2}^r q_r`, adaptive to relative tolerance `1e-10`.
    pub fn eta(&self, r: f64) -> Result<f64, ModelError> {
        if r < self.r2 {
            return Err(ModelError::EtaDomain { r, r2: self.r2 });
        }
        self.eta_between(self.r2, r)
    }

    /// `int_{r2}^r q_r` for any `r > 0`, negative below `r2`.
    pub fn eta_extended(&self, r: f64) -> Result<f64, ModelError> {
        if r >= self.r2 {
            self.eta_between(self.r2, r)
        } else {
            self.eta_between(r, self.r2).map(|v| -v)
        }
    }

    fn eta_between(&self, a: f64, b: f64) -> Result<f64, ModelError> {
        let mut bad = None;
        let res = integrate_adaptive(
            |s| {
                let v = self.q_r(s);
                if !v.is_finite() {
                    bad = Some(s);
                    return 0.0;
                }
                v
            },
            a,
            b,
            1e-10,
            1e-14,
            4096,
        );
        match bad {
            Some(r) => Err(ModelError::EtaIntegrand { r }),
            None => Ok(res.value),
        }
    }

    /// `eta` at many radii `>= r2` by accumulating integrals between sorted
    /// neighbours. Output order matches the input.
    pub fn eta_table(&self, radii: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|&i, &j| radii[i].total_cmp(&radii[j]));
        let mut out = alloc::vec![0.0; radii.len()];
        let mut prev = self.r2;
        let mut acc = 0.0;
        for i in order {
            let r = radii[i];
            if r < self.r2 {
                return Err(ModelError::EtaDomain { r, r2: self.r2 });
            }
            acc += self.eta_between(prev, r)?;
            prev = r;
            out[i] = acc;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;
    use alloc::vec;

    pub(crate) fn exp_model() -> BackgroundModel {
        BackgroundModel {
            omega: 1.0,
            rotation: [0.0; 3],
            gravity: 1.0,
            r1: 0.5,
            r2: 1.0,
            r3: 1.5,
            rho: RadialProfile::exponential(2.0, 1.5),
            cs: RadialProfile::constant(1.3),
            p: RadialProfile::exponential(3.0, 1.5),
            phi: RadialProfile::polynomial(vec![0.0, -2.25]),
            gamma: RadialProfile::constant(0.1),
            b: Flow::None,
        }
        .new()
        .unwrap()
    }

    #[test]
    fn radii_must_be_ordered() {
        let mut m = exp_model();
        m.r1 = 2.0;
        m.r2 = 1.0;
        assert!(matches!(m.new(), Err(ModelError::RadiiUnordered { .. })));
    }

    #[test]
    fn negative_density_rejected() {
        let mut m = exp_model();
        m.rho = RadialProfile::polynomial(vec![1.0, -1.0]);
        assert!(matches!(m.new(), Err(ModelError::NegativeDensity { .. })));
    }

    #[test]
    fn exponential_q_is_constant_and_eta_linear() {
        let m = exp_model();
        let q0 = -1.5 * 3.0 / (1.3 * 1.3 * 2.0);
        for r in [0.2, 1.0, 2.5] {
            assert!((m.q_r(r) - q0).abs() < 1e-14);
        }
        assert_eq!(m.eta(1.0).unwrap(), 0.0);
        assert!((m.eta(3.0).unwrap() - q0 * 2.0).abs() < 1e-12);
        let t = m.eta_table(&[3.0, 1.5, 2.0]).unwrap();
        assert!((t[0] - q0 * 2.0).abs() < 1e-12);
        assert!((t[1] - q0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_rotation_gives_omega_squared_shift() {
        let m = exp_model();
        let s = m.derived_coefficients(Point::At([0.3, -0.4, 0.5]));
        let d = s.m2.add(&s.m1.to_complex().scale(Complex64::new(-1.0, 0.0)));
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(d.0[i][j], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn radial_eigenvalues_match_matrix_action() {
        let m = exp_model();
        let x = [0.6, 0.2, -0.9];
        let s = m.derived_coefficients(Point::At(x));
        let n = scale(1.0 / norm(&x), &x);
        let t = {
            let a = [0.0, 0.0, 1.0];
            let c = crate::math::cross(&n, &a);
            scale(1.0 / norm(&c), &c)
        };
        let mn = s.m1.mul_vec(&n);
        let mt = s.m1.mul_vec(&t);
        for k in 0..3 {
            assert!((mn[k] - s.m1_rr * n[k]).abs() < 1e-10);
            assert!((mt[k] - s.m1_tt * t[k]).abs() < 1e-10);
        }
        assert!(s.m1.asymmetry() < 1e-14);
    }

    #[test]
    fn hessian_radial_identity_matches_finite_differences() {
        let prof = RadialProfile::exponential(1.0, 0.7);
        let x = [0.4, 0.5, -0.3];
        let h = 1e-4;
        let pj = point_jet(prof.jet(norm(&x)), &x);
        for i in 0..3 {
            for j in 0..3 {
                let f = |dx: f64, dy: f64| {
                    let mut y = x;
                    y[i] += dx;
                    y[j] += dy;
                    prof.value(norm(&y))
                };
                let fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
                assert!((pj.hess.0[i][j] - fd).abs() < 1e-6, "{i}{j}");
            }
        }
        assert!((pj.value - exp(-0.7 * norm(&x))).abs() < 1e-16);
    }

    #[test]
    fn rotation_term_is_hermitian_psd() {
        let mut m = exp_model();
        m.rotation = [0.1, -0.2, 0.3];
        let t = m.rotation_term();
        assert!(t.non_hermiticity() < 1e-15);
        let e = crate::math::hermitian_eigen(&t);
        assert!(e.values[0] > -1e-14);
    }
}
