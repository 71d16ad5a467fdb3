//! Smooth compactly supported test fields: complex polynomials times a radial
//! bump, with analytic first and second derivatives.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::bump::{Bump, Support};
use crate::flow::Flow;
use crate::math::{norm, CVec3, Vec3};

type CMatrix = [[Complex64; 3]; 3];

const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `coeff * x^a y^b z^c`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: Complex64,
    pub powers: [u8; 3],
}

#[inline]
fn ipow(x: f64, n: u8) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// `d^k/dx^k x^n` evaluated at `x`, as a real factor.
#[inline]
fn dpow(x: f64, n: u8, k: u8) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut c = 1.0;
    for j in 0..k {
        c *= (n - j) as f64;
    }
    c * ipow(x, n - k)
}

/// Complex polynomial in three variables.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self {
            terms: alloc::vec![Monomial {
                coeff: c,
                powers: [0, 0, 0],
            }],
        }
    }

    pub fn monomial(c: Complex64, powers: [u8; 3]) -> Self {
        Self {
            terms: alloc::vec![Monomial { coeff: c, powers }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == CZERO)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            terms: self.terms.iter().map(|t| Monomial { coeff: t.coeff * c, powers: t.powers }).collect(),
        }
    }

    /// Sum, kept as the concatenation of both term lists.
    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self { terms }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.powers.iter().map(|&p| p as usize).sum())
            .max()
            .unwrap_or(0)
    }

    fn eval_with(&self, x: &Vec3, d: [u8; 3]) -> Complex64 {
        let mut acc = CZERO;
        for t in &self.terms {
            let f = dpow(x[0], t.powers[0], d[0]) * dpow(x[1], t.powers[1], d[1]) * dpow(x[2], t.powers[2], d[2]);
            acc += t.coeff * f;
        }
        acc
    }

    pub fn value(&self, x: &Vec3) -> Complex64 {
        self.eval_with(x, [0, 0, 0])
    }

    pub fn grad(&self, x: &Vec3) -> CVec3 {
        [
            self.eval_with(x, [1, 0, 0]),
            self.eval_with(x, [0, 1, 0]),
            self.eval_with(x, [0, 0, 1]),
        ]
    }

    pub fn hess(&self, x: &Vec3) -> CMatrix {
        let mut h = [[CZERO; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let mut d = [0u8; 3];
                d[i] += 1;
                d[j] += 1;
                let v = self.eval_with(x, d);
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        h
    }

    /// Random polynomial of total degree `<= degree` with complex
    /// coefficients uniform in the unit square around 0.
    pub fn random<R: RngCore>(rng: &mut R, degree: u8) -> Self {
        let mut terms = Vec::new();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                for c in 0..=(degree - a - b) {
                    terms.push(Monomial {
                        coeff: Complex64::new(uniform(rng) * 2.0 - 1.0, uniform(rng) * 2.0 - 1.0),
                        powers: [a, b, c],
                    });
                }
            }
        }
        Self { terms }
    }
}

/// Uniform `[0, 1)` from the top 53 bits.
pub(crate) fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Scalar test field `P(x) B(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub poly: Polynomial,
    pub support: Support,
}

impl ScalarField {
    pub fn new(poly: Polynomial, support: Support) -> Self {
        Self { poly, support }
    }

    pub fn zero() -> Self {
        Self::new(Polynomial::zero(), Support::Ball { radius: 1.0 })
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn random<R: RngCore>(rng: &mut R, support: Support, degree: u8) -> Self {
        Self::new(Polynomial::random(rng, degree), support)
    }

    /// `alpha self + other`; both must share a support.
    pub fn axpy(&self, alpha: Complex64, other: &Self) -> Self {
        assert_eq!(self.support, other.support, "axpy needs a common support");
        Self::new(self.poly.scaled(alpha).plus(&other.poly), self.support)
    }

    fn bump(&self) -> Bump {
        Bump::new(self.support)
    }

    pub fn value(&self, x: &Vec3) -> Complex64 {
        if !self.support.contains_radius(norm(x)) || self.is_zero() {
            return CZERO;
        }
        self.poly.value(x) * self.bump().value(x)
    }

    pub fn grad(&self, x: &Vec3) -> CVec3 {
        if !self.support.contains_radius(norm(x)) || self.is_zero() {
            return [CZERO; 3];
        }
        let (b, db, _) = self.bump().jet(x);
        let p = self.poly.value(x);
        let dp = self.poly.grad(x);
        [dp[0] * b + p * db[0], dp[1] * b + p * db[1], dp[2] * b + p * db[2]]
    }

    pub fn hess(&self, x: &Vec3) -> CMatrix {
        let mut h = [[CZERO; 3]; 3];
        if !self.support.contains_radius(norm(x)) || self.is_zero() {
            return h;
        }
        let (b, db, hb) = self.bump().jet(x);
        let p = self.poly.value(x);
        let dp = self.poly.grad(x);
        let hp = self.poly.hess(x);
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = hp[i][j] * b + dp[i] * db[j] + dp[j] * db[i] + p * hb.0[i][j];
            }
        }
        h
    }

    /// Laplacian from the radial bump formula, independent of [`Self::hess`].
    pub fn laplacian(&self, x: &Vec3) -> Complex64 {
        if !self.support.contains_radius(norm(x)) || self.is_zero() {
            return CZERO;
        }
        let bump = self.bump();
        let b = bump.value(x);
        let db = bump.grad(x);
        let hp = self.poly.hess(x);
        let dp = self.poly.grad(x);
        let lap_p = hp[0][0] + hp[1][1] + hp[2][2];
        let cross = dp[0] * db[0] + dp[1] * db[1] + dp[2] * db[2];
        lap_p * b + cross * 2.0 + self.poly.value(x) * bump.laplacian(x)
    }
}

/// Vector test field `(P_1, P_2, P_3)(x) B(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub components: [Polynomial; 3],
    pub support: Support,
}

impl VectorField {
    pub fn new(components: [Polynomial; 3], support: Support) -> Self {
        Self { components, support }
    }

    pub fn zero() -> Self {
        Self::new(
            [Polynomial::zero(), Polynomial::zero(), Polynomial::zero()],
            Support::Ball { radius: 1.0 },
        )
    }

    /// Radial field `s(r) x` where `s` is given as a polynomial in `|x|^2`
    /// terms; here simply `c * x * B`.
    pub fn radial(c: Complex64, support: Support) -> Self {
        Self::new(
            [
                Polynomial::monomial(c, [1, 0, 0]),
                Polynomial::monomial(c, [0, 1, 0]),
                Polynomial::monomial(c, [0, 0, 1]),
            ],
            support,
        )
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn random<R: RngCore>(rng: &mut R, support: Support, degree: u8) -> Self {
        Self::new(
            [
                Polynomial::random(rng, degree),
                Polynomial::random(rng, degree),
                Polynomial::random(rng, degree),
            ],
            support,
        )
    }

    /// `alpha self + other`; both must share a support.
    pub fn axpy(&self, alpha: Complex64, other: &Self) -> Self {
        assert_eq!(self.support, other.support, "axpy needs a common support");
        let c = |k: usize| self.components[k].scaled(alpha).plus(&other.components[k]);
        Self::new([c(0), c(1), c(2)], self.support)
    }

    fn active(&self, x: &Vec3) -> bool {
        self.support.contains_radius(norm(x)) && !self.is_zero()
    }

    pub fn value(&self, x: &Vec3) -> CVec3 {
        if !self.active(x) {
            return [CZERO; 3];
        }
        let b = Bump::new(self.support).value(x);
        [
            self.components[0].value(x) * b,
            self.components[1].value(x) * b,
            self.components[2].value(x) * b,
        ]
    }

    /// Value and Jacobian `J[i][j] = d u_i / d x_j` in one pass.
    pub fn value_and_jacobian(&self, x: &Vec3) -> (CVec3, CMatrix) {
        if !self.active(x) {
            return ([CZERO; 3], [[CZERO; 3]; 3]);
        }
        let bump = Bump::new(self.support);
        let b = bump.value(x);
        let db = bump.grad(x);
        let mut v = [CZERO; 3];
        let mut j = [[CZERO; 3]; 3];
        for (i, p) in self.components.iter().enumerate() {
            let pv = p.value(x);
            let dp = p.grad(x);
            v[i] = pv * b;
            for k in 0..3 {
                j[i][k] = dp[k] * b + pv * db[k];
            }
        }
        (v, j)
    }

    pub fn jacobian(&self, x: &Vec3) -> CMatrix {
        self.value_and_jacobian(x).1
    }

    pub fn div(&self, x: &Vec3) -> Complex64 {
        let j = self.jacobian(x);
        j[0][0] + j[1][1] + j[2][2]
    }

    pub fn curl(&self, x: &Vec3) -> CVec3 {
        let j = self.jacobian(x);
        [j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]]
    }
}

/// Fields that can be differentiated along a real direction.
pub trait Differentiable {
    type Value;
    fn derivative_along(&self, x: &Vec3, direction: &Vec3) -> Self::Value;
}

impl Differentiable for ScalarField {
    type Value = Complex64;
    fn derivative_along(&self, x: &Vec3, d: &Vec3) -> Complex64 {
        let g = self.grad(x);
        g[0] * d[0] + g[1] * d[1] + g[2] * d[2]
    }
}

impl Differentiable for VectorField {
    type Value = CVec3;
    fn derivative_along(&self, x: &Vec3, d: &Vec3) -> CVec3 {
        let j = self.jacobian(x);
        [
            j[0][0] * d[0] + j[0][1] * d[1] + j[0][2] * d[2],
            j[1][0] * d[0] + j[1][1] * d[1] + j[1][2] * d[2],
            j[2][0] * d[0] + j[2][1] * d[1] + j[2][2] * d[2],
        ]
    }
}

/// `partial_b u = (b . grad) u`, componentwise for vector fields.
#[derive(Debug, Clone, Copy)]
pub struct DirectionalDerivative<'a, F> {
    field: &'a F,
    flow: &'a Flow,
}

impl<F: Differentiable> DirectionalDerivative<'_, F> {
    pub fn eval(&self, x: &Vec3) -> F::Value {
        self.field.derivative_along(x, &self.flow.velocity(x))
    }
}

pub fn directional_derivative<'a, F: Differentiable>(field: &'a F, flow: &'a Flow) -> DirectionalDerivative<'a, F> {
    DirectionalDerivative { field, flow }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fields_vanish_outside_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = ScalarField::random(&mut rng, Support::Annulus { inner: 1.0, outer: 2.0 }, 2);
        let v = VectorField::random(&mut rng, Support::Ball { radius: 1.5 }, 2);
        for x in [[0.5, 0.0, 0.0], [0.0, 2.1, 0.0], [0.0, 0.0, 1.0]] {
            assert_eq!(s.value(&x), CZERO);
            assert_eq!(s.grad(&x), [CZERO; 3]);
        }
        assert_eq!(v.value(&[1.6, 0.0, 0.0]), [CZERO; 3]);
        assert_eq!(v.div(&[0.0, 1.5, 0.0]), CZERO);
    }

    #[test]
    fn directional_derivative_of_x1_bump_along_e1() {
        // u = x_1 B(x), b = e_1: d_b u = B + x_1 dB/dx_1.
        let support = Support::Ball { radius: 2.0 };
        let u = ScalarField::new(Polynomial::monomial(c(1.0, 0.0), [1, 0, 0]), support);
        let flow = Flow::Uniform { velocity: [1.0, 0.0, 0.0] };
        let d = directional_derivative(&u, &flow);
        let bump = Bump::new(support);
        let x = [0.4, -0.3, 0.7];
        let expect = bump.value(&x) + x[0] * bump.grad(&x)[0];
        assert!((d.eval(&x) - expect).norm() < 1e-15);
    }

    #[test]
    fn directional_derivative_zero_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = VectorField::random(&mut rng, Support::Ball { radius: 1.0 }, 2);
        let d = directional_derivative(&v, &Flow::None);
        assert_eq!(d.eval(&[0.1, 0.2, 0.3]), [CZERO; 3]);

        // Constant vector times a bump that is flat near the origin: derivative
        // of the constant part vanishes, so only the bump gradient term remains
        // which is zero at the origin.
        let u = VectorField::new(
            [
                Polynomial::constant(c(1.0, 0.0)),
                Polynomial::constant(c(0.0, 2.0)),
                Polynomial::zero(),
            ],
            Support::Ball { radius: 1.0 },
        );
        let flow = Flow::Uniform { velocity: [0.3, -0.2, 0.5] };
        let dd = directional_derivative(&u, &flow).eval(&[0.0, 0.0, 0.0]);
        assert!(dd.iter().all(|z| z.norm() < 1e-15));
    }
}
