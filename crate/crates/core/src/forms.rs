//! Quadrature evaluation of the sesquilinear forms on smooth test fields, and
//! checks of the identities they satisfy.
//!
//! Inner products are `<u, u'> = int rho u . conj(u')`; the conjugate always
//! falls on the second argument (see [`CONJUGATE_SECOND`]).

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::background::{point_jet, BackgroundModel, ModelError};
use crate::calculus::bump::Support;
use crate::calculus::fields::{ScalarField, VectorField};
use crate::calculus::quadrature::{angular_rule, composite_gauss, QuadratureRule, RuleOrder};
use crate::math::{cabs, cis, rcross, rdot, CMat3, CVec3, CompensatedSum, Mat3, Vec3, I, PI};

/// Flip to conjugate the first argument instead.
pub const CONJUGATE_SECOND: bool = true;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn pair(a: Complex64, b: Complex64) -> Complex64 {
    if CONJUGATE_SECOND {
        a * b.conj()
    } else {
        a.conj() * b
    }
}

#[inline]
fn vpair(a: &CVec3, b: &CVec3) -> Complex64 {
    pair(a[0], b[0]) + pair(a[1], b[1]) + pair(a[2], b[2])
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("support radius {radius} exceeds quadrature domain R_out = {r_out}")]
    SupportExceedsDomain { radius: f64, r_out: f64 },
    #[error("no surface rule on the coupling sphere")]
    MissingSurfaceRule,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("m2 + i omega gamma singular at r = {r}")]
    Singular { r: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Displacement and gravity perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: VectorField,
    pub psi: ScalarField,
}

impl FieldPair {
    pub fn new(u: VectorField, psi: ScalarField) -> Self {
        Self { u, psi }
    }

    pub fn cowling(u: VectorField) -> Self {
        Self::new(u, ScalarField::zero())
    }

    pub fn gravity_only(psi: ScalarField) -> Self {
        Self::new(VectorField::zero(), psi)
    }

    fn supports(&self) -> impl Iterator<Item = Support> + '_ {
        let u = (!self.u.is_zero()).then_some(self.u.support);
        let p = (!self.psi.is_zero()).then_some(self.psi.support);
        u.into_iter().chain(p)
    }
}

/// Interior displacement and exterior scalar potential of the coupled
/// formulation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPair {
    pub u: VectorField,
    pub v: ScalarField,
}

impl CoupledPair {
    pub fn new(u: VectorField, v: ScalarField) -> Self {
        Self { u, v }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormContext {
    pub model: BackgroundModel,
    pub r_out: f64,
    pub order: RuleOrder,
    surface: Option<QuadratureRule>,
}

impl FormContext {
    pub fn new(model: BackgroundModel, r_out: f64, order: RuleOrder) -> Result<Self, FormError> {
        if !(r_out > model.r2 && r_out.is_finite()) {
            return Err(FormError::Precondition(alloc::format!(
                "R_out = {r_out} must exceed r2 = {}",
                model.r2
            )));
        }
        let surface = Some(QuadratureRule::sphere(model.r2, order));
        Ok(Self {
            model,
            r_out,
            order,
            surface,
        })
    }

    pub fn without_surface_rule(mut self) -> Self {
        self.surface = None;
        self
    }

    /// Same context with twice the radial panels and a finer angular rule.
    pub fn refined(&self) -> Self {
        let order = self.order.doubled();
        Self {
            model: self.model.clone(),
            r_out: self.r_out,
            order,
            surface: self.surface.as_ref().map(|_| QuadratureRule::sphere(self.model.r2, order)),
        }
    }

    fn check_supports<'a>(&self, it: impl Iterator<Item = Support> + 'a) -> Result<(), FormError> {
        for s in it {
            if s.outer() > self.r_out {
                return Err(FormError::SupportExceedsDomain {
                    radius: s.outer(),
                    r_out: self.r_out,
                });
            }
        }
        Ok(())
    }

    /// Radial rule on `[lo, hi]` with breakpoints at `r1`, `r2` and the
    /// support edges, skipping segments where no product is active.
    fn radial_rule(&self, lo: f64, hi: f64, left: &[Support], right: &[Support]) -> Vec<(f64, f64)> {
        let mut breaks = alloc::vec![lo, hi, self.model.r1, self.model.r2];
        for s in left.iter().chain(right) {
            breaks.push(s.inner());
            breaks.push(s.outer());
        }
        breaks.retain(|&b| b >= lo && b <= hi);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let active = |r: f64| {
            left.iter().any(|s| s.contains_radius(r)) && right.iter().any(|s| s.contains_radius(r))
        };
        let mut out = Vec::new();
        for seg in breaks.windows(2) {
            if !active(0.5 * (seg[0] + seg[1])) {
                continue;
            }
            for (r, w) in composite_gauss(seg[0], seg[1], self.order.radial_panels, self.order.radial_nodes) {
                out.push((r, w * r * r));
            }
        }
        out
    }
}

/// Per-term breakdown of a form value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FormTerms {
    /// `<c^2 div u, div u'>`, or `<c^2 (div + q.) u, (div + q.) u'>` in the
    /// reformulated representation.
    pub divergence: Complex64,
    /// `<rho^-1 grad p . u, div u'> + <div u, rho^-1 grad p . u'>`; zero in the
    /// reformulated representation.
    pub pressure: Complex64,
    /// `-<(omega + i d_b + i Omega x) u, (omega + i d_b + i Omega x) u'>`.
    pub kinetic: Complex64,
    /// `<(rho^-1 hess p - hess phi) u, u'>`, or `-<m1 u, u'>`.
    pub potential: Complex64,
    /// `-i omega <gamma u, u'>`.
    pub damping: Complex64,
    /// `-<grad psi, u'> - <u, grad psi'>`.
    pub gravity_coupling: Complex64,
    /// `(4 pi G)^-1 int grad psi . conj(grad psi')`, unweighted.
    pub gravity_self: Complex64,
}

impl FormTerms {
    pub fn total(&self) -> Complex64 {
        self.divergence
            + self.pressure
            + self.kinetic
            + self.potential
            + self.damping
            + self.gravity_coupling
            + self.gravity_self
    }

    pub fn gravity(&self) -> Complex64 {
        self.gravity_coupling + self.gravity_self
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Representation {
    Direct,
    Reform,
}

struct Local {
    u: CVec3,
    div: Complex64,
    kin: CVec3,
    grad_psi: CVec3,
}

fn local(model: &BackgroundModel, f: &FieldPair, x: &Vec3, b: &Vec3) -> Local {
    let (u, div, kin) = if f.u.is_zero() || !f.u.support.contains_radius(crate::math::norm(x)) {
        ([ZERO; 3], ZERO, [ZERO; 3])
    } else {
        let (u, j) = f.u.value_and_jacobian(x);
        let div = j[0][0] + j[1][1] + j[2][2];
        let rot = rcross(&model.rotation, &u);
        let mut kin = [ZERO; 3];
        for i in 0..3 {
            let db = j[i][0] * b[0] + j[i][1] * b[1] + j[i][2] * b[2];
            kin[i] = u[i] * model.omega + I * (db + rot[i]);
        }
        (u, div, kin)
    };
    let grad_psi = f.psi.grad(x);
    Local { u, div, kin, grad_psi }
}

fn eval_terms(ctx: &FormContext, a: &FieldPair, b: &FieldPair, rep: Representation) -> Result<FormTerms, FormError> {
    let left: Vec<Support> = a.supports().collect();
    let right: Vec<Support> = b.supports().collect();
    ctx.check_supports(left.iter().chain(&right).copied())?;
    let model = &ctx.model;
    let radial = ctx.radial_rule(0.0, ctx.r_out, &left, &right);
    let angular = angular_rule(ctx.order.angular_degree);
    let inv_4pig = 1.0 / (4.0 * PI * model.gravity);

    let mut sums = [CompensatedSum::new(); 7];
    for &(r, wr) in &radial {
        let p_jet = model.p.jet(r);
        let phi_jet = model.phi.jet(r);
        let mut shell = [ZERO; 7];
        for an in &angular {
            let x = [r * an.dir[0], r * an.dir[1], r * an.dir[2]];
            let c = model.coefficients_at(&x);
            let bf = model.b.velocity(&x);
            let l = local(model, a, &x, &bf);
            let m = local(model, b, &x, &bf);
            let rho = c.rho;
            let c2 = c.cs * c.cs;
            let mut t = [ZERO; 7];
            match rep {
                Representation::Direct => {
                    let p = point_jet(p_jet, &x);
                    let phi = point_jet(phi_jet, &x);
                    t[0] = pair(l.div, m.div) * (rho * c2);
                    t[1] = pair(rdot(&p.grad, &l.u), m.div) + pair(l.div, rdot(&p.grad, &m.u));
                    let h: Mat3 = p.hess - rho * phi.hess;
                    t[3] = vpair(&h.mul_cvec(&l.u), &m.u);
                }
                Representation::Reform => {
                    let dl = l.div + rdot(&c.q, &l.u);
                    let dm = m.div + rdot(&c.q, &m.u);
                    t[0] = pair(dl, dm) * (rho * c2);
                    t[3] = -vpair(&c.m1.mul_cvec(&l.u), &m.u) * rho;
                }
            }
            t[2] = -vpair(&l.kin, &m.kin) * rho;
            t[4] = -I * (model.omega * rho * c.gamma) * vpair(&l.u, &m.u);
            t[5] = -(vpair(&l.grad_psi, &m.u) + vpair(&l.u, &m.grad_psi)) * rho;
            t[6] = vpair(&l.grad_psi, &m.grad_psi) * inv_4pig;
            for k in 0..7 {
                shell[k] += t[k] * an.weight;
            }
        }
        for k in 0..7 {
            sums[k].add(shell[k] * wr);
        }
    }
    let v: Vec<Complex64> = sums.iter().map(|s| s.value()).collect();
    Ok(FormTerms {
        divergence: v[0],
        pressure: v[1],
        kinetic: v[2],
        potential: v[3],
        damping: v[4],
        gravity_coupling: v[5],
        gravity_self: v[6],
    })
}

/// Terms of `a((u, psi), (u', psi'))` built from the raw derivatives of `p`
/// and `phi`.
pub fn eval_a_terms(ctx: &FormContext, a: &FieldPair, b: &FieldPair) -> Result<FormTerms, FormError> {
    eval_terms(ctx, a, b, Representation::Direct)
}

pub fn eval_a(ctx: &FormContext, a: &FieldPair, b: &FieldPair) -> Result<Complex64, FormError> {
    eval_a_terms(ctx, a, b).map(|t| t.total())
}

/// Terms of the same form in the `(div + q.)`, `m1` representation.
pub fn eval_a_reform_terms(ctx: &FormContext, a: &FieldPair, b: &FieldPair) -> Result<FormTerms, FormError> {
    eval_terms(ctx, a, b, Representation::Reform)
}

pub fn eval_a_reform(ctx: &FormContext, a: &FieldPair, b: &FieldPair) -> Result<Complex64, FormError> {
    eval_a_reform_terms(ctx, a, b).map(|t| t.total())
}

/// `a_Cow(u, u') = a((u, 0), (u', 0))`.
pub fn eval_a_cow(ctx: &FormContext, u: &VectorField, u2: &VectorField) -> Result<Complex64, FormError> {
    eval_a(ctx, &FieldPair::cowling(u.clone()), &FieldPair::cowling(u2.clone()))
}

/// Weighted integrals used for scales and norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldNorms {
    /// `||u||^2` in `L^2_rho`.
    pub l2_sq: f64,
    /// `<gamma u, u>`.
    pub gamma_sq: f64,
    /// `||c_s (div + q.) u||^2`.
    pub div_q_sq: f64,
    /// `||d_b u||^2`.
    pub flow_sq: f64,
}

pub fn field_norms(ctx: &FormContext, u: &VectorField) -> Result<FieldNorms, FormError> {
    ctx.check_supports(core::iter::once(u.support))?;
    let model = &ctx.model;
    let s = [u.support];
    let radial = ctx.radial_rule(0.0, ctx.r_out, &s, &s);
    let angular = angular_rule(ctx.order.angular_degree);
    let mut acc = [0.0f64; 4];
    for &(r, wr) in &radial {
        let mut shell = [0.0f64; 4];
        for an in &angular {
            let x = [r * an.dir[0], r * an.dir[1], r * an.dir[2]];
            let c = model.coefficients_at(&x);
            let (v, j) = u.value_and_jacobian(&x);
            let b = model.b.velocity(&x);
            let div = j[0][0] + j[1][1] + j[2][2];
            let dq = div + rdot(&c.q, &v);
            let mut db = 0.0;
            for row in j.iter() {
                let d = row[0] * b[0] + row[1] * b[1] + row[2] * b[2];
                db += d.norm_sqr();
            }
            let n2 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            let w = an.weight * c.rho;
            shell[0] += w * n2;
            shell[1] += w * c.gamma * n2;
            shell[2] += w * c.cs * c.cs * dq.norm_sqr();
            shell[3] += w * db;
        }
        for k in 0..4 {
            acc[k] += shell[k] * wr;
        }
    }
    Ok(FieldNorms {
        l2_sq: acc[0],
        gamma_sq: acc[1],
        div_q_sq: acc[2],
        flow_sq: acc[3],
    })
}

/// Breakdown of the coupled form.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CoupledTerms {
    /// `a_Cow` restricted to `B_r2`.
    pub interior: Complex64,
    /// `int_{dB_r2} (nu . u) conj(v') + v conj(nu . u')`.
    pub coupling: Complex64,
    /// `int (e^{2 eta}/rho) (m2 + i omega gamma)^-1 grad v . conj(grad v')`.
    pub exterior_grad: Complex64,
    /// `-int (e^{2 eta}/(c_s^2 rho)) v conj(v')`.
    pub exterior_mass: Complex64,
}

impl CoupledTerms {
    pub fn total(&self) -> Complex64 {
        self.interior + self.coupling + self.exterior_grad + self.exterior_mass
    }
}

/// `a_cp((u, v), (u', v'))`. Fields are restricted to their domains: `u` to
/// `B_r2` and `v` to its complement, so supports may straddle `r2` and
/// produce nonzero traces.
pub fn eval_a_cp_terms(ctx: &FormContext, a: &CoupledPair, b: &CoupledPair) -> Result<CoupledTerms, FormError> {
    let surface = ctx.surface.as_ref().ok_or(FormError::MissingSurfaceRule)?;
    let model = &ctx.model;
    let r2 = model.r2;
    let supports = [a.u.support, b.u.support, a.v.support, b.v.support];
    ctx.check_supports(supports.iter().copied())?;

    // Interior Cowling form on B_r2.
    let fa = FieldPair::cowling(a.u.clone());
    let fb = FieldPair::cowling(b.u.clone());
    let left: Vec<Support> = fa.supports().collect();
    let right: Vec<Support> = fb.supports().collect();
    let mut interior = CompensatedSum::new();
    let angular = angular_rule(ctx.order.angular_degree);
    for &(r, wr) in &ctx.radial_rule(0.0, r2, &left, &right) {
        let p_jet = model.p.jet(r);
        let phi_jet = model.phi.jet(r);
        let mut shell = ZERO;
        for an in &angular {
            let x = [r * an.dir[0], r * an.dir[1], r * an.dir[2]];
            let c = model.coefficients_at(&x);
            let bf = model.b.velocity(&x);
            let l = local(model, &fa, &x, &bf);
            let m = local(model, &fb, &x, &bf);
            let p = point_jet(p_jet, &x);
            let phi = point_jet(phi_jet, &x);
            let rho = c.rho;
            let h: Mat3 = p.hess - rho * phi.hess;
            let t = pair(l.div, m.div) * (rho * c.cs * c.cs)
                + pair(rdot(&p.grad, &l.u), m.div)
                + pair(l.div, rdot(&p.grad, &m.u))
                + vpair(&h.mul_cvec(&l.u), &m.u)
                - vpair(&l.kin, &m.kin) * rho
                - I * (model.omega * rho * c.gamma) * vpair(&l.u, &m.u);
            shell += t * an.weight;
        }
        interior.add(shell * wr);
    }

    // Surface coupling on the sphere |x| = r2.
    let mut coupling = CompensatedSum::new();
    for (x, w) in surface.nodes() {
        let n = crate::math::scale(1.0 / r2, &x);
        let nu_a = rdot(&n, &a.u.value(&x));
        let nu_b = rdot(&n, &b.u.value(&x));
        coupling.add((pair(nu_a, b.v.value(&x)) + pair(a.v.value(&x), nu_b)) * w);
    }

    // Exterior scalar form, unweighted.
    let left = [a.v.support];
    let right = [b.v.support];
    let active = !(a.v.is_zero() || b.v.is_zero());
    let mut grad = CompensatedSum::new();
    let mut mass = CompensatedSum::new();
    if active {
        for &(r, wr) in &ctx.radial_rule(r2, ctx.r_out, &left, &right) {
            let e2 = crate::math::exp(2.0 * model.eta(r)?);
            let mut sg = ZERO;
            let mut sm = ZERO;
            for an in &angular {
                let x = [r * an.dir[0], r * an.dir[1], r * an.dir[2]];
                let c = model.coefficients_at(&x);
                let m = c.m2.add(&CMat3::scalar(Complex64::new(0.0, model.omega * c.gamma)));
                let inv = m.inverse().ok_or(FormError::Singular { r })?;
                let ga = a.v.grad(&x);
                let gb = b.v.grad(&x);
                sg += vpair(&inv.mul_vec(&ga), &gb) * (an.weight / c.rho);
                sm -= pair(a.v.value(&x), b.v.value(&x)) * (an.weight / (c.cs * c.cs * c.rho));
            }
            grad.add(sg * e2 * wr);
            mass.add(sm * e2 * wr);
        }
    }

    Ok(CoupledTerms {
        interior: interior.value(),
        coupling: coupling.value(),
        exterior_grad: grad.value(),
        exterior_mass: mass.value(),
    })
}

pub fn eval_a_cp(ctx: &FormContext, a: &CoupledPair, b: &CoupledPair) -> Result<Complex64, FormError> {
    eval_a_cp_terms(ctx, a, b).map(|t| t.total())
}

/// Outcome of comparing two computed quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Relative tolerance of identity checks.
pub const IDENTITY_RTOL: f64 = 1e-9;
/// Absolute floor of identity checks.
pub const IDENTITY_ATOL: f64 = 1e-12;

impl IdentityReport {
    /// `rel_err = |lhs - rhs| / scale`; passes when `|lhs - rhs| <=
    /// max(IDENTITY_RTOL * scale, IDENTITY_ATOL)`.
    pub fn compare(identity: &str, lhs: Complex64, rhs: Complex64, scale: f64) -> Self {
        let abs_err = cabs(lhs - rhs);
        let rel_err = if scale > 0.0 { abs_err / scale } else { abs_err };
        Self {
            identity: String::from(identity),
            lhs,
            rhs,
            abs_err,
            rel_err,
            scale,
            pass: abs_err <= (IDENTITY_RTOL * scale).max(IDENTITY_ATOL),
        }
    }

    /// The pass rule of [`IdentityReport::compare`] with other tolerances.
    pub fn within(&self, rtol: f64, atol: f64) -> bool {
        self.abs_err <= (rtol * self.scale).max(atol)
    }
}

/// `eval_a` against `eval_a_reform`, relative to `|eval_a|`.
pub fn check_reformulation(ctx: &FormContext, a: &FieldPair, b: &FieldPair) -> Result<IdentityReport, FormError> {
    let lhs = eval_a(ctx, a, b)?;
    let rhs = eval_a_reform(ctx, a, b)?;
    Ok(IdentityReport::compare("a = a_reform", lhs, rhs, cabs(lhs)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImaginaryPartReport {
    /// `Im a((u,psi),(u,psi))` against `-omega <gamma u, u>`, scaled by
    /// `|omega| <gamma u, u>`.
    #[serde(flatten)]
    pub identity: IdentityReport,
    pub im_gravity: f64,
    pub im_kinetic: f64,
    /// Gravity and kinetic parts are real within the absolute floor.
    pub real_parts_pass: bool,
    pub note: Option<String>,
}

pub fn check_identity_imaginary(ctx: &FormContext, u: &VectorField, psi: &ScalarField) -> Result<ImaginaryPartReport, FormError> {
    let f = FieldPair::new(u.clone(), psi.clone());
    let terms = eval_a_terms(ctx, &f, &f)?;
    let norms = if u.is_zero() {
        FieldNorms::default()
    } else {
        field_norms(ctx, u)?
    };
    let omega = ctx.model.omega;
    let lhs = Complex64::new(terms.total().im, 0.0);
    let rhs = Complex64::new(-omega * norms.gamma_sq, 0.0);
    let scale = omega.abs() * norms.gamma_sq;
    let mut identity = IdentityReport::compare("Im a((u,psi),(u,psi)) = -omega <gamma u, u>", lhs, rhs, scale);
    let im_gravity = terms.gravity().im;
    let im_kinetic = terms.kinetic.im;
    let real_scale = cabs(terms.gravity()).max(cabs(terms.kinetic)).max(1.0);
    let real_parts_pass = im_gravity.abs() <= IDENTITY_ATOL * real_scale && im_kinetic.abs() <= IDENTITY_ATOL * real_scale;
    let note = if omega == 0.0 {
        identity.pass = false;
        Some(String::from("omega != 0 required"))
    } else {
        None
    };
    Ok(ImaginaryPartReport {
        identity,
        im_gravity,
        im_kinetic,
        real_parts_pass,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSymmetryReport {
    /// `<i d_b u, u'>` against `<u, i d_b u'>`.
    #[serde(flatten)]
    pub identity: IdentityReport,
    /// `-i int div(rho b) u . conj(u')`, the difference predicted by
    /// integration by parts.
    pub predicted_difference: Complex64,
    /// Error of the integration-by-parts formula itself.
    pub ibp_abs_err: f64,
    /// Largest sampled `|div(rho b)|`.
    pub div_rho_b_max: f64,
    /// `div(rho b)` exceeded `1e-10`; the symmetry check does not apply.
    pub skipped: bool,
}

/// Threshold above which the flow is treated as violating `div(rho b) = 0`.
pub const DIV_RHO_B_TOL: f64 = 1e-10;

pub fn check_flow_symmetry(ctx: &FormContext, u: &VectorField, u2: &VectorField) -> Result<FlowSymmetryReport, FormError> {
    ctx.check_supports([u.support, u2.support].into_iter())?;
    let model = &ctx.model;
    let left = [u.support];
    let right = [u2.support];
    let radial = ctx.radial_rule(0.0, ctx.r_out, &left, &right);
    let angular = angular_rule(ctx.order.angular_degree);
    let mut sums = [CompensatedSum::new(); 3];
    let mut norm_sums = [0.0f64; 4];
    let mut div_max = 0.0f64;
    for &(r, wr) in &radial {
        let rho_jet = model.rho.jet(r);
        let mut shell = [ZERO; 3];
        let mut nshell = [0.0f64; 4];
        for an in &angular {
            let x = [r * an.dir[0], r * an.dir[1], r * an.dir[2]];
            let rho = rho_jet.value;
            let grad_rho = point_jet(rho_jet, &x).grad;
            let b = model.b.velocity(&x);
            let div_rho_b = model.b.div_rho_b(&x, rho, &grad_rho);
            div_max = div_max.max(div_rho_b.abs());
            let (v1, j1) = u.value_and_jacobian(&x);
            let (v2, j2) = u2.value_and_jacobian(&x);
            let mut d1 = [ZERO; 3];
            let mut d2 = [ZERO; 3];
            for i in 0..3 {
                d1[i] = I * (j1[i][0] * b[0] + j1[i][1] * b[1] + j1[i][2] * b[2]);
                d2[i] = I * (j2[i][0] * b[0] + j2[i][1] * b[1] + j2[i][2] * b[2]);
            }
            let w = an.weight;
            shell[0] += vpair(&d1, &v2) * (rho * w);
            shell[1] += vpair(&v1, &d2) * (rho * w);
            shell[2] += -I * vpair(&v1, &v2) * (div_rho_b * w);
            let sq = |v: &CVec3| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            nshell[0] += rho * w * sq(&d1);
            nshell[1] += rho * w * sq(&v2);
            nshell[2] += rho * w * sq(&v1);
            nshell[3] += rho * w * sq(&d2);
        }
        for k in 0..3 {
            sums[k].add(shell[k] * wr);
        }
        for k in 0..4 {
            norm_sums[k] += nshell[k] * wr;
        }
    }
    let lhs = sums[0].value();
    let rhs = sums[1].value();
    let predicted = sums[2].value();
    let scale = libm::sqrt(norm_sums[0] * norm_sums[1]) + libm::sqrt(norm_sums[2] * norm_sums[3]);
    let skipped = div_max > DIV_RHO_B_TOL;
    let mut identity = IdentityReport::compare("<i d_b u, u'> = <u, i d_b u'>", lhs, rhs, scale);
    if skipped {
        identity.pass = false;
    }
    Ok(FlowSymmetryReport {
        identity,
        predicted_difference: predicted,
        ibp_abs_err: cabs(lhs - rhs - predicted),
        div_rho_b_max: div_max,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoercivityReport {
    /// Best angle; the rotation applied is `exp(-i beta_hat sign(omega))`.
    pub beta_hat: f64,
    /// `Re(exp(-i beta_hat sign(omega)) a_Cow(u,u)) / energy`.
    pub margin: f64,
    pub rotated_real: f64,
    pub a_cow: Complex64,
    /// `||c_s (div + q.) u||^2 + ||u||^2`.
    pub energy: f64,
    pub div_q_sq: f64,
    pub l2_sq: f64,
    pub angle_grid: usize,
    pub zero_field: bool,
}

/// Scans `angle_grid` midpoints of `(-pi/2, pi/2)`.
pub fn check_atmosphere_coercivity(ctx: &FormContext, u: &VectorField, angle_grid: usize) -> Result<CoercivityReport, FormError> {
    if !u.is_zero() && u.support.inner() < ctx.model.r2 {
        return Err(FormError::Precondition(alloc::format!(
            "support starts at {} inside B_r2 (r2 = {})",
            u.support.inner(),
            ctx.model.r2
        )));
    }
    let n = angle_grid.max(1);
    if u.is_zero() {
        return Ok(CoercivityReport {
            beta_hat: 0.0,
            margin: 0.0,
            rotated_real: 0.0,
            a_cow: ZERO,
            energy: 0.0,
            div_q_sq: 0.0,
            l2_sq: 0.0,
            angle_grid: n,
            zero_field: true,
        });
    }
    let a = eval_a_cow(ctx, u, u)?;
    let norms = field_norms(ctx, u)?;
    let energy = norms.div_q_sq + norms.l2_sq;
    let s = ctx.model.sign_omega();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let beta = -PI / 2.0 + PI * (k as f64 + 0.5) / n as f64;
        let re = (cis(-beta * s) * a).re;
        if re > best.0 {
            best = (re, beta);
        }
    }
    Ok(CoercivityReport {
        beta_hat: best.1,
        margin: best.0 / energy,
        rotated_real: best.0,
        a_cow: a,
        energy,
        div_q_sq: norms.div_q_sq,
        l2_sq: norms.l2_sq,
        angle_grid: n,
        zero_field: false,
    })
}

/// Exterior scalar form of [`eval_a_cp`] on radial `v`, `v'` as a 1D
/// integral `4 pi int (E v_r v'_r / M - F v v') r^2 dr` with `M = m2_rr + i
/// omega gamma`; valid for `Omega = 0`. Used to cross-check the 3D quadrature.
pub fn exterior_radial_integral(
    ctx: &FormContext,
    v: impl Fn(f64) -> (Complex64, Complex64),
    v2: impl Fn(f64) -> (Complex64, Complex64),
    lo: f64,
    hi: f64,
) -> Result<Complex64, FormError> {
    let model = &ctx.model;
    let mut acc = CompensatedSum::new();
    for (r, w) in composite_gauss(lo, hi, 4 * ctx.order.radial_panels, ctx.order.radial_nodes) {
        let e2 = crate::math::exp(2.0 * model.eta(r)?);
        let rho = model.rho.value(r);
        let c = model.cs.value(r);
        let m = model.radial_symbol(r);
        let (a, da) = v(r);
        let (b, db) = v2(r);
        let t = pair(da, db) * (e2 / rho) / m - pair(a, b) * (e2 / (c * c * rho));
        acc.add(t * (4.0 * PI * w * r * r));
    }
    Ok(acc.value())
}
