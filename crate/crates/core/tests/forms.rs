#![allow(clippy::needless_range_loop)]
mod common;

use common::*;
use galbrun_core::background::RadialProfile;
use galbrun_core::calculus::bump::{ShellBump, Support};
use galbrun_core::calculus::fields::{Polynomial, ScalarField, VectorField};
use galbrun_core::calculus::quadrature::{QuadratureRule, RuleOrder};
use galbrun_core::flow::Flow;
use galbrun_core::forms::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn ctx(model: galbrun_core::background::BackgroundModel) -> FormContext {
    FormContext::new(model, 2.0, RuleOrder::default()).unwrap()
}

fn cheap_ctx() -> FormContext {
    let order = RuleOrder {
        radial_nodes: 8,
        radial_panels: 2,
        angular_degree: 8,
    };
    FormContext::new(flowing_model(), 2.0, order).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn reformulation_identity_on_random_pairs() {
    let ctx = ctx(flowing_model());
    let mut g = rng(1);
    for k in 0..10 {
        let a = FieldPair::new(random_vector(&mut g, k), random_scalar(&mut g, k + 1));
        let b = FieldPair::new(random_vector(&mut g, k + 3), random_scalar(&mut g, k));
        let r = check_reformulation(&ctx, &a, &b).unwrap();
        assert!(r.pass && r.rel_err <= 1e-9, "{r:?}");
    }
}

#[test]
fn quadrature_is_converged() {
    let ctx = ctx(flowing_model());
    let fine = ctx.refined();
    let mut g = rng(2);
    for k in 0..4 {
        let a = FieldPair::new(random_vector(&mut g, k), random_scalar(&mut g, k));
        let b = FieldPair::new(random_vector(&mut g, k + 3), random_scalar(&mut g, k + 3));
        let x = eval_a(&ctx, &a, &b).unwrap();
        let y = eval_a(&fine, &a, &b).unwrap();
        assert!((x - y).norm() <= 1e-9 * y.norm(), "{x} vs {y}");
    }
}

#[test]
fn gravity_only_pairs_keep_only_the_self_term() {
    let ctx = ctx(flowing_model());
    let mut g = rng(3);
    let psi = random_scalar(&mut g, 3);
    let psi2 = random_scalar(&mut g, 0);
    let t = eval_a_terms(&ctx, &FieldPair::gravity_only(psi.clone()), &FieldPair::gravity_only(psi2.clone())).unwrap();
    assert_eq!(t.total(), t.gravity_self);
    assert!(t.gravity_self.norm() > 0.0);

    // Independent quadrature of (4 pi G)^-1 int grad psi . conj(grad psi').
    let rule = QuadratureRule::shells(
        &[0.0, 0.3, 0.45, 0.5, 1.0, 1.4, 2.0],
        RuleOrder::default().doubled(),
        galbrun_core::calculus::quadrature::Domain::Ball { radius: 2.0 },
    );
    let direct = galbrun_core::calculus::quadrature::integrate(&rule, |x| {
        let a = psi.grad(x);
        let b = psi2.grad(x);
        (0..3).map(|i| a[i] * b[i].conj()).sum::<Complex64>()
    }) / (4.0 * std::f64::consts::PI * ctx.model.gravity);
    assert!((direct - t.gravity_self).norm() <= 1e-9 * direct.norm());

    // a((0, psi), (0, psi)) = ||grad psi||^2 / (4 pi G) is real and positive.
    let s = eval_a(&ctx, &FieldPair::gravity_only(psi.clone()), &FieldPair::gravity_only(psi)).unwrap();
    assert!(s.re > 0.0 && s.im == 0.0);
}

#[test]
fn zero_fields_give_zero() {
    let ctx = ctx(flowing_model());
    let z = FieldPair::new(VectorField::zero(), ScalarField::zero());
    assert_eq!(eval_a(&ctx, &z, &z).unwrap(), c(0.0, 0.0));
    assert_eq!(eval_a_reform(&ctx, &z, &z).unwrap(), c(0.0, 0.0));
}

#[test]
fn support_beyond_r_out_is_rejected() {
    let ctx = ctx(flowing_model());
    let u = VectorField::radial(c(1.0, 0.0), Support::Annulus { inner: 1.0, outer: 2.5 });
    let e = eval_a_cow(&ctx, &u, &u).unwrap_err();
    assert!(matches!(e, FormError::SupportExceedsDomain { .. }));
}

#[test]
fn cowling_form_is_the_psi_free_restriction() {
    let ctx = ctx(flowing_model());
    let mut g = rng(4);
    let u = random_vector(&mut g, 3);
    let u2 = random_vector(&mut g, 1);
    let psi = random_scalar(&mut g, 3);
    let cow = eval_a_cow(&ctx, &u, &u2).unwrap();
    let full = eval_a_terms(&ctx, &FieldPair::new(u, psi.clone()), &FieldPair::new(u2, psi)).unwrap();
    assert!((full.total() - full.gravity() - cow).norm() <= 1e-12 * cow.norm());
}

#[test]
fn atmosphere_representation_matches_direct_quadrature() {
    let model = quiet_model();
    let ctx = ctx(model.clone());
    let mut g = rng(5);
    let u = random_vector(&mut g, 2);
    let a = eval_a_reform(&ctx, &FieldPair::cowling(u.clone()), &FieldPair::cowling(u.clone())).unwrap();
    let norms = field_norms(&ctx, &u).unwrap();
    let rule = QuadratureRule::shells(
        &[u.support.inner(), u.support.outer()],
        RuleOrder::default(),
        galbrun_core::calculus::quadrature::Domain::Ball { radius: 2.0 },
    );
    let m2 = galbrun_core::calculus::quadrature::integrate(&rule, |x| {
        let s = model.coefficients_at(x);
        let v = u.value(x);
        let mv = s.m2.mul_vec(&v);
        let q: Complex64 = (0..3).map(|i| mv[i] * v[i].conj()).sum();
        (q + Complex64::new(0.0, model.omega * s.gamma) * v.iter().map(|z| z.norm_sqr()).sum::<f64>()) * s.rho
    });
    let expected = Complex64::new(norms.div_q_sq, 0.0) - m2;
    assert!((a - expected).norm() <= 1e-9 * expected.norm(), "{a} vs {expected}");
}

#[test]
fn imaginary_part_is_minus_omega_gamma_norm() {
    let mut model = quiet_model();
    model.omega = 2.0;
    model.gamma = RadialProfile::constant(0.3);
    let ctx = ctx(model);
    let mut g = rng(6);
    let u = random_vector(&mut g, 3);
    let n = field_norms(&ctx, &u).unwrap().l2_sq;
    let u = u.axpy(Complex64::new(1.0 / n.sqrt() - 1.0, 0.0), &u);
    let psi = random_scalar(&mut g, 0);
    let r = check_identity_imaginary(&ctx, &u, &psi).unwrap();
    assert!(r.identity.pass && r.real_parts_pass, "{r:?}");
    // Sign frozen: Im a = -omega <gamma u, u> = -2 * 0.3.
    assert!((r.identity.lhs.re + 0.6).abs() <= 1e-9, "{r:?}");
}

#[test]
fn imaginary_identity_on_flowing_model() {
    let ctx = ctx(flowing_model());
    let mut g = rng(7);
    for k in 0..4 {
        let u = random_vector(&mut g, k);
        let psi = random_scalar(&mut g, k + 2);
        let r = check_identity_imaginary(&ctx, &u, &psi).unwrap();
        assert!(r.identity.pass && r.real_parts_pass, "{r:?}");
    }
}

#[test]
fn imaginary_part_vanishes_without_displacement() {
    let ctx = ctx(flowing_model());
    let psi = random_scalar(&mut rng(8), 3);
    let r = check_identity_imaginary(&ctx, &VectorField::zero(), &psi).unwrap();
    assert_eq!(r.identity.lhs.re, 0.0);
    assert!(r.identity.pass);
}

#[test]
fn zero_frequency_is_flagged() {
    let mut model = quiet_model();
    model.omega = 0.0;
    let ctx = ctx(model);
    let u = random_vector(&mut rng(9), 1);
    let r = check_identity_imaginary(&ctx, &u, &ScalarField::zero()).unwrap();
    assert!(!r.identity.pass);
    assert_eq!(r.note.as_deref(), Some("omega != 0 required"));
}

#[test]
fn toroidal_flow_is_symmetric() {
    let ctx = ctx(flowing_model());
    let mut g = rng(10);
    for _ in 0..3 {
        let u = VectorField::random(&mut g, Support::Ball { radius: 0.8 }, 2);
        let u2 = VectorField::random(&mut g, Support::Ball { radius: 0.7 }, 2);
        let r = check_flow_symmetry(&ctx, &u, &u2).unwrap();
        assert!(!r.skipped && r.identity.pass, "{r:?}");
        assert!(r.identity.lhs.norm() > 1e6 * r.identity.abs_err.max(1e-300), "{r:?}");
    }
}

#[test]
fn no_flow_gives_zero_pairings() {
    let ctx = ctx(quiet_model());
    let mut g = rng(11);
    let u = random_vector(&mut g, 0);
    let r = check_flow_symmetry(&ctx, &u, &u).unwrap();
    assert_eq!(r.identity.lhs, c(0.0, 0.0));
    assert_eq!(r.identity.rhs, c(0.0, 0.0));
}

#[test]
fn compressive_flow_violation_follows_integration_by_parts() {
    let mut model = quiet_model();
    model.b = Flow::Radial {
        amplitude: 0.3,
        radius: 0.45,
    };
    let ctx = ctx(model);
    let mut g = rng(12);
    let u = VectorField::random(&mut g, Support::Ball { radius: 0.8 }, 2);
    let u2 = VectorField::random(&mut g, Support::Ball { radius: 0.7 }, 2);
    let r = check_flow_symmetry(&ctx, &u, &u2).unwrap();
    assert!(r.skipped && !r.identity.pass);
    let diff = r.identity.lhs - r.identity.rhs;
    assert!(diff.norm() > 1e-3 * r.identity.lhs.norm(), "{r:?}");
    assert!(r.ibp_abs_err <= 1e-9 * diff.norm(), "{r:?}");
}

#[test]
fn atmosphere_coercivity_has_positive_margin() {
    let ctx = ctx(quiet_model());
    let mut g = rng(13);
    for _ in 0..3 {
        let u = random_vector(&mut g, 2);
        let r = check_atmosphere_coercivity(&ctx, &u, 2000).unwrap();
        assert!(r.margin > 0.0, "{r:?}");
    }
}

#[test]
fn coercivity_margin_grows_with_damping() {
    let u = random_vector(&mut rng(14), 2);
    let mut last = f64::NEG_INFINITY;
    for gamma in [0.05, 0.2, 0.8, 3.2] {
        let mut model = quiet_model();
        model.gamma = RadialProfile::constant(gamma);
        let r = check_atmosphere_coercivity(&ctx(model), &u, 2000).unwrap();
        assert!(r.margin > last, "gamma {gamma}: {} <= {last}", r.margin);
        last = r.margin;
    }
}

#[test]
fn coercivity_degenerate_and_invalid_inputs() {
    let ctx = ctx(quiet_model());
    let r = check_atmosphere_coercivity(&ctx, &VectorField::zero(), 100).unwrap();
    assert!(r.zero_field);
    let inside = random_vector(&mut rng(15), 1);
    assert!(check_atmosphere_coercivity(&ctx, &inside, 100).is_err());
}

fn radial_scalar(inner: f64, outer: f64, coeff: f64) -> ScalarField {
    ScalarField::new(Polynomial::constant(c(coeff, 0.0)), Support::Annulus { inner, outer })
}

#[test]
fn coupled_form_without_v_is_interior_cowling() {
    let ctx = ctx(flowing_model());
    let mut g = rng(16);
    let u = VectorField::random(&mut g, Support::Ball { radius: 0.9 }, 2);
    let u2 = VectorField::random(&mut g, Support::Annulus { inner: 0.2, outer: 0.95 }, 2);
    let t = eval_a_cp_terms(&ctx, &CoupledPair::new(u.clone(), ScalarField::zero()), &CoupledPair::new(u2.clone(), ScalarField::zero())).unwrap();
    let cow = eval_a_cow(&ctx, &u, &u2).unwrap();
    assert_eq!(t.coupling, c(0.0, 0.0));
    assert_eq!(t.exterior_grad + t.exterior_mass, c(0.0, 0.0));
    assert!((t.interior - cow).norm() <= 1e-12 * cow.norm());
}

#[test]
fn zero_trace_kills_coupling_terms() {
    let ctx = ctx(quiet_model());
    let mut g = rng(17);
    let u = VectorField::random(&mut g, Support::Ball { radius: 0.9 }, 2);
    let v = radial_scalar(0.8, 1.7, 1.0);
    let t = eval_a_cp_terms(&ctx, &CoupledPair::new(u.clone(), v.clone()), &CoupledPair::new(u, v)).unwrap();
    assert_eq!(t.coupling, c(0.0, 0.0));
    assert!(t.exterior_grad.norm() > 0.0);
}

#[test]
fn coupling_terms_use_both_traces() {
    let ctx = ctx(quiet_model());
    let u = VectorField::radial(c(1.0, 0.5), Support::Annulus { inner: 0.6, outer: 1.3 });
    let v = radial_scalar(0.7, 1.6, 2.0);
    let t = eval_a_cp_terms(&ctx, &CoupledPair::new(u.clone(), v.clone()), &CoupledPair::new(u, v)).unwrap();
    // u = (1 + 0.5i) B_u(r) x, so nu . u = (1 + 0.5i) r2 B_u(r2); v = 2 B_v(r2).
    let r2 = 1.0;
    let bu = ShellBump::new(0.6, 1.3).radial(r2).0;
    let bv = ShellBump::new(0.7, 1.6).radial(r2).0;
    let nu = c(1.0, 0.5) * r2 * bu;
    let vv = c(2.0 * bv, 0.0);
    let expected = 4.0 * std::f64::consts::PI * r2 * r2 * (nu * vv.conj() + vv * nu.conj());
    assert!((t.coupling - expected).norm() <= 1e-12 * expected.norm());
}

#[test]
fn exterior_form_matches_radial_integral() {
    let ctx = ctx(quiet_model());
    let (a, b) = (0.8, 1.9);
    let v = radial_scalar(a, b, 1.0);
    let v2 = ScalarField::new(Polynomial::constant(c(0.5, 0.0)), Support::Annulus { inner: 0.9, outer: 1.7 });
    let t = eval_a_cp_terms(&ctx, &CoupledPair::new(VectorField::zero(), v.clone()), &CoupledPair::new(VectorField::zero(), v2)).unwrap();
    let f = |r: f64| {
        let (x, dx, _) = ShellBump::new(a, b).radial(r);
        (c(x, 0.0), c(dx, 0.0))
    };
    let f2 = |r: f64| {
        let (x, dx, _) = ShellBump::new(0.9, 1.7).radial(r);
        (c(0.5 * x, 0.0), c(0.5 * dx, 0.0))
    };
    let reference = exterior_radial_integral(&ctx, f, f2, 1.0, 1.7).unwrap();
    let got = t.exterior_grad + t.exterior_mass;
    assert!((got - reference).norm() <= 1e-9 * reference.norm(), "{got} vs {reference}");
}

#[test]
fn exterior_gram_matrix_is_complex_symmetric() {
    let ctx = ctx(quiet_model());
    let basis: Vec<ScalarField> = vec![
        radial_scalar(0.9, 1.5, 1.0),
        ScalarField::new(Polynomial::monomial(c(1.0, 0.0), [1, 0, 0]), Support::Annulus { inner: 0.95, outer: 1.8 }),
        ScalarField::new(Polynomial::monomial(c(1.0, 0.0), [1, 1, 0]).plus(&Polynomial::constant(c(0.3, 0.0))), Support::Annulus { inner: 1.1, outer: 1.9 }),
    ];
    let n = basis.len();
    let mut m = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let t = eval_a_cp_terms(
                &ctx,
                &CoupledPair::new(VectorField::zero(), basis[i].clone()),
                &CoupledPair::new(VectorField::zero(), basis[j].clone()),
            )
            .unwrap();
            m[i][j] = t.exterior_grad + t.exterior_mass;
        }
    }
    let mut hermitian_defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            assert!((m[i][j] - m[j][i]).norm() <= 1e-12 * m[i][i].norm().max(1.0));
            hermitian_defect = hermitian_defect.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    assert!(hermitian_defect > 1e-6);
}

#[test]
fn missing_surface_rule_is_an_error() {
    let ctx = ctx(quiet_model()).without_surface_rule();
    let z = CoupledPair::new(VectorField::zero(), ScalarField::zero());
    assert!(matches!(eval_a_cp(&ctx, &z, &z), Err(FormError::MissingSurfaceRule)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn form_is_sesquilinear(seed in 0u64..1000, ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
        let ctx = cheap_ctx();
        let mut g = rng(seed);
        let alpha = c(ar, ai);
        let u = random_vector(&mut g, 3);
        let u2 = VectorField::random(&mut g, u.support, 2);
        let w = random_vector(&mut g, 0);
        let psi = random_scalar(&mut g, 1);
        let psi2 = ScalarField::random(&mut g, psi.support, 2);
        let phi = random_scalar(&mut g, 3);
        let comb = FieldPair::new(u.axpy(alpha, &u2), psi.axpy(alpha, &psi2));
        let p1 = FieldPair::new(u, psi);
        let p2 = FieldPair::new(u2, psi2);
        let q = FieldPair::new(w, phi);

        let lhs = eval_a(&ctx, &comb, &q).unwrap();
        let rhs = alpha * eval_a(&ctx, &p1, &q).unwrap() + eval_a(&ctx, &p2, &q).unwrap();
        let scale = eval_a(&ctx, &p1, &q).unwrap().norm() * alpha.norm() + eval_a(&ctx, &p2, &q).unwrap().norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));

        let lhs = eval_a(&ctx, &q, &comb).unwrap();
        let rhs = alpha.conj() * eval_a(&ctx, &q, &p1).unwrap() + eval_a(&ctx, &q, &p2).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
    }
}
