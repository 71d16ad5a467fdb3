mod common;

use std::f64::consts::PI;

use common::*;
use galbrun_core::background::{BackgroundModel, RadialProfile};
use galbrun_core::radial_solver::*;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn source() -> SourceSpec {
    SourceSpec::ShellBump {
        re: 1.0,
        im: 0.0,
        inner: 0.2,
        outer: 0.8,
    }
}

fn zero(_: f64) -> Complex64 {
    c(0.0, 0.0)
}

fn scenario() -> MmsScenario {
    MmsScenario::new(standard_model(), 3.0, c(1.0, 0.5), c(-0.3, 0.2), c(0.7, -0.4)).unwrap()
}

fn constant_model() -> BackgroundModel {
    let mut m = standard_model();
    m.rho = RadialProfile::constant(1.0);
    m.p = RadialProfile::constant(1.0);
    m.cs = RadialProfile::constant(1.0);
    m.phi = RadialProfile::constant(0.0);
    m.new().unwrap()
}

#[test]
fn single_element_matches_hand_integrals() {
    let model = constant_model();
    let mi = Mesh1D::uniform(0.0, 1.0, 1).unwrap();
    let me = Mesh1D::uniform(1.0, 2.0, 1).unwrap();
    let sys = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap();
    let m = c(1.0, 0.1);
    let a = &sys.matrix;
    // Interior: 4 pi int_0^1 [9 - M r^2] r^2 dr.
    assert!((a.get(1, 1) - (3.0 - m / 5.0) * (4.0 * PI)).norm() < 1e-13);
    // Surface coupling 4 pi r2^2.
    assert!((a.get(1, 2) - c(4.0 * PI, 0.0)).norm() < 1e-13);
    assert!((a.get(2, 1) - c(4.0 * PI, 0.0)).norm() < 1e-13);
    // Exterior: 4 pi int_1^2 [1/M - (2 - r)^2] r^2 dr.
    let expected = (c(7.0 / 3.0, 0.0) / m - 8.0 / 15.0) * (4.0 * PI);
    assert!((a.get(2, 2) - expected).norm() < 1e-13);
}

#[test]
fn hand_integral_before_constraints() {
    // Interface node of a two-element reference mesh on [0, 2].
    let model = constant_model();
    let mesh = Mesh1D::uniform(0.0, 2.0, 2).unwrap();
    let sys = assemble_reference(&model, &mesh, &zero, &AssemblyOptions::default()).unwrap();
    let m = c(1.0, 0.1);
    // [1,2]: phi = 2 - r, r D phi = 4 - 3r, int (4 - 3r)^2 = 1,
    // int (2 - r)^2 r^2 = 8/15.
    let right = c(1.0, 0.0) - m * (8.0 / 15.0);
    let expected = ((3.0 - m / 5.0) + right) * (4.0 * PI);
    assert!((sys.matrix.get(1, 1) - expected).norm() < 1e-12, "{} vs {expected}", sys.matrix.get(1, 1));
}

#[test]
fn zero_source_gives_zero_solution() {
    let model = standard_model();
    let opts = AssemblyOptions::default();
    let mi = Mesh1D::uniform(0.0, 1.0, 40).unwrap();
    let me = Mesh1D::uniform(1.0, 3.0, 80).unwrap();
    let mr = Mesh1D::piecewise(&[0.0, 1.0, 3.0], &[40, 80]).unwrap();
    for sys in [
        assemble_coupled(&model, &mi, &me, &zero, None, &opts).unwrap(),
        assemble_reference(&model, &mr, &zero, &opts).unwrap(),
        assemble_full_gravity(&model, &mr, &zero, &opts).unwrap(),
    ] {
        let sol = solve(&sys).unwrap();
        assert!(sol.norm() <= 1e-10 * sys.meta.matrix_scale);
        assert!(!sol.report.near_singular);
    }
}

#[test]
fn manufactured_system_has_small_residual() {
    let (sol, err) = scenario().solve(100, 200, &AssemblyOptions::default()).unwrap();
    assert!(sol.report.residual <= 1e-10);
    assert!(err.l2_relative() < 1e-4);
    assert_eq!(sol.u_r(0.0), Some(c(0.0, 0.0)));
}

#[test]
fn mms_converges_at_second_order() {
    let t = convergence_study(&scenario(), &[(25, 50), (50, 100), (100, 200), (200, 400)], &AssemblyOptions::default()).unwrap();
    assert!(!t.non_monotone && !t.exact);
    for row in &t.rows[1..] {
        assert!((row.l2_rate.unwrap() - 2.0).abs() <= 0.2, "{row:?}");
        assert!((row.energy_rate.unwrap() - 1.0).abs() <= 0.2, "{row:?}");
        assert!(row.int_f1_rate.unwrap() >= 1.0 && row.int_f2_rate.unwrap() >= 1.0, "{row:?}");
    }
}

#[test]
fn exterior_block_is_complex_symmetric() {
    let model = standard_model();
    let mi = Mesh1D::uniform(0.0, 1.0, 20).unwrap();
    let me = Mesh1D::uniform(1.0, 3.0, 40).unwrap();
    let sys = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap();
    let (lo, hi) = sys.meta.exterior_block.unwrap();
    let a = &sys.matrix;
    assert!(a.transpose_defect(lo..hi) <= 1e-13 * a.max_abs());
    // Not Hermitian: the diagonal carries the damping.
    assert!(a.get(lo + 3, lo + 3).im.abs() > 0.0);
    let red = sys.meta.dof_reduction.unwrap();
    assert_eq!(red.scalar_dofs, 41);
    assert_eq!(red.vector_dofs_3d, 3 * 41);
}

#[test]
fn interface_must_be_a_node() {
    let model = standard_model();
    let mi = Mesh1D::uniform(0.0, 0.9, 10).unwrap();
    let me = Mesh1D::uniform(0.9, 3.0, 10).unwrap();
    let e = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap_err();
    assert!(matches!(e, SolverError::NotANode { .. }));
    let mr = Mesh1D::uniform(0.0, 3.0, 7).unwrap();
    let e = assemble_reference(&model, &mr, &zero, &AssemblyOptions::default()).unwrap_err();
    assert!(matches!(e, SolverError::NotANode { .. }));
}

#[test]
fn source_outside_interior_is_rejected() {
    let model = standard_model();
    let mr = Mesh1D::piecewise(&[0.0, 1.0, 3.0], &[10, 20]).unwrap();
    let f = |r: f64| {
        SourceSpec::ShellBump {
            re: 1.0,
            im: 0.0,
            inner: 0.5,
            outer: 1.5,
        }
        .eval(r)
    };
    let e = assemble_reference(&model, &mr, &f, &AssemblyOptions::default()).unwrap_err();
    assert!(matches!(e, SolverError::SourceOutsideInterior { .. }));
}

#[test]
fn zero_frequency_is_flagged() {
    let mut model = standard_model();
    model.omega = 0.0;
    let mi = Mesh1D::uniform(0.0, 1.0, 20).unwrap();
    let me = Mesh1D::uniform(1.0, 3.0, 40).unwrap();
    let sys = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap();
    assert!(sys.meta.warnings.iter().any(|w| w.contains("omega = 0")));
    if let Ok(sol) = solve(&sys) {
        assert!(sol.report.pivots.min_pivot.is_finite());
    }
}

#[test]
fn rotation_is_rejected() {
    let mut model = standard_model();
    model.rotation = [0.0, 0.0, 0.1];
    let mr = Mesh1D::piecewise(&[0.0, 1.0, 3.0], &[10, 20]).unwrap();
    assert!(matches!(
        assemble_reference(&model, &mr, &zero, &AssemblyOptions::default()),
        Err(SolverError::Precondition(_))
    ));
}

#[test]
fn coupled_and_reference_agree_and_truncation_decays() {
    let f = |r: f64| source().eval(r);
    let t = truncation_study(&standard_model(), &f, 0.01, &[3.0, 4.0, 5.0, 6.0], &AssemblyOptions::default()).unwrap();
    assert!(t.monotone, "{t:?}");
    assert!(t.rows.last().unwrap().difference <= 1e-3, "{t:?}");
    assert!(t.kappa.unwrap() > 0.0);
}

#[test]
fn gravity_solution_tends_to_cowling_as_g_vanishes() {
    let f = |r: f64| source().eval(r);
    let mesh = Mesh1D::piecewise(&[0.0, 1.0, 4.0], &[60, 180]).unwrap();
    let opts = AssemblyOptions::default();
    let cow = solve(&assemble_reference(&standard_model(), &mesh, &f, &opts).unwrap()).unwrap();
    let mut last = f64::INFINITY;
    for g in [1.0, 0.1, 0.01, 0.001] {
        let mut model = standard_model();
        model.gravity = g;
        let sol = solve(&assemble_full_gravity(&model, &mesh, &f, &opts).unwrap()).unwrap();
        assert!(sol.report.residual <= 1e-10);
        let d = interior_difference(sol.u.as_ref().unwrap(), cow.u.as_ref().unwrap(), 4.0);
        assert!(d < last, "G = {g}: {d} >= {last}");
        last = d;
        // Gauge: int_0^{r1} psi r^2 dr = 0.
        let psi = sol.psi.as_ref().unwrap();
        let gauge: Complex64 = (0..2000)
            .map(|i| {
                let r = 0.5 * (i as f64 + 0.5) / 2000.0;
                psi.eval(r).unwrap() * r * r
            })
            .sum::<Complex64>()
            * (0.5 / 2000.0);
        assert!(gauge.norm() <= 1e-6 * psi.max_abs() + 1e-14, "gauge {gauge}");
    }
}

#[test]
fn constant_v_reconstructs_zero_u() {
    let me = Mesh1D::uniform(1.0, 3.0, 10).unwrap();
    let mi = Mesh1D::uniform(0.0, 1.0, 5).unwrap();
    let model = standard_model();
    let sys = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap();
    let sol = ModalSolution::from_fields(
        sys.meta.clone(),
        Some(NodalField::new(mi.clone(), vec![c(0.0, 0.0); mi.len()])),
        Some(NodalField::new(me.clone(), vec![c(2.5, -1.0); me.len()])),
    );
    let u = reconstruct_u_from_v(&model, &sol).unwrap();
    assert!(u.values.iter().all(|z| *z == c(0.0, 0.0)));
    let r = interface_residuals(&model, &sol).unwrap();
    assert_eq!(r.int_f1, 0.0);
}

#[test]
fn zero_solution_has_zero_residuals() {
    let model = standard_model();
    let mi = Mesh1D::uniform(0.0, 1.0, 20).unwrap();
    let me = Mesh1D::uniform(1.0, 3.0, 40).unwrap();
    let sol = solve(&assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap()).unwrap();
    let r = interface_residuals(&model, &sol).unwrap();
    assert_eq!((r.int_f1, r.int_f2), (0.0, 0.0));
}

#[test]
fn reconstruction_matches_manufactured_u() {
    let s = scenario();
    let (sol, _) = s.solve(100, 200, &AssemblyOptions::default()).unwrap();
    let u = reconstruct_u_from_v(&s.model, &sol).unwrap();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (&r, &val) in u.midpoints.iter().zip(&u.values) {
        let eta = s.model.eta(r).unwrap();
        let exact = s.v_exact(r).1 * eta.exp() / (s.model.rho.value(r) * s.model.radial_symbol(r));
        worst = worst.max((val - exact).norm());
        scale = scale.max(exact.norm());
    }
    assert!(worst <= 1e-2 * scale, "{worst} vs {scale}");
}

#[test]
fn mis_scaled_exterior_stalls_interface_residual() {
    let s = scenario();
    let opts = AssemblyOptions {
        exterior_coefficient_scale: 2.0,
        ..AssemblyOptions::default()
    };
    let mut res = Vec::new();
    for n in [50, 100, 200] {
        let (sol, _) = s.solve(n, 2 * n, &opts).unwrap();
        res.push(interface_residuals(&s.model, &sol).unwrap().int_f1);
    }
    assert!(res.iter().all(|&r| r > 0.1), "{res:?}");
    assert!((res[2] / res[0] - 1.0).abs() < 0.2, "{res:?}");
}
