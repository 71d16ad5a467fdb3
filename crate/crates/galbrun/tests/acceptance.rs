//! One line per acceptance criterion. Exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use common::*;
use galbrun::suite::{random_pair, random_support, rng, SupportKind};
use galbrun_core::background::{BackgroundModel, RadialProfile, SamplingSpec};
use galbrun_core::calculus::{RuleOrder, Support, VectorField};
use galbrun_core::diagnostics::{build_mu_profile, compute_theta, MuParams, MuVariant};
use galbrun_core::forms::*;
use galbrun_core::radial_solver::*;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ctx(model: BackgroundModel) -> FormContext {
    let r_out = 2.0 * model.r3;
    FormContext::new(model, r_out, RuleOrder::default()).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let model = standard_model();
    let ctx = ctx(model.clone());
    let mut g = rng(101);
    let mut worst: f64 = 0.0;
    let mut kinds = [0usize; 4];
    for i in 0..50 {
        let ka = SupportKind::ALL[i % 4];
        let kb = SupportKind::ALL[(i / 4 + i + 1) % 4];
        kinds[i % 4] += 1;
        let a = random_pair(&mut g, ka, &model, ctx.r_out);
        let b = random_pair(&mut g, kb, &model, ctx.r_out);
        let lhs = eval_a(&ctx, &a, &b).unwrap();
        let rhs = eval_a_reform(&ctx, &a, &b).unwrap();
        worst = worst.max((lhs - rhs).norm() / lhs.norm());
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-9 && t < Duration::from_secs(60),
        format!("worst rel err {worst:.2e} over 50 pairs {kinds:?}, {:.1}s", t.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (model, seed) in [(flowing_model(), 202), (standard_model(), 203)] {
        let ctx = ctx(model.clone());
        let mut g = rng(seed);
        for i in 0..10 {
            let f = random_pair(&mut g, SupportKind::ALL[i % 4], &model, ctx.r_out);
            let a = eval_a(&ctx, &f, &f).unwrap();
            let gamma_sq = field_norms(&ctx, &f.u).unwrap().gamma_sq;
            let err = (a.im + model.omega * gamma_sq).abs() / (model.omega.abs() * gamma_sq);
            worst = worst.max(err);
            n += 1;
        }
    }
    outcome(worst <= 1e-9, format!("worst |Im a + omega<gamma u,u>| / |omega|<gamma u,u> = {worst:.2e} over {n} fields"))
}

fn criterion_3() -> Outcome {
    let model = flowing_model();
    let ctx = ctx(model.clone());
    let mut g = rng(303);
    let mut worst: f64 = 0.0;
    let mut div_max: f64 = 0.0;
    for i in 0..10 {
        let s = |k: f64| Support::Ball { radius: 0.7 + 0.01 * k };
        let u = VectorField::random(&mut g, s(i as f64), 2);
        let u2 = VectorField::random(&mut g, s(9.0 - i as f64), 2);
        let r = check_flow_symmetry(&ctx, &u, &u2).unwrap();
        worst = worst.max(r.identity.rel_err);
        div_max = div_max.max(r.div_rho_b_max);
    }
    outcome(
        worst <= 1e-9 && div_max <= DIV_RHO_B_TOL,
        format!("worst rel err {worst:.2e} over 10 pairs, sup |div(rho b)| = {div_max:.1e}"),
    )
}

fn criterion_4() -> Outcome {
    let model = standard_model();
    let ctx = ctx(model.clone());
    let radii: Vec<f64> = (0..=10_000).map(|i| 2.0 * model.r3 * i as f64 / 10_000.0).collect();
    let gamma_min = radii.iter().map(|r| model.gamma.value(*r)).fold(f64::INFINITY, f64::min);
    let cs_min = radii.iter().map(|r| model.cs.value(*r)).fold(f64::INFINITY, f64::min);
    let k = 0.1 * (gamma_min * model.omega.abs()).min(cs_min * cs_min);
    let mut g = rng(404);
    let mut worst = f64::INFINITY;
    let mut agree = true;
    for _ in 0..20 {
        let s = random_support(&mut g, SupportKind::Atmosphere, &model, ctx.r_out);
        let u = VectorField::random(&mut g, s, 2);
        let r = check_atmosphere_coercivity(&ctx, &u, 1000).unwrap();
        // Recompute the rotated real part at the returned angle.
        let a = eval_a_cow(&ctx, &u, &u).unwrap();
        let re = (Complex64::from_polar(1.0, -r.beta_hat * model.sign_omega()) * a).re;
        agree &= (re - r.rotated_real).abs() <= 1e-12 * a.norm();
        worst = worst.min(re / (k * r.energy));
    }
    outcome(worst >= 1.0 && agree, format!("min Re(e^(-i beta) a(u,u)) / threshold = {worst:.3} over 20 fields"))
}

fn mms() -> MmsScenario {
    MmsScenario::new(standard_model(), 3.0, c(1.0, 0.5), c(-0.3, 0.2), c(0.7, -0.4)).unwrap()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let s = mms();
    let opts = AssemblyOptions::default();
    let table = convergence_study(&s, &[(25, 50), (50, 100), (100, 200), (200, 400)], &opts).unwrap();
    let rates: Vec<f64> = table.rows.iter().filter_map(|r| r.l2_rate).collect();
    let rates_ok = rates.len() >= 3 && rates.iter().all(|r| (r - 2.0).abs() <= 0.3);

    // Exterior oracle on a dyadic mesh so the dense output hits the nodes.
    let (n_int, n_ext) = (512, 1024);
    let (sol, _) = s.solve(n_int, n_ext, &opts).unwrap();
    let v_fem = sol.v.as_ref().unwrap();
    let g = |r: f64| s.g(r).unwrap();
    let v_r2 = s.v_exact(s.model.r2).0;
    let oracle = exterior_oracle(&standard_exterior, &g, s.model.r2, s.r_ext, v_r2, (s.r_ext - s.model.r2) / n_ext as f64);
    let scale = oracle.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    let mut fem_err: f64 = 0.0;
    let mut oracle_vs_exact: f64 = 0.0;
    for (r, v) in &oracle {
        fem_err = fem_err.max((v_fem.eval(*r).unwrap() - v).norm());
        oracle_vs_exact = oracle_vs_exact.max((s.v_exact(*r).0 - v).norm());
    }
    let (fem_err, oracle_vs_exact) = (fem_err / scale, oracle_vs_exact / scale);
    let t = start.elapsed();
    outcome(
        rates_ok && fem_err <= 1e-6 && oracle.len() == n_ext + 1 && t < Duration::from_secs(120),
        format!(
            "L2 rates {:?}; FEM v vs oracle {fem_err:.2e} at {n_ext} exterior elements (oracle vs closed form {oracle_vs_exact:.1e}); {:.1}s",
            rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>(),
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let f = |r: f64| {
        SourceSpec::ShellBump {
            re: 1.0,
            im: 0.0,
            inner: 0.2,
            outer: 0.8,
        }
        .eval(r)
    };
    let study = truncation_study(&standard_model(), &f, 0.01, &[3.0, 4.0, 5.0, 6.0], &AssemblyOptions::default()).unwrap();
    let all_small = study.rows.iter().all(|r| r.difference <= 1e-3);
    outcome(
        all_small && study.monotone,
        format!(
            "differences {:?} at R = 3..6, monotone {}",
            study.rows.iter().map(|r| format!("{:.2e}", r.difference)).collect::<Vec<_>>(),
            study.monotone
        ),
    )
}

fn criterion_7() -> Outcome {
    let model = standard_model();
    let opts = AssemblyOptions::default();
    let zero = |_: f64| c(0.0, 0.0);
    let mi = Mesh1D::uniform(0.0, 1.0, 100).unwrap();
    let me = Mesh1D::uniform(1.0, 4.0, 300).unwrap();
    let mr = Mesh1D::piecewise(&[0.0, 1.0, 4.0], &[100, 300]).unwrap();
    let mut worst: f64 = 0.0;
    for sys in [
        assemble_coupled(&model, &mi, &me, &zero, None, &opts).unwrap(),
        assemble_reference(&model, &mr, &zero, &opts).unwrap(),
        assemble_full_gravity(&model, &mr, &zero, &opts).unwrap(),
    ] {
        let sol = solve(&sys).unwrap();
        worst = worst.max(sol.norm() / sys.meta.matrix_scale);
    }
    outcome(worst <= 1e-10, format!("max ||solution|| / matrix scale = {worst:.1e} over coupled, reference, full gravity"))
}

fn criterion_8() -> Outcome {
    let sampling = SamplingSpec {
        radial_points: 10_000,
        directions: 1000,
        ..SamplingSpec::default()
    };
    // m1 = s I via phi = s r^2 / 2 and constant pressure.
    let scalar = |s: f64, omega: f64, gamma: f64| {
        let mut m = standard_model();
        m.omega = omega;
        m.p = RadialProfile::constant(1.0);
        m.phi = RadialProfile::polynomial(vec![0.0, 0.0, 0.5 * s]);
        m.gamma = RadialProfile::constant(gamma);
        m.new().unwrap()
    };
    let t0 = compute_theta(&scalar(0.6, 1.0, 0.1), &sampling).unwrap().theta;
    let t_quarter = compute_theta(&scalar(-0.3, 1.0, 0.3), &sampling).unwrap().theta;
    let t_quarter_neg = compute_theta(&scalar(-0.6, -2.0, 0.3), &sampling).unwrap().theta;
    let theta_ok = t0.abs() <= 1e-10 && (t_quarter - PI / 4.0).abs() <= 1e-10 && (t_quarter_neg - PI / 4.0).abs() <= 1e-10;

    let mut violations = 0;
    let mut endpoints = true;
    for (variant, mu_r2, mu_star) in [
        (MuVariant::Cowling, None, PI / 2.0),
        (MuVariant::Cowling, None, 0.3),
        (MuVariant::Coupled, Some(PI / 2.0 - 0.2 - 0.1), 0.4),
        (MuVariant::Coupled, Some(1.2), 1.2),
    ] {
        let p = build_mu_profile(
            MuParams {
                r1: 0.5,
                r2: 1.0,
                r3: Some(1.5),
                mu_r2,
                mu_star,
                sign_omega: 1.0,
            },
            variant,
        )
        .unwrap();
        let chk = p.verify(10_000);
        violations += chk.range_violations + chk.zero_violations + chk.plateau_violations + chk.monotonicity_violations;
        endpoints &= chk.endpoints_exact;
    }
    outcome(
        theta_ok && violations == 0 && endpoints,
        format!(
            "theta(m1 >= 0) = {t0:.1e}, |theta - pi/4| = {:.1e} / {:.1e} (omega < 0); mu: {violations} violations on 4 x 10^4 samples",
            (t_quarter - PI / 4.0).abs(),
            (t_quarter_neg - PI / 4.0).abs()
        ),
    )
}

fn criterion_9() -> Outcome {
    let s = mms();
    let table = convergence_study(&s, &[(25, 50), (50, 100), (100, 200), (200, 400)], &AssemblyOptions::default()).unwrap();
    let rates: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| Some((r.int_f1_rate?, r.int_f2_rate?)))
        .collect();
    let rates_ok = rates.len() >= 3 && rates.iter().all(|(a, b)| *a >= 1.0 && *b >= 1.0);

    let model = standard_model();
    let mi = Mesh1D::uniform(0.0, 1.0, 8).unwrap();
    let me = Mesh1D::uniform(1.0, 3.0, 16).unwrap();
    let zero = |_: f64| c(0.0, 0.0);
    let sys = assemble_coupled(&model, &mi, &me, &zero, None, &AssemblyOptions::default()).unwrap();
    let sol = ModalSolution::from_fields(
        sys.meta.clone(),
        Some(NodalField::new(mi.clone(), vec![c(0.0, 0.0); mi.len()])),
        Some(NodalField::new(me.clone(), vec![c(-1.5, 0.25); me.len()])),
    );
    let u = reconstruct_u_from_v(&model, &sol).unwrap();
    let exact_zero = u.values.iter().all(|z| *z == c(0.0, 0.0));
    outcome(
        rates_ok && exact_zero,
        format!(
            "IntF1/IntF2 rates {:?}; v = const gives u = 0 exactly: {exact_zero}",
            rates.iter().map(|(a, b)| format!("{a:.2}/{b:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn run_suite(config: &Path, flow_config: &Path, out: &Path) {
    for cmd in ["check-model", "verify-forms", "solve", "compare", "diagnostics"] {
        let dir = out.join(cmd);
        galbrun::cli::run(["galbrun", cmd, "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    }
    let dir = out.join("verify-forms-flow");
    galbrun::cli::run(["galbrun", "verify-forms", "--config", flow_config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
}

fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(files(&p));
        } else {
            v.push(p);
        }
    }
    v.sort();
    v
}

fn criterion_10() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let t = tempfile::TempDir::new().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    run_suite(&configs.join("standard.json"), &configs.join("flow.json"), &a);
    run_suite(&configs.join("standard.json"), &configs.join("flow.json"), &b);
    let fa = files(&a);
    let mut compared = 0;
    let mut differing = Vec::new();
    for p in &fa {
        let rel = p.strip_prefix(&a).unwrap();
        if rel.file_name().unwrap() == "manifest.json" {
            continue;
        }
        compared += 1;
        if fs::read(p).ok() != fs::read(b.join(rel)).ok() {
            differing.push(rel.display().to_string());
        }
    }
    let same_set = files(&b).len() == fa.len();
    outcome(
        differing.is_empty() && same_set && compared > 0,
        format!("{compared} output files compared (manifests excluded), {} differ {differing:?}", differing.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("form reformulation identity", criterion_1),
        ("injectivity identity", criterion_2),
        ("flow symmetry", criterion_3),
        ("atmosphere coercivity certificate", criterion_4),
        ("MMS convergence and exterior oracle", criterion_5),
        ("coupled vs reference agreement", criterion_6),
        ("zero-solution tests", criterion_7),
        ("diagnostics closed forms", criterion_8),
        ("reconstruction and interface residuals", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
