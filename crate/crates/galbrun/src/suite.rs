//! Verification suites behind the CLI commands. Every function is a pure
//! function of its inputs; randomness comes from the configured seed.

use std::f64::consts::PI;

use galbrun_core::background::{validate_assumptions, BackgroundModel, Point, SamplingSpec, ValidationReport};
use galbrun_core::calculus::{ScalarField, Support, VectorField};
use galbrun_core::diagnostics::{
    build_mu_profile, check_subsonic, compute_theta, pointwise_sector_check, select_beta, BetaReport, BetaVariant, MuCheck,
    MuParams, MuProfile, MuVariant, SectorReport, SubsonicReport, ThetaReport,
};
use galbrun_core::forms::{
    check_atmosphere_coercivity, check_flow_symmetry, check_identity_imaginary, check_reformulation, CoercivityReport,
    FieldPair, FlowSymmetryReport, FormContext, FormError, IdentityReport, ImaginaryPartReport,
};
use galbrun_core::radial_solver::{
    assemble_coupled, assemble_full_gravity, assemble_reference, convergence_study, interface_residuals, reconstruct_u_from_v,
    solve, truncation_study, AssembledSystem, DofReduction, Formulation, InterfaceResiduals, Mesh1D, MmsScenario,
    ModalSolution, RateTable, ReconstructedField, SolveReport, SolverError, TruncationStudy,
};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{complex, CompareConfig, DiagnosticsConfig, FormsConfig, Scenario, SolveConfig};

/// Relative errors below this are rounding noise; failures there are
/// reported as tolerance failures rather than identity failures.
pub const NOISE_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportKind {
    Interior,
    Annulus,
    Atmosphere,
    Straddling,
}

impl SupportKind {
    pub const ALL: [SupportKind; 4] = [
        SupportKind::Interior,
        SupportKind::Annulus,
        SupportKind::Atmosphere,
        SupportKind::Straddling,
    ];
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// A random support of the given kind inside `B_{r_out}`.
pub fn random_support(rng: &mut ChaCha8Rng, kind: SupportKind, model: &BackgroundModel, r_out: f64) -> Support {
    let (r1, r2, r3) = (model.r1, model.r2, model.r3);
    let j = 0.1 * unit(rng);
    let atmo_outer = (r3 + (r3 - r2)).min(r_out) - j * (r3 - r2);
    match kind {
        SupportKind::Interior => Support::Ball {
            radius: r1 * (0.8 + j),
        },
        SupportKind::Annulus => Support::Annulus {
            inner: r1 + (0.1 + j) * (r2 - r1),
            outer: r2 - (0.1 + j) * (r2 - r1),
        },
        SupportKind::Atmosphere => Support::Annulus {
            inner: r2 + (0.1 + j) * (r3 - r2),
            outer: atmo_outer,
        },
        SupportKind::Straddling => Support::Annulus {
            inner: r1 * (0.5 + j),
            outer: r2 + (0.7 - j) * (r3 - r2),
        },
    }
}

pub fn random_pair(rng: &mut ChaCha8Rng, kind: SupportKind, model: &BackgroundModel, r_out: f64) -> FieldPair {
    let s = random_support(rng, kind, model, r_out);
    let u = VectorField::random(rng, s, 2);
    let psi = ScalarField::random(rng, s, 2);
    FieldPair::new(u, psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    /// Error within rounding noise; the tolerance is too tight.
    Tolerance,
    Identity,
    /// The check does not apply (e.g. `omega = 0`).
    Precondition,
}

fn failure(pass: bool, rep: &IdentityReport, precondition: bool) -> Option<FailureKind> {
    match (pass, precondition) {
        (true, _) => None,
        (false, true) => Some(FailureKind::Precondition),
        (false, false) if rep.rel_err <= NOISE_FLOOR => Some(FailureKind::Tolerance),
        _ => Some(FailureKind::Identity),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReformEntry {
    pub index: usize,
    pub kinds: [SupportKind; 2],
    pub report: IdentityReport,
    pub pass: bool,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImaginaryEntry {
    pub index: usize,
    pub kind: SupportKind,
    pub report: ImaginaryPartReport,
    pub pass: bool,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowEntry {
    pub index: usize,
    pub report: FlowSymmetryReport,
    pub pass: bool,
    pub failure: Option<FailureKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoercivityEntry {
    pub index: usize,
    pub report: CoercivityReport,
    /// `factor * min(gamma_min |omega|, cs_min^2) * energy`.
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormsSuiteReport {
    pub seed: u64,
    pub r_out: f64,
    pub rtol: f64,
    pub atol: f64,
    pub reformulation: Vec<ReformEntry>,
    pub imaginary: Vec<ImaginaryEntry>,
    pub flow: Vec<FlowEntry>,
    pub flow_skipped: Option<String>,
    pub coercivity: Vec<CoercivityEntry>,
    pub gamma_min: f64,
    pub cs_min: f64,
    pub worst_reformulation_rel_err: f64,
    pub worst_imaginary_rel_err: f64,
    pub worst_flow_rel_err: f64,
    pub min_coercivity_ratio: f64,
    pub pass: bool,
}

/// `(inf gamma, inf c_s)` over the sampling radii.
pub fn box_constants(model: &BackgroundModel, sampling: &SamplingSpec) -> (f64, f64) {
    let radii = sampling.radii(0.0, sampling.r_max(model), usize::MAX);
    let g = radii.iter().map(|r| model.gamma.value(*r)).fold(f64::INFINITY, f64::min);
    let c = radii.iter().map(|r| model.cs.value(*r)).fold(f64::INFINITY, f64::min);
    (g, c)
}

pub fn forms_context(model: &BackgroundModel, cfg: &FormsConfig) -> Result<FormContext, FormError> {
    let r_out = cfg.r_out.unwrap_or(2.0 * model.r3);
    FormContext::new(model.clone(), r_out, cfg.quadrature)
}

pub fn forms_suite(model: &BackgroundModel, cfg: &FormsConfig, sampling: &SamplingSpec, seed: u64) -> Result<FormsSuiteReport, FormError> {
    let ctx = forms_context(model, cfg)?;
    let r_out = ctx.r_out;
    let mut g = rng(seed);

    let mut reformulation = Vec::with_capacity(cfg.pairs);
    for i in 0..cfg.pairs {
        let kinds = [SupportKind::ALL[i % 4], SupportKind::ALL[(i / 4 + i + 1) % 4]];
        let a = random_pair(&mut g, kinds[0], model, r_out);
        let b = random_pair(&mut g, kinds[1], model, r_out);
        let report = check_reformulation(&ctx, &a, &b)?;
        let pass = report.within(cfg.rtol, cfg.atol);
        reformulation.push(ReformEntry {
            index: i,
            kinds,
            failure: failure(pass, &report, false),
            report,
            pass,
        });
    }

    let mut imaginary = Vec::with_capacity(cfg.fields);
    for i in 0..cfg.fields {
        let kind = SupportKind::ALL[i % 4];
        let f = random_pair(&mut g, kind, model, r_out);
        let report = check_identity_imaginary(&ctx, &f.u, &f.psi)?;
        let pre = report.note.is_some();
        let pass = !pre && report.identity.within(cfg.rtol, cfg.atol);
        imaginary.push(ImaginaryEntry {
            index: i,
            kind,
            failure: failure(pass, &report.identity, pre),
            report,
            pass,
        });
    }

    let mut flow = Vec::new();
    let flow_skipped = if model.b.is_zero() {
        Some("model has no flow".to_string())
    } else {
        for i in 0..cfg.fields {
            let s1 = Support::Ball {
                radius: model.r2 * (0.7 + 0.1 * unit(&mut g)),
            };
            let s2 = Support::Ball {
                radius: model.r2 * (0.7 + 0.1 * unit(&mut g)),
            };
            let u = VectorField::random(&mut g, s1, 2);
            let u2 = VectorField::random(&mut g, s2, 2);
            let report = check_flow_symmetry(&ctx, &u, &u2)?;
            let pass = !report.skipped && report.identity.within(cfg.rtol, cfg.atol);
            flow.push(FlowEntry {
                index: i,
                failure: failure(pass, &report.identity, report.skipped),
                report,
                pass,
            });
        }
        None
    };

    let (gamma_min, cs_min) = box_constants(model, sampling);
    let kappa = cfg.coercivity_factor * (gamma_min * model.omega.abs()).min(cs_min * cs_min);
    let mut coercivity = Vec::with_capacity(cfg.fields);
    for i in 0..cfg.fields {
        let s = random_support(&mut g, SupportKind::Atmosphere, model, r_out);
        let u = VectorField::random(&mut g, s, 2);
        let report = check_atmosphere_coercivity(&ctx, &u, cfg.angle_grid)?;
        let threshold = kappa * report.energy;
        let pass = !report.zero_field && report.rotated_real >= threshold && kappa > 0.0;
        coercivity.push(CoercivityEntry {
            index: i,
            report,
            threshold,
            pass,
        });
    }

    let worst = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0, f64::max);
    let worst_reformulation_rel_err = worst(&mut reformulation.iter().map(|e| e.report.rel_err));
    let worst_imaginary_rel_err = worst(&mut imaginary.iter().map(|e| e.report.identity.rel_err));
    let worst_flow_rel_err = worst(&mut flow.iter().map(|e| e.report.identity.rel_err));
    let min_coercivity_ratio = coercivity
        .iter()
        .map(|e| e.report.rotated_real / (kappa * e.report.energy / cfg.coercivity_factor))
        .fold(f64::INFINITY, f64::min);
    let pass = reformulation.iter().all(|e| e.pass)
        && imaginary.iter().all(|e| e.pass)
        && flow.iter().all(|e| e.pass)
        && coercivity.iter().all(|e| e.pass);
    Ok(FormsSuiteReport {
        seed,
        r_out,
        rtol: cfg.rtol,
        atol: cfg.atol,
        reformulation,
        imaginary,
        flow,
        flow_skipped,
        coercivity,
        gamma_min,
        cs_min,
        worst_reformulation_rel_err,
        worst_imaginary_rel_err,
        worst_flow_rel_err,
        min_coercivity_ratio,
        pass,
    })
}

/// Plot-ready coefficient table for `check-model`.
pub fn coefficient_rows(model: &BackgroundModel, sampling: &SamplingSpec, n: usize) -> Vec<Vec<f64>> {
    let r_max = sampling.r_max(model);
    (1..=n)
        .map(|i| {
            let r = r_max * i as f64 / n as f64;
            let s = model.derived_coefficients(Point::Radius(r));
            vec![
                r,
                s.rho,
                s.cs,
                model.p.value(r),
                model.phi.value(r),
                s.gamma,
                s.q_r,
                s.eta.unwrap_or(f64::NAN),
                s.m1_rr,
                s.m1_tt,
                s.m2_rr,
                s.m2_tt,
            ]
        })
        .collect()
}

pub const COEFFICIENT_HEADER: [&str; 12] = [
    "r", "rho", "cs", "p", "phi", "gamma", "q_r", "eta", "m1_rr", "m1_tt", "m2_rr", "m2_tt",
];

pub fn check_model(model: &BackgroundModel, sampling: &SamplingSpec) -> ValidationReport {
    validate_assumptions(model, sampling)
}

/// Element count giving size at most `h` on `[a, b]`.
pub fn elements_for(a: f64, b: f64, h: f64) -> usize {
    (((b - a) / h) - 1e-9).ceil().max(1.0) as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub formulation: Formulation,
    pub n_dofs: usize,
    pub bandwidth: (usize, usize),
    pub r_outer: f64,
    pub interior_elements: usize,
    pub exterior_elements: Option<usize>,
    pub dof_reduction: Option<DofReduction>,
    pub matrix_scale: f64,
    pub warnings: Vec<String>,
    pub report: SolveReport,
    pub solution_norm: f64,
    pub interface: Option<InterfaceResiduals>,
    pub pass: bool,
}

pub struct SolveOutcome {
    pub summary: SolveSummary,
    pub solution: ModalSolution,
    pub reconstructed: Option<ReconstructedField>,
    pub rates: Option<RateTable>,
}

fn summarize(model: &BackgroundModel, sys: &AssembledSystem, sol: ModalSolution) -> Result<(SolveSummary, ModalSolution, Option<ReconstructedField>), SolverError> {
    let meta = &sys.meta;
    let (interface, reconstructed) = if meta.formulation == Formulation::Coupled {
        (Some(interface_residuals(model, &sol)?), Some(reconstruct_u_from_v(model, &sol)?))
    } else {
        (None, None)
    };
    let pass = sol.report.residual <= galbrun_core::radial_solver::SOLVE_TOL && !sol.report.near_singular;
    let summary = SolveSummary {
        formulation: meta.formulation,
        n_dofs: meta.n_dofs,
        bandwidth: meta.bandwidth,
        r_outer: meta.r_outer,
        interior_elements: sys.interior_mesh().elements(),
        exterior_elements: sys.exterior_mesh().map(|m| m.elements()),
        dof_reduction: meta.dof_reduction,
        matrix_scale: meta.matrix_scale,
        warnings: meta.warnings.clone(),
        report: sol.report,
        solution_norm: sol.norm(),
        interface,
        pass,
    };
    Ok((summary, sol, reconstructed))
}

pub fn run_solve(model: &BackgroundModel, cfg: &SolveConfig) -> Result<SolveOutcome, SolverError> {
    match cfg.scenario {
        Scenario::Source => {
            let f = |r: f64| cfg.source.eval(r);
            let r2 = model.r2;
            let sys = match cfg.formulation {
                Formulation::Coupled => {
                    let mi = Mesh1D::uniform(0.0, r2, elements_for(0.0, r2, cfg.h))?;
                    let me = Mesh1D::uniform(r2, cfg.r_outer, elements_for(r2, cfg.r_outer, cfg.h))?;
                    assemble_coupled(model, &mi, &me, &f, None, &cfg.assembly)?
                }
                Formulation::Reference | Formulation::FullGravity => {
                    let mesh = Mesh1D::piecewise(
                        &[0.0, r2, cfg.r_outer],
                        &[elements_for(0.0, r2, cfg.h), elements_for(r2, cfg.r_outer, cfg.h)],
                    )?;
                    if cfg.formulation == Formulation::Reference {
                        assemble_reference(model, &mesh, &f, &cfg.assembly)?
                    } else {
                        assemble_full_gravity(model, &mesh, &f, &cfg.assembly)?
                    }
                }
            };
            let sol = solve(&sys)?;
            let (summary, solution, reconstructed) = summarize(model, &sys, sol)?;
            Ok(SolveOutcome {
                summary,
                solution,
                reconstructed,
                rates: None,
            })
        }
        Scenario::Mms => {
            let m = &cfg.mms;
            let scenario = MmsScenario::new(model.clone(), m.r_ext, complex(m.c0), complex(m.c1), complex(m.kappa))?;
            let meshes: Vec<(usize, usize)> = m.meshes.iter().map(|p| (p[0], p[1])).collect();
            let rates = convergence_study(&scenario, &meshes, &cfg.assembly)?;
            let &(ni, ne) = meshes.last().expect("at least three meshes");
            let (mi, me) = scenario.meshes(ni, ne)?;
            let f = |r: f64| if r <= model.r2 { scenario.f(r) } else { Default::default() };
            let g = |r: f64| scenario.g(r).unwrap_or_default();
            let sys = assemble_coupled(model, &mi, &me, &f, Some(&g), &cfg.assembly)?;
            let sol = solve(&sys)?;
            let (mut summary, solution, reconstructed) = summarize(model, &sys, sol)?;
            let rate = rates.final_l2_rate().unwrap_or(f64::NAN);
            summary.pass &= (rate - 2.0).abs() <= 0.3;
            Ok(SolveOutcome {
                summary,
                solution,
                reconstructed,
                rates: Some(rates),
            })
        }
    }
}

pub const SOLUTION_HEADER: [&str; 7] = ["r", "u_re", "u_im", "v_re", "v_im", "psi_re", "psi_im"];

/// Rows at the sorted union of all mesh nodes; `NaN` where a field is
/// undefined.
pub fn solution_rows(sol: &ModalSolution) -> Vec<Vec<f64>> {
    let fields = [sol.u.as_ref(), sol.v.as_ref(), sol.psi.as_ref()];
    let mut nodes: Vec<f64> = fields.iter().flatten().flat_map(|f| f.mesh.nodes.iter().copied()).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
        .into_iter()
        .map(|r| {
            let mut row = vec![r];
            for f in fields {
                match f.and_then(|f| f.eval(r)) {
                    Some(z) => row.extend([z.re, z.im]),
                    None => row.extend([f64::NAN; 2]),
                }
            }
            row
        })
        .collect()
}

pub fn run_compare(model: &BackgroundModel, cfg: &CompareConfig) -> Result<(TruncationStudy, bool), SolverError> {
    let f = |r: f64| cfg.source.eval(r);
    let study = truncation_study(model, &f, cfg.h, &cfg.radii, &cfg.assembly)?;
    let last = study.rows.last().map(|r| r.difference).unwrap_or(f64::NAN);
    let pass = study.monotone && last <= cfg.tolerance;
    Ok((study, pass))
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Entry<T> {
    Ok(T),
    Err { error: String },
}

impl<T> Entry<T> {
    fn from<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Entry::Ok(v),
            Err(e) => Entry::Err { error: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Entry::Ok(v) => Some(v),
            Entry::Err { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaEntry {
    #[serde(flatten)]
    pub report: BetaReport,
    /// Present when the grid held no admissible angle.
    pub status: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MuEntry {
    pub profile: MuProfile,
    pub check: MuCheck,
    pub sector: Entry<SectorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub theta: Entry<ThetaReport>,
    pub subsonic: Option<SubsonicReport>,
    pub tau: f64,
    pub beta: Vec<Entry<BetaEntry>>,
    pub mu_cowling: Entry<MuEntry>,
    pub mu_coupled: Entry<MuEntry>,
}

fn mu_entry(
    model: &BackgroundModel,
    params: MuParams,
    variant: MuVariant,
    theta: f64,
    tau: f64,
    samples: usize,
    sampling: &SamplingSpec,
) -> Entry<MuEntry> {
    Entry::from(build_mu_profile(params, variant).map(|profile| MuEntry {
        check: profile.verify(samples),
        sector: Entry::from(pointwise_sector_check(model, &profile, theta, tau, sampling)),
        profile,
    }))
}

pub fn run_diagnostics(model: &BackgroundModel, cfg: &DiagnosticsConfig, sampling: &SamplingSpec) -> Certificate {
    let theta = Entry::from(compute_theta(model, sampling));
    let th = theta.ok().map(|t| t.theta);
    let subsonic = th.map(|t| check_subsonic(model, t, sampling));
    let beta = [BetaVariant::Cowling, BetaVariant::Full, BetaVariant::Coupled]
        .into_iter()
        .map(|v| {
            Entry::from(select_beta(model, v, sampling).map(|report| BetaEntry {
                status: report.beta.is_none().then(|| "no admissible beta".to_string()),
                report,
            }))
        })
        .collect();
    let t = th.unwrap_or(f64::NAN);
    let tau = cfg.tau.unwrap_or_else(|| (0.5 * (PI / 2.0 - t)).min(0.1));
    let peak = PI / 2.0 - t - tau;
    let s = model.sign_omega();
    let mu_cowling = mu_entry(
        model,
        MuParams {
            r1: model.r1,
            r2: model.r2,
            r3: None,
            mu_r2: None,
            mu_star: cfg.mu_star.unwrap_or(peak),
            sign_omega: s,
        },
        MuVariant::Cowling,
        t,
        tau,
        cfg.mu_samples,
        sampling,
    );
    let mu_r2 = cfg.mu_r2.unwrap_or(peak);
    let mu_coupled = mu_entry(
        model,
        MuParams {
            r1: model.r1,
            r2: model.r2,
            r3: Some(model.r3),
            mu_r2: Some(mu_r2),
            mu_star: cfg.mu_star_coupled.unwrap_or(0.5 * mu_r2),
            sign_omega: s,
        },
        MuVariant::Coupled,
        t,
        tau,
        cfg.mu_samples,
        sampling,
    );
    Certificate {
        theta,
        subsonic,
        tau,
        beta,
        mu_cowling,
        mu_coupled,
    }
}
