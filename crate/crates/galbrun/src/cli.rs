//! Command-line front-end. Exit codes: 0 pass, 1 domain-check failure,
//! 2 usage or IO error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use galbrun_core::forms::FormError;
use galbrun_core::radial_solver::SolverError;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{cell, table, ManifestClock, OutputDir};
use crate::suite::{self, Entry};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "galbrun", version, about = "Verification engine for damped stellar oscillation equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration or bare model (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "galbrun-out")]
    pub out: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the standing assumptions of a background model.
    CheckModel(CommonArgs),
    /// Check the algebraic identities of the sesquilinear forms.
    VerifyForms(CommonArgs),
    /// Run a radial solve or a manufactured-solution study.
    Solve(CommonArgs),
    /// Coupled against reference solver over a sweep of truncation radii.
    Compare(CommonArgs),
    /// Angle, beta and mu certificates.
    Diagnostics(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckModel(_) => "check-model",
            Command::VerifyForms(_) => "verify-forms",
            Command::Solve(_) => "solve",
            Command::Compare(_) => "compare",
            Command::Diagnostics(_) => "diagnostics",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::CheckModel(a)
            | Command::VerifyForms(a)
            | Command::Solve(a)
            | Command::Compare(a)
            | Command::Diagnostics(a) => a,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("forms: {0}")]
    Forms(#[from] FormError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Forms(_) | CliError::Solver(_) => EXIT_FAIL,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            }
        }
    }
}

pub fn execute(cmd: &Command) -> i32 {
    let args = cmd.args();
    let clock = ManifestClock::start();
    let mut out = match OutputDir::create(&args.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create {}: {e}", args.out.display());
            return EXIT_USAGE;
        }
    };
    let mut cfg = None;
    let code = match RunConfig::load(&args.config) {
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Ok(mut c) => {
            if let Some(s) = args.seed {
                c.reseed(s);
            }
            let r = dispatch(cmd, &c, &mut out);
            cfg = Some(c);
            match r {
                Ok(pass) => {
                    if pass {
                        EXIT_PASS
                    } else {
                        EXIT_FAIL
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    let _ = out.json("error.json", &ErrorReport { error: e.to_string() });
                    e.exit_code()
                }
            }
        }
    };
    let resolved = cfg.as_ref().map(|c| serde_json::to_value(c).unwrap_or_default()).unwrap_or_default();
    let seed = cfg.as_ref().map(|c| c.seed).unwrap_or_default();
    let mut outputs = out.written().to_vec();
    outputs.push("manifest.json".to_string());
    let manifest = clock.finish(cmd.name(), &args.config, seed, resolved, code, &outputs);
    if let Err(e) = out.json("manifest.json", &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_USAGE;
    }
    code
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
}

fn dispatch(cmd: &Command, cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    match cmd {
        Command::CheckModel(_) => check_model(cfg, out),
        Command::VerifyForms(_) => verify_forms(cfg, out),
        Command::Solve(_) => solve(cfg, out),
        Command::Compare(_) => compare(cfg, out),
        Command::Diagnostics(_) => diagnostics(cfg, out),
    }
}

fn mark(pass: bool) -> String {
    if pass { "pass" } else { "FAIL" }.to_string()
}

fn emit(out: &mut OutputDir, name: &str, text: String) -> Result<(), CliError> {
    print!("{text}");
    out.text(name, &text)?;
    Ok(())
}

fn check_model(cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    let rep = suite::check_model(&cfg.model, &cfg.sampling);
    out.json("validation.json", &rep)?;
    out.csv(
        "coefficients.csv",
        &suite::COEFFICIENT_HEADER,
        suite::coefficient_rows(&cfg.model, &cfg.sampling, 400),
    )?;
    let rows: Vec<Vec<String>> = rep
        .entries
        .iter()
        .map(|e| {
            vec![
                e.name.clone(),
                if e.blocking { mark(e.pass) } else { "info".to_string() },
                cell(e.value),
                cell(e.margin),
                e.location.map(cell).unwrap_or_default(),
            ]
        })
        .collect();
    let mut text = table(&["check", "status", "value", "margin", "at r"], &rows);
    if rep.low_trust {
        text.push_str("note: second derivatives from tabulated interpolants (low trust)\n");
    }
    emit(out, "validation.txt", text)?;
    Ok(rep.pass)
}

fn verify_forms(cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    let rep = suite::forms_suite(&cfg.model, &cfg.forms, &cfg.sampling, cfg.seed)?;
    out.json("forms.json", &rep)?;
    let count = |p: &mut dyn Iterator<Item = bool>| {
        let v: Vec<bool> = p.collect();
        format!("{}/{}", v.iter().filter(|b| **b).count(), v.len())
    };
    let failures = |f: &mut dyn Iterator<Item = Option<suite::FailureKind>>| {
        let v: Vec<_> = f.flatten().collect();
        let tol = v.iter().filter(|k| **k == suite::FailureKind::Tolerance).count();
        format!("{} tolerance, {} other", tol, v.len() - tol)
    };
    let rows = vec![
        vec![
            "a = a_reform".to_string(),
            count(&mut rep.reformulation.iter().map(|e| e.pass)),
            cell(rep.worst_reformulation_rel_err),
            failures(&mut rep.reformulation.iter().map(|e| e.failure)),
        ],
        vec![
            "Im a = -omega <gamma u,u>".to_string(),
            count(&mut rep.imaginary.iter().map(|e| e.pass)),
            cell(rep.worst_imaginary_rel_err),
            failures(&mut rep.imaginary.iter().map(|e| e.failure)),
        ],
        vec![
            "flow symmetry".to_string(),
            if rep.flow_skipped.is_some() {
                "skipped".to_string()
            } else {
                count(&mut rep.flow.iter().map(|e| e.pass))
            },
            cell(rep.worst_flow_rel_err),
            failures(&mut rep.flow.iter().map(|e| e.failure)),
        ],
        vec![
            "atmosphere coercivity".to_string(),
            count(&mut rep.coercivity.iter().map(|e| e.pass)),
            cell(rep.min_coercivity_ratio),
            String::new(),
        ],
    ];
    emit(
        out,
        "forms.txt",
        table(&["identity", "passed", "worst rel err / min ratio", "failures"], &rows),
    )?;
    Ok(rep.pass)
}

fn solve(cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    let res = suite::run_solve(&cfg.model, &cfg.solve)?;
    out.csv("solution.csv", &suite::SOLUTION_HEADER, suite::solution_rows(&res.solution))?;
    if let Some(rec) = &res.reconstructed {
        out.csv(
            "reconstructed_u.csv",
            &["r", "u_re", "u_im"],
            rec.midpoints.iter().zip(&rec.values).map(|(r, z)| vec![*r, z.re, z.im]),
        )?;
    }
    out.json("residuals.json", &res.summary)?;
    let s = &res.summary;
    let mut rows = vec![
        vec!["formulation".to_string(), format!("{:?}", s.formulation)],
        vec!["dofs".to_string(), s.n_dofs.to_string()],
        vec!["residual".to_string(), cell(s.report.residual)],
        vec!["min pivot ratio".to_string(), cell(s.report.pivots.ratio)],
        vec!["solution norm".to_string(), cell(s.solution_norm)],
    ];
    if let Some(i) = &s.interface {
        rows.push(vec!["IntF1".to_string(), cell(i.int_f1)]);
        rows.push(vec!["IntF2".to_string(), cell(i.int_f2)]);
    }
    for w in &s.warnings {
        rows.push(vec!["warning".to_string(), w.clone()]);
    }
    let mut text = table(&["quantity", "value"], &rows);
    if let Some(rates) = &res.rates {
        out.json("rates.json", rates)?;
        let opt = |v: Option<f64>| v.unwrap_or(f64::NAN);
        out.csv(
            "rates.csv",
            &["n_int", "n_ext", "h", "l2_error", "energy_error", "l2_rate", "energy_rate", "int_f1", "int_f2", "int_f1_rate", "int_f2_rate"],
            rates.rows.iter().map(|r| {
                vec![
                    r.n_int as f64,
                    r.n_ext as f64,
                    r.h,
                    r.l2_error,
                    r.energy_error,
                    opt(r.l2_rate),
                    opt(r.energy_rate),
                    r.int_f1,
                    r.int_f2,
                    opt(r.int_f1_rate),
                    opt(r.int_f2_rate),
                ]
            }),
        )?;
        let rows: Vec<Vec<String>> = rates
            .rows
            .iter()
            .map(|r| {
                vec![
                    format!("{}+{}", r.n_int, r.n_ext),
                    cell(r.l2_error),
                    r.l2_rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
                    r.energy_rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
                    r.int_f1_rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
                    r.int_f2_rate.map(|v| format!("{v:.3}")).unwrap_or_default(),
                ]
            })
            .collect();
        text.push('\n');
        text.push_str(&table(&["elements", "L2 error", "L2 rate", "energy rate", "IntF1 rate", "IntF2 rate"], &rows));
    }
    emit(out, "solve.txt", text)?;
    Ok(s.pass)
}

#[derive(Serialize)]
struct CompareReport<'a> {
    study: &'a galbrun_core::radial_solver::TruncationStudy,
    tolerance: f64,
    pass: bool,
}

fn compare(cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    let (study, pass) = suite::run_compare(&cfg.model, &cfg.compare)?;
    out.csv(
        "truncation.csv",
        &["r_outer", "difference"],
        study.rows.iter().map(|r| vec![r.r_outer, r.difference]),
    )?;
    out.json(
        "compare.json",
        &CompareReport {
            study: &study,
            tolerance: cfg.compare.tolerance,
            pass,
        },
    )?;
    let rows: Vec<Vec<String>> = study.rows.iter().map(|r| vec![format!("{}", r.r_outer), cell(r.difference)]).collect();
    let mut text = table(&["R", "interior relative L2 difference"], &rows);
    text.push_str(&format!(
        "monotone: {}, kappa: {}\n",
        study.monotone,
        study.kappa.map(cell).unwrap_or_else(|| "n/a".to_string())
    ));
    emit(out, "compare.txt", text)?;
    Ok(pass)
}

fn diagnostics(cfg: &RunConfig, out: &mut OutputDir) -> Result<bool, CliError> {
    let cert = suite::run_diagnostics(&cfg.model, &cfg.diagnostics, &cfg.sampling);
    out.json("certificate.json", &cert)?;
    let mut rows = Vec::new();
    match &cert.theta {
        Entry::Ok(t) => rows.push(vec![
            "theta".to_string(),
            cell(t.theta),
            format!("at {:?}{}", t.attaining_point, if t.inf_dominates { ", |inf arg| dominates" } else { "" }),
        ]),
        Entry::Err { error } => rows.push(vec!["theta".to_string(), "n/a".to_string(), error.clone()]),
    }
    if let Some(s) = &cert.subsonic {
        rows.push(vec!["subsonic".to_string(), cell(s.margin), mark(s.pass)]);
    }
    for b in &cert.beta {
        match b {
            Entry::Ok(b) => rows.push(vec![
                format!("beta ({:?})", b.report.variant).to_lowercase(),
                b.report.beta.map(cell).unwrap_or_else(|| "none".to_string()),
                b.status.clone().unwrap_or_else(|| format!("margin {}", cell(b.report.margin))),
            ]),
            Entry::Err { error } => rows.push(vec!["beta".to_string(), "n/a".to_string(), error.clone()]),
        }
    }
    for (name, m) in [("mu (cowling)", &cert.mu_cowling), ("mu (coupled)", &cert.mu_coupled)] {
        match m {
            Entry::Ok(m) => {
                rows.push(vec![name.to_string(), cell(m.profile.mu_star), mark(m.check.pass)]);
                let sector = match &m.sector {
                    Entry::Ok(s) => vec![cell(s.worst_margin), mark(s.pass)],
                    Entry::Err { error } => vec!["n/a".to_string(), error.clone()],
                };
                rows.push([vec![format!("sector, {name}")], sector].concat());
            }
            Entry::Err { error } => rows.push(vec![name.to_string(), "n/a".to_string(), error.clone()]),
        }
    }
    emit(out, "certificate.txt", table(&["item", "value", "status"], &rows))?;
    Ok(cert.theta.ok().is_some())
}
