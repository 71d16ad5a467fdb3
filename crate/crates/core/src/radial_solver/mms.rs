//! Manufactured solutions for the coupled radial problem and mesh
//! refinement studies.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use super::{assemble_coupled, interface_residuals, solve, AssemblyOptions, FieldErrors, Mesh1D, ModalSolution, SolverError};
use crate::background::BackgroundModel;
use crate::math::exp;

/// Step of the finite differences applied to coefficient-dependent
/// composites when forming the sources.
const FD_STEP: f64 = 1e-3;

/// Fourth-order derivative; one-sided near the origin.
fn derivative(mut f: impl FnMut(f64) -> Complex64, r: f64) -> Complex64 {
    let h = FD_STEP;
    if r < 2.5 * h {
        let v: Vec<Complex64> = (0..5).map(|k| f(r + k as f64 * h)).collect();
        (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) / (12.0 * h)
    } else {
        (f(r - 2.0 * h) - f(r - h) * 8.0 + f(r + h) * 8.0 - f(r + 2.0 * h)) / (12.0 * h)
    }
}

/// Exact pair
/// `u(r) = a r + b r^2 + kappa r (r - r2)^2` on `[0, r2]` and
/// `v(r) = (R - r)(c0 + c1 s + c2 s^2)`, `s = r - r2`, on `[r2, R]`.
///
/// `a`, `b` make both interface conditions hold, and `c2` makes the exterior
/// source vanish at `r2`, which is what the divergence condition needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsScenario {
    #[serde(skip)]
    pub model: BackgroundModel,
    pub r_ext: f64,
    pub kappa: Complex64,
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub a: Complex64,
    pub b: Complex64,
}

impl MmsScenario {
    pub fn new(model: BackgroundModel, r_ext: f64, c0: Complex64, c1: Complex64, kappa: Complex64) -> Result<Self, SolverError> {
        if !(r_ext > model.r2) {
            return Err(SolverError::Precondition("R_ext must exceed r2".into()));
        }
        let mut s = Self {
            model,
            r_ext,
            kappa,
            c0,
            c1,
            c2: Complex64::new(0.0, 0.0),
            a: Complex64::new(0.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        };
        let r2 = s.model.r2;
        let g0 = s.g(r2)?;
        s.c2 = Complex64::new(1.0, 0.0);
        let g1 = s.g(r2)?;
        s.c2 = -g0 / (g1 - g0);

        let rho = s.model.rho.value(r2);
        let c = s.model.cs.value(r2);
        let q = s.model.q_r(r2);
        let m = s.model.radial_symbol(r2);
        let (v0, dv0) = s.v_exact(r2);
        let u0 = dv0 / (rho * m);
        let u1 = -v0 / (rho * c * c) - u0 * (2.0 / r2 + q);
        s.b = (u1 - u0 / r2) / r2;
        s.a = u0 / r2 - s.b * r2;
        Ok(s)
    }

    /// `(u, u')`.
    pub fn u_exact(&self, r: f64) -> (Complex64, Complex64) {
        let d = r - self.model.r2;
        (
            self.a * r + self.b * r * r + self.kappa * r * d * d,
            self.a + self.b * (2.0 * r) + self.kappa * (d * d + 2.0 * r * d),
        )
    }

    /// `u / r`, polynomial and finite at the origin.
    fn u_over_r(&self, r: f64) -> Complex64 {
        let d = r - self.model.r2;
        self.a + self.b * r + self.kappa * d * d
    }

    /// `(v, v')`.
    pub fn v_exact(&self, r: f64) -> (Complex64, Complex64) {
        let s = r - self.model.r2;
        let p = self.c0 + self.c1 * s + self.c2 * s * s;
        let dp = self.c1 + self.c2 * (2.0 * s);
        ((self.r_ext - r) * p, (self.r_ext - r) * dp - p)
    }

    /// `D u = u' + (2/r + q) u`.
    fn du(&self, r: f64) -> Complex64 {
        let (u, du) = self.u_exact(r);
        du + self.u_over_r(r) * 2.0 + u * self.model.q_r(r)
    }

    /// Interior source `f = [-(rho c^2 r^2 D u)'/r^2 + rho c^2 (2/r + q) D u]/rho - M u`.
    pub fn f(&self, r: f64) -> Complex64 {
        let m = &self.model;
        let p = |r: f64| m.rho.value(r) * m.cs.value(r) * m.cs.value(r);
        let flux = |r: f64| self.du(r) * (p(r) * r * r);
        let dflux = derivative(flux, r);
        let (u, _) = self.u_exact(r);
        let rho = m.rho.value(r);
        (-dflux / (r * r) + self.du(r) * (p(r) * (2.0 / r + m.q_r(r)))) / rho - m.radial_symbol(r) * u
    }

    /// Exterior source `g = -(E r^2 v'/M)'/r^2 - F v`.
    pub fn g(&self, r: f64) -> Result<Complex64, SolverError> {
        let m = &self.model;
        let mut err = None;
        let flux = |r: f64| match m.eta_extended(r) {
            Ok(eta) => self.v_exact(r).1 * (exp(2.0 * eta) * r * r / m.rho.value(r)) / m.radial_symbol(r),
            Err(e) => {
                err = Some(e);
                Complex64::new(0.0, 0.0)
            }
        };
        let dflux = derivative(flux, r);
        if let Some(e) = err {
            return Err(e.into());
        }
        let eta = m.eta_extended(r)?;
        let c = m.cs.value(r);
        let f = exp(2.0 * eta) / (c * c * m.rho.value(r));
        Ok(-dflux / (r * r) - self.v_exact(r).0 * f)
    }

    pub fn meshes(&self, n_int: usize, n_ext: usize) -> Result<(Mesh1D, Mesh1D), SolverError> {
        let r2 = self.model.r2;
        Ok((
            Mesh1D::uniform(0.0, r2, n_int)?.mark_interface(r2)?,
            Mesh1D::uniform(r2, self.r_ext, n_ext)?.mark_interface(r2)?,
        ))
    }

    pub fn solve(&self, n_int: usize, n_ext: usize, opts: &AssemblyOptions) -> Result<(ModalSolution, FieldErrors), SolverError> {
        let (mi, me) = self.meshes(n_int, n_ext)?;
        let r2 = self.model.r2;
        let f = |r: f64| if r <= r2 { self.f(r) } else { Complex64::new(0.0, 0.0) };
        let g = |r: f64| self.g(r).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let sys = assemble_coupled(&self.model, &mi, &me, &f, Some(&g), opts)?;
        let sol = solve(&sys)?;
        let eu = sol.u.as_ref().unwrap().errors(|r| self.u_exact(r));
        let ev = sol.v.as_ref().unwrap().errors(|r| self.v_exact(r));
        Ok((sol, eu.add(&ev)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub n_int: usize,
    pub n_ext: usize,
    pub h: f64,
    /// Relative `L^2` error of `(u, v)`.
    pub l2_error: f64,
    /// Relative `H^1`-seminorm error.
    pub energy_error: f64,
    pub l2_rate: Option<f64>,
    pub energy_rate: Option<f64>,
    pub int_f1: f64,
    pub int_f2: f64,
    pub int_f1_rate: Option<f64>,
    pub int_f2_rate: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// Some error sequence failed to decrease.
    pub non_monotone: bool,
    /// Errors at rounding level; rates carry no information.
    pub exact: bool,
}

impl RateTable {
    /// Rates between the last two rows.
    pub fn final_l2_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.l2_rate)
    }
}

fn rate(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    (e0 > 0.0 && e1 > 0.0).then(|| libm::log(e0 / e1) / libm::log(h0 / h1))
}

/// Solves on each `(n_int, n_ext)` pair, in order of refinement.
pub fn convergence_study(scenario: &MmsScenario, meshes: &[(usize, usize)], opts: &AssemblyOptions) -> Result<RateTable, SolverError> {
    if meshes.len() < 3 {
        return Err(SolverError::Precondition("need at least three meshes".into()));
    }
    let mut rows: Vec<RateRow> = Vec::new();
    for &(ni, ne) in meshes {
        let (sol, err) = scenario.solve(ni, ne, opts)?;
        let res = interface_residuals(&scenario.model, &sol)?;
        let h = (scenario.model.r2 / ni as f64).max((scenario.r_ext - scenario.model.r2) / ne as f64);
        let mut row = RateRow {
            n_int: ni,
            n_ext: ne,
            h,
            l2_error: err.l2_relative(),
            energy_error: err.h1_relative(),
            l2_rate: None,
            energy_rate: None,
            int_f1: res.int_f1,
            int_f2: res.int_f2,
            int_f1_rate: None,
            int_f2_rate: None,
            residual: sol.report.residual,
        };
        if let Some(p) = rows.last() {
            row.l2_rate = rate(p.l2_error, row.l2_error, p.h, row.h);
            row.energy_rate = rate(p.energy_error, row.energy_error, p.h, row.h);
            row.int_f1_rate = rate(p.int_f1, row.int_f1, p.h, row.h);
            row.int_f2_rate = rate(p.int_f2, row.int_f2, p.h, row.h);
        }
        rows.push(row);
    }
    let exact = rows.iter().all(|r| r.l2_error < 1e-12);
    let non_monotone = rows
        .windows(2)
        .any(|w| w[1].l2_error > w[0].l2_error || w[1].energy_error > w[0].energy_error);
    Ok(RateTable { rows, non_monotone, exact })
}
