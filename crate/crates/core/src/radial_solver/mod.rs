//! Spherically symmetric (`l = 0`) reductions solved with P1 finite elements:
//! the coupled interior/exterior formulation, the truncated all-vector
//! Cowling reference problem and the full system with gravity.

mod assemble;
mod band;
mod interface;
mod mesh;
mod mms;
mod study;

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{
    assemble_coupled, assemble_full_gravity, assemble_reference, AssemblyOptions, DofReduction, Field, Formulation,
    SystemMeta,
};
pub use band::{BandLu, BandMatrix, PivotReport};
pub use interface::{interface_residuals, reconstruct_u_from_v, InterfaceResiduals, ReconstructedField};
pub use mesh::Mesh1D;
pub use mms::{convergence_study, MmsScenario, RateRow, RateTable};
pub use study::{interior_difference, truncation_study, TruncationRow, TruncationStudy};

use crate::background::ModelError;
use crate::calculus::bump::ShellBump;
use crate::calculus::quadrature::gauss_legendre;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid mesh: {0}")]
    Mesh(String),
    #[error("r = {r} is not a mesh node")]
    NotANode { r: f64 },
    #[error("source is nonzero at r = {r}, outside B_r2")]
    SourceOutsideInterior { r: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular matrix: pivot {pivot:e} in column {column}")]
    Singular { column: usize, pivot: f64 },
    #[error("m2_rr + i omega gamma vanishes at r = {r}")]
    SingularSymbol { r: f64 },
    #[error("solution has no `{0}` component")]
    MissingField(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Radial source descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    #[default]
    Zero,
    /// `(re + i im) * B(r)` with `B` the smooth bump on `(inner, outer)`.
    ShellBump {
        re: f64,
        #[serde(default)]
        im: f64,
        inner: f64,
        outer: f64,
    },
}

impl SourceSpec {
    pub fn eval(&self, r: f64) -> Complex64 {
        match *self {
            SourceSpec::Zero => Complex64::new(0.0, 0.0),
            SourceSpec::ShellBump { re, im, inner, outer } => {
                Complex64::new(re, im) * ShellBump::new(inner, outer).radial(r).0
            }
        }
    }
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub(crate) fn element_rule(a: f64, b: f64, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(t, w)| (m + h * t, h * w)).collect()
}

/// Continuous piecewise-linear field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodalField {
    pub mesh: Mesh1D,
    pub values: Vec<Complex64>,
}

impl NodalField {
    pub fn new(mesh: Mesh1D, values: Vec<Complex64>) -> Self {
        assert_eq!(mesh.len(), values.len());
        Self { mesh, values }
    }

    pub fn eval(&self, r: f64) -> Option<Complex64> {
        let k = self.mesh.locate(r)?;
        let (a, b) = self.mesh.element(k);
        let t = (r - a) / (b - a);
        Some(self.values[k] * (1.0 - t) + self.values[k + 1] * t)
    }

    /// Constant derivative on element `k`.
    pub fn slope(&self, k: usize) -> Complex64 {
        let (a, b) = self.mesh.element(k);
        (self.values[k + 1] - self.values[k]) / (b - a)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(int |f_h - f|^2 dV, int |f|^2 dV)` and the same for derivatives, with
    /// `dV = 4 pi r^2 dr`.
    pub fn errors(&self, exact: impl Fn(f64) -> (Complex64, Complex64)) -> FieldErrors {
        let mut e = FieldErrors::default();
        for k in 0..self.mesh.elements() {
            let (a, b) = self.mesh.element(k);
            let s = self.slope(k);
            for (r, w) in element_rule(a, b, 5) {
                let t = (r - a) / (b - a);
                let v = self.values[k] * (1.0 - t) + self.values[k + 1] * t;
                let (f, df) = exact(r);
                let dv = 4.0 * crate::math::PI * r * r * w;
                e.l2_err_sq += (v - f).norm_sqr() * dv;
                e.l2_norm_sq += f.norm_sqr() * dv;
                e.h1_err_sq += (s - df).norm_sqr() * dv;
                e.h1_norm_sq += df.norm_sqr() * dv;
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldErrors {
    pub l2_err_sq: f64,
    pub l2_norm_sq: f64,
    pub h1_err_sq: f64,
    pub h1_norm_sq: f64,
}

impl FieldErrors {
    pub fn add(&self, o: &Self) -> Self {
        Self {
            l2_err_sq: self.l2_err_sq + o.l2_err_sq,
            l2_norm_sq: self.l2_norm_sq + o.l2_norm_sq,
            h1_err_sq: self.h1_err_sq + o.h1_err_sq,
            h1_norm_sq: self.h1_norm_sq + o.h1_norm_sq,
        }
    }

    pub fn l2_relative(&self) -> f64 {
        libm::sqrt(self.l2_err_sq / self.l2_norm_sq)
    }

    pub fn h1_relative(&self) -> f64 {
        libm::sqrt(self.h1_err_sq / self.h1_norm_sq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveReport {
    /// `||A x - b|| / ||b||`, or `||A x||` when `b = 0`.
    pub residual: f64,
    pub pivots: PivotReport,
    /// Pivot ratio below `1e-12`.
    pub near_singular: bool,
    pub refinement_steps: usize,
}

/// Residual target of [`solve`].
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalSolution {
    pub meta: SystemMeta,
    pub coefficients: Vec<Complex64>,
    /// `u_r` on the interior mesh (`[0, r2]` coupled, `[0, R]` otherwise).
    pub u: Option<NodalField>,
    /// `v` on `[r2, R_ext]`.
    pub v: Option<NodalField>,
    pub psi: Option<NodalField>,
    pub multiplier: Option<Complex64>,
    pub report: SolveReport,
}

impl ModalSolution {
    /// Solution assembled from given fields, without a linear system.
    pub fn from_fields(meta: SystemMeta, u: Option<NodalField>, v: Option<NodalField>) -> Self {
        Self {
            meta,
            coefficients: Vec::new(),
            u,
            v,
            psi: None,
            multiplier: None,
            report: SolveReport {
                residual: 0.0,
                pivots: PivotReport {
                    min_pivot: f64::NAN,
                    max_pivot: f64::NAN,
                    min_pivot_column: 0,
                    ratio: f64::NAN,
                },
                near_singular: false,
                refinement_steps: 0,
            },
        }
    }

    pub fn u_r(&self, r: f64) -> Option<Complex64> {
        self.u.as_ref()?.eval(r)
    }

    pub fn v(&self, r: f64) -> Option<Complex64> {
        self.v.as_ref()?.eval(r)
    }

    pub fn psi(&self, r: f64) -> Option<Complex64> {
        self.psi.as_ref()?.eval(r)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.coefficients.iter().map(|z| z.norm_sqr()).sum())
    }
}

/// Assembled linear system with its DOF map.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: BandMatrix,
    pub rhs: Vec<Complex64>,
    /// `(field, node index)` per unknown.
    pub dofs: Vec<(Field, usize)>,
    pub meta: SystemMeta,
    pub(crate) meshes: (Mesh1D, Option<Mesh1D>),
}

impl AssembledSystem {
    pub fn interior_mesh(&self) -> &Mesh1D {
        &self.meshes.0
    }

    pub fn exterior_mesh(&self) -> Option<&Mesh1D> {
        self.meshes.1.as_ref()
    }
}

fn norm2(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum())
}

/// Banded LU solve with up to two steps of iterative refinement.
pub fn solve(system: &AssembledSystem) -> Result<ModalSolution, SolverError> {
    let lu = system.matrix.factor()?;
    let b = &system.rhs;
    let bnorm = norm2(b);
    let mut x = lu.solve(b);
    let resid = |x: &[Complex64]| -> (Vec<Complex64>, f64) {
        let ax = system.matrix.mul_vec(x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let n = norm2(&r);
        let rel = if bnorm > 0.0 { n / bnorm } else { n };
        (r, rel)
    };
    let (mut r, mut rel) = resid(&x);
    let mut steps = 0;
    while rel > 0.01 * SOLVE_TOL && steps < 2 {
        let d = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        steps += 1;
        (r, rel) = resid(&x);
    }

    let mut u_vals = Vec::new();
    let mut v_vals = Vec::new();
    let mut psi_vals = Vec::new();
    let mut multiplier = None;
    for (&(field, _), &val) in system.dofs.iter().zip(&x) {
        match field {
            Field::Ur => u_vals.push(val),
            Field::V => v_vals.push(val),
            Field::Psi => psi_vals.push(val),
            Field::Multiplier => multiplier = Some(val),
        }
    }
    let (int_mesh, ext_mesh) = &system.meshes;
    let u = (!u_vals.is_empty()).then(|| NodalField::new(int_mesh.clone(), u_vals));
    let v = match ext_mesh {
        Some(m) if !v_vals.is_empty() => Some(NodalField::new(m.clone(), v_vals)),
        _ => None,
    };
    let psi = (!psi_vals.is_empty()).then(|| NodalField::new(int_mesh.clone(), psi_vals));
    let pivots = lu.pivots;
    Ok(ModalSolution {
        meta: system.meta.clone(),
        coefficients: x,
        u,
        v,
        psi,
        multiplier,
        report: SolveReport {
            residual: rel,
            pivots,
            near_singular: pivots.ratio < 1e-12,
            refinement_steps: steps,
        },
    })
}
