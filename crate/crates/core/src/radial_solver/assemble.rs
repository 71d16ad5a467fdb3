use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{element_rule, AssembledSystem, BandMatrix, Mesh1D, SolverError};
use crate::background::BackgroundModel;
use crate::math::{exp, PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    Coupled,
    Reference,
    FullGravity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Ur,
    V,
    Psi,
    Multiplier,
}

/// Exterior unknowns of the scalar reduction against a 3D vector
/// discretization on the same nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DofReduction {
    pub exterior_nodes: usize,
    pub scalar_dofs: usize,
    pub vector_dofs_3d: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemMeta {
    pub mode_l: u32,
    pub formulation: Formulation,
    pub n_dofs: usize,
    pub bandwidth: (usize, usize),
    /// Outer radius of the truncated domain.
    pub r_outer: f64,
    /// Constrained rows, as `field(r) = value` descriptions.
    pub constraints: Vec<String>,
    /// DOF range of the exterior scalar block.
    pub exterior_block: Option<(usize, usize)>,
    pub dof_reduction: Option<DofReduction>,
    pub warnings: Vec<String>,
    pub exterior_coefficient_scale: f64,
    /// `max |A_ij|` before constraints were applied.
    pub matrix_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssemblyOptions {
    /// Gauss points per element.
    pub quadrature_order: usize,
    /// Multiplies `e^{2 eta} / (rho M)` in the exterior stiffness. Anything
    /// other than `1` deliberately corrupts the system.
    pub exterior_coefficient_scale: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            quadrature_order: 4,
            exterior_coefficient_scale: 1.0,
        }
    }
}

type Source<'a> = &'a dyn Fn(f64) -> Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_symmetric_background(model: &BackgroundModel) -> Result<Vec<String>, SolverError> {
    if model.rotation != [0.0; 3] {
        return Err(SolverError::Precondition("radial reduction needs Omega = 0".into()));
    }
    if !model.b.is_zero() {
        return Err(SolverError::Precondition("radial reduction needs b = 0".into()));
    }
    let mut warnings = Vec::new();
    if model.omega == 0.0 {
        warnings.push(String::from("omega = 0: injectivity not guaranteed"));
    }
    let g_min = (0..=200)
        .map(|i| model.gamma.value(2.0 * model.r3 * i as f64 / 200.0))
        .fold(f64::INFINITY, f64::min);
    if !(g_min > 0.0) {
        warnings.push(alloc::format!("gamma_min = {g_min:e} <= 0: injectivity not guaranteed"));
    }
    Ok(warnings)
}

fn check_source_outside(f: Source, mesh: &Mesh1D, from: f64, order: usize) -> Result<(), SolverError> {
    for k in 0..mesh.elements() {
        let (a, b) = mesh.element(k);
        if a < from {
            continue;
        }
        for (r, _) in element_rule(a, b, order) {
            if f(r) != ZERO {
                return Err(SolverError::SourceOutsideInterior { r });
            }
        }
    }
    Ok(())
}

/// P1 shape functions and derivatives on `[a, b]` at `r`.
#[inline]
fn shape(a: f64, b: f64, r: f64) -> ([f64; 2], [f64; 2]) {
    let h = b - a;
    ([(b - r) / h, (r - a) / h], [-1.0 / h, 1.0 / h])
}

/// Interior Cowling element matrix and load vector:
/// `int [rho c^2 D phi_j D phi_i - rho M phi_j phi_i] dV`, `int rho f phi_i dV`
/// with `D = d/dr + 2/r + q`.
fn cowling_element(model: &BackgroundModel, a: f64, b: f64, f: Source, order: usize) -> ([[Complex64; 2]; 2], [Complex64; 2]) {
    let mut m = [[ZERO; 2]; 2];
    let mut l = [ZERO; 2];
    for (r, w) in element_rule(a, b, order) {
        let dv = 4.0 * PI * r * r * w;
        let rho = model.rho.value(r);
        let c = model.cs.value(r);
        let q = model.q_r(r);
        let sym = model.radial_symbol(r);
        let (phi, dphi) = shape(a, b, r);
        let d = [dphi[0] + (2.0 / r + q) * phi[0], dphi[1] + (2.0 / r + q) * phi[1]];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += (rho * c * c * d[j] * d[i] - rho * sym * phi[j] * phi[i]) * dv;
            }
            l[i] += f(r) * (rho * phi[i] * dv);
        }
    }
    (m, l)
}

fn finish(mut matrix: BandMatrix, mut rhs: Vec<Complex64>, constrained: &[usize]) -> (BandMatrix, Vec<Complex64>, f64) {
    let scale = matrix.max_abs();
    for &k in constrained {
        matrix.constrain(k, Complex64::new(scale, 0.0));
        rhs[k] = ZERO;
    }
    (matrix, rhs, scale)
}

/// Coupled system: `u_r` on `mesh_int = [0, r2]`, `v` on `mesh_ext = [r2,
/// R_ext]`, with `u_r(0) = 0` and `v(R_ext) = 0`. The optional exterior
/// source `g` enters as `int g phi dV`; the physical problem has `g = 0`.
pub fn assemble_coupled(
    model: &BackgroundModel,
    mesh_int: &Mesh1D,
    mesh_ext: &Mesh1D,
    f: Source,
    g: Option<Source>,
    opts: &AssemblyOptions,
) -> Result<AssembledSystem, SolverError> {
    let warnings = check_symmetric_background(model)?;
    let r2 = model.r2;
    let tol = 1e-12 * r2.max(1.0);
    if mesh_int.start() != 0.0 {
        return Err(SolverError::Mesh("interior mesh must start at 0".into()));
    }
    if (mesh_int.end() - r2).abs() > tol || (mesh_ext.start() - r2).abs() > tol {
        return Err(SolverError::NotANode { r: r2 });
    }
    check_source_outside(f, mesh_ext, r2, opts.quadrature_order)?;

    let ni = mesh_int.len();
    let ne = mesh_ext.len();
    let n = ni + ne;
    let mut a = BandMatrix::new(n, 1, 1);
    let mut rhs = alloc::vec![ZERO; n];
    let order = opts.quadrature_order;

    for k in 0..mesh_int.elements() {
        let (lo, hi) = mesh_int.element(k);
        let (m, l) = cowling_element(model, lo, hi, f, order);
        for i in 0..2 {
            for j in 0..2 {
                a.add(k + i, k + j, m[i][j]);
            }
            rhs[k + i] += l[i];
        }
    }

    // Exterior: int [s E/M v' phi' - F v phi] dV with E = e^{2 eta}/rho and
    // F = E / c^2.
    let mut points = Vec::new();
    for k in 0..mesh_ext.elements() {
        let (lo, hi) = mesh_ext.element(k);
        points.extend(element_rule(lo, hi, order));
    }
    let radii: Vec<f64> = points.iter().map(|p| p.0).collect();
    let etas = model.eta_table(&radii)?;
    let s = opts.exterior_coefficient_scale;
    for k in 0..mesh_ext.elements() {
        let (lo, hi) = mesh_ext.element(k);
        let mut m = [[ZERO; 2]; 2];
        let mut l = [ZERO; 2];
        for q in 0..order {
            let idx = k * order + q;
            let (r, w) = points[idx];
            let dv = 4.0 * PI * r * r * w;
            let rho = model.rho.value(r);
            let c = model.cs.value(r);
            let e = exp(2.0 * etas[idx]) / rho;
            let sym = model.radial_symbol(r);
            if sym == ZERO {
                return Err(SolverError::SingularSymbol { r });
            }
            let stiff = e * s / sym;
            let mass = e / (c * c);
            let (phi, dphi) = shape(lo, hi, r);
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += (stiff * dphi[j] * dphi[i] - mass * phi[j] * phi[i]) * dv;
                }
                if let Some(g) = g {
                    l[i] += g(r) * (phi[i] * dv);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                a.add(ni + k + i, ni + k + j, m[i][j]);
            }
            rhs[ni + k + i] += l[i];
        }
    }

    // Surface terms 4 pi r2^2 (u_r(r2) conj v'(r2) + v(r2) conj u'_r(r2)).
    let area = Complex64::new(4.0 * PI * r2 * r2, 0.0);
    a.add(ni - 1, ni, area);
    a.add(ni, ni - 1, area);

    let (matrix, rhs, scale) = finish(a, rhs, &[0, n - 1]);
    let mut dofs: Vec<(super::Field, usize)> = (0..ni).map(|k| (Field::Ur, k)).collect();
    dofs.extend((0..ne).map(|k| (Field::V, k)));
    let meta = SystemMeta {
        mode_l: 0,
        formulation: Formulation::Coupled,
        n_dofs: n,
        bandwidth: matrix.bandwidth(),
        r_outer: mesh_ext.end(),
        constraints: alloc::vec![String::from("u_r(0) = 0"), alloc::format!("v({}) = 0", mesh_ext.end())],
        exterior_block: Some((ni, n)),
        dof_reduction: Some(DofReduction {
            exterior_nodes: ne,
            scalar_dofs: ne,
            vector_dofs_3d: 3 * ne,
            factor: 3.0,
        }),
        warnings,
        exterior_coefficient_scale: s,
        matrix_scale: scale,
    };
    Ok(AssembledSystem {
        matrix,
        rhs,
        dofs,
        meta,
        meshes: (mesh_int.clone(), Some(mesh_ext.clone())),
    })
}

fn check_truncated_mesh(model: &BackgroundModel, mesh: &Mesh1D) -> Result<(), SolverError> {
    if mesh.start() != 0.0 {
        return Err(SolverError::Mesh("mesh must start at 0".into()));
    }
    if mesh.node_index(model.r2).is_none() {
        return Err(SolverError::NotANode { r: model.r2 });
    }
    if !(mesh.end() > model.r2) {
        return Err(SolverError::Precondition("R must exceed r2".into()));
    }
    Ok(())
}

/// Truncated all-vector Cowling problem on `[0, R]` with `u_r(0) = u_r(R) = 0`.
pub fn assemble_reference(model: &BackgroundModel, mesh: &Mesh1D, f: Source, opts: &AssemblyOptions) -> Result<AssembledSystem, SolverError> {
    let warnings = check_symmetric_background(model)?;
    check_truncated_mesh(model, mesh)?;
    check_source_outside(f, mesh, model.r2, opts.quadrature_order)?;
    let n = mesh.len();
    let mut a = BandMatrix::new(n, 1, 1);
    let mut rhs = alloc::vec![ZERO; n];
    for k in 0..mesh.elements() {
        let (lo, hi) = mesh.element(k);
        let (m, l) = cowling_element(model, lo, hi, f, opts.quadrature_order);
        for i in 0..2 {
            for j in 0..2 {
                a.add(k + i, k + j, m[i][j]);
            }
            rhs[k + i] += l[i];
        }
    }
    let (matrix, rhs, scale) = finish(a, rhs, &[0, n - 1]);
    let meta = SystemMeta {
        mode_l: 0,
        formulation: Formulation::Reference,
        n_dofs: n,
        bandwidth: matrix.bandwidth(),
        r_outer: mesh.end(),
        constraints: alloc::vec![String::from("u_r(0) = 0"), alloc::format!("u_r({}) = 0", mesh.end())],
        exterior_block: None,
        dof_reduction: None,
        warnings,
        exterior_coefficient_scale: 1.0,
        matrix_scale: scale,
    };
    Ok(AssembledSystem {
        matrix,
        rhs,
        dofs: (0..n).map(|k| (Field::Ur, k)).collect(),
        meta,
        meshes: (mesh.clone(), None),
    })
}

/// `(u_r, psi)` on `[0, R]` with `u_r(0) = u_r(R) = 0`, natural conditions
/// for `psi`, and a Lagrange multiplier for `int_{B_r1} psi dx = 0`.
///
/// Unknowns: multiplier first, then `(u_k, psi_k)` interleaved per node.
pub fn assemble_full_gravity(model: &BackgroundModel, mesh: &Mesh1D, f: Source, opts: &AssemblyOptions) -> Result<AssembledSystem, SolverError> {
    let warnings = check_symmetric_background(model)?;
    check_truncated_mesh(model, mesh)?;
    check_source_outside(f, mesh, model.r2, opts.quadrature_order)?;
    let nn = mesh.len();
    let n = 1 + 2 * nn;
    let ui = |k: usize| 1 + 2 * k;
    let pi = |k: usize| 2 + 2 * k;
    let r1 = model.r1;
    let k1 = mesh.nodes.partition_point(|&x| x < r1).min(nn - 1);
    let bw = 3usize.max(pi(k1));
    let mut a = BandMatrix::new(n, bw, bw);
    let mut rhs = alloc::vec![ZERO; n];
    let order = opts.quadrature_order;
    let inv_4pig = 1.0 / (4.0 * PI * model.gravity);

    for k in 0..mesh.elements() {
        let (lo, hi) = mesh.element(k);
        let (m, l) = cowling_element(model, lo, hi, f, order);
        let mut up = [[ZERO; 2]; 2];
        let mut pu = [[ZERO; 2]; 2];
        let mut pp = [[ZERO; 2]; 2];
        for (r, w) in element_rule(lo, hi, order) {
            let dv = 4.0 * PI * r * r * w;
            let rho = model.rho.value(r);
            let (phi, dphi) = shape(lo, hi, r);
            for i in 0..2 {
                for j in 0..2 {
                    up[i][j] -= Complex64::new(rho * dphi[j] * phi[i] * dv, 0.0);
                    pu[i][j] -= Complex64::new(rho * phi[j] * dphi[i] * dv, 0.0);
                    pp[i][j] += Complex64::new(inv_4pig * dphi[j] * dphi[i] * dv, 0.0);
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                a.add(ui(k + i), ui(k + j), m[i][j]);
                a.add(ui(k + i), pi(k + j), up[i][j]);
                a.add(pi(k + i), ui(k + j), pu[i][j]);
                a.add(pi(k + i), pi(k + j), pp[i][j]);
            }
            rhs[ui(k + i)] += l[i];
        }
        // Gauge row and column on [lo, min(hi, r1)].
        if lo < r1 {
            let top = hi.min(r1);
            for (r, w) in element_rule(lo, top, order) {
                let dv = 4.0 * PI * r * r * w;
                let (phi, _) = shape(lo, hi, r);
                for i in 0..2 {
                    let v = Complex64::new(phi[i] * dv, 0.0);
                    a.add(0, pi(k + i), v);
                    a.add(pi(k + i), 0, v);
                }
            }
        }
    }
    let (matrix, rhs, scale) = finish(a, rhs, &[ui(0), ui(nn - 1)]);
    let mut dofs = alloc::vec![(Field::Multiplier, 0)];
    for k in 0..nn {
        dofs.push((Field::Ur, k));
        dofs.push((Field::Psi, k));
    }
    let meta = SystemMeta {
        mode_l: 0,
        formulation: Formulation::FullGravity,
        n_dofs: n,
        bandwidth: matrix.bandwidth(),
        r_outer: mesh.end(),
        constraints: alloc::vec![
            String::from("u_r(0) = 0"),
            alloc::format!("u_r({}) = 0", mesh.end()),
            String::from("int_{B_r1} psi dx = 0 (Lagrange multiplier)"),
        ],
        exterior_block: None,
        dof_reduction: None,
        warnings,
        exterior_coefficient_scale: 1.0,
        matrix_scale: scale,
    };
    Ok(AssembledSystem {
        matrix,
        rhs,
        dofs,
        meta,
        meshes: (mesh.clone(), None),
    })
}
