use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use super::{ModalSolution, NodalField, SolverError};
use crate::background::BackgroundModel;
use crate::math::exp;

/// Piecewise-constant `u_r` in the atmosphere, sampled at element midpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedField {
    pub midpoints: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl ReconstructedField {
    /// Linear interpolation between midpoints, constant beyond them.
    pub fn eval(&self, r: f64) -> Complex64 {
        let m = &self.midpoints;
        let n = m.len();
        if r <= m[0] {
            return self.values[0];
        }
        if r >= m[n - 1] {
            return self.values[n - 1];
        }
        let k = m.partition_point(|&x| x <= r) - 1;
        let t = (r - m[k]) / (m[k + 1] - m[k]);
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }
}

fn symbol(model: &BackgroundModel, r: f64) -> Result<Complex64, SolverError> {
    let m = model.radial_symbol(r);
    if m == Complex64::new(0.0, 0.0) {
        Err(SolverError::SingularSymbol { r })
    } else {
        Ok(m)
    }
}

/// `u_r = e^eta rho^-1 (m2_rr + i omega gamma)^-1 v'` with `v'` taken per
/// element.
pub fn reconstruct_u_from_v(model: &BackgroundModel, solution: &ModalSolution) -> Result<ReconstructedField, SolverError> {
    let v = solution.v.as_ref().ok_or(SolverError::MissingField("v"))?;
    let mesh = &v.mesh;
    let midpoints: Vec<f64> = (0..mesh.elements()).map(|k| {
        let (a, b) = mesh.element(k);
        0.5 * (a + b)
    }).collect();
    let etas = model.eta_table(&midpoints)?;
    let mut values = Vec::with_capacity(midpoints.len());
    for (k, &r) in midpoints.iter().enumerate() {
        let m = symbol(model, r)?;
        values.push(v.slope(k) * exp(etas[k]) / (model.rho.value(r) * m));
    }
    Ok(ReconstructedField { midpoints, values })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterfaceResiduals {
    /// `|u_ext(r2) - u_r(r2)| / scale_u`.
    pub int_f1: f64,
    /// `|div u_ext(r2) - div u(r2)| / scale_div`.
    pub int_f2: f64,
    pub u_interior: Complex64,
    pub u_exterior: Complex64,
    pub div_interior: Complex64,
    pub div_exterior: Complex64,
    pub scale_u: f64,
    pub scale_div: f64,
}

/// Linear extrapolation to `r` of the values `s1` at `m1` and `s2` at `m2`.
fn extrapolate(m1: f64, s1: Complex64, m2: f64, s2: Complex64, r: f64) -> Complex64 {
    s1 + (s1 - s2) * ((r - m1) / (m1 - m2))
}

fn mid(f: &NodalField, k: usize) -> f64 {
    let (a, b) = f.mesh.element(k);
    0.5 * (a + b)
}

/// One-sided traces at `r2` from element values: slopes are extrapolated
/// linearly from the two elements nearest the interface, and the exterior
/// flux `W = e^{2 eta} r^2 v' / (rho M)` is differenced between midpoints of
/// the first three exterior elements.
pub fn interface_residuals(model: &BackgroundModel, solution: &ModalSolution) -> Result<InterfaceResiduals, SolverError> {
    let u = solution.u.as_ref().ok_or(SolverError::MissingField("u_r"))?;
    let v = solution.v.as_ref().ok_or(SolverError::MissingField("v"))?;
    let r2 = model.r2;
    let ni = u.mesh.elements();
    if ni < 2 || v.mesh.elements() < 3 {
        return Err(SolverError::Mesh("need >= 2 interior and >= 3 exterior elements".into()));
    }

    let u_int = u.values[ni];
    let du = extrapolate(mid(u, ni - 1), u.slope(ni - 1), mid(u, ni - 2), u.slope(ni - 2), r2);
    let div_int = du + u_int * (2.0 / r2);

    let rho2 = model.rho.value(r2);
    let m2 = symbol(model, r2)?;
    let dv = extrapolate(mid(v, 0), v.slope(0), mid(v, 1), v.slope(1), r2);
    let u_ext = dv / (rho2 * m2);

    let mids = [mid(v, 0), mid(v, 1), mid(v, 2)];
    let etas = model.eta_table(&mids)?;
    let mut w = [Complex64::new(0.0, 0.0); 3];
    for k in 0..3 {
        let r = mids[k];
        w[k] = v.slope(k) * (exp(2.0 * etas[k]) * r * r / model.rho.value(r)) / symbol(model, r)?;
    }
    let d01 = (w[1] - w[0]) / (mids[1] - mids[0]);
    let d12 = (w[2] - w[1]) / (mids[2] - mids[1]);
    let dw = extrapolate(0.5 * (mids[0] + mids[1]), d01, 0.5 * (mids[1] + mids[2]), d12, r2);
    let div_ext = dw / (r2 * r2) - u_ext * model.q_r(r2);

    let scale_u = u.max_abs().max(u_ext.norm());
    let mut scale_div = div_int.norm().max(div_ext.norm());
    for k in 0..ni {
        let m = mid(u, k);
        let val = u.eval(m).unwrap_or_default();
        scale_div = scale_div.max((u.slope(k) + val * (2.0 / m)).norm());
    }
    let rel = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
    Ok(InterfaceResiduals {
        int_f1: rel((u_ext - u_int).norm(), scale_u),
        int_f2: rel((div_ext - div_int).norm(), scale_div),
        u_interior: u_int,
        u_exterior: u_ext,
        div_interior: div_int,
        div_exterior: div_ext,
        scale_u,
        scale_div,
    })
}
