use alloc::vec::Vec;

use num_complex::Complex64;
use serde::Serialize;

use super::{assemble_coupled, assemble_reference, solve, AssemblyOptions, Mesh1D, NodalField, SolverError};
use crate::background::BackgroundModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationRow {
    pub r_outer: f64,
    /// Relative `L^2(B_r2)` difference of coupled and reference `u_r`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStudy {
    pub h: f64,
    pub rows: Vec<TruncationRow>,
    /// Differences strictly decrease with `R`.
    pub monotone: bool,
    /// `-d ln(difference) / dR` from a least-squares fit; empirical, no law
    /// is asserted.
    pub kappa: Option<f64>,
}

/// Relative `L^2` difference of two fields on the interior mesh of `a`.
pub fn interior_difference(a: &NodalField, b: &NodalField, r2: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..a.mesh.elements() {
        let (lo, hi) = a.mesh.element(k);
        if lo >= r2 {
            break;
        }
        for (r, w) in super::element_rule(lo, hi, 5) {
            let x = a.eval(r).unwrap_or_default();
            let y = b.eval(r).unwrap_or_default();
            let dv = r * r * w;
            num += (x - y).norm_sqr() * dv;
            den += y.norm_sqr() * dv;
        }
    }
    if den > 0.0 {
        libm::sqrt(num / den)
    } else {
        libm::sqrt(num)
    }
}

/// Coupled solve with `R_ext = R` against the reference solve on `[0, R]`,
/// both with element size close to `h`, for each `R` in `radii`.
pub fn truncation_study(
    model: &BackgroundModel,
    f: &dyn Fn(f64) -> Complex64,
    h: f64,
    radii: &[f64],
    opts: &AssemblyOptions,
) -> Result<TruncationStudy, SolverError> {
    let r2 = model.r2;
    let n_int = libm::ceil(r2 / h - 1e-9).max(1.0) as usize;
    let mut rows = Vec::new();
    for &r_out in radii {
        let n_ext = libm::ceil((r_out - r2) / h - 1e-9).max(1.0) as usize;
        let mi = Mesh1D::uniform(0.0, r2, n_int)?.mark_interface(r2)?;
        let me = Mesh1D::uniform(r2, r_out, n_ext)?.mark_interface(r2)?;
        let mr = Mesh1D::piecewise(&[0.0, r2, r_out], &[n_int, n_ext])?.mark_interface(r2)?;
        let c = solve(&assemble_coupled(model, &mi, &me, f, None, opts)?)?;
        let r = solve(&assemble_reference(model, &mr, f, opts)?)?;
        let d = interior_difference(c.u.as_ref().unwrap(), r.u.as_ref().unwrap(), r2);
        rows.push(TruncationRow { r_outer: r_out, difference: d });
    }
    let monotone = rows.windows(2).all(|w| w[1].difference < w[0].difference);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.difference > 0.0)
        .map(|r| (r.r_outer, libm::log(r.difference)))
        .collect();
    let kappa = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        -sxy / sxx
    });
    Ok(TruncationStudy { h, rows, monotone, kappa })
}
