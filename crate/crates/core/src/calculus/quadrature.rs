//! Gauss-Legendre rules, adaptive Gauss-Kronrod integration on intervals, and
//! radial-times-angular product rules on balls, annuli and spheres.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math::{cos, sin, sqrt, CompensatedSum, Vec3, PI};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(z) and P_{n-1}(z).
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() <= 1e-16 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre nodes on `[a, b]` with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Weights of the embedded 7-point Gauss rule at the odd Kronrod nodes.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7-K15 panel: `(kronrod, |kronrod - gauss|)`.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * KRONROD_WEIGHTS[7];
    let mut g = fc * GAUSS7_WEIGHTS[3];
    for j in 0..7 {
        let dx = h * KRONROD_NODES[j];
        let s = f(c - dx) + f(c + dx);
        k += KRONROD_WEIGHTS[j] * s;
        if j % 2 == 1 {
            g += GAUSS7_WEIGHTS[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Globally adaptive G7-K15 integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed estimate
/// is below `max(abs_tol, rel_tol * |I|)` or `max_panels` is reached.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> AdaptiveResult {
    if a == b {
        return AdaptiveResult {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
            converged: true,
        };
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        let tol = abs_tol.max(rel_tol * value.abs());
        if err <= tol || panels.len() >= max_panels {
            return AdaptiveResult {
                value,
                error_estimate: err,
                panels: panels.len(),
                converged: err <= tol,
            };
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integration domain of a product rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Ball { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Sphere { radius: f64 },
}

/// Resolution of a product rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleOrder {
    /// Gauss-Legendre nodes per radial panel.
    pub radial_nodes: usize,
    /// Radial panels per radial segment.
    pub radial_panels: usize,
    /// Spherical polynomial degree integrated exactly by the angular rule.
    pub angular_degree: usize,
}

impl Default for RuleOrder {
    fn default() -> Self {
        Self {
            radial_nodes: 20,
            radial_panels: 8,
            angular_degree: 20,
        }
    }
}

impl RuleOrder {
    pub fn doubled(&self) -> Self {
        Self {
            radial_nodes: self.radial_nodes,
            radial_panels: self.radial_panels * 2,
            angular_degree: self.angular_degree * 2 + 1,
        }
    }
}

/// Angular node: unit direction and weight; weights sum to `4 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode {
    pub dir: Vec3,
    pub weight: f64,
}

/// Radial node: radius and weight including the `r^2` Jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode {
    pub r: f64,
    pub weight: f64,
}

/// Product Gauss rule in `(cos theta, phi)` exact for spherical polynomials of
/// total degree `<= degree`.
pub fn angular_rule(degree: usize) -> Vec<AngularNode> {
    let n_theta = degree / 2 + 1;
    let n_phi = degree + 1;
    let (t, wt) = gauss_legendre(n_theta);
    let mut out = Vec::with_capacity(n_theta * n_phi);
    let dphi = 2.0 * PI / n_phi as f64;
    for (ct, w) in t.iter().zip(&wt) {
        let st = sqrt((1.0 - ct * ct).max(0.0));
        for k in 0..n_phi {
            let phi = (k as f64 + 0.5) * dphi;
            out.push(AngularNode {
                dir: [st * cos(phi), st * sin(phi), *ct],
                weight: w * dphi,
            });
        }
    }
    out
}

/// A tensor-product quadrature rule `radial x angular`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub domain: Domain,
    pub order: RuleOrder,
    radial: Vec<RadialNode>,
    angular: Vec<AngularNode>,
}

impl QuadratureRule {
    pub fn ball(radius: f64, order: RuleOrder) -> Self {
        Self::shells(&[0.0, radius], order, Domain::Ball { radius })
    }

    pub fn annulus(inner: f64, outer: f64, order: RuleOrder) -> Self {
        Self::shells(&[inner, outer], order, Domain::Annulus { inner, outer })
    }

    /// Surface rule on the sphere `|x| = radius` with surface measure
    /// `radius^2 dOmega`.
    pub fn sphere(radius: f64, order: RuleOrder) -> Self {
        Self {
            domain: Domain::Sphere { radius },
            order,
            radial: alloc::vec![RadialNode {
                r: radius,
                weight: radius * radius,
            }],
            angular: angular_rule(order.angular_degree),
        }
    }

    /// Volume rule over `[breaks[0], breaks[last]]` with a segment between
    /// consecutive breakpoints, each split into `order.radial_panels` panels.
    pub fn shells(breaks: &[f64], order: RuleOrder, domain: Domain) -> Self {
        let mut radial = Vec::new();
        for seg in breaks.windows(2) {
            if seg[1] <= seg[0] {
                continue;
            }
            for (r, w) in composite_gauss(seg[0], seg[1], order.radial_panels, order.radial_nodes) {
                radial.push(RadialNode { r, weight: w * r * r });
            }
        }
        Self {
            domain,
            order,
            radial,
            angular: angular_rule(order.angular_degree),
        }
    }

    pub fn radial_nodes(&self) -> &[RadialNode] {
        &self.radial
    }

    pub fn angular_nodes(&self) -> &[AngularNode] {
        &self.angular
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterator over `(point, weight)`.
    pub fn nodes(&self) -> impl Iterator<Item = (Vec3, f64)> + '_ {
        self.radial.iter().flat_map(move |rn| {
            self.angular.iter().map(move |an| {
                (
                    [rn.r * an.dir[0], rn.r * an.dir[1], rn.r * an.dir[2]],
                    rn.weight * an.weight,
                )
            })
        })
    }

    /// Integrates with per-shell caching: `shell(r)` is called once per radial
    /// node and its result is passed to `point` for every angular node.
    pub fn integrate_shells<S, FS, FP>(&self, mut shell: FS, mut point: FP) -> Complex64
    where
        FS: FnMut(f64) -> S,
        FP: FnMut(&S, &Vec3, &Vec3, f64) -> Complex64,
    {
        let mut acc = CompensatedSum::new();
        for rn in &self.radial {
            let s = shell(rn.r);
            let mut inner = CompensatedSum::new();
            for an in &self.angular {
                let x = [rn.r * an.dir[0], rn.r * an.dir[1], rn.r * an.dir[2]];
                inner.add(point(&s, &x, &an.dir, rn.r) * an.weight);
            }
            acc.add(inner.value() * rn.weight);
        }
        acc.value()
    }
}

/// Weighted sum of `integrand` over the rule's nodes, compensated and in a
/// fixed order.
pub fn integrate<F: FnMut(&Vec3) -> Complex64>(rule: &QuadratureRule, mut integrand: F) -> Complex64 {
    rule.integrate_shells(|_| (), |_, x, _, _| integrand(x))
}
