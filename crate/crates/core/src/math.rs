//! Small dense linear algebra and scalar helpers that work without `std`.
//!
//! All transcendental functions go through `libm` so that results are the same
//! whether or not the standard library is linked.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

pub use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

/// Argument in `(-pi, pi]`.
#[inline]
pub fn carg(z: Complex64) -> f64 {
    atan2(z.im, z.re)
}

#[inline]
pub fn cabs(z: Complex64) -> f64 {
    hypot(z.re, z.im)
}

/// `e^{i t}`
#[inline]
pub fn cis(t: f64) -> Complex64 {
    Complex64::new(cos(t), sin(t))
}

#[inline]
pub fn cexp(z: Complex64) -> Complex64 {
    cis(z.im) * exp(z.re)
}

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Real 3-vector.
pub type Vec3 = [f64; 3];
/// Complex 3-vector.
pub type CVec3 = [Complex64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    sqrt(dot(a, a))
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn scale(s: f64, a: &Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// `a . conj(b)` for complex vectors.
#[inline]
pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}

#[inline]
pub fn cnorm_sqr(a: &CVec3) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()
}

/// Real 3-vector dotted into a complex one, no conjugation.
#[inline]
pub fn rdot(a: &Vec3, b: &CVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// Complex cross product `a x b` with real `a`.
#[inline]
pub fn rcross(a: &Vec3, b: &CVec3) -> CVec3 {
    [
        b[2] * a[1] - b[1] * a[2],
        b[0] * a[2] - b[2] * a[0],
        b[1] * a[0] - b[0] * a[1],
    ]
}

/// Dense real 3x3 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        Self::scalar(1.0)
    }

    pub fn scalar(s: f64) -> Self {
        Mat3([[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]])
    }

    pub fn outer(a: &Vec3, b: &Vec3) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i] * b[j];
            }
        }
        Mat3(m)
    }

    /// Matrix of `v -> a x v`.
    pub fn cross_matrix(a: &Vec3) -> Self {
        Mat3([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn mul_cvec(&self, v: &CVec3) -> CVec3 {
        let m = &self.0;
        [
            v[0] * m[0][0] + v[1] * m[0][1] + v[2] * m[0][2],
            v[0] * m[1][0] + v[1] * m[1][1] + v[2] * m[1][2],
            v[0] * m[2][0] + v[1] * m[2][1] + v[2] * m[2][2],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    /// Largest absolute entry of `self - self^T`.
    pub fn asymmetry(&self) -> f64 {
        let m = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((m[i][j] - m[j][i]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, b| a.max(b.abs()))
    }

    pub fn to_complex(&self) -> CMat3 {
        let mut out = CMat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = Complex64::new(self.0[i][j], 0.0);
            }
        }
        out
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut m = self.0;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += o.0[i][j];
            }
        }
        Mat3(m)
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + (-o)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        -1.0 * self
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = o.0;
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= self;
            }
        }
        Mat3(m)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(m)
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

/// Dense complex 3x3 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CMat3(pub [[Complex64; 3]; 3]);

impl CMat3 {
    pub const ZERO: CMat3 = CMat3([[Complex64 { re: 0.0, im: 0.0 }; 3]; 3]);

    pub fn scalar(s: Complex64) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            m.0[i][i] = s;
        }
        m
    }

    pub fn from_parts(re: &Mat3, im: &Mat3) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = Complex64::new(re.0[i][j], im.0[i][j]);
            }
        }
        m
    }

    pub fn re(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j].re;
            }
        }
        m
    }

    pub fn im(&self) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[i][j].im;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn add(&self, o: &CMat3) -> CMat3 {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] += o.0[i][j];
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> CMat3 {
        let mut m = *self;
        for row in m.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &CVec3) -> CVec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// `xi^H M xi`
    pub fn quadratic_form(&self, xi: &CVec3) -> Complex64 {
        let mx = self.mul_vec(xi);
        xi[0].conj() * mx[0] + xi[1].conj() * mx[1] + xi[2].conj() * mx[2]
    }

    /// Hermitian part `(M + M^H)/2`.
    pub fn hermitian_part(&self) -> CMat3 {
        self.add(&self.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    /// Skew part divided by `i`, i.e. `(M - M^H)/(2i)`, which is Hermitian.
    pub fn skew_part_over_i(&self) -> CMat3 {
        let d = self.add(&self.adjoint().scale(Complex64::new(-1.0, 0.0)));
        d.scale(Complex64::new(0.0, -0.5))
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse via the adjugate. `None` when the determinant vanishes
    /// relative to the entry scale.
    pub fn inverse(&self) -> Option<CMat3> {
        let m = &self.0;
        let det = self.det();
        let scale = self.max_abs();
        if scale == 0.0 || cabs(det) <= 1e-300_f64.max(1e-15 * scale * scale * scale) {
            return None;
        }
        let cof = |a: usize, b: usize, c: usize, d: usize| m[a][b] * m[c][d];
        let adj = [
            [
                cof(1, 1, 2, 2) - cof(1, 2, 2, 1),
                cof(0, 2, 2, 1) - cof(0, 1, 2, 2),
                cof(0, 1, 1, 2) - cof(0, 2, 1, 1),
            ],
            [
                cof(1, 2, 2, 0) - cof(1, 0, 2, 2),
                cof(0, 0, 2, 2) - cof(0, 2, 2, 0),
                cof(0, 2, 1, 0) - cof(0, 0, 1, 2),
            ],
            [
                cof(1, 0, 2, 1) - cof(1, 1, 2, 0),
                cof(0, 1, 2, 0) - cof(0, 0, 2, 1),
                cof(0, 0, 1, 1) - cof(0, 1, 1, 0),
            ],
        ];
        Some(CMat3(adj).scale(det.inv()))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, b| a.max(cabs(*b)))
    }

    /// Largest absolute entry of `self - self^H`.
    pub fn non_hermiticity(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max(cabs(self.0[i][j] - self.0[j][i].conj()));
            }
        }
        worst
    }

    /// Spectral norm, from the eigenvalues of `M^H M`.
    pub fn spectral_norm(&self) -> f64 {
        let mut g = CMat3::ZERO;
        let a = self.adjoint();
        for i in 0..3 {
            for j in 0..3 {
                g.0[i][j] = (0..3).map(|k| a.0[i][k] * self.0[k][j]).sum();
            }
        }
        let eig = hermitian_eigen(&g);
        sqrt(eig.values[2].max(0.0))
    }
}

/// Eigen-decomposition of a Hermitian 3x3 matrix.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: [f64; 3],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [CVec3; 3],
}

/// Cyclic complex Jacobi iteration. Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMat3) -> HermitianEigen {
    let mut a = m.hermitian_part().0;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut v = [[one, zero, zero], [zero, one, zero], [zero, zero, one]];

    for _sweep in 0..64 {
        let off: f64 = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j].norm_sqr())
            .sum();
        let diag: f64 = (0..3).map(|i| a[i][i].re * a[i][i].re).sum();
        if off <= 1e-34 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                let apq = a[p][q];
                let mag = cabs(apq);
                if mag == 0.0 {
                    continue;
                }
                // Rotation that zeroes a[p][q]: phase out apq, then a real Jacobi angle.
                let phase = apq / mag;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                // Unitary J with columns p,q: J_pp = c, J_pq = s*phase, J_qp = -s*conj(phase), J_qq = c.
                let jpp = Complex64::new(c, 0.0);
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                let jqq = Complex64::new(c, 0.0);
                // A <- J^H A J
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = akp * jpp + akq * jqp;
                    a[k][q] = akp * jpq + akq * jqq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q][k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p][q] = zero;
                a[q][p] = zero;
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = vp * jpp + vq * jqp;
                    row[q] = vp * jpq + vq * jqq;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&x, &y| a[x][x].re.total_cmp(&a[y][y].re));
    let mut values = [0.0; 3];
    let mut vectors = [[zero; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a[k][k].re;
        vectors[slot] = [v[0][k], v[1][k], v[2][k]];
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &Mat3) -> [f64; 3] {
    hermitian_eigen(&m.to_complex()).values
}

/// Neumaier-compensated accumulator for complex sums. Summation order is the
/// call order, so results are reproducible run to run.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn step(acc: &mut (f64, f64), x: f64) {
        let (s, c) = *acc;
        let t = s + x;
        let c = if s.abs() >= x.abs() {
            c + ((s - t) + x)
        } else {
            c + ((x - t) + s)
        };
        *acc = (t, c);
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        Self::step(&mut self.re, z.re);
        Self::step(&mut self.im, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Compensated real sum.
pub fn sum_real<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in it {
        acc.add(Complex64::new(x, 0.0));
    }
    acc.value().re
}

/// `n` nearly uniform unit vectors on the Fibonacci spiral.
pub fn fibonacci_sphere(n: usize) -> alloc::vec::Vec<Vec3> {
    let golden = PI * (3.0 - sqrt(5.0));
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = sqrt((1.0 - z * z).max(0.0));
            let t = golden * i as f64;
            [s * cos(t), s * sin(t), z]
        })
        .collect()
}
