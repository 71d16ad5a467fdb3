//! Closed-form background flow fields `b`.

use serde::{Deserialize, Serialize};

use crate::calculus::bump::BallBump;
use crate::math::{cross, dot, norm, scale, Mat3, Vec3};

/// Background velocity field descriptor.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Flow {
    /// `b = 0`.
    #[default]
    None,
    /// Constant velocity everywhere. Not compactly supported, so it never
    /// satisfies the support assumption; useful for derivative tests.
    Uniform { velocity: Vec3 },
    /// Rigid rotation about `axis` tapered by a smooth bump of radius
    /// `radius`: `b = amplitude * bump(|x|) * (axis x x)`. For radially
    /// symmetric densities `div(rho b) = 0` holds identically.
    Toroidal {
        axis: Vec3,
        amplitude: f64,
        radius: f64,
    },
    /// Radial outflow `b = amplitude * bump(|x|) * x`. Violates
    /// `div(rho b) = 0`; used as a negative control.
    Radial { amplitude: f64, radius: f64 },
}

impl Flow {
    pub fn is_zero(&self) -> bool {
        match self {
            Flow::None => true,
            Flow::Uniform { velocity } => velocity.iter().all(|v| *v == 0.0),
            Flow::Toroidal { amplitude, axis, .. } => *amplitude == 0.0 || norm(axis) == 0.0,
            Flow::Radial { amplitude, .. } => *amplitude == 0.0,
        }
    }

    /// Radius of a ball containing the support, `None` if unbounded.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Flow::None => Some(0.0),
            Flow::Uniform { .. } => {
                if self.is_zero() {
                    Some(0.0)
                } else {
                    None
                }
            }
            Flow::Toroidal { radius, .. } | Flow::Radial { radius, .. } => Some(*radius),
        }
    }

    pub fn velocity(&self, x: &Vec3) -> Vec3 {
        match self {
            Flow::None => [0.0; 3],
            Flow::Uniform { velocity } => *velocity,
            Flow::Toroidal {
                axis,
                amplitude,
                radius,
            } => {
                let s = amplitude * BallBump::new(*radius).value(x);
                scale(s, &cross(axis, x))
            }
            Flow::Radial { amplitude, radius } => {
                let s = amplitude * BallBump::new(*radius).value(x);
                scale(s, x)
            }
        }
    }

    /// `J[i][j] = d b_i / d x_j`.
    pub fn jacobian(&self, x: &Vec3) -> Mat3 {
        match self {
            Flow::None | Flow::Uniform { .. } => Mat3::ZERO,
            Flow::Toroidal {
                axis,
                amplitude,
                radius,
            } => {
                let bump = BallBump::new(*radius);
                let s = amplitude * bump.value(x);
                let ds = scale(*amplitude, &bump.grad(x));
                Mat3::outer(&cross(axis, x), &ds) + s * Mat3::cross_matrix(axis)
            }
            Flow::Radial { amplitude, radius } => {
                let bump = BallBump::new(*radius);
                let s = amplitude * bump.value(x);
                let ds = scale(*amplitude, &bump.grad(x));
                Mat3::outer(x, &ds) + Mat3::scalar(s)
            }
        }
    }

    pub fn divergence(&self, x: &Vec3) -> f64 {
        match self {
            Flow::None | Flow::Uniform { .. } => 0.0,
            Flow::Toroidal {
                axis,
                amplitude,
                radius,
            } => {
                let ds = scale(*amplitude, &BallBump::new(*radius).grad(x));
                dot(&ds, &cross(axis, x))
            }
            Flow::Radial { amplitude, radius } => {
                let bump = BallBump::new(*radius);
                let s = amplitude * bump.value(x);
                amplitude * dot(&bump.grad(x), x) + 3.0 * s
            }
        }
    }

    /// `div(rho b) = grad(rho) . b + rho div(b)` for a given density value and gradient.
    pub fn div_rho_b(&self, x: &Vec3, rho: f64, grad_rho: &Vec3) -> f64 {
        dot(grad_rho, &self.velocity(x)) + rho * self.divergence(x)
    }

    /// `(b . grad) b`
    pub fn advective_acceleration(&self, x: &Vec3) -> Vec3 {
        self.jacobian(x).mul_vec(&self.velocity(x))
    }
}
