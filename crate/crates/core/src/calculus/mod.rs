//! Bumps, quadrature and analytic test fields.

pub mod bump;
pub mod fields;
pub mod quadrature;

pub use bump::{smooth_step, BallBump, Bump, ShellBump, Support};
pub use fields::{directional_derivative, DirectionalDerivative, Polynomial, ScalarField, VectorField};
pub use quadrature::{integrate, Domain, QuadratureRule, RuleOrder};
