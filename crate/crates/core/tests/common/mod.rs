#![allow(dead_code)]

use galbrun_core::background::{BackgroundModel, RadialProfile};
use galbrun_core::calculus::bump::Support;
use galbrun_core::calculus::fields::{ScalarField, VectorField};
use galbrun_core::flow::Flow;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponential star with a toroidal flow inside `B_r1` and slow rotation.
pub fn flowing_model() -> BackgroundModel {
    BackgroundModel {
        omega: 1.3,
        rotation: [0.05, -0.02, 0.1],
        gravity: 0.7,
        r1: 0.5,
        r2: 1.0,
        r3: 1.5,
        rho: RadialProfile::exponential(2.0, 1.5),
        cs: RadialProfile::polynomial(vec![1.3, 0.0, -0.1]),
        p: RadialProfile::exponential(3.0, 1.5),
        phi: RadialProfile::polynomial(vec![0.0, -2.25, 0.1]),
        gamma: RadialProfile::polynomial(vec![0.1, 0.02]),
        b: Flow::Toroidal {
            axis: [0.3, 0.1, 1.0],
            amplitude: 0.4,
            radius: 0.45,
        },
    }
    .new()
    .unwrap()
}

/// The same star without flow or rotation.
pub fn quiet_model() -> BackgroundModel {
    let mut m = flowing_model();
    m.rotation = [0.0; 3];
    m.b = Flow::None;
    m
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// A support drawn from interior, annulus, atmosphere or straddling kinds.
pub fn random_support(rng: &mut ChaCha8Rng, kind: usize) -> Support {
    let j = 0.05 * unit(rng);
    match kind % 4 {
        0 => Support::Ball { radius: 0.45 + j },
        1 => Support::Annulus {
            inner: 0.55 + j,
            outer: 0.95 - j,
        },
        2 => Support::Annulus {
            inner: 1.05 + j,
            outer: 1.9 - j,
        },
        _ => Support::Annulus {
            inner: 0.3 + j,
            outer: 1.4 - j,
        },
    }
}

pub fn random_vector(rng: &mut ChaCha8Rng, kind: usize) -> VectorField {
    let s = random_support(rng, kind);
    VectorField::random(rng, s, 2)
}

pub fn random_scalar(rng: &mut ChaCha8Rng, kind: usize) -> ScalarField {
    let s = random_support(rng, kind);
    ScalarField::random(rng, s, 2)
}

/// Exponential atmosphere: `rho = p = e^{-4r}`, `c_s^2 = 2`, hydrostatic
/// linear `phi`, `gamma = 0.1`, `omega = 1`.
pub fn standard_model() -> BackgroundModel {
    BackgroundModel {
        omega: 1.0,
        rotation: [0.0; 3],
        gravity: 1.0,
        r1: 0.5,
        r2: 1.0,
        r3: 1.5,
        rho: RadialProfile::exponential(1.0, 4.0),
        cs: RadialProfile::constant(2f64.sqrt()),
        p: RadialProfile::exponential(1.0, 4.0),
        phi: RadialProfile::polynomial(vec![0.0, -4.0]),
        gamma: RadialProfile::constant(0.1),
        b: Flow::None,
    }
    .new()
    .unwrap()
}
