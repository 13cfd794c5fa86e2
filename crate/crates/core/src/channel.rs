//! Propagation: s-curve LoS probability, power-law path loss and Nakagami-m
//! power gains.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::params::{BsKind, NetworkParams};

/// Link classes coincide with transmitter classes.
pub type LinkKind = BsKind;

/// Fading power gain, Gamma(m, 1/m) distributed with unit mean.
pub type FadingGain = f64;

fn s_curve_exponent(z: f64, params: &NetworkParams) -> f64 {
    let elevation_deg = (params.h / z).atan().to_degrees();
    params.s_a * (-params.s_b * (elevation_deg - params.s_a)).exp()
}

/// `P_L(z)` for an ABS at horizontal distance `z` from the user.
pub fn los_probability(z: f64, params: &NetworkParams) -> f64 {
    1.0 / (1.0 + s_curve_exponent(z, params))
}

/// `P_N(z) = 1 − P_L(z)`, evaluated without cancellation.
pub fn nlos_probability(z: f64, params: &NetworkParams) -> f64 {
    let e = s_curve_exponent(z, params);
    e / (1.0 + e)
}

/// Probability that an ABS at horizontal distance `z` carries the given mark.
/// TBS links have no mark; the result is 1.
pub fn mark_probability(kind: BsKind, z: f64, params: &NetworkParams) -> f64 {
    match kind {
        BsKind::L => los_probability(z, params),
        BsKind::N => nlos_probability(z, params),
        BsKind::T => 1.0,
    }
}

/// Euclidean link distance for a transmitter at horizontal distance `z`.
pub fn link_distance(kind: BsKind, z: f64, params: &NetworkParams) -> f64 {
    if kind.is_aerial() {
        z.hypot(params.h)
    } else {
        z
    }
}

/// `ξ_Q g d^{−α_Q}`.
pub fn received_power(kind: LinkKind, gain: FadingGain, dist: f64, params: &NetworkParams) -> Result<f64> {
    if !(dist > 0.0) {
        return Err(Error::Domain(format!("link distance must be positive, got {dist}")));
    }
    Ok(params.xi(kind) * gain * dist.powf(-params.alpha[kind]))
}

/// Gamma(m, 1/m) variate as the mean of `m` unit exponentials.
pub fn sample_gamma_unit_mean<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    if m == 1 {
        return Exp1.sample(rng);
    }
    let mut acc = 0.0;
    for _ in 0..m {
        let e: f64 = Exp1.sample(rng);
        acc += e;
    }
    acc / m as f64
}

pub fn sample_fading<R: Rng + ?Sized>(kind: LinkKind, params: &NetworkParams, rng: &mut R) -> FadingGain {
    sample_gamma_unit_mean(params.m[kind], rng)
}
