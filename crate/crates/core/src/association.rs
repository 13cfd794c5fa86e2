//! Minimum interferer distances and association probabilities under the
//! strongest-average-power rule.
//!
//! A user served by class `B` at Euclidean distance `D` sees no class-`C`
//! transmitter closer than `d_B^C`, the distance at which a `C` transmitter
//! would deliver the same average power: `ξ_C d^{−α_C} = ξ_B D^{−α_B}`.
//! ABSs cannot be closer than their altitude, so for aerial `C` the distance
//! is floored at `h`.

use std::cell::RefCell;

use crate::channel::link_distance;
use crate::error::{Error, Result};
use crate::geometry::UserFrame;
use crate::nearest::{self, DistanceDistribution};
use crate::numerics::{tail_radius, QuadResult, Quadrature, Tolerance};
use crate::params::{BsKind, NetworkParams, PerKind};

/// Survival level below which the outer distance integrals are truncated.
pub const TAIL_SURVIVAL: f64 = 1e-12;

const MAX_TRUNCATION_RADIUS: f64 = 1e4;

/// Euclidean distance `d_B^C(z)` for a server of class `B` at horizontal
/// distance `z`.
pub fn min_interferer_distance(serving: BsKind, interferer: BsKind, z: f64, params: &NetworkParams) -> f64 {
    let d_serv = link_distance(serving, z, params);
    if serving == interferer {
        return d_serv;
    }
    let (ac, ab) = (params.alpha[interferer], params.alpha[serving]);
    let d = (params.xi(interferer) / params.xi(serving)).powf(1.0 / ac) * d_serv.powf(ab / ac);
    if interferer.is_aerial() {
        d.max(params.h)
    } else {
        d
    }
}

/// Horizontal projection of a Euclidean distance to a class-`C` transmitter.
pub fn horizontal_projection(kind: BsKind, d: f64, params: &NetworkParams) -> f64 {
    if kind.is_aerial() {
        ((d - params.h) * (d + params.h)).max(0.0).sqrt()
    } else {
        d
    }
}

/// `z_B^C(z)`: horizontal exclusion radius for class-`C` interferers.
pub fn interferer_floor(serving: BsKind, interferer: BsKind, z: f64, params: &NetworkParams) -> f64 {
    horizontal_projection(interferer, min_interferer_distance(serving, interferer, z, params), params)
}

/// Horizontal serving distance `z` at which `z_B^C(z)` equals `zc`, on the
/// unfloored branch. Used to place breakpoints.
fn serving_distance_for_floor(serving: BsKind, interferer: BsKind, zc: f64, params: &NetworkParams) -> Option<f64> {
    let d_c = link_distance(interferer, zc, params);
    let (ac, ab) = (params.alpha[interferer], params.alpha[serving]);
    let d_b = ((params.xi(serving) / params.xi(interferer)) * d_c.powf(ac)).powf(1.0 / ab);
    if serving.is_aerial() {
        (d_b > params.h).then(|| horizontal_projection(serving, d_b, params))
    } else {
        Some(d_b)
    }
}

/// `a_B(z)`: probability that no transmitter of another class beats a class-`B`
/// server at horizontal distance `z`.
pub fn conditional_assoc(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let mut a = 1.0;
    for other in BsKind::ALL {
        if other == kind {
            continue;
        }
        let zc = interferer_floor(kind, other, z, params);
        a *= nearest::survival(other, zc, frame, params)?;
        if a == 0.0 {
            break;
        }
    }
    Ok(a)
}

/// Horizontal distances where the integrand of `∫ f_B a_B (…) dz` has kinks.
pub fn serving_breakpoints(kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> Vec<f64> {
    let mut pts = Vec::new();
    if kind.is_aerial() {
        pts.extend(frame.boundaries());
    } else if frame.r_u > 0.0 {
        pts.push(frame.r_u);
    }
    for other in BsKind::ALL {
        if other == kind || !other.is_aerial() {
            continue;
        }
        // Where the interferer floor leaves h, and where it crosses a region boundary.
        let mut targets = vec![0.0];
        targets.extend(frame.boundaries());
        for zc in targets {
            if let Some(z) = serving_distance_for_floor(kind, other, zc, params) {
                pts.push(z);
            }
        }
    }
    pts.retain(|x| x.is_finite() && *x > 0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Radius beyond which the nearest class-`kind` transmitter lies with
/// probability below [`TAIL_SURVIVAL`].
pub fn truncation_radius(kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let start = DistanceDistribution::new(kind, *frame, params).support_start();
    let r = tail_radius(
        |z| nearest::survival(kind, z, frame, params).unwrap_or(0.0),
        start + 1.0,
        1.0,
        TAIL_SURVIVAL,
        MAX_TRUNCATION_RADIUS,
    )?;
    log::debug!("{kind} distance integrals truncated at {r:.3} km (r_u = {})", frame.r_u);
    Ok(r)
}

fn tier_is_empty(kind: BsKind, params: &NetworkParams) -> bool {
    match kind {
        BsKind::T => params.lambda_t == 0.0,
        _ => params.lambda_a == 0.0,
    }
}

/// `∫ f_B(z) g(z) dz` over the support of the nearest class-`B` distance.
pub fn serving_integral<G>(kind: BsKind, frame: &UserFrame, params: &NetworkParams, tol: Tolerance, g: G) -> Result<QuadResult>
where
    G: Fn(f64) -> Result<f64>,
{
    if tier_is_empty(kind, params) {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            truncation_radius: None,
        });
    }
    let lo = DistanceDistribution::new(kind, *frame, params).support_start();
    let hi = truncation_radius(kind, frame, params)?;
    let mut pts = vec![lo];
    pts.extend(serving_breakpoints(kind, frame, params).into_iter().filter(|&x| x > lo && x < hi));
    pts.push(hi);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut r = Quadrature::new(tol).integrate_breakpoints(
        |z| {
            let value = nearest::pdf(kind, z, frame, params).and_then(|f| if f == 0.0 { Ok(0.0) } else { Ok(f * g(z)?) });
            match value {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        &pts,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r.truncation_radius = Some(hi);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationProbabilities {
    /// `𝒜_L`, `𝒜_N` by integration, `𝒜_T` as the complement.
    pub probs: PerKind<f64>,
    /// `𝒜_T` by direct integration, kept as a self-check.
    pub t_direct: f64,
    /// Upper integration limit per class.
    pub truncation: PerKind<f64>,
    /// Accumulated quadrature error estimate.
    pub abs_error: f64,
}

impl AssociationProbabilities {
    pub fn get(&self, kind: BsKind) -> f64 {
        self.probs[kind]
    }

    /// Disagreement between the complement and the direct integral for `𝒜_T`.
    pub fn complement_gap(&self) -> f64 {
        (self.probs.t - self.t_direct).abs()
    }
}

pub(crate) fn association_tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-8)
}

pub fn association_probabilities(frame: &UserFrame, params: &NetworkParams) -> Result<AssociationProbabilities> {
    let mut probs = PerKind::new(0.0, 0.0, 0.0);
    let mut truncation = PerKind::new(0.0, 0.0, 0.0);
    let mut abs_error = 0.0;
    for kind in BsKind::ALL {
        let r = serving_integral(kind, frame, params, association_tol(), |z| conditional_assoc(kind, z, frame, params))?;
        probs[kind] = r.value;
        truncation[kind] = r.truncation_radius.unwrap_or(0.0);
        abs_error += r.abs_error;
    }
    let t_direct = probs.t;
    probs.t = 1.0 - probs.l - probs.n;
    Ok(AssociationProbabilities {
        probs,
        t_direct,
        truncation,
        abs_error,
    })
}
