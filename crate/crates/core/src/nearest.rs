//! Distribution of the horizontal distance from the user to the nearest TBS
//! and to the nearest LoS / NLoS ABS.
//!
//! Every law has the form `F(z) = 1 − exp(−H(z))` where the hazard `H` is
//! the mean number of points within horizontal distance `z`. For the TBS
//! tier `H(z) = λ_T ∫_0^z z' Θ(z') dz'` with `Θ` the profile integrated
//! around the circle of radius `z'`. For an ABS mark `M` the hazard counts the
//! points of the thinned ABS process outside the exclusion disk:
//! `H(z) = λ_A [2π κ_M|_0^z − hole(z)]`.
//!
//! The hole can be evaluated two ways:
//! * [`HoleRoute::Polar`] splits the disk into the region-specific polar
//!   pieces (angle outside, distance inside) bounded by `z_m(β)`, `z_X(β)` and
//!   the intersection angle `β_i(z)`;
//! * [`HoleRoute::Radial`] integrates circles around the user, weighting each
//!   by the arc length that falls inside the disk.
//!
//! They agree to quadrature tolerance; the radial route is the cheaper one and
//! is used by default.

use std::f64::consts::PI;

use crate::channel::mark_probability;
use crate::error::{Error, Result};
use crate::geometry::{RegionId, UserFrame};
use crate::numerics::{Quadrature, Tolerance};
use crate::params::{BsKind, NetworkParams, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HoleRoute {
    #[default]
    Radial,
    Polar,
}

pub(crate) fn nearest_quad() -> Quadrature {
    Quadrature::new(Tolerance::new(1e-13, 1e-11))
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 0.0) || z.is_infinite() {
        return Err(Error::Domain(format!("distance must be finite and non-negative, got {z}")));
    }
    Ok(())
}

/// `κ_M|_a^b = ∫_a^b P_M(z) z dz`.
pub fn kappa(a: f64, b: f64, kind: BsKind, params: &NetworkParams) -> Result<f64> {
    if !kind.is_aerial() {
        return Err(Error::Domain("κ is defined for aerial marks only".into()));
    }
    if !(a >= 0.0 && a <= b) {
        return Err(Error::Domain(format!("κ needs 0 <= a <= b, got a = {a}, b = {b}")));
    }
    let r = nearest_quad().integrate(|z| mark_probability(kind, z, params) * z, a, b)?;
    Ok(r.value)
}

// ---------------------------------------------------------------- TBS tier

/// TBS hazard for an arbitrary radial profile scaled by `lambda_t`.
pub fn tbs_hazard_with(profile: &dyn RadialProfile, lambda_t: f64, r_u: f64, z: f64) -> Result<f64> {
    check_z(z)?;
    if lambda_t == 0.0 || z == 0.0 {
        return Ok(0.0);
    }
    let mut pts = vec![0.0];
    if r_u > 0.0 && r_u < z {
        pts.push(r_u);
    }
    pts.push(z);
    let r = nearest_quad().integrate_breakpoints(|zp| zp * profile.angular_integral(r_u, zp), &pts)?;
    Ok(lambda_t * r.value)
}

pub fn tbs_hazard(z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    tbs_hazard_with(&params.tbs_profile(), params.lambda_t, frame.r_u, z)
}

pub fn cdf_t(z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    Ok(-(-tbs_hazard(z, frame, params)?).exp_m1())
}

pub fn survival_t(z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    Ok((-tbs_hazard(z, frame, params)?).exp())
}

/// `f(z) = F̄(z) λ_T z Θ(z)`.
pub fn pdf_t(z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let surv = survival_t(z, frame, params)?;
    Ok(surv * tbs_intensity_on_circle(z, frame, params))
}

/// `λ_T z Θ(z)`: the TBS intensity per unit radial distance at `z`.
pub fn tbs_intensity_on_circle(z: f64, frame: &UserFrame, params: &NetworkParams) -> f64 {
    params.lambda_t * z * params.tbs_profile().angular_integral(frame.r_u, z)
}

// ---------------------------------------------------------------- ABS tier

/// ABS hazard with an arbitrary mark weight `w(z)`; `w ≡ 1` gives the
/// unmarked ABS process.
pub fn abs_hazard_weighted<W: Fn(f64) -> f64>(
    z: f64,
    frame: &UserFrame,
    lambda_a: f64,
    w: W,
    route: HoleRoute,
) -> Result<f64> {
    check_z(z)?;
    if lambda_a == 0.0 || z == 0.0 {
        return Ok(0.0);
    }
    if frame.classify_region(z) == RegionId::V {
        return Ok(0.0);
    }
    let q = nearest_quad();
    let g = |zp: f64| w(zp) * zp;
    let value = match route {
        HoleRoute::Radial => {
            let start = frame.min_abs_distance();
            let mut pts = vec![start];
            pts.extend(frame.boundaries().into_iter().filter(|&b| b > start && b < z));
            pts.push(z);
            q.integrate_breakpoints(|zp| g(zp) * (2.0 * PI - frame.arc_inside(zp)), &pts)?
                .value
        }
        HoleRoute::Polar => {
            let mut pts = vec![0.0];
            pts.extend(frame.boundaries().into_iter().filter(|&b| b < z));
            pts.push(z);
            let full = 2.0 * PI * q.integrate_breakpoints(g, &pts)?.value;
            let hole = frame.polar_mass(&frame.disk_within(z), g, &q)?.value;
            (full - hole).max(0.0)
        }
    };
    Ok(lambda_a * value)
}

pub fn abs_hazard(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams, route: HoleRoute) -> Result<f64> {
    if !kind.is_aerial() {
        return Err(Error::Domain("ABS hazard needs an aerial mark".into()));
    }
    abs_hazard_weighted(z, frame, params.lambda_a, |zp| mark_probability(kind, zp, params), route)
}

pub fn cdf_m_route(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams, route: HoleRoute) -> Result<f64> {
    Ok(-(-abs_hazard(z, kind, frame, params, route)?).exp_m1())
}

pub fn cdf_m(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    cdf_m_route(z, kind, frame, params, HoleRoute::Radial)
}

pub fn survival_m(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    Ok((-abs_hazard(z, kind, frame, params, HoleRoute::Radial)?).exp())
}

/// `λ_A P_M(z) z (2π − arc(z))`: intensity of mark-`M` ABSs per unit radial
/// distance at `z`.
pub fn abs_intensity_on_circle(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> f64 {
    if frame.classify_region(z) == RegionId::V {
        return 0.0;
    }
    params.lambda_a * mark_probability(kind, z, params) * z * (2.0 * PI - frame.arc_inside(z))
}

/// Density of the nearest mark-`M` ABS distance; zero in region V.
pub fn pdf_m(z: f64, kind: BsKind, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let intensity = abs_intensity_on_circle(z, kind, frame, params);
    if intensity == 0.0 {
        check_z(z)?;
        return Ok(0.0);
    }
    Ok(survival_m(z, kind, frame, params)? * intensity)
}

// ---------------------------------------------------------------- dispatch

pub fn survival(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    match kind {
        BsKind::T => survival_t(z, frame, params),
        _ => survival_m(z, kind, frame, params),
    }
}

pub fn pdf(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    match kind {
        BsKind::T => pdf_t(z, frame, params),
        _ => pdf_m(z, kind, frame, params),
    }
}

pub fn cdf(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    match kind {
        BsKind::T => cdf_t(z, frame, params),
        _ => cdf_m(z, kind, frame, params),
    }
}

/// Cumulative distribution of the nearest-transmitter distance of one class
/// for a fixed user position.
#[derive(Debug, Clone, Copy)]
pub struct DistanceDistribution<'a> {
    pub kind: BsKind,
    pub frame: UserFrame,
    pub params: &'a NetworkParams,
}

impl<'a> DistanceDistribution<'a> {
    pub fn new(kind: BsKind, frame: UserFrame, params: &'a NetworkParams) -> Self {
        Self { kind, frame, params }
    }

    pub fn cdf(&self, z: f64) -> Result<f64> {
        cdf(self.kind, z, &self.frame, self.params)
    }

    pub fn pdf(&self, z: f64) -> Result<f64> {
        pdf(self.kind, z, &self.frame, self.params)
    }

    pub fn survival(&self, z: f64) -> Result<f64> {
        survival(self.kind, z, &self.frame, self.params)
    }

    /// Lower end of the support.
    pub fn support_start(&self) -> f64 {
        if self.kind.is_aerial() {
            self.frame.min_abs_distance()
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GaussianProfile;

    #[derive(Debug)]
    struct Flat(f64);
    impl RadialProfile for Flat {
        fn density(&self, _r: f64) -> f64 {
            self.0
        }
        fn support_radius(&self) -> f64 {
            f64::INFINITY
        }
    }

    #[test]
    fn kappa_basics() {
        let p = NetworkParams::defaults();
        assert_eq!(kappa(2.0, 2.0, BsKind::L, &p).unwrap(), 0.0);
        for b in [0.3, 1.0, 7.5, 40.0] {
            let s = kappa(0.0, b, BsKind::L, &p).unwrap() + kappa(0.0, b, BsKind::N, &p).unwrap();
            assert!((s - b * b / 2.0).abs() < 1e-9 * b * b, "{b}: {s}");
        }
        let whole = kappa(0.0, 5.0, BsKind::L, &p).unwrap();
        let parts = kappa(0.0, 1.7, BsKind::L, &p).unwrap() + kappa(1.7, 5.0, BsKind::L, &p).unwrap();
        assert!((whole - parts).abs() < 1e-11);
        assert!(kappa(3.0, 2.0, BsKind::L, &p).is_err());
    }

    #[test]
    fn flat_profile_is_homogeneous() {
        let c = 0.3;
        let flat = Flat(c);
        for &(ru, z) in &[(0.0, 1.0), (4.0, 2.5), (10.0, 13.0)] {
            let h = tbs_hazard_with(&flat, 2.0, ru, z).unwrap();
            assert!((h - 2.0 * c * PI * z * z).abs() < 1e-9 * h, "{ru} {z}: {h}");
        }
    }

    #[test]
    fn tbs_cdf_pdf_consistent() {
        let p = NetworkParams::defaults();
        let f = p.frame(10.0);
        assert_eq!(cdf_t(0.0, &f, &p).unwrap(), 0.0);
        for z in [0.2, 1.0, 3.0, 6.0, 9.0] {
            let h = 1e-4;
            let fd = (cdf_t(z + h, &f, &p).unwrap() - cdf_t(z - h, &f, &p).unwrap()) / (2.0 * h);
            let an = pdf_t(z, &f, &p).unwrap();
            assert!((fd - an).abs() <= 1e-5 * an.max(1e-12), "z={z}: {fd} vs {an}");
        }
        // All TBS mass far away: cdf approaches one.
        assert!(cdf_t(60.0, &f, &p).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn gaussian_center_user_closed_form() {
        // r_u = 0: H(z) = λ_T σ√(2π) (1 − e^{−z²/2σ²}).
        let p = NetworkParams::defaults();
        let f = p.frame(0.0);
        let g = GaussianProfile::new(p.sigma_t2);
        for z in [0.5, 2.0, 5.0] {
            let expected = p.lambda_t * g.planar_mass() * (-(-z * z / (2.0 * p.sigma_t2)).exp_m1());
            let h = tbs_hazard(z, &f, &p).unwrap();
            assert!((h - expected).abs() < 1e-9 * expected, "{z}: {h} vs {expected}");
        }
    }

    #[test]
    fn region_v_is_empty() {
        let p = NetworkParams::defaults();
        let f = p.frame(3.0);
        for z in [0.0, 2.0, 5.0] {
            assert_eq!(cdf_m(z, BsKind::L, &f, &p).unwrap(), 0.0);
            assert_eq!(pdf_m(z, BsKind::L, &f, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn no_exclusion_zone_reduces_to_kappa() {
        let p = NetworkParams::defaults().with("r_e", 0.0).unwrap();
        let f = p.frame(5.0);
        for z in [0.5, 3.0, 12.0] {
            for kind in BsKind::AERIAL {
                let expect = -(-2.0 * PI * p.lambda_a * kappa(0.0, z, kind, &p).unwrap()).exp_m1();
                let got = cdf_m(z, kind, &f, &p).unwrap();
                assert!((got - expect).abs() < 1e-12, "{kind} {z}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn routes_agree() {
        let p = NetworkParams::defaults();
        for ru in [0.0, 3.0, 8.0, 10.0, 25.0] {
            let f = p.frame(ru);
            for k in 0..=30 {
                let z = k as f64;
                for kind in BsKind::AERIAL {
                    let a = cdf_m_route(z, kind, &f, &p, HoleRoute::Radial).unwrap();
                    let b = cdf_m_route(z, kind, &f, &p, HoleRoute::Polar).unwrap();
                    assert!((a - b).abs() < 1e-9, "r_u={ru} z={z} {kind}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn continuity_across_region_boundaries() {
        let p = NetworkParams::defaults();
        for ru in [10.0, 20.0, 3.0, 6.0] {
            let f = p.frame(ru);
            for b in f.boundaries() {
                for kind in BsKind::AERIAL {
                    for route in [HoleRoute::Radial, HoleRoute::Polar] {
                        let lo = cdf_m_route(b * (1.0 - 1e-12), kind, &f, &p, route).unwrap();
                        let hi = cdf_m_route(b * (1.0 + 1e-12), kind, &f, &p, route).unwrap();
                        assert!((lo - hi).abs() < 1e-8, "r_u={ru} boundary {b} {kind} {route:?}: {lo} vs {hi}");
                    }
                }
            }
        }
    }

    #[test]
    fn abs_pdf_matches_differences() {
        let p = NetworkParams::defaults();
        for ru in [10.0, 3.0] {
            let f = p.frame(ru);
            let bounds = f.boundaries();
            for k in 1..60 {
                let z = k as f64 * 0.5 + 0.123;
                if bounds.iter().any(|b| (b - z).abs() < 0.01) || f.classify_region(z) == RegionId::V {
                    continue;
                }
                for kind in BsKind::AERIAL {
                    let h = 1e-4;
                    // Differences of the survival function keep precision where F is near 1.
                    let fd = (survival_m(z - h, kind, &f, &p).unwrap() - survival_m(z + h, kind, &f, &p).unwrap()) / (2.0 * h);
                    let an = pdf_m(z, kind, &f, &p).unwrap();
                    assert!((fd - an).abs() <= 1e-5 * an.max(1e-9), "r_u={ru} z={z} {kind}: {fd} vs {an}");
                }
            }
        }
    }
}
