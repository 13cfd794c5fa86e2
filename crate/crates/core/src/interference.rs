//! Laplace transforms of the aggregate interference conditioned on the
//! serving class `B` and its horizontal distance `z`.
//!
//! Interferers of class `C` form the part of their point process beyond the
//! horizontal floor `z_B^C(z)`. By the probability generating functional,
//! `ℒ_C(s) = exp(−∫ (1 − 𝔼[e^{−s ξ_C g d^{−α_C}}]) Λ_C(dx))` and with
//! Gamma(m, 1/m) fading the inner expectation is `(m / (m + s ξ_C d^{−α_C}))^m`.
//!
//! For the aerial classes the intensity is `λ_A P_C` on the plane minus the
//! exclusion disk, so the exponent is the full-annulus term minus a hole
//! correction: the kernel mass over the part of the disk beyond the floor.
//! Which polar pieces form that part depends on the region of the floor
//! distance (see [`UserFrame::disk_beyond`]).

use std::f64::consts::PI;

use crate::association::interferer_floor;
use crate::channel::{link_distance, mark_probability};
use crate::error::{Error, Result};
use crate::geometry::{RegionId, UserFrame};
use crate::nearest::HoleRoute;
use crate::numerics::{QuadResult, Quadrature, Tolerance};
use crate::params::{BsKind, NetworkParams, PerKind, RadialProfile};

/// Largest positive net exponent tolerated as rounding before a hole
/// correction is declared inconsistent.
pub const CONSISTENCY_SLACK: f64 = 1e-9;

/// `1 − (m / (m + x))^m`, accurate for small `x`.
pub fn fading_kernel(m: u32, x: f64) -> f64 {
    let m = m as f64;
    -(-m * (x / m).ln_1p()).exp_m1()
}

fn laplace_quad() -> Quadrature {
    Quadrature::new(Tolerance::new(1e-13, 1e-10))
}

/// Conditional Laplace transforms for one serving configuration.
#[derive(Debug, Clone)]
pub struct LaplaceEvaluator<'a> {
    pub params: &'a NetworkParams,
    pub frame: UserFrame,
    pub serving: BsKind,
    pub z: f64,
    /// Horizontal interferer floors `z_B^C(z)`.
    pub floors: PerKind<f64>,
    pub route: HoleRoute,
}

impl<'a> LaplaceEvaluator<'a> {
    pub fn new(params: &'a NetworkParams, frame: UserFrame, serving: BsKind, z: f64) -> Self {
        let floors = PerKind::new(
            interferer_floor(serving, BsKind::L, z, params),
            interferer_floor(serving, BsKind::N, z, params),
            interferer_floor(serving, BsKind::T, z, params),
        );
        Self {
            params,
            frame,
            serving,
            z,
            floors,
            route: HoleRoute::Radial,
        }
    }

    pub fn with_route(mut self, route: HoleRoute) -> Self {
        self.route = route;
        self
    }

    /// Region of the aerial interferer floor for mark `kind`.
    pub fn region(&self, kind: BsKind) -> RegionId {
        self.frame.classify_region(self.floors[kind])
    }

    fn kernel(&self, kind: BsKind, s: f64, d: f64) -> f64 {
        let x = s * self.params.xi(kind) * d.powf(-self.params.alpha[kind]);
        fading_kernel(self.params.m[kind], x)
    }

    /// Exponent `λ_T ∫_{z_B^T}^∞ kernel(z') z' Θ(z') dz'` of the TBS transform.
    pub fn exponent_t(&self, s: f64) -> Result<QuadResult> {
        check_s(s)?;
        let p = self.params;
        if s == 0.0 || p.lambda_t == 0.0 {
            return Ok(zero());
        }
        let zb = self.floors.t;
        let profile = p.tbs_profile();
        let g = |zp: f64| {
            if zp <= 0.0 {
                return 0.0;
            }
            self.kernel(BsKind::T, s, zp) * zp * profile.angular_integral(self.frame.r_u, zp)
        };
        let q = laplace_quad();
        let mut r = if self.frame.r_u > zb {
            // Bulk of the deployment sits around r_u; keep it off the tail map.
            let head = q.integrate(g, zb, self.frame.r_u)?;
            let tail = q.integrate_to_infinity(g, self.frame.r_u)?;
            add(head, tail)
        } else {
            q.integrate_to_infinity(g, zb)?
        };
        r.value *= p.lambda_t;
        r.abs_error *= p.lambda_t;
        Ok(r)
    }

    pub fn laplace_t(&self, s: f64) -> Result<f64> {
        Ok((-self.exponent_t(s)?.value).exp())
    }

    /// `ℐ_M(s, z') = kernel(√(z'² + h²)) z' P_M(z')`.
    fn aerial_integrand(&self, kind: BsKind, s: f64, zp: f64) -> f64 {
        let d = link_distance(kind, zp, self.params);
        self.kernel(kind, s, d) * zp * mark_probability(kind, zp, self.params)
    }

    /// Net exponent of the aerial transform, `λ_A [2π ∫_{z_b}^∞ ℐ_M − hole]`.
    pub fn exponent_m(&self, s: f64, kind: BsKind) -> Result<QuadResult> {
        check_s(s)?;
        if !kind.is_aerial() {
            return Err(Error::Domain("aerial transform needs mark L or N".into()));
        }
        let p = self.params;
        if s == 0.0 || p.lambda_a == 0.0 {
            return Ok(zero());
        }
        let zb = self.floors[kind];
        let q = laplace_quad();
        let g = |zp: f64| self.aerial_integrand(kind, s, zp);
        let full = q.integrate_to_infinity(g, zb)?;
        let hole = match self.route {
            HoleRoute::Radial => self.frame.radial_mass(zb, f64::INFINITY, g, &q)?,
            HoleRoute::Polar => self.frame.polar_mass(&self.frame.disk_beyond(zb), g, &q)?,
        };
        let net = 2.0 * PI * full.value - hole.value;
        let slack = CONSISTENCY_SLACK.max(1e-9 * full.value);
        if net < -slack {
            return Err(Error::Consistency(format!(
                "hole correction {:.6e} exceeds full-plane mass {:.6e} (mark {kind}, floor {zb}, region {})",
                hole.value,
                2.0 * PI * full.value,
                self.region(kind)
            )));
        }
        Ok(QuadResult {
            value: p.lambda_a * net.max(0.0),
            abs_error: p.lambda_a * (2.0 * PI * full.abs_error + hole.abs_error),
            evaluations: full.evaluations + hole.evaluations,
            truncation_radius: None,
        })
    }

    pub fn laplace_m(&self, s: f64, kind: BsKind) -> Result<f64> {
        Ok((-self.exponent_m(s, kind)?.value).exp())
    }

    /// `ℒ_I = ℒ_L ℒ_N ℒ_T`.
    pub fn laplace_interference(&self, s: f64) -> Result<f64> {
        let e = self.exponent_m(s, BsKind::L)?.value + self.exponent_m(s, BsKind::N)?.value + self.exponent_t(s)?.value;
        Ok((-e).exp())
    }

    /// `ℒ_J = e^{−s σ_n²} ℒ_I`.
    pub fn laplace_total(&self, s: f64) -> Result<f64> {
        let e = self.exponent_m(s, BsKind::L)?.value
            + self.exponent_m(s, BsKind::N)?.value
            + self.exponent_t(s)?.value
            + s * self.params.sigma_n2;
        Ok((-e).exp())
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::Domain(format!("Laplace argument must be finite and non-negative, got {s}")));
    }
    Ok(())
}

fn zero() -> QuadResult {
    QuadResult {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
        truncation_radius: None,
    }
}

fn add(a: QuadResult, b: QuadResult) -> QuadResult {
    QuadResult {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
        evaluations: a.evaluations + b.evaluations,
        truncation_radius: None,
    }
}

pub fn laplace_t(s: f64, serving: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    LaplaceEvaluator::new(params, *frame, serving, z).laplace_t(s)
}

pub fn laplace_m(s: f64, kind: BsKind, serving: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    LaplaceEvaluator::new(params, *frame, serving, z).laplace_m(s, kind)
}

pub fn laplace_total(s: f64, serving: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    LaplaceEvaluator::new(params, *frame, serving, z).laplace_total(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_stable() {
        assert_eq!(fading_kernel(2, 0.0), 0.0);
        let x = 1e-12;
        assert!((fading_kernel(1, x) / x - 1.0).abs() < 1e-11);
        assert!((fading_kernel(2, x) / x - 1.0).abs() < 1e-11);
        assert!((fading_kernel(1, 3.0) - 0.75).abs() < 1e-15);
        assert!((fading_kernel(2, 2.0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_argument_gives_one() {
        let p = NetworkParams::defaults();
        let f = p.frame(10.0);
        for b in BsKind::ALL {
            let ev = LaplaceEvaluator::new(&p, f, b, 1.0);
            assert_eq!(ev.laplace_t(0.0).unwrap(), 1.0);
            assert_eq!(ev.laplace_m(0.0, BsKind::L).unwrap(), 1.0);
            assert_eq!(ev.laplace_m(0.0, BsKind::N).unwrap(), 1.0);
            assert_eq!(ev.laplace_total(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn empty_tiers_leave_noise_only() {
        let p = NetworkParams::defaults()
            .with("lambda_A", 0.0)
            .unwrap()
            .with("lambda_T", 0.0)
            .unwrap();
        let f = p.frame(4.0);
        let ev = LaplaceEvaluator::new(&p, f, BsKind::T, 0.5);
        for s in [1e3, 1e9, 1e11] {
            assert_eq!(ev.laplace_t(s).unwrap(), 1.0);
            assert!((ev.laplace_total(s).unwrap() - (-s * p.sigma_n2).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn monotone_in_s() {
        let p = NetworkParams::defaults();
        let f = p.frame(10.0);
        let ev = LaplaceEvaluator::new(&p, f, BsKind::L, 3.0);
        let mut prev = (1.0, 1.0, 1.0);
        for k in -4..=8 {
            let s = 10f64.powi(k);
            let cur = (ev.laplace_t(s).unwrap(), ev.laplace_m(s, BsKind::L).unwrap(), ev.laplace_m(s, BsKind::N).unwrap());
            assert!(cur.0 <= prev.0 && cur.1 <= prev.1 && cur.2 <= prev.2, "s={s}");
            prev = cur;
        }
    }

    #[test]
    fn hole_routes_agree_in_every_region() {
        let p = NetworkParams::defaults();
        // Serving T puts the aerial floor anywhere; sweep it through all regions.
        for ru in [10.0, 3.0, 8.0] {
            let f = p.frame(ru);
            for k in 1..40 {
                let z = k as f64 * 0.6;
                let radial = LaplaceEvaluator::new(&p, f, BsKind::T, z);
                let polar = radial.clone().with_route(HoleRoute::Polar);
                for kind in BsKind::AERIAL {
                    for s in [0.1, 10.0, 1e3] {
                        let a = radial.exponent_m(s, kind).unwrap().value;
                        let b = polar.exponent_m(s, kind).unwrap().value;
                        assert!((a - b).abs() <= 1e-8 * a.max(1.0), "r_u={ru} z={z} {kind} s={s}: {a} vs {b} ({})", radial.region(kind));
                    }
                }
            }
        }
    }

    #[test]
    fn no_hole_without_exclusion_zone() {
        let p = NetworkParams::defaults().with("r_e", 0.0).unwrap();
        let f = p.frame(6.0);
        let ev = LaplaceEvaluator::new(&p, f, BsKind::T, 2.0);
        assert_eq!(ev.region(BsKind::L), RegionId::VII);
        let q = laplace_quad();
        let s = 5.0;
        let full = q
            .integrate_to_infinity(|zp| ev.aerial_integrand(BsKind::L, s, zp), ev.floors.l)
            .unwrap()
            .value;
        let expect = (-2.0 * PI * p.lambda_a * full).exp();
        assert!((ev.laplace_m(s, BsKind::L).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn continuity_across_floor_regions() {
        let p = NetworkParams::defaults();
        let f = p.frame(10.0);
        let s = 20.0;
        for b in f.boundaries() {
            // Serving T at horizontal distance z puts the L floor at b.
            let zt = |zb: f64| {
                let d = zb.hypot(p.h);
                ((p.xi(BsKind::T) / p.xi(BsKind::L)) * d.powf(p.alpha.l)).powf(1.0 / p.alpha.t)
            };
            for route in [HoleRoute::Radial, HoleRoute::Polar] {
                let lo = LaplaceEvaluator::new(&p, f, BsKind::T, zt(b * (1.0 - 1e-10))).with_route(route);
                let hi = LaplaceEvaluator::new(&p, f, BsKind::T, zt(b * (1.0 + 1e-10))).with_route(route);
                let (a, c) = (lo.laplace_m(s, BsKind::L).unwrap(), hi.laplace_m(s, BsKind::L).unwrap());
                assert!((a - c).abs() < 1e-6, "boundary {b} {route:?}: {a} vs {c}");
            }
        }
    }
}
