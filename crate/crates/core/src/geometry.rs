//! Exclusion-zone geometry in the user-centered polar frame.
//!
//! The user sits at horizontal distance `r_u` from the town center on the
//! positive x axis. A point at polar coordinates `(β, z)` around the user has
//! center distance `r(β, z) = √(r_u² + z² − 2 r_u z cos β)`, so `β = 0` points
//! at the town center. The exclusion disk has radius `r_e` around the center.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{QuadResult, Quadrature};

const CLAMP_SLACK: f64 = 1e-12;

/// One of the seven ranges of the nearest-ABS distance. I–IV occur when the
/// user is outside the exclusion disk, V–VII when inside or on its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionId::I => "I",
            RegionId::II => "II",
            RegionId::III => "III",
            RegionId::IV => "IV",
            RegionId::V => "V",
            RegionId::VI => "VI",
            RegionId::VII => "VII",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserFrame {
    pub r_u: f64,
    pub r_e: f64,
}

/// Clamps a cosine/sine argument that overshoots [-1, 1] by rounding only.
fn clamp_unit(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + CLAMP_SLACK {
        return Err(Error::Domain(format!("trigonometric argument {x} outside [-1, 1]")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

impl UserFrame {
    /// Panics on negative or non-finite radii; use [`UserFrame::try_new`] for
    /// untrusted input.
    pub fn new(r_u: f64, r_e: f64) -> Self {
        Self::try_new(r_u, r_e).expect("valid user frame")
    }

    pub fn try_new(r_u: f64, r_e: f64) -> Result<Self> {
        if !(r_u >= 0.0 && r_u.is_finite()) {
            return Err(Error::param("r_u", format!("must be finite and non-negative, got {r_u}")));
        }
        if !(r_e >= 0.0 && r_e.is_finite()) {
            return Err(Error::param("r_e", format!("must be finite and non-negative, got {r_e}")));
        }
        Ok(Self { r_u, r_e })
    }

    /// User strictly outside a non-degenerate exclusion disk.
    pub fn is_outer(&self) -> bool {
        self.r_e > 0.0 && self.r_u > self.r_e
    }

    /// Distance from the user to the disk center in the polar frame.
    pub fn center_distance(&self, beta: f64, z: f64) -> f64 {
        (self.r_u * self.r_u + z * z - 2.0 * self.r_u * z * beta.cos()).max(0.0).sqrt()
    }

    /// Tangent angle from the user to the exclusion disk.
    pub fn beta_star(&self) -> Result<f64> {
        if !self.is_outer() {
            return Err(Error::Domain(format!(
                "tangent angle needs r_u > r_e > 0 (r_u = {}, r_e = {})",
                self.r_u, self.r_e
            )));
        }
        Ok(clamp_unit(self.r_e / self.r_u)?.asin())
    }

    /// Half-width of the angular range swept by the disk: `β*` outside, `π` inside.
    pub fn beta_max(&self) -> f64 {
        self.beta_star().unwrap_or(PI)
    }

    /// Distance from the user to the tangency points, `√(r_u² − r_e²)`.
    pub fn tangent_length(&self) -> Result<f64> {
        if !self.is_outer() {
            return Err(Error::Domain("tangent length needs r_u > r_e > 0".into()));
        }
        Ok(((self.r_u - self.r_e) * (self.r_u + self.r_e)).sqrt())
    }

    fn chord_disc(&self, beta: f64) -> Result<f64> {
        if self.is_outer() {
            let bs = self.beta_star()?;
            if beta.abs() > bs * (1.0 + CLAMP_SLACK) + CLAMP_SLACK {
                return Err(Error::Domain(format!(
                    "ray at angle {beta} misses the exclusion disk (β* = {bs})"
                )));
            }
        }
        let s = self.r_u * beta.sin();
        Ok(((self.r_e - s) * (self.r_e + s)).max(0.0).sqrt())
    }

    /// Far intersection of the ray at angle `β` with the disk boundary.
    pub fn z_x(&self, beta: f64) -> Result<f64> {
        let disc = self.chord_disc(beta)?;
        Ok((self.r_u * beta.cos() + disc).max(0.0))
    }

    /// Near intersection of the ray at angle `β`; zero when the user is inside.
    pub fn z_m(&self, beta: f64) -> Result<f64> {
        let disc = self.chord_disc(beta)?;
        if !self.is_outer() {
            return Ok(0.0);
        }
        Ok((self.r_u * beta.cos() - disc).max(0.0))
    }

    /// Range of `z` for which the circle of radius `z` around the user crosses
    /// the disk boundary.
    pub fn intersection_range(&self) -> (f64, f64) {
        ((self.r_u - self.r_e).abs(), self.r_u + self.r_e)
    }

    fn check_intersecting(&self, z: f64) -> Result<()> {
        let (lo, hi) = self.intersection_range();
        let slack = CLAMP_SLACK * hi.max(1.0);
        if !(z > 0.0) || z < lo - slack || z > hi + slack {
            return Err(Error::Domain(format!(
                "circle of radius {z} does not cross the disk boundary (range [{lo}, {hi}])"
            )));
        }
        Ok(())
    }

    /// Half-angle of the arc of the circle of radius `z` that lies inside the disk.
    pub fn beta_i(&self, z: f64) -> Result<f64> {
        self.check_intersecting(z)?;
        if self.r_u == 0.0 {
            // Circle coincides with the boundary.
            return Ok(PI);
        }
        let arg = (z * z + (self.r_u - self.r_e) * (self.r_u + self.r_e)) / (2.0 * z * self.r_u);
        Ok(clamp_unit(arg)?.acos())
    }

    pub fn dbeta_i_dz(&self, z: f64) -> Result<f64> {
        self.check_intersecting(z)?;
        let n = z * z + (self.r_u - self.r_e) * (self.r_u + self.r_e);
        let disc = 4.0 * z * z * self.r_u * self.r_u - n * n;
        if !(disc > 0.0) {
            return Err(Error::Domain(format!("derivative of β_i is unbounded at z = {z}")));
        }
        Ok(((self.r_u - z) * (self.r_u + z) - self.r_e * self.r_e) / (z * disc.sqrt()))
    }

    /// Angular measure, in `[0, 2π]`, of the circle of radius `z` around the
    /// user that falls inside the exclusion disk.
    pub fn arc_inside(&self, z: f64) -> f64 {
        if self.r_e == 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.intersection_range();
        if z >= hi {
            return 0.0;
        }
        if z <= lo {
            return if self.is_outer() { 0.0 } else { 2.0 * PI };
        }
        2.0 * self.beta_i(z).unwrap_or(0.0)
    }

    pub fn classify_region(&self, z: f64) -> RegionId {
        if self.r_e == 0.0 {
            return RegionId::VII;
        }
        if self.is_outer() {
            if z <= self.r_u - self.r_e {
                RegionId::I
            } else if z * z <= (self.r_u - self.r_e) * (self.r_u + self.r_e) {
                RegionId::II
            } else if z <= self.r_u + self.r_e {
                RegionId::III
            } else {
                RegionId::IV
            }
        } else if z <= self.r_e - self.r_u {
            RegionId::V
        } else if z <= self.r_e + self.r_u {
            RegionId::VI
        } else {
            RegionId::VII
        }
    }

    /// Positive region boundaries in increasing order.
    pub fn boundaries(&self) -> Vec<f64> {
        if self.r_e == 0.0 {
            return Vec::new();
        }
        let mut b = if self.is_outer() {
            vec![
                self.r_u - self.r_e,
                self.tangent_length().unwrap_or(0.0),
                self.r_u + self.r_e,
            ]
        } else {
            vec![self.r_e - self.r_u, self.r_e + self.r_u]
        };
        b.retain(|&x| x > 0.0);
        b.dedup();
        b
    }

    /// Smallest horizontal distance at which an ABS can exist.
    pub fn min_abs_distance(&self) -> f64 {
        (self.r_e - self.r_u).max(0.0)
    }

    pub fn radial_bound(&self, bound: RadialBound, beta: f64) -> f64 {
        match bound {
            RadialBound::Fixed(v) => v,
            RadialBound::Near => self.z_m(beta).unwrap_or(0.0),
            RadialBound::Far => self.z_x(beta).unwrap_or(0.0),
        }
    }

    /// Part of the exclusion disk within distance `z` of the user, split into
    /// polar pieces over the upper half plane `β ≥ 0`.
    pub fn disk_within(&self, z: f64) -> Vec<PolarPiece> {
        use RadialBound::*;
        let region = self.classify_region(z);
        let bi = || self.beta_i(z).unwrap_or(0.0);
        match region {
            RegionId::I => vec![],
            RegionId::II => vec![PolarPiece::new(0.0, bi(), Near, Fixed(z))],
            RegionId::III => {
                let (b, bs) = (bi(), self.beta_max());
                vec![PolarPiece::new(0.0, b, Near, Fixed(z)), PolarPiece::new(b, bs, Near, Far)]
            }
            RegionId::IV => vec![PolarPiece::new(0.0, self.beta_max(), Near, Far)],
            RegionId::V => vec![PolarPiece::new(0.0, PI, Fixed(0.0), Fixed(z))],
            RegionId::VI => {
                let b = bi();
                vec![PolarPiece::new(0.0, b, Near, Fixed(z)), PolarPiece::new(b, PI, Near, Far)]
            }
            RegionId::VII if self.r_e == 0.0 => vec![],
            RegionId::VII => vec![PolarPiece::new(0.0, PI, Near, Far)],
        }
    }

    /// Part of the exclusion disk at distance `≥ a` from the user.
    pub fn disk_beyond(&self, a: f64) -> Vec<PolarPiece> {
        use RadialBound::*;
        let bi = || self.beta_i(a).unwrap_or(0.0);
        match self.classify_region(a) {
            RegionId::I => vec![PolarPiece::new(0.0, self.beta_max(), Near, Far)],
            RegionId::II => {
                let (b, bs) = (bi(), self.beta_max());
                vec![PolarPiece::new(0.0, b, Fixed(a), Far), PolarPiece::new(b, bs, Near, Far)]
            }
            RegionId::III | RegionId::VI => vec![PolarPiece::new(0.0, bi(), Fixed(a), Far)],
            RegionId::IV | RegionId::VII => vec![],
            RegionId::V => vec![PolarPiece::new(0.0, PI, Fixed(a), Far)],
        }
    }

    /// `2 Σ ∫∫ g(z') dz' dβ` over polar pieces (the factor 2 restores `β < 0`).
    /// `g` must include the Jacobian `z'`.
    pub fn polar_mass<G: Fn(f64) -> f64>(&self, pieces: &[PolarPiece], g: G, quad: &Quadrature) -> Result<QuadResult> {
        let mut total = QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            truncation_radius: None,
        };
        for p in pieces {
            if p.beta.1 <= p.beta.0 {
                continue;
            }
            let r = quad.integrate_nested(
                |_, zp| g(zp),
                p.beta.0,
                p.beta.1,
                |beta| (self.radial_bound(p.lower, beta), self.radial_bound(p.upper, beta)),
            )?;
            total.value += 2.0 * r.value;
            total.abs_error += 2.0 * r.abs_error;
            total.evaluations += r.evaluations;
        }
        Ok(total)
    }

    /// `∫_a^b g(z') arc(z') dz'`: the same disk mass by circles around the user.
    pub fn radial_mass<G: Fn(f64) -> f64>(&self, a: f64, b: f64, g: G, quad: &Quadrature) -> Result<QuadResult> {
        let (lo, hi) = self.intersection_range();
        let top = b.min(hi);
        let start = if self.is_outer() { a.max(lo) } else { a.max(0.0) };
        if top <= start || self.r_e == 0.0 {
            return Ok(QuadResult {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
                truncation_radius: None,
            });
        }
        let mut pts = vec![start];
        pts.extend(self.boundaries().into_iter().filter(|&x| x > start && x < top));
        pts.push(top);
        quad.integrate_breakpoints(|zp| g(zp) * self.arc_inside(zp), &pts)
    }
}

/// Radial limit of a polar piece: a constant, the near boundary `z_m(β)` or
/// the far boundary `z_X(β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialBound {
    Fixed(f64),
    Near,
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPiece {
    pub beta: (f64, f64),
    pub lower: RadialBound,
    pub upper: RadialBound,
}

impl PolarPiece {
    pub fn new(b0: f64, b1: f64, lower: RadialBound, upper: RadialBound) -> Self {
        Self {
            beta: (b0, b1),
            lower,
            upper,
        }
    }
}
