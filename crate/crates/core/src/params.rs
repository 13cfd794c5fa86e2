//! Model parameters, their validation, the radial TBS profile and the flat
//! `key = value` configuration format.
//!
//! Units: horizontal distances and the ABS altitude in km, densities per km²
//! (ABS) or per km (the TBS scale factor, which multiplies a profile in 1/km),
//! powers in W. Path loss is referenced to 1 km. Everything internal is linear;
//! dB values are converted when a config value carries a `dB` suffix.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::UserFrame;
use crate::numerics::{bessel_i0_scaled, Quadrature, Tolerance};

/// Transmitter classes: LoS ABS, NLoS ABS, TBS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BsKind {
    L,
    N,
    T,
}

impl BsKind {
    pub const ALL: [BsKind; 3] = [BsKind::L, BsKind::N, BsKind::T];
    pub const AERIAL: [BsKind; 2] = [BsKind::L, BsKind::N];

    pub fn is_aerial(self) -> bool {
        !matches!(self, BsKind::T)
    }

    pub fn label(self) -> &'static str {
        match self {
            BsKind::L => "L",
            BsKind::N => "N",
            BsKind::T => "T",
        }
    }
}

impl fmt::Display for BsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One value per transmitter class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerKind<T> {
    pub l: T,
    pub n: T,
    pub t: T,
}

impl<T> PerKind<T> {
    pub const fn new(l: T, n: T, t: T) -> Self {
        Self { l, n, t }
    }

    pub fn map<U>(&self, mut f: impl FnMut(BsKind, &T) -> U) -> PerKind<U> {
        PerKind {
            l: f(BsKind::L, &self.l),
            n: f(BsKind::N, &self.n),
            t: f(BsKind::T, &self.t),
        }
    }
}

impl<T> Index<BsKind> for PerKind<T> {
    type Output = T;
    fn index(&self, kind: BsKind) -> &T {
        match kind {
            BsKind::L => &self.l,
            BsKind::N => &self.n,
            BsKind::T => &self.t,
        }
    }
}

impl<T> IndexMut<BsKind> for PerKind<T> {
    fn index_mut(&mut self, kind: BsKind) -> &mut T {
        match kind {
            BsKind::L => &mut self.l,
            BsKind::N => &mut self.n,
            BsKind::T => &mut self.t,
        }
    }
}

/// Radial density of the terrestrial deployment around the town center.
///
/// The TBS intensity at distance `r` from the center is `lambda_T · density(r)`.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    fn density(&self, r: f64) -> f64;

    /// `∫_{-π}^{π} density(r(β, z)) dβ` with `r(β, z)² = r_u² + z² − 2 r_u z cos β`:
    /// the profile integrated around the circle of radius `z` centered at a
    /// user at distance `r_u` from the center.
    fn angular_integral(&self, r_u: f64, z: f64) -> f64 {
        let q = Quadrature::new(Tolerance::new(1e-300, 1e-11));
        let g = |beta: f64| {
            let r2 = (r_u * r_u + z * z - 2.0 * r_u * z * beta.cos()).max(0.0);
            self.density(r2.sqrt())
        };
        2.0 * q.integrate(g, 0.0, PI).map(|r| r.value).unwrap_or(f64::NAN)
    }

    /// `∫_0^∞ 2π r density(r) dr`, the expected point count per unit `lambda_T`.
    fn planar_mass(&self) -> f64 {
        let q = Quadrature::new(Tolerance::new(1e-12, 1e-11));
        q.integrate_to_infinity(|r| 2.0 * PI * r * self.density(r), 0.0)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    /// Radius beyond which the profile carries no practical mass.
    fn support_radius(&self) -> f64;
}

/// `density(r) = e^{−r²/(2σ²)} / (σ √(2π))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProfile {
    sigma2: f64,
    norm: f64,
}

impl GaussianProfile {
    pub fn new(sigma2: f64) -> Self {
        Self {
            sigma2,
            norm: 1.0 / (sigma2.sqrt() * (2.0 * PI).sqrt()),
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

impl RadialProfile for GaussianProfile {
    fn density(&self, r: f64) -> f64 {
        self.norm * (-r * r / (2.0 * self.sigma2)).exp()
    }

    // Closed form through the modified Bessel function:
    // 2π norm e^{−(r_u − z)²/(2σ²)} I0e(r_u z / σ²).
    fn angular_integral(&self, r_u: f64, z: f64) -> f64 {
        let d = r_u - z;
        2.0 * PI * self.norm * (-d * d / (2.0 * self.sigma2)).exp() * bessel_i0_scaled(r_u * z / self.sigma2)
    }

    fn planar_mass(&self) -> f64 {
        self.sigma2.sqrt() * (2.0 * PI).sqrt()
    }

    fn support_radius(&self) -> f64 {
        // e^{-r²/2σ²} < 1e-20
        self.sigma2.sqrt() * 9.6
    }
}

/// Validated, immutable model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// Mean additional transmit losses, linear.
    pub eta: PerKind<f64>,
    /// Path-loss exponents.
    pub alpha: PerKind<f64>,
    /// Nakagami shape parameters.
    pub m: PerKind<u32>,
    /// ABS transmit power (W).
    pub p_m: f64,
    /// TBS transmit power (W).
    pub p_t: f64,
    /// ABS density (1/km²).
    pub lambda_a: f64,
    /// TBS intensity scale (1/km).
    pub lambda_t: f64,
    /// Variance of the Gaussian TBS profile (km²).
    pub sigma_t2: f64,
    /// ABS altitude (km).
    pub h: f64,
    /// Exclusion-zone radius (km).
    pub r_e: f64,
    /// SINR threshold, linear.
    pub tau: f64,
    /// Noise power (W).
    pub sigma_n2: f64,
    /// s-curve constants.
    pub s_a: f64,
    pub s_b: f64,
    xi: PerKind<f64>,
}

impl NetworkParams {
    /// Default scenario: the main parameter table with `lambda_T` calibrated to
    /// the urban/rural density targets and an 8 km exclusion zone.
    pub fn defaults() -> Self {
        RawParams::defaults().validate().expect("default parameters are valid")
    }

    /// `xi_Q = eta_Q · p_Q`.
    pub fn xi(&self, kind: BsKind) -> f64 {
        self.xi[kind]
    }

    pub fn power(&self, kind: BsKind) -> f64 {
        match kind {
            BsKind::T => self.p_t,
            _ => self.p_m,
        }
    }

    pub fn tbs_profile(&self) -> GaussianProfile {
        GaussianProfile::new(self.sigma_t2)
    }

    pub fn frame(&self, r_u: f64) -> UserFrame {
        UserFrame::new(r_u, self.r_e)
    }

    /// Expected TBS count, `lambda_T σ_T √(2π)` for the Gaussian profile.
    pub fn expected_tbs_count(&self) -> f64 {
        self.lambda_t * self.tbs_profile().planar_mass()
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            eta_l: Some(self.eta.l),
            eta_n: Some(self.eta.n),
            eta_t: Some(self.eta.t),
            alpha_l: Some(self.alpha.l),
            alpha_n: Some(self.alpha.n),
            alpha_t: Some(self.alpha.t),
            m_l: Some(self.m.l as f64),
            m_n: Some(self.m.n as f64),
            m_t: Some(self.m.t as f64),
            p_m: Some(self.p_m),
            p_t: Some(self.p_t),
            lambda_a: Some(self.lambda_a),
            lambda_t: Some(self.lambda_t),
            sigma_t2: Some(self.sigma_t2),
            h: Some(self.h),
            r_e: Some(self.r_e),
            tau: Some(self.tau),
            sigma_n2: Some(self.sigma_n2),
            s_a: Some(self.s_a),
            s_b: Some(self.s_b),
        }
    }

    /// Copy with one field replaced (re-validated).
    pub fn with(&self, key: &str, value: f64) -> Result<Self> {
        let mut raw = self.to_raw();
        raw.set(key, value)?;
        raw.validate()
    }
}

/// Unvalidated parameter map; every field must be present to validate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawParams {
    pub eta_l: Option<f64>,
    pub eta_n: Option<f64>,
    pub eta_t: Option<f64>,
    pub alpha_l: Option<f64>,
    pub alpha_n: Option<f64>,
    pub alpha_t: Option<f64>,
    pub m_l: Option<f64>,
    pub m_n: Option<f64>,
    pub m_t: Option<f64>,
    pub p_m: Option<f64>,
    pub p_t: Option<f64>,
    pub lambda_a: Option<f64>,
    pub lambda_t: Option<f64>,
    pub sigma_t2: Option<f64>,
    pub h: Option<f64>,
    pub r_e: Option<f64>,
    pub tau: Option<f64>,
    pub sigma_n2: Option<f64>,
    pub s_a: Option<f64>,
    pub s_b: Option<f64>,
}

/// Config keys in declaration order.
pub const PARAM_KEYS: [&str; 20] = [
    "eta_L", "eta_N", "eta_T", "alpha_L", "alpha_N", "alpha_T", "m_L", "m_N", "m_T", "p_M", "p_T",
    "lambda_A", "lambda_T", "sigma_T2", "h", "r_e", "tau", "sigma_n2", "s_a", "s_b",
];

/// Default TBS intensity scale (1/km), calibrated to the density targets.
pub const CALIBRATED_LAMBDA_T: f64 = 100.0;

/// The raw table value, interpreted with a profile evaluated per metre.
pub const TABLE_LAMBDA_T: f64 = 8.0e4;

impl RawParams {
    pub fn defaults() -> Self {
        Self {
            eta_l: Some(0.9772),
            eta_n: Some(0.007943),
            eta_t: Some(0.6918),
            alpha_l: Some(3.0),
            alpha_n: Some(4.0),
            alpha_t: Some(3.5),
            m_l: Some(2.0),
            m_n: Some(1.0),
            m_t: Some(1.0),
            p_m: Some(1.585),
            p_t: Some(10.0),
            lambda_a: Some(0.15),
            lambda_t: Some(CALIBRATED_LAMBDA_T),
            sigma_t2: Some(10.0),
            h: Some(0.1),
            r_e: Some(8.0),
            tau: Some(0.3162),
            sigma_n2: Some(1e-12),
            s_a: Some(4.88),
            s_b: Some(0.429),
        }
    }

    fn slot(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "eta_L" => &mut self.eta_l,
            "eta_N" => &mut self.eta_n,
            "eta_T" => &mut self.eta_t,
            "alpha_L" => &mut self.alpha_l,
            "alpha_N" => &mut self.alpha_n,
            "alpha_T" => &mut self.alpha_t,
            "m_L" => &mut self.m_l,
            "m_N" => &mut self.m_n,
            "m_T" => &mut self.m_t,
            "p_M" => &mut self.p_m,
            "p_T" => &mut self.p_t,
            "lambda_A" => &mut self.lambda_a,
            "lambda_T" => &mut self.lambda_t,
            "sigma_T2" => &mut self.sigma_t2,
            "h" => &mut self.h,
            "r_e" => &mut self.r_e,
            "tau" => &mut self.tau,
            "sigma_n2" => &mut self.sigma_n2,
            "s_a" => &mut self.s_a,
            "s_b" => &mut self.s_b,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match self.slot(key) {
            Some(slot) => {
                *slot = Some(value);
                Ok(())
            }
            None => Err(Error::param(key, "unknown parameter")),
        }
    }

    /// Parses `value` (optionally with a `dB` suffix) and stores it under `key`.
    pub fn set_str(&mut self, key: &str, value: &str) -> Result<()> {
        let v = parse_value(value).map_err(|m| Error::param(key, m))?;
        self.set(key, v)
    }

    /// Checks every invariant, reporting the first violation by field name.
    pub fn validate(&self) -> Result<NetworkParams> {
        fn get(v: Option<f64>, field: &str) -> Result<f64> {
            match v {
                None => Err(Error::param(field, "missing")),
                Some(x) if !x.is_finite() => Err(Error::param(field, "must be finite")),
                Some(x) => Ok(x),
            }
        }
        fn positive(v: Option<f64>, field: &str) -> Result<f64> {
            let x = get(v, field)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(Error::param(field, format!("must be strictly positive, got {x}")))
            }
        }
        fn non_negative(v: Option<f64>, field: &str) -> Result<f64> {
            let x = get(v, field)?;
            if x >= 0.0 {
                Ok(x)
            } else {
                Err(Error::param(field, format!("must be non-negative, got {x}")))
            }
        }
        fn exponent(v: Option<f64>, field: &str) -> Result<f64> {
            let x = get(v, field)?;
            if x > 2.0 {
                Ok(x)
            } else {
                Err(Error::param(field, "path-loss exponent must exceed 2"))
            }
        }
        fn shape(v: Option<f64>, field: &str) -> Result<u32> {
            let x = get(v, field)?;
            if x >= 1.0 && x.fract() == 0.0 && x <= 64.0 {
                Ok(x as u32)
            } else {
                Err(Error::param(field, format!("Nakagami shape must be an integer >= 1, got {x}")))
            }
        }

        let eta = PerKind::new(
            positive(self.eta_l, "eta_L")?,
            positive(self.eta_n, "eta_N")?,
            positive(self.eta_t, "eta_T")?,
        );
        let alpha = PerKind::new(
            exponent(self.alpha_l, "alpha_L")?,
            exponent(self.alpha_n, "alpha_N")?,
            exponent(self.alpha_t, "alpha_T")?,
        );
        let m = PerKind::new(
            shape(self.m_l, "m_L")?,
            shape(self.m_n, "m_N")?,
            shape(self.m_t, "m_T")?,
        );
        let p_m = positive(self.p_m, "p_M")?;
        let p_t = positive(self.p_t, "p_T")?;
        // Zero densities are admitted: they describe the network without one tier.
        let lambda_a = non_negative(self.lambda_a, "lambda_A")?;
        let lambda_t = non_negative(self.lambda_t, "lambda_T")?;
        let sigma_t2 = positive(self.sigma_t2, "sigma_T2")?;
        let h = positive(self.h, "h")?;
        let r_e = non_negative(self.r_e, "r_e")?;
        let tau = positive(self.tau, "tau")?;
        let sigma_n2 = positive(self.sigma_n2, "sigma_n2")?;
        let s_a = positive(self.s_a, "s_a")?;
        let s_b = positive(self.s_b, "s_b")?;
        let xi = PerKind::new(eta.l * p_m, eta.n * p_m, eta.t * p_t);
        Ok(NetworkParams {
            eta,
            alpha,
            m,
            p_m,
            p_t,
            lambda_a,
            lambda_t,
            sigma_t2,
            h,
            r_e,
            tau,
            sigma_n2,
            s_a,
            s_b,
            xi,
        })
    }

    /// Parses a flat `key = value` config on top of `self`.
    ///
    /// `#` starts a comment; blank lines are ignored; a value ending in `dB`
    /// is converted with `10^(x/10)`.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            let parsed = parse_value(value).map_err(|message| Error::Config { line: line_no, message })?;
            self.set(key, parsed).map_err(|e| Error::Config {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }
}

/// Parses a number, converting a trailing `dB` to linear scale.
pub fn parse_value(value: &str) -> std::result::Result<f64, String> {
    let v = value.trim();
    let (number, db) = match v.strip_suffix("dB").or_else(|| v.strip_suffix("db")) {
        Some(n) => (n.trim(), true),
        None => (v, false),
    };
    let x: f64 = number
        .parse()
        .map_err(|_| format!("cannot parse `{value}` as a number"))?;
    Ok(if db { db_to_linear(x) } else { x })
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `λ_T` giving `target_center_density` (1/km²) at the town center, checked
/// against the urban (≥ 8/km² at 2 km) and rural (≤ 0.1/km² at 10 km) targets.
pub fn calibrate_lambda_t(target_center_density: f64, profile: &dyn RadialProfile) -> Result<f64> {
    const URBAN: (f64, f64) = (2.0, 8.0);
    const RURAL: (f64, f64) = (10.0, 0.1);
    if !(target_center_density > 0.0) {
        return Err(Error::param("lambda_T", "target center density must be positive"));
    }
    let lambda = target_center_density / profile.density(0.0);
    let urban = lambda * profile.density(URBAN.0);
    let rural = lambda * profile.density(RURAL.0);
    if urban < URBAN.1 || rural > RURAL.1 {
        // Feasible window for lambda from the two constraints.
        let lo = URBAN.1 / profile.density(URBAN.0);
        let hi = RURAL.1 / profile.density(RURAL.0);
        return Err(Error::param(
            "lambda_T",
            format!(
                "density window infeasible: need λ·G(2 km) = {urban:.4} >= 8 and λ·G(10 km) = {rural:.4} <= 0.1 \
                 (admissible λ in [{lo:.3}, {hi:.3}])"
            ),
        ));
    }
    Ok(lambda)
}

/// Shared handle on a profile.
pub type ProfileRef = Arc<dyn RadialProfile>;
