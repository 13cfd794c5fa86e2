//! SINR coverage probability.
//!
//! With Gamma(m, 1/m) fading on the serving link, coverage conditioned on the
//! serving class `B` at horizontal distance `z` is `P(g > μ J / m)` with
//! `μ = m τ D^α / ξ` and `J = σ_n² + I`. Expanding the Gamma tail gives the
//! exact form `Σ_{k<m} (−μ)^k / k! ℒ_J^{(k)}(μ)`. Replacing the Gamma CDF by
//! `(1 − e^{−ε x})^m` gives `Σ_k C(m, k) (−1)^{k+1} ℒ_J(k ε ν)`; with
//! `ε = (m!)^{−1/m}` this bounds the exact value from above, with `ε = 1`
//! from below.

use std::fmt;

use crate::association::{conditional_assoc, serving_integral};
use crate::channel::link_distance;
use crate::error::{Error, Result};
use crate::geometry::UserFrame;
use crate::interference::LaplaceEvaluator;
use crate::nearest::HoleRoute;
use crate::numerics::{richardson_derivative, Tolerance};
use crate::params::{BsKind, NetworkParams, PerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoverageMethod {
    /// Binomial expansion with `ε₂ = (m!)^{−1/m}`.
    Approximate,
    /// Derivative form of the Gamma tail.
    Exact,
    /// Binomial expansion with `ε = 1`; a lower bound.
    LowerBound,
}

impl fmt::Display for CoverageMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoverageMethod::Approximate => "approximate",
            CoverageMethod::Exact => "exact",
            CoverageMethod::LowerBound => "lower-bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageOptions {
    pub method: CoverageMethod,
    pub route: HoleRoute,
    /// Admit exact evaluation for `m > 2` through higher-order differences.
    pub high_order_derivatives: bool,
    pub tol: Tolerance,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            method: CoverageMethod::Approximate,
            route: HoleRoute::Radial,
            high_order_derivatives: false,
            tol: Tolerance::new(1e-9, 1e-7),
        }
    }
}

impl CoverageOptions {
    pub fn method(method: CoverageMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageDiagnostics {
    /// Upper limit of each outer integral.
    pub truncation: PerKind<f64>,
    /// Sum of the outer quadrature error estimates.
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub p_total: f64,
    pub per_kind: PerKind<f64>,
    pub method: CoverageMethod,
    pub diagnostics: CoverageDiagnostics,
}

/// `ε₂ = (m!)^{−1/m}`.
pub fn epsilon2(m: u32) -> f64 {
    let fact: f64 = (1..=m).map(|k| k as f64).product();
    fact.powf(-1.0 / m as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `m_B τ D^{α_B} / ξ_B` for the server at horizontal distance `z`.
pub fn nu(kind: BsKind, z: f64, params: &NetworkParams) -> f64 {
    let d = link_distance(kind, z, params);
    params.m[kind] as f64 * params.tau * d.powf(params.alpha[kind]) / params.xi(kind)
}

/// Values within this distance below zero are treated as rounding of the
/// alternating sums.
const NEGATIVE_SLACK: f64 = 1e-9;

fn settle_probability(v: f64, what: &str) -> Result<f64> {
    settle_within(v, NEGATIVE_SLACK, what)
}

fn settle_within(v: f64, slack: f64, what: &str) -> Result<f64> {
    if v < -slack || v > 1.0 + slack || v.is_nan() {
        return Err(Error::Consistency(format!("{what} evaluated to {v}, outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// `Σ_k C(m, k) (−1)^{k+1} ℒ_J(k ε ν)`.
pub fn conditional_coverage_eps(ev: &LaplaceEvaluator<'_>, eps: f64) -> Result<f64> {
    let kind = ev.serving;
    let m = ev.params.m[kind];
    let v = nu(kind, ev.z, ev.params);
    let mut acc = 0.0;
    for k in 1..=m {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * binomial(m, k) * ev.laplace_total(k as f64 * eps * v)?;
    }
    settle_probability(acc, "binomial coverage sum")
}

pub fn conditional_coverage_approx(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let ev = LaplaceEvaluator::new(params, *frame, kind, z);
    conditional_coverage_eps(&ev, epsilon2(params.m[kind]))
}

/// Exact conditional coverage from derivatives of `ℒ_J` at `μ`.
pub fn conditional_coverage_exact_with(ev: &LaplaceEvaluator<'_>, high_order: bool) -> Result<f64> {
    let kind = ev.serving;
    let m = ev.params.m[kind];
    if m > 2 && !high_order {
        return Err(Error::Unsupported(format!(
            "exact coverage for m_{kind} = {m} needs derivatives of order {}; enable `high_order_derivatives`",
            m - 1
        )));
    }
    let mu = nu(kind, ev.z, ev.params);
    let mut acc = ev.laplace_total(mu)?;
    let mut coef = 1.0;
    let mut slack = NEGATIVE_SLACK;
    for k in 1..m {
        coef *= -mu / k as f64;
        let failure = std::cell::RefCell::new(None);
        // Every sample stays in [μ/2, 3μ/2].
        let h = mu / k as f64;
        let d = richardson_derivative(
            |s| match ev.laplace_total(s) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            },
            mu,
            k,
            h,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !d.value.is_finite() {
            return Err(Error::Consistency(format!("derivative of order {k} of ℒ_J did not converge at s = {mu}")));
        }
        acc += coef * d.value;
        slack += 4.0 * (coef * d.error).abs();
    }
    settle_within(acc, slack, "exact coverage")
}

pub fn conditional_coverage_exact(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams) -> Result<f64> {
    let ev = LaplaceEvaluator::new(params, *frame, kind, z);
    conditional_coverage_exact_with(&ev, false)
}

pub fn conditional_coverage(kind: BsKind, z: f64, frame: &UserFrame, params: &NetworkParams, opts: &CoverageOptions) -> Result<f64> {
    let ev = LaplaceEvaluator::new(params, *frame, kind, z).with_route(opts.route);
    match opts.method {
        CoverageMethod::Approximate => conditional_coverage_eps(&ev, epsilon2(params.m[kind])),
        CoverageMethod::LowerBound => conditional_coverage_eps(&ev, 1.0),
        CoverageMethod::Exact => conditional_coverage_exact_with(&ev, opts.high_order_derivatives),
    }
}

pub fn coverage_with(frame: &UserFrame, params: &NetworkParams, opts: &CoverageOptions) -> Result<CoverageResult> {
    let mut per_kind = PerKind::new(0.0, 0.0, 0.0);
    let mut truncation = PerKind::new(0.0, 0.0, 0.0);
    let mut abs_error = 0.0;
    let mut evaluations = 0;
    for kind in BsKind::ALL {
        let r = serving_integral(kind, frame, params, opts.tol, |z| {
            let a = conditional_assoc(kind, z, frame, params)?;
            if a == 0.0 {
                return Ok(0.0);
            }
            Ok(a * conditional_coverage(kind, z, frame, params, opts)?)
        })?;
        per_kind[kind] = r.value.max(0.0);
        truncation[kind] = r.truncation_radius.unwrap_or(0.0);
        abs_error += r.abs_error;
        evaluations += r.evaluations;
    }
    let p_total = per_kind.l + per_kind.n + per_kind.t;
    Ok(CoverageResult {
        p_total: settle_probability(p_total, "coverage")?,
        per_kind,
        method: opts.method,
        diagnostics: CoverageDiagnostics {
            truncation,
            abs_error,
            evaluations,
        },
    })
}

pub fn coverage(frame: &UserFrame, params: &NetworkParams, method: CoverageMethod) -> Result<CoverageResult> {
    coverage_with(frame, params, &CoverageOptions::method(method))
}
