//! Analytic quantities checked against the Monte Carlo oracle.

use rayon::prelude::*;
use vhetnet_core::association::association_probabilities;
use vhetnet_core::coverage::{coverage, CoverageMethod};
use vhetnet_core::montecarlo::estimate;
use vhetnet_core::{BsKind, NetworkParams, UserFrame};

use crate::{write_csv, CliResult, Grid};

/// Largest accepted gap between analytic and simulated coverage.
pub const COVERAGE_TOL: f64 = 0.02;
/// Association gap allowed on top of the 3σ binomial band.
pub const ASSOC_SLACK: f64 = 1e-4;
pub const SIMPLEX_TOL: f64 = 1e-4;
/// Quadrature error estimate above which a row is flagged.
pub const QUAD_WARN: f64 = 1e-6;
/// Truncation radius (km) above which the distance tail is flagged as slow.
pub const TRUNCATION_WARN: f64 = 200.0;
/// Path-loss exponents below this make the interference tail decay slowly.
pub const SLOW_TAIL_ALPHA: f64 = 2.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The sample is too small to resolve the tolerance.
    Inconclusive,
    Warning,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Inconclusive => "inconclusive",
            CheckStatus::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// `None` for checks about the whole run.
    pub r_u: Option<f64>,
    pub analytic: f64,
    pub mc: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone)]
pub struct ValidateSpec {
    pub params: NetworkParams,
    pub r_u: Grid,
    pub mc_n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub const HEADER: [&'static str; 6] = ["check", "r_u", "analytic", "mc", "tolerance", "status"];

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> CliResult<()> {
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.r_u.map(|r| r.to_string()).unwrap_or_default(),
                    format!("{:.6}", c.analytic),
                    format!("{:.6}", c.mc),
                    format!("{:.3e}", c.tolerance),
                    c.status.label().to_string(),
                ]
            })
            .collect();
        write_csv(out, &Self::HEADER, &rows)
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Worst-case 95% half-width of a proportion estimated from `n` samples.
fn worst_half_width(n: u64) -> f64 {
    1.96 * 0.5 / (n as f64).sqrt()
}

fn statistical(name: String, r_u: Option<f64>, analytic: f64, mc: f64, tolerance: f64, resolvable: bool) -> Check {
    let status = if !resolvable {
        CheckStatus::Inconclusive
    } else if (analytic - mc).abs() <= tolerance {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Check {
        name,
        r_u,
        analytic,
        mc,
        tolerance,
        status,
    }
}

fn checks_at(frame: &UserFrame, params: &NetworkParams, mc_n: u64, seed: u64) -> CliResult<Vec<Check>> {
    let r_u = Some(frame.r_u);
    let assoc = association_probabilities(frame, params)?;
    let cov = coverage(frame, params, CoverageMethod::Approximate)?;
    let mc = estimate(frame, params, mc_n, seed)?;
    let resolvable = worst_half_width(mc_n) <= COVERAGE_TOL;
    let mut out = vec![statistical("coverage_approx".into(), r_u, cov.p_total, mc.coverage.mean, COVERAGE_TOL, resolvable)];
    for k in BsKind::ALL {
        let p = assoc.probs[k];
        let band = 3.0 * (p * (1.0 - p) / mc_n as f64).sqrt() + ASSOC_SLACK;
        out.push(statistical(format!("assoc_{k}"), r_u, p, mc.assoc[k].mean, band, resolvable));
    }
    let sum = assoc.probs.l + assoc.probs.n + assoc.probs.t;
    let deterministic = |name: &str, value: f64, reference: f64, tol: f64| Check {
        name: name.into(),
        r_u,
        analytic: value,
        mc: reference,
        tolerance: tol,
        status: if (value - reference).abs() <= tol { CheckStatus::Pass } else { CheckStatus::Fail },
    };
    out.push(deterministic("assoc_simplex", sum, 1.0, SIMPLEX_TOL));
    out.push(deterministic("assoc_t_complement", assoc.probs.t, assoc.t_direct, SIMPLEX_TOL));
    out.push(deterministic("exclusion_violations", 0.0, mc.exclusion_violations as f64, 0.0));
    let quad_error = assoc.abs_error + cov.diagnostics.abs_error;
    let slow_tail = BsKind::ALL
        .iter()
        .map(|&k| cov.diagnostics.truncation[k].max(assoc.truncation[k]))
        .fold(0.0, f64::max);
    if quad_error > QUAD_WARN || slow_tail > TRUNCATION_WARN {
        log::warn!("r_u = {}: quadrature error {quad_error:e}, truncation radius {slow_tail} km", frame.r_u);
        out.push(Check {
            name: "truncation".into(),
            r_u,
            analytic: slow_tail,
            mc: quad_error,
            tolerance: TRUNCATION_WARN,
            status: CheckStatus::Warning,
        });
    }
    if mc.no_server > 0 {
        out.push(Check {
            name: "no_server".into(),
            r_u,
            analytic: 0.0,
            mc: mc.no_server as f64,
            tolerance: 0.0,
            status: CheckStatus::Warning,
        });
    }
    Ok(out)
}

/// Every analytic check at every grid point, in grid order.
pub fn cmd_validate(spec: &ValidateSpec) -> CliResult<ValidationReport> {
    let per_point = spec
        .r_u
        .values()
        .par_iter()
        .map(|&ru| {
            let frame = UserFrame::try_new(ru, spec.params.r_e)?;
            checks_at(&frame, &spec.params, spec.mc_n, spec.seed)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut checks: Vec<Check> = per_point.into_iter().flatten().collect();
    let alpha_min = BsKind::ALL.iter().map(|&k| spec.params.alpha[k]).fold(f64::INFINITY, f64::min);
    if alpha_min < SLOW_TAIL_ALPHA {
        log::warn!("path-loss exponent {alpha_min} is close to 2; interference integrals converge slowly");
        checks.push(Check {
            name: "slow_path_loss_tail".into(),
            r_u: None,
            analytic: alpha_min,
            mc: f64::NAN,
            tolerance: SLOW_TAIL_ALPHA,
            status: CheckStatus::Warning,
        });
    }
    if worst_half_width(spec.mc_n) > COVERAGE_TOL {
        log::warn!("mc_n = {} gives confidence intervals wider than {COVERAGE_TOL}; statistical checks are inconclusive", spec.mc_n);
        checks.push(Check {
            name: "mc_ci_width".into(),
            r_u: None,
            analytic: worst_half_width(spec.mc_n),
            mc: spec.mc_n as f64,
            tolerance: COVERAGE_TOL,
            status: CheckStatus::Warning,
        });
    }
    Ok(ValidationReport { checks })
}
