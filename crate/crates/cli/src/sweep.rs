//! Coverage and association sweeps, and the minimum-coverage table.

use rayon::prelude::*;
use vhetnet_core::association::association_probabilities;
use vhetnet_core::coverage::{coverage, CoverageMethod};
use vhetnet_core::montecarlo::{estimate, MonteCarloEstimate};
use vhetnet_core::{BsKind, NetworkParams, PerKind, UserFrame};

use crate::{cell, write_csv, write_gnuplot, CliError, CliResult, Grid, Method, Variable};

/// Smallest Monte Carlo sample accepted by the sweep commands.
pub const MIN_MC_N: u64 = 100;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: Variable,
    pub grid: Grid,
    /// Base parameters with every fixed override applied.
    pub params: NetworkParams,
    /// User distance when the swept variable is not `r_u`.
    pub r_u: f64,
    pub method: Method,
    pub mc_n: u64,
    pub seed: u64,
}

impl SweepSpec {
    fn check(&self) -> CliResult<()> {
        if self.method.uses_mc() && self.mc_n < MIN_MC_N {
            return Err(CliError::Usage(format!("--mc-n must be at least {MIN_MC_N}, got {}", self.mc_n)));
        }
        Ok(())
    }

    /// Parameters and user frame at one grid value.
    pub fn point(&self, value: f64) -> CliResult<(NetworkParams, UserFrame)> {
        let (params, r_u) = match self.variable {
            Variable::RU => (self.params.clone(), value),
            Variable::LambdaA => (self.params.with("lambda_A", value)?, self.r_u),
            Variable::RE => (self.params.with("r_e", value)?, self.r_u),
        };
        let frame = UserFrame::try_new(r_u, params.r_e)?;
        Ok((params, frame))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub r_u: f64,
    pub r_e: f64,
    pub lambda_a: f64,
    pub analytic_method: Option<CoverageMethod>,
    pub coverage: Option<f64>,
    pub assoc: Option<PerKind<f64>>,
    pub mc: Option<MonteCarloEstimate>,
    pub quad_abs_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub const HEADER: [&'static str; 16] = [
        "r_u",
        "r_e",
        "lambda_A",
        "analytic_method",
        "p_c",
        "p_c_mc",
        "p_c_mc_ci95",
        "a_L",
        "a_N",
        "a_T",
        "a_L_mc",
        "a_N_mc",
        "a_T_mc",
        "a_mc_ci95",
        "quad_abs_error",
        "exclusion_violations",
    ];

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let a = |k: BsKind| r.assoc.map(|a| a[k]);
                let mc = |k: BsKind| r.mc.map(|m| m.assoc[k].mean);
                let mc_hw = r.mc.map(|m| BsKind::ALL.iter().map(|&k| m.assoc[k].half_width_95).fold(0.0, f64::max));
                vec![
                    r.r_u.to_string(),
                    r.r_e.to_string(),
                    r.lambda_a.to_string(),
                    r.analytic_method.map(|m| m.to_string()).unwrap_or_default(),
                    cell(r.coverage),
                    cell(r.mc.map(|m| m.coverage.mean)),
                    cell(r.mc.map(|m| m.coverage.half_width_95)),
                    cell(a(BsKind::L)),
                    cell(a(BsKind::N)),
                    cell(a(BsKind::T)),
                    cell(mc(BsKind::L)),
                    cell(mc(BsKind::N)),
                    cell(mc(BsKind::T)),
                    cell(mc_hw),
                    r.quad_abs_error.map(|e| format!("{e:.3e}")).unwrap_or_default(),
                    r.mc.map(|m| m.exclusion_violations.to_string()).unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> CliResult<()> {
        write_csv(out, &Self::HEADER, &self.records())
    }

    pub fn write_gnuplot<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        write_gnuplot(out, &Self::HEADER, &self.records())
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn evaluate(params: &NetworkParams, frame: &UserFrame, method: Method, with_coverage: bool, mc_n: u64, seed: u64) -> CliResult<SweepRow> {
    let mut row = SweepRow {
        r_u: frame.r_u,
        r_e: params.r_e,
        lambda_a: params.lambda_a,
        analytic_method: None,
        coverage: None,
        assoc: None,
        mc: None,
        quad_abs_error: None,
    };
    if let Some(m) = method.analytic() {
        let assoc = association_probabilities(frame, params)?;
        row.assoc = Some(assoc.probs);
        row.quad_abs_error = Some(assoc.abs_error);
        if with_coverage {
            let c = coverage(frame, params, m)?;
            row.analytic_method = Some(m);
            row.coverage = Some(c.p_total);
            row.quad_abs_error = Some(assoc.abs_error + c.diagnostics.abs_error);
        }
    }
    if method.uses_mc() {
        row.mc = Some(estimate(frame, params, mc_n, seed)?);
    }
    log::info!("r_u = {}, r_e = {}, lambda_A = {} done", frame.r_u, params.r_e, params.lambda_a);
    Ok(row)
}

/// Coverage (and association) at every grid point.
pub fn cmd_coverage_sweep(spec: &SweepSpec) -> CliResult<SweepResult> {
    spec.check()?;
    let rows = spec
        .grid
        .values()
        .par_iter()
        .map(|&v| {
            let (params, frame) = spec.point(v)?;
            evaluate(&params, &frame, spec.method, true, spec.mc_n, spec.seed)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Association probabilities over the grid, repeated for each exclusion radius.
pub fn cmd_association_sweep(spec: &SweepSpec, r_e_list: &Grid) -> CliResult<SweepResult> {
    spec.check()?;
    let points: Vec<(f64, f64)> = r_e_list
        .values()
        .iter()
        .flat_map(|&re| spec.grid.values().iter().map(move |&v| (re, v)))
        .collect();
    let rows = points
        .par_iter()
        .map(|&(re, v)| {
            let base = spec.params.with("r_e", re)?;
            let inner = SweepSpec {
                params: base,
                ..spec.clone()
            };
            let (params, frame) = inner.point(v)?;
            evaluate(&params, &frame, spec.method, false, spec.mc_n, spec.seed)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone)]
pub struct MinCoverageSpec {
    pub params: NetworkParams,
    pub r_e: Grid,
    pub lambda_a: Grid,
    /// Inner user-distance grid over which the minimum is taken.
    pub r_u: Grid,
    pub method: Method,
    pub mc_n: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCoverageRow {
    pub lambda_a: f64,
    pub r_e: f64,
    /// `analytic-approx`, `analytic-exact` or `mc`.
    pub method: String,
    pub p_c_min: f64,
    pub r_u_at_min: f64,
    /// Whether this `r_e` maximizes `p_c_min` for its `lambda_A` and method.
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinCoverageResult {
    pub rows: Vec<MinCoverageRow>,
}

impl MinCoverageResult {
    pub const HEADER: [&'static str; 6] = ["lambda_A", "r_e", "method", "p_c_min", "r_u_at_min", "best_r_e"];

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.lambda_a.to_string(),
                    r.r_e.to_string(),
                    r.method.clone(),
                    format!("{:.6}", r.p_c_min),
                    r.r_u_at_min.to_string(),
                    u8::from(r.best).to_string(),
                ]
            })
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> CliResult<()> {
        write_csv(out, &Self::HEADER, &self.records())
    }

    pub fn write_gnuplot<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        write_gnuplot(out, &Self::HEADER, &self.records())
    }

    /// `max over r_e of p_c_min` for one `lambda_A` and method.
    pub fn max_over_r_e(&self, lambda_a: f64, method: &str) -> Option<(f64, f64)> {
        self.rows
            .iter()
            .find(|r| r.best && r.lambda_a == lambda_a && r.method == method)
            .map(|r| (r.r_e, r.p_c_min))
    }
}

/// Minimum coverage over the inner `r_u` grid for every `(lambda_A, r_e)`.
pub fn cmd_min_coverage(spec: &MinCoverageSpec) -> CliResult<MinCoverageResult> {
    if spec.method.uses_mc() && spec.mc_n < MIN_MC_N {
        return Err(CliError::Usage(format!("--mc-n must be at least {MIN_MC_N}, got {}", spec.mc_n)));
    }
    let mut labels = Vec::new();
    if let Some(m) = spec.method.analytic() {
        labels.push(match m {
            CoverageMethod::Exact => Method::AnalyticExact,
            _ => Method::AnalyticApprox,
        });
    }
    if spec.method.uses_mc() {
        labels.push(Method::Mc);
    }
    let cells: Vec<(f64, f64)> = spec
        .lambda_a
        .values()
        .iter()
        .flat_map(|&la| spec.r_e.values().iter().map(move |&re| (la, re)))
        .collect();
    let mins = cells
        .par_iter()
        .map(|&(la, re)| {
            let params = spec.params.with("lambda_A", la)?.with("r_e", re)?;
            labels
                .iter()
                .map(|&label| {
                    let mut best = (f64::INFINITY, f64::NAN);
                    for &ru in spec.r_u.values() {
                        let frame = UserFrame::try_new(ru, re)?;
                        let p = match label {
                            Method::Mc => estimate(&frame, &params, spec.mc_n, spec.seed)?.coverage.mean,
                            _ => coverage(&frame, &params, label.analytic().expect("analytic label"))?.p_total,
                        };
                        if p < best.0 {
                            best = (p, ru);
                        }
                    }
                    log::info!("lambda_A = {la}, r_e = {re}, {label}: min coverage {:.4} at r_u = {}", best.0, best.1);
                    Ok(MinCoverageRow {
                        lambda_a: la,
                        r_e: re,
                        method: label.to_string(),
                        p_c_min: best.0,
                        r_u_at_min: best.1,
                        best: false,
                    })
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut rows: Vec<MinCoverageRow> = mins.into_iter().flatten().collect();
    for &la in spec.lambda_a.values() {
        for label in &labels {
            let name = label.to_string();
            let top = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.lambda_a == la && r.method == name)
                .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                    Some((_, p)) if p >= r.p_c_min => acc,
                    _ => Some((i, r.p_c_min)),
                });
            if let Some((i, _)) = top {
                rows[i].best = true;
            }
        }
    }
    Ok(MinCoverageResult { rows })
}
