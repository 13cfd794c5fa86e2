//! Sweeps, minimum-coverage tables and analytic-versus-simulation reports
//! built on `vhetnet-core`.
//!
//! Every command returns an in-memory result whose CSV rendering is stable:
//! rows come out in grid order whatever the size of the worker pool.

use std::fmt;
use std::str::FromStr;

use vhetnet_core::{NetworkParams, RawParams};

pub mod sweep;
pub mod validate;

pub use sweep::{
    cmd_association_sweep, cmd_coverage_sweep, cmd_min_coverage, MinCoverageResult, MinCoverageRow, MinCoverageSpec,
    SweepResult, SweepRow, SweepSpec,
};
pub use validate::{cmd_validate, Check, CheckStatus, ValidateSpec, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] vhetnet_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for usage, config and I/O problems; 1 when a computation failed.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(vhetnet_core::Error::InvalidParam { .. } | vhetnet_core::Error::Config { .. }) => 2,
            CliError::Model(_) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// How coverage is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    AnalyticApprox,
    AnalyticExact,
    Mc,
    Both,
}

impl Method {
    pub fn analytic(self) -> Option<vhetnet_core::coverage::CoverageMethod> {
        use vhetnet_core::coverage::CoverageMethod;
        match self {
            Method::AnalyticApprox | Method::Both => Some(CoverageMethod::Approximate),
            Method::AnalyticExact => Some(CoverageMethod::Exact),
            Method::Mc => None,
        }
    }

    pub fn uses_mc(self) -> bool {
        matches!(self, Method::Mc | Method::Both)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::AnalyticApprox => "analytic-approx",
            Method::AnalyticExact => "analytic-exact",
            Method::Mc => "mc",
            Method::Both => "both",
        })
    }
}

/// The swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Variable {
    #[value(name = "r_u")]
    RU,
    #[value(name = "lambda_A")]
    LambdaA,
    #[value(name = "r_e")]
    RE,
}

/// A non-empty list of grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(Vec<f64>);

impl Grid {
    /// `start, start + step, ...` up to `stop` inclusive.
    pub fn range(start: f64, stop: f64, step: f64) -> CliResult<Self> {
        if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
            return Err(CliError::Usage(format!("bad grid range {start}:{stop}:{step}")));
        }
        if stop < start {
            return Err(CliError::Usage(format!("empty grid {start}:{stop}:{step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok(Grid((0..=n).map(|i| round_grid(start + i as f64 * step)).collect()))
    }

    pub fn list(values: Vec<f64>) -> CliResult<Self> {
        if values.is_empty() {
            return Err(CliError::Usage("empty grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!("grid value {v} is not finite")));
        }
        Ok(Grid(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// User distances 0..30 km, step 3 or step 1 with `fine`.
    pub fn default_r_u(fine: bool) -> Self {
        Grid::range(0.0, 30.0, if fine { 1.0 } else { 3.0 }).expect("static grid")
    }

    /// Exclusion radii 0..20 km, step 2 or step 1 with `fine`.
    pub fn default_r_e(fine: bool) -> Self {
        Grid::range(0.0, 20.0, if fine { 1.0 } else { 2.0 }).expect("static grid")
    }

    pub fn default_lambda_a() -> Self {
        Grid(vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3])
    }
}

fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

impl FromStr for Grid {
    type Err = CliError;

    /// `start:stop:step` or a comma-separated list.
    fn from_str(s: &str) -> CliResult<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("cannot parse grid value `{t}`")))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => Grid::range(parse(a)?, parse(b)?, parse(c)?),
            [_] if s.trim().is_empty() => Err(CliError::Usage("empty grid".into())),
            [_] => Grid::list(s.split(',').map(parse).collect::<CliResult<_>>()?),
            _ => Err(CliError::Usage(format!("grid `{s}` is neither start:stop:step nor a list"))),
        }
    }
}

/// Defaults, then the config file, then `key=value` overrides, validated.
pub fn load_params(config: Option<&str>, overrides: &[String]) -> CliResult<NetworkParams> {
    let mut raw = RawParams::defaults();
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_string(),
            source,
        })?;
        raw.apply_config(&text)?;
    }
    for item in overrides {
        let Some((key, value)) = item.split_once('=') else {
            return Err(CliError::Usage(format!("--set expects key=value, got `{item}`")));
        };
        raw.set_str(key.trim(), value.trim())?;
    }
    Ok(raw.validate()?)
}

/// Empty cell for missing values, fixed precision otherwise.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub(crate) fn write_csv<W: std::io::Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: "output".into(),
        source,
    })?;
    Ok(())
}

/// Whitespace-separated columns behind a `#` header line, readable by gnuplot.
pub(crate) fn write_gnuplot<W: std::io::Write>(mut out: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    writeln!(out, "# {}", header.join(" "))?;
    for r in rows {
        let cols: Vec<&str> = r.iter().map(|c| if c.is_empty() { "NaN" } else { c.as_str() }).collect();
        writeln!(out, "{}", cols.join(" "))?;
    }
    Ok(())
}
