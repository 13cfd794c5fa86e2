//! Shared numerical kernels.
//!
//! * Globally adaptive Gauss-Kronrod (7/15) quadrature over finite intervals,
//!   optionally split at caller-supplied breakpoints.
//! * Semi-infinite integrals through the rational map `x = a + (1 - t) / t`.
//! * Nested two-dimensional quadrature with inner limits depending on the outer
//!   variable (the polar integrals over exclusion-zone pieces).
//! * Tail-truncation radii for integrals weighted by a survival function.
//! * A monotone tabulated inverse CDF used by the radial point samplers.
//! * Richardson-extrapolated central differences.
//! * The exponentially scaled modified Bessel function `I0(x) e^{-x}`.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default evaluation budget of a single integral.
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// Both tolerances scaled by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-9, 1e-7)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    /// Upper limit actually used when an infinite range was truncated.
    pub truncation_radius: Option<f64>,
}

impl QuadResult {
    fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            truncation_radius: None,
        }
    }
}

// Kronrod abscissae and weights of the 15-point rule, with the embedded
// 7-point Gauss weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel on `[a, b]`; returns (value, error estimate).
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += WG[j] * (f1 + f2);
        resk += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let reskh = resk * 0.5;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Adaptive quadrature driver with a tolerance and an evaluation budget.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub tol: Tolerance,
    pub max_evals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self::new(Tolerance::default())
    }
}

impl Quadrature {
    pub fn new(tol: Tolerance) -> Self {
        Self {
            tol,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }

    pub fn with_budget(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    /// Integral of `f` over the finite interval `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<QuadResult> {
        self.integrate_breakpoints(f, &[a, b])
    }

    /// Integral over `[points[0], points[last]]`, never placing a panel across
    /// an interior breakpoint. Points must be non-decreasing; empty pieces are
    /// skipped.
    pub fn integrate_breakpoints<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        points: &[f64],
    ) -> Result<QuadResult> {
        if points.len() < 2 {
            return Ok(QuadResult::zero());
        }
        for w in points.windows(2) {
            if !(w[0] <= w[1]) {
                return Err(Error::Domain(format!(
                    "integration limits out of order: {} > {}",
                    w[0], w[1]
                )));
            }
        }
        let mut evaluations = 0usize;
        let mut heap = BinaryHeap::new();
        let mut settled = (0.0, 0.0);
        let mut total = 0.0;
        let mut total_err = 0.0;
        for w in points.windows(2) {
            if w[1] == w[0] {
                continue;
            }
            let (value, error) = gk15(&mut f, w[0], w[1]);
            evaluations += 15;
            total += value;
            total_err += error;
            heap.push(Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            });
        }
        if !total.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        let mut budget_hit = false;
        while total_err > self.tol.target(total) {
            let Some(seg) = heap.pop() else { break };
            if evaluations + 30 > self.max_evals {
                heap.push(seg);
                budget_hit = true;
                break;
            }
            let mid = 0.5 * (seg.a + seg.b);
            let tiny = 1e-13 * seg.a.abs().max(seg.b.abs()).max(1e-300);
            if (seg.b - seg.a) < tiny || mid <= seg.a || mid >= seg.b {
                // Interval cannot be split further; its error is final.
                settled.0 += seg.value;
                settled.1 += seg.error;
                continue;
            }
            let (v1, e1) = gk15(&mut f, seg.a, mid);
            let (v2, e2) = gk15(&mut f, mid, seg.b);
            evaluations += 30;
            if !(v1 + v2).is_finite() {
                return Err(Error::Domain("integrand is not finite".into()));
            }
            total += v1 + v2 - seg.value;
            total_err += e1 + e2 - seg.error;
            heap.push(Segment {
                a: seg.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Segment {
                a: mid,
                b: seg.b,
                value: v2,
                error: e2,
            });
        }
        // Re-sum to remove drift of the running totals.
        let mut value = settled.0;
        let mut error = settled.1;
        for seg in heap.iter() {
            value += seg.value;
            error += seg.error;
        }
        let target = self.tol.target(value);
        if error > target && !budget_hit {
            log::debug!("quadrature limited by roundoff: error {error:e} > {target:e}");
        }
        if error > target && budget_hit {
            return Err(Error::Quadrature {
                estimate: value,
                error,
                tolerance: target,
                evaluations,
            });
        }
        Ok(QuadResult {
            value,
            abs_error: error,
            evaluations,
            truncation_radius: None,
        })
    }

    /// Integral of `f` over `[a, ∞)` through the map `x = a + (1 - t) / t`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64) -> Result<QuadResult> {
        self.integrate(
            |t: f64| {
                let x = a + (1.0 - t) / t;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v / (t * t)
                }
            },
            0.0,
            1.0,
        )
    }

    /// Nested integral `∫_{lo}^{hi} ∫_{inner(u).0}^{inner(u).1} g(u, v) dv du`.
    ///
    /// The inner integrals run at a tolerance tightened by the outer interval
    /// length so that their errors stay below the outer target.
    pub fn integrate_nested<G, L>(&self, g: G, lo: f64, hi: f64, inner: L) -> Result<QuadResult>
    where
        G: Fn(f64, f64) -> f64,
        L: Fn(f64) -> (f64, f64),
    {
        let span = (hi - lo).abs().max(1e-300);
        let inner_quad = Quadrature {
            tol: Tolerance::new(self.tol.abs / (10.0 * span.max(1.0)), self.tol.rel * 0.1),
            max_evals: self.max_evals,
        };
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let inner_evals = RefCell::new(0usize);
        let outer = self.integrate(
            |u| {
                let (v0, v1) = inner(u);
                if v1 <= v0 {
                    return 0.0;
                }
                match inner_quad.integrate(|v| g(u, v), v0, v1) {
                    Ok(r) => {
                        *inner_evals.borrow_mut() += r.evaluations;
                        r.value
                    }
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
        )?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(QuadResult {
            evaluations: outer.evaluations + inner_evals.into_inner(),
            ..outer
        })
    }

    /// Polar double integral `∫_{z_lo}^{z_hi} ∫_{β_lo(z)}^{β_hi(z)} g(β, z) dβ dz`,
    /// inner in β, outer in z.
    pub fn integrate_2d_polar<G, L>(&self, g: G, z_lo: f64, z_hi: f64, beta_limits: L) -> Result<QuadResult>
    where
        G: Fn(f64, f64) -> f64,
        L: Fn(f64) -> (f64, f64),
    {
        self.integrate_nested(|z, beta| g(beta, z), z_lo, z_hi, beta_limits)
    }
}

/// Smallest radius on the geometric grid `start + step·(2^k - 1)` at which the
/// non-increasing tail bound `tail(r)` drops below `threshold`.
///
/// The grid is fixed, so lowering `threshold` can only move the radius out.
pub fn tail_radius<T: FnMut(f64) -> f64>(
    mut tail: T,
    start: f64,
    step: f64,
    threshold: f64,
    max_radius: f64,
) -> Result<f64> {
    let mut r = start;
    let mut width = step;
    loop {
        if tail(r) < threshold {
            return Ok(r);
        }
        r += width;
        width *= 2.0;
        if r > max_radius {
            return Err(Error::Domain(format!(
                "tail bound stays above {threshold:e} up to radius {max_radius}"
            )));
        }
    }
}

/// Monotone piecewise-cubic inverse of a tabulated CDF.
#[derive(Debug, Clone)]
pub struct TabulatedInverseCdf {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
    slope: Vec<f64>,
    guide: Vec<u32>,
}

impl TabulatedInverseCdf {
    /// Tabulates the CDF of the (unnormalized) density `pdf` on `[lo, hi]`.
    ///
    /// The grid is refined until the interpolated CDF matches quadrature at
    /// every cell midpoint to `tol`.
    pub fn new<F: Fn(f64) -> f64>(pdf: F, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::Domain(format!("empty domain [{lo}, {hi}]")));
        }
        let mut cells = 256usize;
        loop {
            let table = Self::build(&pdf, lo, hi, cells)?;
            let worst = table.max_midpoint_error(&pdf);
            if worst < tol {
                return Ok(table);
            }
            if cells >= 1 << 20 {
                return Err(Error::Consistency(format!(
                    "inverse CDF table error {worst:e} above {tol:e} at {cells} cells"
                )));
            }
            cells *= 2;
        }
    }

    fn build<F: Fn(f64) -> f64>(pdf: &F, lo: f64, hi: f64, cells: usize) -> Result<Self> {
        let width = (hi - lo) / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|i| lo + width * i as f64).collect();
        let mut dens = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            let d = pdf(x);
            if !d.is_finite() || d < 0.0 {
                return Err(Error::Domain(format!("density {d} at {x} is negative or not finite")));
            }
            dens.push(d);
        }
        let mut cdf = Vec::with_capacity(nodes.len());
        cdf.push(0.0);
        let mut acc = 0.0;
        let mut eval = |x: f64| pdf(x);
        for w in nodes.windows(2) {
            let (mass, _) = gk15(&mut eval, w[0], w[1]);
            if !(mass >= 0.0) {
                return Err(Error::Domain("density is negative inside the domain".into()));
            }
            acc += mass;
            cdf.push(acc);
        }
        if !(acc > 0.0) || !acc.is_finite() {
            return Err(Error::Domain("density is not normalizable on the domain".into()));
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        *cdf.last_mut().unwrap() = 1.0;
        let mut slope: Vec<f64> = dens.iter().map(|d| d / acc).collect();
        // Fritsch-Carlson limiter keeps every cubic piece monotone.
        for i in 0..cells {
            let h = nodes[i + 1] - nodes[i];
            let delta = (cdf[i + 1] - cdf[i]) / h;
            if delta <= 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / delta;
            let b = slope[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                slope[i] = t * a * delta;
                slope[i + 1] = t * b * delta;
            }
        }
        let guide_len = cells;
        let mut guide = Vec::with_capacity(guide_len + 1);
        let mut k = 0usize;
        for g in 0..=guide_len {
            let u = g as f64 / guide_len as f64;
            while k + 1 < cells && cdf[k + 1] <= u {
                k += 1;
            }
            guide.push(k as u32);
        }
        Ok(Self {
            nodes,
            cdf,
            slope,
            guide,
        })
    }

    fn max_midpoint_error<F: Fn(f64) -> f64>(&self, pdf: &F) -> f64 {
        let mut eval = |x: f64| pdf(x);
        let total = {
            // Recover the normalization from the first cell with mass.
            let mut norm = None;
            for i in 0..self.cells() {
                let (m, _) = gk15(&mut eval, self.nodes[i], self.nodes[i + 1]);
                let d = self.cdf[i + 1] - self.cdf[i];
                if d > 1e-3 {
                    norm = Some(m / d);
                    break;
                }
            }
            norm.unwrap_or(1.0)
        };
        let mut worst: f64 = 0.0;
        for i in 0..self.cells() {
            let mid = 0.5 * (self.nodes[i] + self.nodes[i + 1]);
            let (m, _) = gk15(&mut eval, self.nodes[i], mid);
            let exact = self.cdf[i] + m / total;
            worst = worst.max((self.cdf_at(mid) - exact).abs());
        }
        worst
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    fn hermite(&self, i: usize, t: f64) -> (f64, f64) {
        let h = self.nodes[i + 1] - self.nodes[i];
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * c0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * c1
            + (t3 - t2) * m1;
        let deriv = (6.0 * t2 - 6.0 * t) * c0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * c1
            + (3.0 * t2 - 2.0 * t) * m1;
        (value, deriv)
    }

    /// Interpolated CDF.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= *self.nodes.last().unwrap() {
            return 1.0;
        }
        let lo = self.nodes[0];
        let width = self.nodes[1] - lo;
        let i = (((x - lo) / width) as usize).min(self.cells() - 1);
        let t = (x - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        self.hermite(i, t).0
    }

    /// Quantile function; `u` is clamped to `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let cells = self.cells();
        let g = ((u * (self.guide.len() - 1) as f64) as usize).min(self.guide.len() - 1);
        let mut i = self.guide[g] as usize;
        while i + 1 < cells && self.cdf[i + 1] <= u {
            i += 1;
        }
        while i > 0 && self.cdf[i] > u {
            i -= 1;
        }
        let (c0, c1) = (self.cdf[i], self.cdf[i + 1]);
        if c1 <= c0 {
            return self.nodes[i];
        }
        // Safeguarded Newton on the cubic piece.
        let (mut a, mut b) = (0.0f64, 1.0f64);
        let mut t = ((u - c0) / (c1 - c0)).clamp(0.0, 1.0);
        for _ in 0..50 {
            let (v, d) = self.hermite(i, t);
            let r = v - u;
            if r.abs() < 1e-13 {
                break;
            }
            if r > 0.0 {
                b = t;
            } else {
                a = t;
            }
            let next = if d > 0.0 { t - r / d } else { f64::NAN };
            t = if next.is_finite() && next > a && next < b {
                next
            } else {
                0.5 * (a + b)
            };
            if b - a < 1e-12 {
                break;
            }
        }
        self.nodes[i] + t * (self.nodes[i + 1] - self.nodes[i])
    }
}

/// `k`-th central difference quotient with step `h`.
fn central_difference<F: FnMut(f64) -> f64>(f: &mut F, x: f64, order: u32, h: f64) -> f64 {
    let k = order as i32;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        let offset = (k as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * f(x + offset);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    acc / h.powi(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Derivative of order `order` at `x` by Richardson extrapolation of central
/// differences with steps `h, h/2, h/4, ...` (Ridders' scheme).
///
/// Every evaluation point lies in `[x - order·h/2, x + order·h/2]`.
pub fn richardson_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, order: u32, h: f64) -> Derivative {
    if order == 0 {
        return Derivative { value: f(x), error: 0.0 };
    }
    const ROWS: usize = 8;
    let mut table = [[0.0f64; ROWS]; ROWS];
    let mut best = Derivative {
        value: f64::NAN,
        error: f64::INFINITY,
    };
    let mut step = h;
    for i in 0..ROWS {
        table[i][0] = central_difference(&mut f, x, order, step);
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            table[i][j] = (factor * table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            let err = (table[i][j] - table[i][j - 1])
                .abs()
                .max((table[i][j] - table[i - 1][j - 1]).abs());
            if err <= best.error {
                best = Derivative {
                    value: table[i][j],
                    error: err,
                };
            }
        }
        if i > 0 && (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best.error {
            break;
        }
        step *= 0.5;
    }
    if !best.value.is_finite() {
        best = Derivative {
            value: table[0][0],
            error: f64::INFINITY,
        };
    }
    best
}

/// `I0(x)·e^{-|x|}`, the exponentially scaled modified Bessel function of the
/// first kind of order zero.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x < 25.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Asymptotic series; at x >= 25 its smallest term is far below 1e-16.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            let next = term * (2.0 * k + 1.0) * (2.0 * k + 1.0) / (8.0 * (k + 1.0) * x);
            if next < 1e-17 * sum || next > term {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Quadrature {
        Quadrature::new(Tolerance::new(1e-12, 1e-12))
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_high_degree_polynomials() {
        // K15 integrates degree 22 exactly, G7 degree 13.
        for deg in 0..=22 {
            let mut f = |x: f64| x.powi(deg);
            let (v, _) = gk15(&mut f, -1.0, 1.0);
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((v - exact).abs() < 1e-14, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn linear_integrand() {
        let r = quad().integrate(|x| x, 0.0, 1.0).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_to_infinity() {
        let r = Quadrature::default().integrate_to_infinity(|x| (-x).exp(), 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn power_law_tail() {
        // ∫_1^∞ x^-2 dx = 1
        let r = quad().integrate_to_infinity(|x| x.powi(-2), 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        // ∫_0^1 sqrt(1 - x^2) dx = π/4
        let r = quad().integrate(|x| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0).unwrap();
        assert!((r.value - PI / 4.0).abs() < 1e-11);
    }

    #[test]
    fn breakpoints_handle_kinks_and_empty_pieces() {
        let r = quad()
            .integrate_breakpoints(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 0.3, 1.0])
            .unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_are_rejected() {
        assert!(matches!(quad().integrate(|x| x, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let q = Quadrature::new(Tolerance::new(1e-15, 1e-15)).with_budget(45);
        let err = q.integrate(|x: f64| (50.0 * x).sin().abs(), 0.0, 1.0).unwrap_err();
        match err {
            Error::Quadrature { estimate, .. } => assert!(estimate.is_finite()),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unit_polar_area() {
        let r = Quadrature::default()
            .integrate_2d_polar(|_, _| 1.0, 0.0, 1.0, |_| (-PI, PI))
            .unwrap();
        assert!((r.value - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn polar_disk_area_with_jacobian() {
        let r = quad()
            .integrate_2d_polar(|_, z| z, 0.0, 2.0, |_| (-PI, PI))
            .unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn nested_with_variable_limits() {
        // triangle 0 <= v <= u <= 1, ∫∫ 1 = 1/2
        let r = quad().integrate_nested(|_, _| 1.0, 0.0, 1.0, |u| (0.0, u)).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn uniform_inverse_is_identity() {
        let inv = TabulatedInverseCdf::new(|_| 1.0, 0.0, 1.0, 1e-10).unwrap();
        for k in 0..=100 {
            let u = k as f64 / 100.0;
            assert!((inv.quantile(u) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn rayleigh_quantiles() {
        let sigma = 10f64.sqrt();
        let inv = TabulatedInverseCdf::new(
            |r| r * (-r * r / (2.0 * sigma * sigma)).exp(),
            0.0,
            12.0 * sigma,
            1e-8,
        )
        .unwrap();
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            let exact = sigma * (-2.0 * (1.0 - u).ln()).sqrt();
            assert!((inv.quantile(u) - exact).abs() < 1e-6, "u={u}");
        }
    }

    #[test]
    fn negative_density_rejected() {
        assert!(TabulatedInverseCdf::new(|x| x - 0.5, 0.0, 1.0, 1e-8).is_err());
        assert!(TabulatedInverseCdf::new(|_| 0.0, 0.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn richardson_first_and_second_derivatives() {
        let d1 = richardson_derivative(|x: f64| x.exp(), 0.5, 1, 0.1);
        assert!((d1.value - 0.5f64.exp()).abs() < 1e-10, "{d1:?}");
        let d2 = richardson_derivative(|x: f64| x.sin(), 0.3, 2, 0.1);
        assert!((d2.value + 0.3f64.sin()).abs() < 1e-8, "{d2:?}");
    }

    #[test]
    fn bessel_matches_integral_representation() {
        for &x in &[0.0, 1e-3, 0.5, 1.0, 5.0, 20.0, 24.999, 25.0, 40.0, 150.0, 600.0] {
            let r = quad()
                .integrate(|t: f64| (x * (t.cos() - 1.0)).exp(), 0.0, PI)
                .unwrap();
            let expected = r.value / PI;
            let got = bessel_i0_scaled(x);
            assert!(((got - expected) / expected).abs() < 1e-12, "x={x}: {got} vs {expected}");
        }
    }

    #[test]
    fn tail_radius_monotone_in_threshold() {
        let tail = |r: f64| (-r * r).exp();
        let r1 = tail_radius(tail, 0.0, 0.5, 1e-6, 1e3).unwrap();
        let r2 = tail_radius(tail, 0.0, 0.5, 1e-12, 1e3).unwrap();
        assert!(r2 >= r1);
        assert!(tail(r2) < 1e-12);
    }
}
