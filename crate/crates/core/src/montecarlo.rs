//! Monte Carlo oracle: full network realizations, strongest-average-power
//! association and SINR coverage.
//!
//! Iteration `i` of a run with base seed `b` draws from ChaCha8 seeded with
//! `b` on stream `i`, so results do not depend on how iterations are spread
//! over threads. Estimates aggregate integer counts only.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::association::min_interferer_distance;
use crate::channel::{los_probability, sample_gamma_unit_mean};
use crate::error::{Error, Result};
use crate::geometry::UserFrame;
use crate::numerics::TabulatedInverseCdf;
use crate::params::{BsKind, NetworkParams, PerKind, RadialProfile};

/// Outer radius of the simulated ABS annulus (km).
pub const DEFAULT_R_MAX: f64 = 60.0;

/// Relative slack of the per-realization exclusion check.
const EXCLUSION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_samples: u64,
}

impl EstimateWithCI {
    /// Proportion estimate with the normal-approximation 95% half-width.
    pub fn from_counts(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Self {
                mean: f64::NAN,
                half_width_95: f64::INFINITY,
                n_samples: 0,
            };
        }
        let p = hits as f64 / n as f64;
        Self {
            mean: p,
            half_width_95: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
        }
    }

    /// Sample mean with a 95% half-width from the sample variance.
    pub fn from_moments(sum: f64, sum_sq: f64, n: u64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 { ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
        Self {
            mean,
            half_width_95: 1.96 * (var / nf).sqrt(),
            n_samples: n,
        }
    }

    pub fn std_error(&self) -> f64 {
        self.half_width_95 / 1.96
    }

    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean).abs() <= self.half_width_95
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsPoint {
    pub x: f64,
    pub y: f64,
    pub kind: BsKind,
}

/// One sampled network with per-link fading gains.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub tbs: Vec<[f64; 2]>,
    pub abs: Vec<AbsPoint>,
    pub tbs_gain: Vec<f64>,
    pub abs_gain: Vec<f64>,
    pub stream: u64,
}

/// RNG of iteration `iteration` under `base_seed`.
pub fn stream_rng(base_seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(iteration);
    rng
}

/// Precomputed samplers for one parameter set.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub params: NetworkParams,
    pub r_max: f64,
    tbs_mean: f64,
    tbs_radius: Option<TabulatedInverseCdf>,
}

impl Sampler {
    pub fn new(params: &NetworkParams, r_max: f64) -> Result<Self> {
        if !(r_max > params.r_e) {
            return Err(Error::param("r_max", format!("must exceed r_e = {}, got {r_max}", params.r_e)));
        }
        let profile = params.tbs_profile();
        let tbs_mean = params.expected_tbs_count();
        let tbs_radius = if params.lambda_t > 0.0 {
            Some(TabulatedInverseCdf::new(
                |r| 2.0 * PI * r * profile.density(r),
                0.0,
                profile.support_radius(),
                1e-8,
            )?)
        } else {
            None
        };
        Ok(Self {
            params: params.clone(),
            r_max,
            tbs_mean,
            tbs_radius,
        })
    }

    pub fn expected_tbs_count(&self) -> f64 {
        self.tbs_mean
    }

    pub fn expected_abs_count(&self) -> f64 {
        self.params.lambda_a * PI * (self.r_max * self.r_max - self.params.r_e * self.params.r_e)
    }

    pub fn radial_cdf(&self, r: f64) -> f64 {
        self.tbs_radius.as_ref().map_or(1.0, |t| t.cdf_at(r))
    }

    fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
    }

    /// TBS locations by inverse-CDF sampling of the radial law.
    pub fn sample_tbs<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<[f64; 2]> {
        let Some(inv) = &self.tbs_radius else {
            return Vec::new();
        };
        let n = Self::poisson(self.tbs_mean, rng);
        (0..n)
            .map(|_| {
                let r = inv.quantile(rng.random::<f64>());
                let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
                [r * c, r * s]
            })
            .collect()
    }

    /// TBS locations by thinning a homogeneous process on the support disk.
    /// Slow; kept to cross-check [`Sampler::sample_tbs`].
    pub fn sample_tbs_thinning<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<[f64; 2]> {
        let p = &self.params;
        if p.lambda_t == 0.0 {
            return Vec::new();
        }
        let profile = p.tbs_profile();
        let radius = profile.support_radius();
        let peak = profile.density(0.0);
        let n = Self::poisson(p.lambda_t * peak * PI * radius * radius, rng);
        let mut out = Vec::new();
        for _ in 0..n {
            let r = radius * rng.random::<f64>().sqrt();
            let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
            if rng.random::<f64>() * peak < profile.density(r) {
                out.push([r * c, r * s]);
            }
        }
        out
    }

    /// ABSs on the annulus `r_e ≤ r ≤ r_max`, marked LoS with probability
    /// `P_L` of the horizontal distance to the user.
    pub fn sample_abs<R: Rng + ?Sized>(&self, frame: &UserFrame, rng: &mut R) -> Vec<AbsPoint> {
        let p = &self.params;
        let n = Self::poisson(self.expected_abs_count(), rng);
        let (r0, r1) = (p.r_e * p.r_e, self.r_max * self.r_max);
        (0..n)
            .map(|_| {
                let r = (r0 + (r1 - r0) * rng.random::<f64>()).sqrt();
                let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
                let (x, y) = (r * c, r * s);
                let z = ((x - frame.r_u) * (x - frame.r_u) + y * y).sqrt();
                let kind = if rng.random::<f64>() < los_probability(z, p) {
                    BsKind::L
                } else {
                    BsKind::N
                };
                AbsPoint { x, y, kind }
            })
            .collect()
    }

    pub fn sample_realization<R: Rng + ?Sized>(&self, frame: &UserFrame, stream: u64, rng: &mut R) -> Realization {
        let tbs = self.sample_tbs(rng);
        let abs = self.sample_abs(frame, rng);
        let m_t = self.params.m.t;
        let tbs_gain = (0..tbs.len()).map(|_| sample_gamma_unit_mean(m_t, rng)).collect();
        let abs_gain = abs.iter().map(|a| sample_gamma_unit_mean(self.params.m[a.kind], rng)).collect();
        Realization {
            tbs,
            abs,
            tbs_gain,
            abs_gain,
            stream,
        }
    }
}

/// Which point serves the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub kind: BsKind,
    /// Index into the TBS or ABS list.
    pub index: usize,
    /// Horizontal distance.
    pub z: f64,
    /// Link distance.
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub serving: Option<Serving>,
    pub sinr: f64,
    pub covered: bool,
    /// Interferers closer than the equal-power distance of their class.
    pub exclusion_violations: u32,
}

/// `ξ_Q d^{−α_Q}` with exponents that are multiples of 1/2 done without `powf`.
#[derive(Debug, Clone, Copy)]
struct PathLoss {
    xi: PerKind<f64>,
    alpha: PerKind<f64>,
    half_steps: PerKind<Option<i32>>,
}

impl PathLoss {
    fn new(params: &NetworkParams) -> Self {
        let half_steps = params.alpha.map(|_, &a| {
            let k = 2.0 * a;
            (k.fract() == 0.0 && k < 64.0).then_some(k as i32)
        });
        Self {
            xi: PerKind::new(params.xi(BsKind::L), params.xi(BsKind::N), params.xi(BsKind::T)),
            alpha: params.alpha,
            half_steps,
        }
    }

    #[inline]
    fn mean_power(&self, kind: BsKind, d: f64) -> f64 {
        let att = match self.half_steps[kind] {
            Some(k) if k % 2 == 0 => d.powi(k / 2),
            Some(k) => d.powi(k / 2) * d.sqrt(),
            None => d.powf(self.alpha[kind]),
        };
        self.xi[kind] / att
    }
}

fn kind_rank(kind: BsKind) -> u8 {
    match kind {
        BsKind::T => 0,
        BsKind::L => 1,
        BsKind::N => 2,
    }
}

impl Realization {
    fn tbs_z(&self, i: usize, frame: &UserFrame) -> f64 {
        let [x, y] = self.tbs[i];
        (x - frame.r_u).hypot(y)
    }

    fn abs_z(&self, i: usize, frame: &UserFrame) -> f64 {
        let a = &self.abs[i];
        (a.x - frame.r_u).hypot(a.y)
    }

    /// Horizontal distance to the nearest transmitter of `kind`.
    pub fn nearest(&self, kind: BsKind, frame: &UserFrame) -> Option<f64> {
        match kind {
            BsKind::T => (0..self.tbs.len()).map(|i| self.tbs_z(i, frame)).min_by(f64::total_cmp),
            _ => (0..self.abs.len())
                .filter(|&i| self.abs[i].kind == kind)
                .map(|i| self.abs_z(i, frame))
                .min_by(f64::total_cmp),
        }
    }

    /// Every transmitter as (kind, index, horizontal distance, link distance).
    fn links<'a>(&'a self, frame: &'a UserFrame, h: f64) -> impl Iterator<Item = (BsKind, usize, f64, f64)> + 'a {
        let h2 = h * h;
        let t = self.tbs.iter().enumerate().map(move |(i, &[x, y])| {
            let z = ((x - frame.r_u) * (x - frame.r_u) + y * y).sqrt();
            (BsKind::T, i, z, z)
        });
        let a = self.abs.iter().enumerate().map(move |(i, p)| {
            let z2 = (p.x - frame.r_u) * (p.x - frame.r_u) + p.y * p.y;
            (p.kind, i, z2.sqrt(), (z2 + h2).sqrt())
        });
        t.chain(a)
    }

    fn gain(&self, kind: BsKind, index: usize) -> f64 {
        match kind {
            BsKind::T => self.tbs_gain[index],
            _ => self.abs_gain[index],
        }
    }

    /// Aggregate faded power from class-`kind` transmitters at horizontal
    /// distance at least `floor`.
    pub fn interference_beyond(&self, kind: BsKind, floor: f64, frame: &UserFrame, params: &NetworkParams) -> f64 {
        let path = PathLoss::new(params);
        self.links(frame, params.h)
            .filter(|&(k, _, z, _)| k == kind && z >= floor)
            .map(|(k, i, _, d)| path.mean_power(k, d) * self.gain(k, i))
            .sum()
    }

    /// Associates by largest `ξ d^{−α}` and evaluates the SINR.
    pub fn observe(&self, frame: &UserFrame, params: &NetworkParams) -> Observation {
        let path = PathLoss::new(params);
        let mut best: Option<(f64, Serving)> = None;
        for (kind, index, z, d) in self.links(frame, params.h) {
            let avg = path.mean_power(kind, d);
            let better = match &best {
                None => true,
                Some((p, s)) => {
                    avg > *p || (avg == *p && (d < s.d || (d == s.d && kind_rank(kind) < kind_rank(s.kind))))
                }
            };
            if better {
                best = Some((avg, Serving { kind, index, z, d }));
            }
        }
        let Some((serving_avg, serving)) = best else {
            log::debug!("realization {} has no transmitter", self.stream);
            return Observation {
                serving: None,
                sinr: 0.0,
                covered: false,
                exclusion_violations: 0,
            };
        };
        let signal = serving_avg * self.gain(serving.kind, serving.index);

        let mut floor = PerKind::new(0.0, 0.0, 0.0);
        for c in BsKind::ALL {
            floor[c] = min_interferer_distance(serving.kind, c, serving.z, params);
        }
        let mut violations = 0u32;
        let mut interference = 0.0;
        for (kind, index, _, d) in self.links(frame, params.h) {
            if kind == serving.kind && index == serving.index {
                continue;
            }
            interference += path.mean_power(kind, d) * self.gain(kind, index);
            if d < floor[kind] * (1.0 - EXCLUSION_SLACK) {
                violations += 1;
            }
        }
        let sinr = signal / (params.sigma_n2 + interference);
        debug_assert_eq!(violations, 0, "interferer inside the exclusion distance");
        Observation {
            serving: Some(serving),
            sinr,
            covered: sinr > params.tau,
            exclusion_violations: violations,
        }
    }
}

pub fn simulate_once<R: Rng + ?Sized>(frame: &UserFrame, sampler: &Sampler, stream: u64, rng: &mut R) -> Observation {
    sampler.sample_realization(frame, stream, rng).observe(frame, &sampler.params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub coverage: EstimateWithCI,
    pub assoc: PerKind<EstimateWithCI>,
    /// Realizations without any transmitter.
    pub no_server: u64,
    pub exclusion_violations: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    covered: u64,
    served: [u64; 3],
    no_server: u64,
    violations: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            covered: self.covered + o.covered,
            served: [self.served[0] + o.served[0], self.served[1] + o.served[1], self.served[2] + o.served[2]],
            no_server: self.no_server + o.no_server,
            violations: self.violations + o.violations,
        }
    }
}

fn kind_slot(kind: BsKind) -> usize {
    match kind {
        BsKind::L => 0,
        BsKind::N => 1,
        BsKind::T => 2,
    }
}

/// Runs `n` iterations on the current rayon pool.
pub fn estimate_with(sampler: &Sampler, frame: &UserFrame, n: u64, base_seed: u64) -> MonteCarloEstimate {
    let counts = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(base_seed, i);
            let obs = simulate_once(frame, sampler, i, &mut rng);
            let mut c = Counts::default();
            match obs.serving {
                Some(s) => c.served[kind_slot(s.kind)] = 1,
                None => c.no_server = 1,
            }
            c.covered = obs.covered as u64;
            c.violations = obs.exclusion_violations as u64;
            c
        })
        .reduce(Counts::default, Counts::merge);
    MonteCarloEstimate {
        coverage: EstimateWithCI::from_counts(counts.covered, n),
        assoc: PerKind::new(
            EstimateWithCI::from_counts(counts.served[0], n),
            EstimateWithCI::from_counts(counts.served[1], n),
            EstimateWithCI::from_counts(counts.served[2], n),
        ),
        no_server: counts.no_server,
        exclusion_violations: counts.violations,
    }
}

pub fn estimate(frame: &UserFrame, params: &NetworkParams, n: u64, base_seed: u64) -> Result<MonteCarloEstimate> {
    if n == 0 {
        return Err(Error::param("n", "at least one iteration is required"));
    }
    let sampler = Sampler::new(params, DEFAULT_R_MAX.max(frame.r_u + 30.0).max(params.r_e + 1.0))?;
    Ok(estimate_with(&sampler, frame, n, base_seed))
}

/// Coverage of a user served by class `kind` at horizontal distance `z`:
/// interferers are the points beyond the equal-power floors, the serving link
/// gets a fresh gain.
pub fn conditional_coverage_mc(frame: &UserFrame, sampler: &Sampler, kind: BsKind, z: f64, n: u64, base_seed: u64) -> EstimateWithCI {
    let p = &sampler.params;
    let d = crate::channel::link_distance(kind, z, p);
    let floors: Vec<(BsKind, f64)> = BsKind::ALL
        .iter()
        .map(|&c| (c, crate::association::interferer_floor(kind, c, z, p)))
        .collect();
    let covered: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(base_seed, i);
            let r = sampler.sample_realization(frame, i, &mut rng);
            let g = sample_gamma_unit_mean(p.m[kind], &mut rng);
            let signal = p.xi(kind) * g * d.powf(-p.alpha[kind]);
            let interference: f64 = floors.iter().map(|&(c, f)| r.interference_beyond(c, f, frame, p)).sum();
            (signal / (p.sigma_n2 + interference) > p.tau) as u64
        })
        .sum();
    EstimateWithCI::from_counts(covered, n)
}
