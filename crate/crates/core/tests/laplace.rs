use rayon::prelude::*;
use vhetnet_core::association::interferer_floor;
use vhetnet_core::channel::{link_distance, los_probability};
use vhetnet_core::interference::LaplaceEvaluator;
use vhetnet_core::montecarlo::{stream_rng, EstimateWithCI, Sampler};
use vhetnet_core::{BsKind, NetworkParams};

const N: u64 = 5_000;

/// Laplace exponent of class-`kind` interference from ABSs beyond the
/// simulated disk of radius `r_max`. Midpoint rule in `(1/r, θ)`.
fn outside_disk_exponent(p: &NetworkParams, r_u: f64, kind: BsKind, s: f64, r_max: f64) -> f64 {
    let (nt, nb) = (1000, 256);
    let m = p.m[kind] as f64;
    let mut acc = 0.0;
    for i in 0..nt {
        let t = (i as f64 + 0.5) / nt as f64;
        let r = r_max / t;
        for j in 0..nb {
            let th = (j as f64 + 0.5) / nb as f64 * std::f64::consts::TAU;
            let z = (r * th.cos() - r_u).hypot(r * th.sin());
            let pl = los_probability(z, p);
            let mark = if kind == BsKind::L { pl } else { 1.0 - pl };
            let d = z.hypot(p.h);
            let x = s * p.xi(kind) * d.powf(-p.alpha[kind]);
            let kernel = 1.0 - (1.0 + x / m).powf(-m);
            // dA = r dr dθ with dr = r_max / t² dt.
            acc += mark * kernel * r * r_max / (t * t);
        }
    }
    p.lambda_a * acc / nt as f64 * std::f64::consts::TAU / nb as f64
}

fn mc_laplace(sampler: &Sampler, r_u: f64, serving: BsKind, z: f64, s_grid: &[f64], seed: u64) -> Vec<[EstimateWithCI; 3]> {
    let p = &sampler.params;
    let frame = p.frame(r_u);
    let floors = BsKind::ALL.map(|c| interferer_floor(serving, c, z, p));
    let draws: Vec<[f64; 3]> = (0..N)
        .into_par_iter()
        .map(|i| {
            let real = sampler.sample_realization(&frame, i, &mut stream_rng(seed, i));
            [0, 1, 2].map(|j| real.interference_beyond(BsKind::ALL[j], floors[j], &frame, p))
        })
        .collect();
    s_grid
        .iter()
        .map(|&s| {
            [0, 1, 2].map(|j| {
                let (sum, sq) = draws.iter().fold((0.0, 0.0), |(a, b), d| {
                    let e = (-s * d[j]).exp();
                    (a + e, b + e * e)
                });
                EstimateWithCI::from_moments(sum, sq, N)
            })
        })
        .collect()
}

#[test]
fn laplace_transforms_match_simulation() {
    let p = NetworkParams::defaults().with("lambda_A", 0.3).unwrap();
    let sampler = Sampler::new(&p, 60.0).unwrap();
    let cases = [(0.0, BsKind::T, 0.6), (4.0, BsKind::T, 1.5), (12.0, BsKind::L, 2.0), (30.0, BsKind::N, 0.3)];
    for (idx, &(ru, serving, z)) in cases.iter().enumerate() {
        let d = link_distance(serving, z, &p);
        let unit = p.tau * d.powf(p.alpha[serving]) / p.xi(serving);
        let s_grid: Vec<f64> = [0.1, 1.0, 10.0].iter().map(|c| c * unit).collect();
        let mc = mc_laplace(&sampler, ru, serving, z, &s_grid, 40 + idx as u64);
        let ev = LaplaceEvaluator::new(&p, p.frame(ru), serving, z);
        for (si, &s) in s_grid.iter().enumerate() {
            // The simulation stops at r_max; put the far ABSs back.
            let analytic = [
                ev.laplace_m(s, BsKind::L).unwrap() * outside_disk_exponent(&p, ru, BsKind::L, s, sampler.r_max).exp(),
                ev.laplace_m(s, BsKind::N).unwrap() * outside_disk_exponent(&p, ru, BsKind::N, s, sampler.r_max).exp(),
                ev.laplace_t(s).unwrap(),
            ];
            for j in 0..3 {
                let est = mc[si][j];
                let sigma = est.std_error().max(1e-4);
                assert!(
                    (analytic[j] - est.mean).abs() <= 3.0 * sigma,
                    "serving {serving} r_u={ru} z={z} class {} s={s:e}: analytic {} vs mc {} ± {}",
                    BsKind::ALL[j],
                    analytic[j],
                    est.mean,
                    sigma
                );
            }
        }
    }
}

#[test]
fn laplace_at_zero_is_one() {
    let p = NetworkParams::defaults();
    for ru in [0.0, 8.0, 20.0] {
        for serving in BsKind::ALL {
            let ev = LaplaceEvaluator::new(&p, p.frame(ru), serving, 1.0);
            assert_eq!(ev.laplace_t(0.0).unwrap(), 1.0);
            assert_eq!(ev.laplace_m(0.0, BsKind::L).unwrap(), 1.0);
            assert_eq!(ev.laplace_m(0.0, BsKind::N).unwrap(), 1.0);
            assert_eq!(ev.laplace_total(0.0).unwrap(), 1.0);
        }
    }
}
