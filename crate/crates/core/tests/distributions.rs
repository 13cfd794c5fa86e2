use std::collections::BTreeSet;

use rayon::prelude::*;
use vhetnet_core::montecarlo::{stream_rng, Sampler};
use vhetnet_core::nearest;
use vhetnet_core::{BsKind, NetworkParams, RegionId, UserFrame};

const N: u64 = 10_000;

/// Dvoretzky-Kiefer-Wolfowitz half-width at confidence `1 - alpha`.
fn dkw(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

fn nearest_samples(params: &NetworkParams, frame: &UserFrame, seed: u64) -> Vec<[f64; 3]> {
    let s = Sampler::new(params, 60.0f64.max(frame.r_u + 30.0)).unwrap();
    (0..N)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let tbs = s.sample_tbs(&mut rng);
            let abs = s.sample_abs(frame, &mut rng);
            let zt = tbs.iter().map(|[x, y]| (x - frame.r_u).hypot(*y)).fold(f64::INFINITY, f64::min);
            let zm = |k: BsKind| {
                abs.iter()
                    .filter(|a| a.kind == k)
                    .map(|a| (a.x - frame.r_u).hypot(a.y))
                    .fold(f64::INFINITY, f64::min)
            };
            [zm(BsKind::L), zm(BsKind::N), zt]
        })
        .collect()
}

fn check_frame(params: &NetworkParams, r_u: f64, seed: u64, regions: &mut BTreeSet<RegionId>) {
    let frame = params.frame(r_u);
    let samples = nearest_samples(params, &frame, seed);
    let band = dkw(N, 0.01);
    let mut grid: Vec<f64> = (1..=160).map(|i| i as f64 * 0.25).collect();
    for b in frame.boundaries() {
        grid.extend([b * (1.0 - 1e-6), b * (1.0 + 1e-6)]);
    }
    for (slot, kind) in [(0, BsKind::L), (1, BsKind::N), (2, BsKind::T)] {
        let mut z_sorted: Vec<f64> = samples.iter().map(|s| s[slot]).collect();
        z_sorted.sort_by(f64::total_cmp);
        for &z in &grid {
            let emp = z_sorted.partition_point(|&v| v <= z) as f64 / N as f64;
            let exact = nearest::cdf(kind, z, &frame, params).unwrap();
            assert!(
                (emp - exact).abs() < band,
                "{kind} r_u={r_u} r_e={} z={z}: empirical {emp} vs {exact}",
                params.r_e
            );
            if kind.is_aerial() {
                regions.insert(frame.classify_region(z));
            }
        }
    }
}

#[test]
fn nearest_distance_cdfs_within_dkw_band() {
    let base = NetworkParams::defaults().with("lambda_A", 0.3).unwrap();
    let mut regions = BTreeSet::new();
    for (i, ru) in [0.0, 5.0, 12.0].into_iter().enumerate() {
        check_frame(&base, ru, 100 + i as u64, &mut regions);
    }
    let open = base.with("r_e", 0.0).unwrap();
    check_frame(&open, 6.0, 200, &mut regions);
    assert_eq!(regions.len(), 7, "regions hit: {regions:?}");
}

#[test]
fn distance_laws_continuous_across_region_boundaries() {
    let p = NetworkParams::defaults();
    for ru in [0.0, 3.0, 8.0, 8.5, 12.0, 30.0] {
        let f = p.frame(ru);
        for b in f.boundaries() {
            for kind in BsKind::ALL {
                let lo = nearest::cdf(kind, b * (1.0 - 1e-12), &f, &p).unwrap();
                let hi = nearest::cdf(kind, b * (1.0 + 1e-12), &f, &p).unwrap();
                assert!((hi - lo).abs() < 1e-8, "{kind} r_u={ru} at {b}: {lo} vs {hi}");
            }
        }
    }
}
