use std::f64::consts::PI;

use proptest::prelude::*;
use vhetnet_core::association::association_probabilities;
use vhetnet_core::coverage::{conditional_coverage_eps, conditional_coverage_exact, epsilon2};
use vhetnet_core::interference::{fading_kernel, LaplaceEvaluator};
use vhetnet_core::nearest;
use vhetnet_core::numerics::{Quadrature, Tolerance};
use vhetnet_core::{BsKind, NetworkParams, RawParams, UserFrame};

fn lens_area(d: f64, r1: f64, r2: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        return PI * r1.min(r2).powi(2);
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0).sqrt();
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k
}

fn kind_strategy() -> impl Strategy<Value = BsKind> {
    prop_oneof![Just(BsKind::L), Just(BsKind::N), Just(BsKind::T)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_cdf_is_monotone_probability(
        kind in kind_strategy(),
        r_u in 0.0f64..30.0,
        r_e in 0.0f64..20.0,
        z1 in 0.0f64..40.0,
        dz in 0.0f64..5.0,
    ) {
        let p = NetworkParams::defaults().with("r_e", r_e).unwrap();
        let f = p.frame(r_u);
        let a = nearest::cdf(kind, z1, &f, &p).unwrap();
        let b = nearest::cdf(kind, z1 + dz, &f, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b >= a - 1e-12, "{a} then {b}");
    }

    #[test]
    fn xi_is_loss_times_power(eta in 1e-4f64..1.0, pm in 0.01f64..100.0, pt in 0.01f64..100.0) {
        let mut raw = RawParams::defaults();
        raw.set("eta_L", eta).unwrap();
        raw.set("p_M", pm).unwrap();
        raw.set("p_T", pt).unwrap();
        let p = raw.validate().unwrap();
        prop_assert_eq!(p.xi(BsKind::L), eta * pm);
        prop_assert_eq!(p.xi(BsKind::N), p.eta.n * pm);
        prop_assert_eq!(p.xi(BsKind::T), p.eta.t * pt);
    }

    #[test]
    fn exclusion_overlap_matches_lens_area(r_u in 0.0f64..25.0, r_e in 0.5f64..15.0, z in 0.0f64..45.0) {
        let f = UserFrame::new(r_u, r_e);
        let q = Quadrature::new(Tolerance::new(1e-11, 1e-10));
        let polar = f.polar_mass(&f.disk_within(z), |zp| zp, &q).unwrap().value;
        let radial = f.radial_mass(0.0, z, |zp| zp, &q).unwrap().value;
        let exact = lens_area(r_u, z, r_e);
        prop_assert!((polar - exact).abs() < 1e-7 * (1.0 + exact), "polar {polar} vs {exact}");
        prop_assert!((radial - exact).abs() < 1e-7 * (1.0 + exact), "radial {radial} vs {exact}");
        let arc = f.arc_inside(z);
        prop_assert!((0.0..=2.0 * PI + 1e-12).contains(&arc));
    }

    #[test]
    fn fading_kernel_is_monotone_in_unit_interval(m in 1u32..8, x in 0.0f64..1e3, dx in 0.0f64..10.0) {
        let a = fading_kernel(m, x);
        let b = fading_kernel(m, x + dx);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn association_is_a_distribution(r_u in 0.0f64..30.0, r_e in 0.0f64..20.0, lambda_a in 0.0f64..0.4) {
        let p = NetworkParams::defaults().with("r_e", r_e).unwrap().with("lambda_A", lambda_a).unwrap();
        let a = association_probabilities(&p.frame(r_u), &p).unwrap();
        let s = a.probs.l + a.probs.n + a.probs.t;
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!(a.complement_gap() < 1e-4, "{a:?}");
        for k in BsKind::ALL {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a.probs[k]));
        }
    }

    #[test]
    fn gamma_tail_sandwich(r_u in 0.0f64..30.0, z in 0.05f64..6.0) {
        let p = NetworkParams::defaults();
        let f = p.frame(r_u);
        let ev = LaplaceEvaluator::new(&p, f, BsKind::L, z);
        let lower = conditional_coverage_eps(&ev, 1.0).unwrap();
        let upper = conditional_coverage_eps(&ev, epsilon2(2)).unwrap();
        let exact = conditional_coverage_exact(BsKind::L, z, &f, &p).unwrap();
        prop_assert!(lower <= exact + 1e-7 && exact <= upper + 1e-7, "{lower} {exact} {upper}");
        let evt = LaplaceEvaluator::new(&p, f, BsKind::T, z);
        let a = conditional_coverage_eps(&evt, 1.0).unwrap();
        let b = conditional_coverage_exact(BsKind::T, z, &f, &p).unwrap();
        prop_assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}
