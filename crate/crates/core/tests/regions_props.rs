//! Classification invariants.

use std::f64::consts::PI;

use henon_core::regions::{classify, scalar_profile, RegionLabel};
use henon_core::ProblemParams;
use proptest::prelude::*;

const S3: f64 = 5.47790408953133;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn nonexistence_label_implies_nonnegative_scalar_profile(
        a in -1.9f64..=0.0, l in -20.0f64..30.0, m in -15.0f64..-0.01
    ) {
        let p = ProblemParams::new(3, a, l, m).unwrap();
        let l1 = PI * PI;
        if classify(&p, l1, S3).label == RegionLabel::Nonexistence {
            for k in 0..=2000 {
                let s = 10f64.powf(-8.0 + 16.0 * k as f64 / 2000.0);
                prop_assert!(scalar_profile(&p, l1, s) >= -1e-9, "s = {s}");
            }
        }
    }

    #[test]
    fn classification_is_pure_and_margins_continuous(
        l0 in -20.0f64..9.0, m0 in -15.0f64..-0.1, dl in -1.0f64..1.0, dm in -0.09f64..0.09
    ) {
        let l1 = PI * PI;
        let at = |t: f64| {
            let p = ProblemParams::new(3, 0.0, l0 + t * dl, m0 + t * dm).unwrap();
            classify(&p, l1, S3)
        };
        prop_assert_eq!(at(0.3), at(0.3));
        for k in 0..50 {
            let t = k as f64 / 50.0;
            let (a, b) = (at(t), at(t + 1e-8));
            for (x, y) in [
                (a.margins.c0, b.margins.c0),
                (a.margins.nonexistence, b.margins.nonexistence),
                (a.margins.b0, b.margins.b0),
            ] {
                if let (Some(x), Some(y)) = (x, y) {
                    prop_assert!((x - y).abs() < 1e-5 * (1.0 + x.abs()), "{x} -> {y}");
                }
            }
        }
    }
}
