use proptest::prelude::*;
use semilab::relations::{affine_envelope, harnack_constant};

proptest! {
    #[test]
    fn harnack_constant_increases_in_each_argument(
        c in 1e-4f64..10.0, k in 0.0f64..10.0, r in 0.01f64..3.0, dc in 1e-3f64..1.0, dk in 1e-3f64..1.0, dr in 1e-3f64..1.0,
    ) {
        let h = harnack_constant(c, k, r);
        prop_assert!(harnack_constant(c + dc, k, r) > h);
        prop_assert!(harnack_constant(c, k, r + dr) >= h);
        prop_assert!(harnack_constant(c, k + dk, r) >= h);
        prop_assert!(h >= 1.0);
    }

    #[test]
    fn envelope_covers_every_point(pts in prop::collection::vec((0.0f64..10.0, -10.0f64..10.0), 1..40)) {
        let fit = affine_envelope(&pts).unwrap();
        for (x, y) in &pts {
            prop_assert!(fit.slope * x + fit.intercept >= y - 1e-9);
        }
    }
}
