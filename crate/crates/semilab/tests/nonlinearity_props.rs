use proptest::prelude::*;
use semilab::nonlinearity::{compute_indices, critical_exponents, NonlinearitySpec, SamplingGrid};

fn ratio_within(spec: &NonlinearitySpec<f64>, t: f64) -> bool {
    let ix = compute_indices(spec, &SamplingGrid::default()).unwrap();
    let (r1, _) = spec.ratios(t);
    let slack = ix.slack + 1e-9;
    ix.lower - slack <= r1 && r1 <= ix.upper + slack
}

proptest! {
    #[test]
    fn power_ratio_lies_between_indices(alpha in 0.2f64..8.0, lt in -8.0f64..8.0) {
        prop_assert!(ratio_within(&NonlinearitySpec::power(alpha), 10f64.powf(lt)));
    }

    #[test]
    fn powersum_indices_are_extreme_exponents(
        k1 in 0.1f64..10.0, a1 in 0.3f64..5.0, k2 in 0.1f64..10.0, a2 in 0.3f64..5.0, lt in -6.0f64..6.0,
    ) {
        prop_assume!((a1 - a2).abs() > 1e-3);
        let spec = NonlinearitySpec::power_sum(vec![(k1, a1), (k2, a2)]).unwrap();
        let ix = compute_indices(&spec, &SamplingGrid::default()).unwrap();
        prop_assert!((ix.lower - a1.min(a2)).abs() <= 1e-9 + ix.slack);
        prop_assert!((ix.upper - a1.max(a2)).abs() <= 1e-9 + ix.slack);
        prop_assert!(ratio_within(&spec, 10f64.powf(lt)));
    }

    #[test]
    fn critical_exponents_decrease_with_dimension(n in 2.01f64..30.0, dn in 0.0f64..5.0) {
        let a = critical_exponents(n, None).unwrap();
        let b = critical_exponents(n + dn, None).unwrap();
        prop_assert!(b.p_s <= a.p_s);
        prop_assert!(b.p <= a.p);
    }
}

#[test]
fn analytic_power_indices_are_exact() {
    let ix = compute_indices(&NonlinearitySpec::power(2.0), &SamplingGrid::default()).unwrap();
    assert_eq!((ix.lower, ix.upper, ix.second), (2.0, 2.0, 2.0));
}
