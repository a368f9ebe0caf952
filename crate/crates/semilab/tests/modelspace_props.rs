use std::sync::Arc;

use proptest::prelude::*;
use semilab::acceptance::eigen_deviation;
use semilab::modelspace::{appendix_residual, appendix_space, curvature_bound, Weight, WeightedSpace};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigenvalues_match_dense_solver(big_n in 3.2f64..9.0, t in 0.05f64..0.95, k in 0.1f64..10.0, seed in any::<u64>()) {
        let app = appendix_space(big_n, alpha_at(big_n, t), k).unwrap();
        prop_assert!(eigen_deviation(&app.space(), 20, 3.0 * app.mu, seed) <= 1e-10);
    }

    #[test]
    fn requested_curvature_round_trips(big_n in 3.2f64..9.0, t in 0.05f64..0.95, k in 0.01f64..100.0) {
        let app = appendix_space(big_n, alpha_at(big_n, t), k).unwrap();
        let report = curvature_bound(&app.space(), 20.0 * app.mu);
        prop_assert!((report.k_eff - k).abs() <= 1e-10 * k.max(1.0));
    }
}

/// A point of `(1, p_S(N))`.
fn alpha_at(big_n: f64, t: f64) -> f64 {
    1.0 + t * ((big_n + 2.0) / (big_n - 2.0) - 1.0)
}

fn rescaled(space: &WeightedSpace<f64>, s: f64) -> WeightedSpace<f64> {
    let base = space.clone();
    let phi = Arc::new(move |r: f64| {
        let (p, dp, d2p) = base.weight().eval(s * r);
        (p, s * dp, s * s * d2p)
    });
    WeightedSpace::new(space.n(), space.big_n(), Weight::Custom { label: format!("scaled by {s}"), phi }).unwrap()
}

#[test]
fn curvature_minimum_scales_quadratically() {
    for (big_n, alpha) in [(5.0, 2.0), (5.1, 2.0), (7.0, 1.5)] {
        let app = appendix_space(big_n, alpha, 1.0).unwrap();
        let space = app.space();
        let r_max = 10.0 * app.mu;
        let base = curvature_bound(&space, r_max).minimum;
        for s in [0.5, 2.0] {
            let scaled = curvature_bound(&rescaled(&space, s), r_max / s).minimum;
            assert!(
                (scaled - s * s * base).abs() <= 1e-12 * base.abs(),
                "N={big_n} s={s}: {scaled} vs {}",
                s * s * base
            );
        }
    }
}

#[test]
fn appendix_residuals_vanish() {
    for (big_n, alpha) in [(5.0, 2.0), (5.0, 2.2), (6.0, 1.8), (10.0, 1.4)] {
        let app = appendix_space(big_n, alpha, 1.0).unwrap();
        let res = appendix_residual(&app, 100.0, 20001);
        assert!(res <= 1e-10, "N={big_n} α={alpha}: {res:e}");
    }
}
