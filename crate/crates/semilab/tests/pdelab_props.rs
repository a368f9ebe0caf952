use proptest::prelude::*;
use semilab::constants::{synthesize_for, SynthesisOptions, Transform};
use semilab::modelspace::{appendix_space, WeightedSpace};
use semilab::nonlinearity::NonlinearitySpec;
use semilab::pdelab::{
    appendix_error, check_estimate, diagnostics, solve_radial_bvp, DiagnosticParams, EstimateKind, SolutionProfile,
    SolverConfig,
};
use semilab::Theorem;

fn cfg(intervals: usize) -> SolverConfig<f64> {
    SolverConfig { intervals, ..SolverConfig::default() }
}

fn lane_emden(n: usize, alpha: f64, big_r: f64, b: f64, m: usize) -> SolutionProfile<f64> {
    solve_radial_bvp(&WeightedSpace::flat(n), &NonlinearitySpec::power(alpha), big_r, b, &cfg(m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profiles_stay_positive(n in 3usize..6, lb in -3.0f64..-0.5) {
        let b = 10f64.powf(lb);
        let p = lane_emden(n, 2.0, 1.0, b, 256);
        prop_assert!(p.min_u() >= 1e-12 * b);
    }

    #[test]
    fn enlarging_c_never_flips_a_pass(lb in -3.0f64..-0.3, f1 in 1e-9f64..1.0, f2 in 1.0f64..100.0) {
        let spec = NonlinearitySpec::power(2.0);
        let cert = synthesize_for(&spec, 4.0, Theorem::LaneEmden, &SynthesisOptions::default()).unwrap();
        let p = lane_emden(4, 2.0, 1.0, 10f64.powf(lb), 256);
        for kind in [EstimateKind::GradientStrong, EstimateKind::UniversalBound] {
            let mut small = cert.clone();
            small.c *= f1;
            let mut large = small.clone();
            large.c *= f2;
            let a = check_estimate(&p, &spec, &small, 0.0, 1.0, kind).unwrap();
            let b = check_estimate(&p, &spec, &large, 0.0, 1.0, kind).unwrap();
            prop_assert!(!a.pass || b.pass);
        }
    }

    #[test]
    fn diagnostic_scales_with_the_equation(lb in -2.0f64..-0.5, s in 0.25f64..4.0) {
        // u_s(x) = s^k u(s x) solves the same equation on the ball of radius R/s.
        let alpha = 2.0;
        let k = 2.0 / (alpha - 1.0);
        let b = 10f64.powf(lb);
        let spec = NonlinearitySpec::power(alpha);
        let params = DiagnosticParams { beta: 1.0, gamma: 0.0, d: 0.0, eps: 0.0, transform: Transform::F };
        let p = lane_emden(4, alpha, 1.0, b, 256);
        let q = lane_emden(4, alpha, 1.0 / s, s.powf(k) * b, 256);
        let dp = diagnostics(&p, &spec, &params);
        let dq = diagnostics(&q, &spec, &params);
        let argmax = |v: &[f64]| v.iter().enumerate().fold(0, |m, (i, x)| if *x > v[m] { i } else { m });
        prop_assert_eq!(argmax(&dp.q), argmax(&dq.q));
        for (a, c) in dp.q.iter().zip(&dq.q) {
            prop_assert!((c - s * s * a).abs() <= 1e-8 * (s * s * a).abs().max(1e-300));
        }
    }
}

#[test]
fn appendix_convergence_is_second_order() {
    for (big_n, alpha) in [(5.0, 2.0), (6.0, 1.8), (5.0, 2.2)] {
        let app = appendix_space(big_n, alpha, 1.0).unwrap();
        let big_r = 0.5;
        let bv = app.profile(2.0 * big_r).0;
        let spec = NonlinearitySpec::power(alpha);
        let err = |m| appendix_error(&solve_radial_bvp(&app.space(), &spec, big_r, bv, &cfg(m)).unwrap(), &app);
        let ratio = err(1024) / err(2048);
        assert!((ratio - 4.0).abs() <= 0.2, "N={big_n} α={alpha}: ratio {ratio}");
    }
}
