use proptest::prelude::*;
use semilab::constants::{
    certify, h_value, lichnerowicz_constants, liouville_threshold, synthesize_for, u_corner, weak_case2, CertRange,
    SynthesisOptions,
};
use semilab::nonlinearity::{sobolev_exponent, threshold_exponent, NonlinearitySpec};
use semilab::Theorem;

proptest! {
    #[test]
    fn discriminant_identity(n in 2usize..=10, t in 0.0f64..1.0) {
        let n = n as f64;
        let p = threshold_exponent(n);
        let upper = 1.1 + t * (p - 0.01 - 1.1);
        let h = h_value(2.0 / (n - 1.0), 0.0, 0.0, n, upper, 0.0).unwrap();
        prop_assert!((h - 2.0 * ((n + 3.0) / (n - 1.0) - upper)).abs() <= 1e-12);
    }

    #[test]
    fn weak_recipe_identity(n in 2.0f64..12.0, t in 0.01f64..2.0) {
        let p = threshold_exponent(n);
        let lo = 1.0 + 4.0 / n;
        let alpha = lo + t * (p - lo);
        prop_assume!((alpha - p).abs() > 1e-9);
        let (l, _, big_l) = weak_case2(n, alpha);
        prop_assert!((4.0 * l / (n * l - 2.0) - (alpha - 1.0)).abs() <= 1e-12 * alpha.max(1.0));
        prop_assert_eq!(big_l > 0.0, alpha < p);
    }

    #[test]
    fn shrinking_d_and_l_keeps_floors(
        n in 2.0f64..10.0, beta in 0.05f64..0.3, a in 0.0f64..1.0, b in 0.0f64..1.0,
        tl in 0.0f64..1.0, td in 0.0f64..1.0, up in 0.01f64..1.0,
    ) {
        let upper = 1.0 + up * (threshold_exponent(n) - 1.0);
        let w = 2.0 * beta * beta / n;
        let l = a * u_corner(n, beta).min(w);
        let d = b * (w - l) / (upper - 1.0);
        prop_assert!(h_value(beta, d, l, n, upper, 0.0).is_ok());
        prop_assert!(h_value(beta, td * d, tl * l, n, upper, 0.0).is_ok());
    }

    #[test]
    fn liouville_threshold_is_half_the_supremum(n in 1.5f64..12.0, a in 0.01f64..5.0, sigma in 1.01f64..6.0) {
        let k = n.sqrt() * (n.sqrt() - 1.0);
        let delta_sup = 4.0 / k;
        let sup = match lichnerowicz_constants(n, a, sigma, 0.5, delta_sup * (1.0 - 1e-15)) {
            Ok(c) if sigma < 1.0 + 2.0 / k => c.l_abc,
            Ok(_) => delta_sup,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let l = liouville_threshold(n, a, sigma);
        prop_assert!((l - 0.5 * sup).abs() <= 1e-12 * sup.max(1.0));
    }
}

/// Exponent window of `t^α` in which `theorem` applies.
fn window(theorem: Theorem, n: f64) -> (f64, f64) {
    let p = threshold_exponent(n);
    let ps = sobolev_exponent(n).min(40.0);
    match theorem {
        Theorem::UniversalGradient => (1.0, p.min(20.0)),
        Theorem::WeakGradient => (1.0 + 4.0 / n, p.min(20.0)),
        Theorem::Regularized | Theorem::Superlinear => (p.max(1.0), ps),
        _ => (1.0, ps),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthesized_certificates_certify(
        which in 0usize..5, n in 1.0f64..10.0, t in 0.01f64..0.99,
    ) {
        let theorem = [
            Theorem::UniversalGradient,
            Theorem::WeakGradient,
            Theorem::Regularized,
            Theorem::Superlinear,
            Theorem::LaneEmden,
        ][which];
        let (lo, hi) = window(theorem, n);
        prop_assume!(lo < hi);
        let spec = NonlinearitySpec::power(lo + t * (hi - lo));
        let cert = synthesize_for(&spec, n, theorem, &SynthesisOptions::default()).unwrap();
        let cert = certify(&cert, &spec, &CertRange::default()).unwrap();
        prop_assert!(cert.verification.unwrap().worst_margin > 0.0);
    }

    #[test]
    fn harnack_universal_certificates_certify(n in 1.0f64..10.0, t in 0.01f64..0.99) {
        let (lo, hi) = window(Theorem::HarnackUniversal, n);
        let spec = NonlinearitySpec::power(lo + t * (hi - lo));
        let cert = synthesize_for(&spec, n, Theorem::HarnackUniversal, &SynthesisOptions::default()).unwrap();
        prop_assert!(certify(&cert, &spec, &CertRange::default()).is_ok());
    }
}
