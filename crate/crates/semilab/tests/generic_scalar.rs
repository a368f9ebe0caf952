//! The numeric core instantiated at `f32`.

use semilab::constants::{h_value, synthesize_for, SynthesisOptions};
use semilab::modelspace::{appendix_space, curvature_bound, WeightedSpace};
use semilab::nonlinearity::NonlinearitySpec;
use semilab::pdelab::{solve_radial_bvp, SolverConfig};
use semilab::Theorem;

#[test]
fn appendix_space_in_single_precision() {
    let app = appendix_space(5.0f32, 2.0, 1.0).unwrap();
    assert_eq!(app.n, 4);
    assert!((app.mu - 2f32.sqrt()).abs() < 1e-6);
    let k = curvature_bound(&app.space(), 10.0 * app.mu).k_eff;
    assert!((k - 1.0).abs() < 1e-5);
}

#[test]
fn coefficients_in_single_precision() {
    let h = h_value(0.5f32, 0.0, 0.0, 5.0, 1.5, 0.0).unwrap();
    assert!((h - 2.0 * (2.0 - 1.5)).abs() < 1e-5);
    let cert = synthesize_for(&NonlinearitySpec::power(2.0f32), 4.0, Theorem::LaneEmden, &SynthesisOptions::default())
        .unwrap();
    assert!(cert.c.is_finite() && cert.c > 0.0);
}

#[test]
fn solver_in_single_precision() {
    let cfg = SolverConfig { intervals: 128, tol: 1e-5f32, ..SolverConfig::default() };
    let p = solve_radial_bvp(&WeightedSpace::flat(3), &NonlinearitySpec::power(2.0f32), 1.0, 0.1, &cfg).unwrap();
    assert!(p.u[0] > 0.1 && p.min_u() > 0.0);
}
