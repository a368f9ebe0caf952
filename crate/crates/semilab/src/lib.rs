//! Numerical laboratory for gradient estimates of `Δ_f u + f(u) = 0` on
//! weighted model spaces.
//!
//! The crate is organised as
//!
//! * [`nonlinearity`]: nonlinearity families, exponent indices and the
//!   structural conditions on them;
//! * [`constants`]: coefficient functions, parameter recipes and grid
//!   certification of the resulting constants;
//! * [`modelspace`]: rotationally symmetric weighted spaces, their
//!   Bakry–Émery curvature and the exact appendix family;
//! * [`pdelab`]: a radial boundary value solver plus estimate and
//!   elliptic-inequality diagnostics;
//! * [`relations`]: the gradient, universal-bound and Harnack constants
//!   measured across a corpus of profiles;
//! * [`acceptance`]: the end-to-end acceptance battery.
//!
//! Routines are generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix `f64`.
//!
//! ```
//! use semilab::{Nonlinearity, Theorem};
//! use semilab::constants::{certify, synthesize_for, CertRange, SynthesisOptions};
//!
//! let f = Nonlinearity::power(2.0);
//! let cert = synthesize_for(&f, 4.0, Theorem::LaneEmden, &SynthesisOptions::default()).unwrap();
//! let cert = certify(&cert, &f, &CertRange::default()).unwrap();
//! assert!(cert.verification.unwrap().worst_margin > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod constants;
pub mod modelspace;
pub mod nonlinearity;
pub mod numerics;
pub mod pdelab;
pub mod relations;
pub mod report;
pub mod scalar;
pub mod theorem;

pub use scalar::Real;
pub use theorem::Theorem;

pub type Nonlinearity = nonlinearity::NonlinearitySpec<f64>;
pub type IndexReport = nonlinearity::IndexReport<f64>;
pub type Certificate = constants::Certificate<f64>;
pub type SynthesisOptions = constants::SynthesisOptions<f64>;
pub type CertRange = constants::CertRange<f64>;
pub type Space = modelspace::WeightedSpace<f64>;
pub type AppendixSpace = modelspace::AppendixSpace<f64>;
pub type CurvatureReport = modelspace::CurvatureReport<f64>;
pub type Profile = pdelab::SolutionProfile<f64>;
pub type SolverConfig = pdelab::SolverConfig<f64>;
pub type EstimateReport = pdelab::EstimateReport<f64>;
pub type DefectReport = pdelab::DefectReport<f64>;
pub type ImplicationReport = relations::ImplicationReport<f64>;
