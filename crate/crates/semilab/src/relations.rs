//! Implications among the universal boundedness estimate, the logarithmic
//! gradient estimate and the Harnack inequality, measured on solution corpora.
//!
//! The measured constants of a profile are the smallest constants for which
//! the respective display holds on that profile:
//!
//! * `C_U = sup f(u)/u / (K + 1/R²)`,
//! * `C_L = sup |∇u|²/u² / (K + 1/R²)`,
//! * `C_H = sup u / inf u`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::nonlinearity::{
    compute_indices, power_ratio_nonincreasing, ratio_nondecreasing, sobolev_exponent, NonlinearitySpec, SamplingGrid,
};
use crate::pdelab::{harnack_ratio, SolutionProfile};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RelationsError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("empty corpus")]
    EmptyCorpus,
}

/// `C_H = e^{2√(C_L(KR² + 1))}`.
pub fn harnack_constant<T: Real>(c_l: T, k: T, big_r: T) -> T {
    (T::two() * (c_l * (k * big_r * big_r + T::one())).sqrt()).exp()
}

/// Measured constants of one profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRecord<T> {
    pub boundary_value: T,
    /// `C_U` on `B(2R)`.
    pub c_u_outer: T,
    /// `C_L` on `B(R)`.
    pub c_l: T,
    /// `C_H` on `B(2R)`.
    pub c_h_outer: T,
    /// `C_U` on `B(R)`.
    pub c_u: T,
    /// `sup u / inf u` on `B(R)`.
    pub harnack_ratio: T,
    /// `e^{2√(C_L(KR²+1))}` with this profile's `C_L`.
    pub harnack_bound: T,
    pub arrow_ul: bool,
    pub arrow_lh: bool,
    pub arrow_hu: bool,
}

/// Affine envelope `y ≤ intercept + slope·x` over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineFit<T> {
    pub slope: T,
    pub intercept: T,
}

/// Least-squares slope, then the smallest intercept covering every point.
pub fn affine_envelope<T: Real>(points: &[(T, T)]) -> Option<AffineFit<T>> {
    if points.is_empty() || points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return None;
    }
    let n = T::of_usize(points.len());
    let mx = points.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = points.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let sxx = points.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    let sxy = points.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let slope = if sxx > T::zero() { (sxy / sxx).pos() } else { T::zero() };
    let intercept = points.iter().map(|p| p.1 - slope * p.0).fold(T::neg_infinity(), T::max);
    Some(AffineFit { slope, intercept })
}

/// Which implication hypotheses `f` satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hypotheses<T> {
    /// `f ≥ 0` with `t^{−c} f` non-increasing for `c = Λ`.
    pub gradient_from_bound: bool,
    pub c: T,
    /// `f > 0`, `Λ < p_S(N)` and `t f′/f` non-decreasing.
    pub bound_from_harnack: bool,
    /// Smooth profiles are continuous, so the Harnack implication always applies.
    pub continuity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImplicationReport<T> {
    pub n: T,
    pub k: T,
    pub big_r: T,
    pub hypotheses: Hypotheses<T>,
    pub records: Vec<ProfileRecord<T>>,
    /// Empirical `C_U(2R) ↦ C_L(R)` envelope.
    pub map_ul: Option<AffineFit<T>>,
    /// Empirical `C_H(2R) ↦ C_U(R)` envelope.
    pub map_hu: Option<AffineFit<T>>,
    /// `None` when the hypotheses fail for `f`.
    pub arrow_ul: Option<bool>,
    pub arrow_lh: bool,
    pub arrow_hu: Option<bool>,
}

impl<T: Real> ImplicationReport<T> {
    /// CSV matrix `profile × arrow`.
    pub fn csv(&self) -> String {
        let mut out = String::from("profile,boundary_value,c_u_outer,c_l,c_h_outer,c_u,ul,lh,hu\n");
        for (i, r) in self.records.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
                r.boundary_value.as_f64(),
                r.c_u_outer.as_f64(),
                r.c_l.as_f64(),
                r.c_h_outer.as_f64(),
                r.c_u.as_f64(),
                r.arrow_ul,
                r.arrow_lh,
                r.arrow_hu
            );
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.arrow_lh && self.arrow_ul != Some(false) && self.arrow_hu != Some(false)
    }
}

fn sup_within<T: Real>(p: &SolutionProfile<T>, radius: T, q: impl Fn(usize) -> T) -> T {
    let last = p.grid.last_within(radius);
    (0..=last).map(q).fold(T::neg_infinity(), T::max)
}

/// Interpolation allowance for the Harnack arrow.
pub const HARNACK_TOLERANCE: f64 = 1e-8;

/// Measures `C_U`, `C_L` and `C_H` on every profile and checks the three
/// arrows.
pub fn implication_suite<T: Real>(
    corpus: &[SolutionProfile<T>],
    n: T,
    spec: &NonlinearitySpec<T>,
    k: T,
    big_r: T,
) -> Result<ImplicationReport<T>, RelationsError> {
    if corpus.is_empty() {
        return Err(RelationsError::EmptyCorpus);
    }
    for p in corpus {
        if !(p.min_u() > T::zero()) {
            return Err(RelationsError::HypothesisViolation("profile is not positive".into()));
        }
        if p.grid.r[p.grid.len() - 1] < T::two() * big_r * (T::one() - T::of(1e-12)) {
            return Err(RelationsError::HypothesisViolation("profile grid does not cover B(2R)".into()));
        }
    }
    let grid = SamplingGrid { points: 1024, ..SamplingGrid::default() };
    let indices = compute_indices(spec, &grid).ok();
    let upper = indices.map(|ix| ix.upper);
    let nonneg = crate::nonlinearity::grid_points::<T>(&grid).into_iter().all(|t| spec.value(t) >= T::zero());
    let c = upper.unwrap_or(T::infinity());
    let gradient_from_bound = nonneg && c.is_finite() && power_ratio_nonincreasing(spec, c, &grid);
    let bound_from_harnack = spec.is_positive()
        && upper.is_some_and(|l| !(n > T::two()) || l < sobolev_exponent(n))
        && ratio_nondecreasing(spec, &grid);
    let hypotheses = Hypotheses { gradient_from_bound, c, bound_from_harnack, continuity: true };

    let outer = T::two() * big_r;
    let base = k + T::one() / (big_r * big_r);
    let base_outer = k + T::one() / (outer * outer);
    let tol = T::of(HARNACK_TOLERANCE);
    let records: Vec<ProfileRecord<T>> = corpus
        .iter()
        .map(|p| {
            let y = |i: usize| spec.value(p.u[i]) / p.u[i];
            let g = |i: usize| (p.du[i] / p.u[i]).powi(2);
            let c_u_outer = sup_within(p, outer, y).pos() / base_outer;
            let c_l = sup_within(p, big_r, g) / base;
            let c_h_outer = harnack_ratio(p, outer);
            let c_u = sup_within(p, big_r, y).pos() / base;
            let ratio = harnack_ratio(p, big_r);
            let bound = harnack_constant(c_l, k, big_r);
            ProfileRecord {
                boundary_value: p.boundary_value,
                c_u_outer,
                c_l,
                c_h_outer,
                c_u,
                harnack_ratio: ratio,
                harnack_bound: bound,
                arrow_ul: c_l.is_finite(),
                arrow_lh: ratio <= bound * (T::one() + tol),
                arrow_hu: c_u.is_finite(),
            }
        })
        .collect();
    let map_ul = affine_envelope(&records.iter().map(|r| (r.c_u_outer, r.c_l)).collect::<Vec<_>>());
    let map_hu = affine_envelope(&records.iter().map(|r| (r.c_h_outer, r.c_u)).collect::<Vec<_>>());
    let arrow_ul = gradient_from_bound.then(|| records.iter().all(|r| r.arrow_ul) && map_ul.is_some());
    let arrow_hu = bound_from_harnack.then(|| records.iter().all(|r| r.arrow_hu) && map_hu.is_some());
    let arrow_lh = records.iter().all(|r| r.arrow_lh);
    Ok(ImplicationReport { n, k, big_r, hypotheses, records, map_ul, map_hu, arrow_ul, arrow_lh, arrow_hu })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harnack_constant_values() {
        assert_eq!(harnack_constant(0.0, 1.0, 1.0), 1.0);
        assert_relative_eq!(harnack_constant(1.0, 0.0, 3.7), 1f64.exp().powi(2), max_relative = 1e-15);
        assert_relative_eq!(harnack_constant(4.0, 1.0, 1.0), (2.0 * 8f64.sqrt()).exp(), max_relative = 1e-15);
        assert!((harnack_constant(4.0f64, 1.0, 1.0) - 286.2468).abs() < 1e-4);
    }

    #[test]
    fn envelope_covers_points() {
        let pts = [(1.0, 2.0), (2.0, 3.5), (3.0, 4.2)];
        let fit = affine_envelope(&pts).unwrap();
        assert!(pts.iter().all(|p| p.1 <= fit.intercept + fit.slope * p.0 + 1e-12));
    }
}
