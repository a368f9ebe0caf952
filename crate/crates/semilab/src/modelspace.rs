//! Weighted model spaces `(ℝⁿ, |·|, e^{−φ} dx)` with radial weights.
//!
//! For a radial weight the `N`-Bakry–Émery tensor
//! `Hess φ − (N−n)⁻¹ dφ ⊗ dφ` has two eigenvalues:
//!
//! * radial `φ″ − φ′²/(N−n)` (multiplicity one),
//! * tangential `φ′/r` (multiplicity `n − 1`).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::{golden_min, linspace, sampled_min, CubicSpline};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("α = {alpha} outside (1, (N+2)/(N−2)) for N = {n}")]
    InvalidAlpha { alpha: f64, n: f64 },
    #[error("invalid dimension N = {0}")]
    InvalidDimension(f64),
    #[error("curvature bound must be positive, got {0}")]
    InvalidCurvature(f64),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("cannot parse space: {0}")]
    Parse(String),
}

type Result<T, E = ModelError> = std::result::Result<T, E>;

/// `r ↦ (φ, φ′, φ″)`.
pub type RadialFn<T> = Arc<dyn Fn(T) -> (T, T, T) + Send + Sync>;

/// Radial weight `φ(r)`.
#[derive(Clone)]
pub enum Weight<T> {
    Flat,
    /// `φ = Γ ln(μ² + r²)`.
    Appendix {
        gamma: T,
        mu: T,
    },
    /// Natural cubic spline through `(r, φ)` samples.
    Tabulated(CubicSpline<T>),
    Custom {
        label: String,
        phi: RadialFn<T>,
    },
}

impl<T: fmt::Debug> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Flat => write!(f, "Flat"),
            Weight::Appendix { gamma, mu } => write!(f, "Appendix {{ gamma: {gamma:?}, mu: {mu:?} }}"),
            Weight::Tabulated(_) => write!(f, "Tabulated"),
            Weight::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl<T: Real> Weight<T> {
    /// `(φ, φ′, φ″)` at radius `r ≥ 0`.
    pub fn eval(&self, r: T) -> (T, T, T) {
        match self {
            Weight::Flat => (T::zero(), T::zero(), T::zero()),
            Weight::Appendix { gamma, mu } => {
                let m2 = *mu * *mu;
                let s = m2 + r * r;
                let g = *gamma;
                (g * s.ln(), T::two() * g * r / s, T::two() * g * (m2 - r * r) / (s * s))
            }
            Weight::Tabulated(spline) => spline.eval(r),
            Weight::Custom { phi, .. } => phi(r),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Weight::Flat)
    }
}

/// A smooth model metric measure space with radial weight.
#[derive(Debug, Clone)]
pub struct WeightedSpace<T> {
    n: usize,
    big_n: T,
    weight: Weight<T>,
}

impl<T: Real> WeightedSpace<T> {
    pub fn new(n: usize, big_n: T, weight: Weight<T>) -> Result<Self> {
        if n == 0 {
            return Err(ModelError::DimensionMismatch("ambient dimension must be at least 1".into()));
        }
        let nn = T::of_usize(n);
        if !(big_n >= nn) || !big_n.is_finite() {
            return Err(ModelError::InvalidDimension(big_n.as_f64()));
        }
        if big_n == nn && !weight.is_flat() {
            return Err(ModelError::InvalidWeight("N = n requires the flat weight".into()));
        }
        let (_, d0, _) = weight.eval(T::zero());
        if !(d0.abs() <= T::of(1e-8)) {
            return Err(ModelError::InvalidWeight(format!("φ′(0) = {d0} is not zero")));
        }
        Ok(Self { n, big_n, weight })
    }

    /// Unweighted `ℝⁿ`, viewed with `N = n`.
    pub fn flat(n: usize) -> Self {
        Self { n: n.max(1), big_n: T::of_usize(n.max(1)), weight: Weight::Flat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn big_n(&self) -> T {
        self.big_n
    }

    pub fn weight(&self) -> &Weight<T> {
        &self.weight
    }

    /// `1/(N − n)`, zero in the flat `N = n` case.
    fn inv_gap(&self) -> T {
        let gap = self.big_n - T::of_usize(self.n);
        if gap > T::zero() {
            T::one() / gap
        } else {
            T::zero()
        }
    }

    /// `φ′(r)/r`, extended by `φ″(0)` at the origin.
    fn phi_over_r(&self, r: T) -> T {
        let (_, d1, d2) = self.weight.eval(r);
        if r <= T::of(1e-12) {
            d2
        } else {
            d1 / r
        }
    }

    /// Radial eigenvalue `φ″ − φ′²/(N−n)`.
    pub fn eigen_radial(&self, r: T) -> T {
        let (_, d1, d2) = self.weight.eval(r);
        d2 - d1 * d1 * self.inv_gap()
    }

    /// Tangential eigenvalue `φ′/r`; `None` when `n = 1`.
    pub fn eigen_tangential(&self, r: T) -> Option<T> {
        (self.n > 1).then(|| self.phi_over_r(r))
    }

    /// Smallest eigenvalue at radius `r`.
    pub fn min_eigenvalue(&self, r: T) -> T {
        let rad = self.eigen_radial(r);
        self.eigen_tangential(r).map_or(rad, |t| rad.min(t))
    }

    /// `φ′(r)`.
    pub fn drift(&self, r: T) -> T {
        self.weight.eval(r).1
    }

    pub fn describe(&self) -> String {
        match &self.weight {
            Weight::Flat => format!("flat ℝ^{} (N = {})", self.n, self.big_n),
            w => format!("ℝ^{} with weight {:?} (N = {})", self.n, w, self.big_n),
        }
    }
}

/// Row-major symmetric `n × n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }
}

/// `Hess φ − (N−n)⁻¹ ∇φ ⊗ ∇φ` at the point `x` (the ambient Ricci tensor
/// vanishes).
pub fn ricci_tensor<T: Real>(space: &WeightedSpace<T>, x: &[T]) -> Result<SymMatrix<T>> {
    let n = space.n;
    if x.len() != n {
        return Err(ModelError::DimensionMismatch(format!("point has {} coordinates, space has {n}", x.len())));
    }
    let r = x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    let (_, d1, d2) = space.weight.eval(r);
    let tan = space.phi_over_r(r);
    let k = space.inv_gap();
    let mut data = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { tan } else { T::zero() };
            let (outer, grad) = if r > T::zero() {
                let xi = x[i] / r;
                let xj = x[j] / r;
                ((d2 - tan) * xi * xj, d1 * d1 * xi * xj)
            } else {
                (T::zero(), T::zero())
            };
            data[i * n + j] = delta + outer - k * grad;
        }
    }
    Ok(SymMatrix { n, data })
}

/// Lower curvature bound of a space over `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport<T> {
    pub r_max: T,
    pub minimum: T,
    pub argmin: T,
    /// `max(0, −minimum)`.
    pub k_eff: T,
    pub radial_min: T,
    pub tangential_min: Option<T>,
}

/// Minimises both eigenvalue curves over `[0, r_max]`.
pub fn curvature_bound<T: Real>(space: &WeightedSpace<T>, r_max: T) -> CurvatureReport<T> {
    let samples = 4001;
    let (ra, va) = sampled_min(|r| space.eigen_radial(r), T::zero(), r_max, samples);
    let tan = (space.n > 1).then(|| sampled_min(|r| space.phi_over_r(r), T::zero(), r_max, samples));
    let (argmin, minimum) = match tan {
        Some((rt, vt)) if vt < va => (rt, vt),
        _ => (ra, va),
    };
    CurvatureReport {
        r_max,
        minimum,
        argmin,
        k_eff: (-minimum).pos(),
        radial_min: va,
        tangential_min: tan.map(|t| t.1),
    }
}

/// `u″ + ((n−1)/r − φ′) u′`, with the limit `n u″(0)` at the origin.
pub fn weighted_laplacian<T: Real>(space: &WeightedSpace<T>, r: T, du: T, d2u: T) -> T {
    if r <= T::zero() {
        return T::of_usize(space.n) * d2u;
    }
    d2u + (T::of_usize(space.n - 1) / r - space.drift(r)) * du
}

/// `n = sup{k ∈ ℕ : k < N}`.
pub fn appendix_dimension<T: Real>(big_n: T) -> usize {
    let c = big_n.ceil();
    (c.as_f64() as usize).saturating_sub(1).max(1)
}

/// `Γ(n, α) = ½(n − 2 − 4/(α−1))`.
pub fn appendix_gamma<T: Real>(n: usize, alpha: T) -> T {
    T::half() * (T::of_usize(n) - T::two() - T::of(4.0) / (alpha - T::one()))
}

/// Weighted space and exact Lane–Emden solution realising the curvature
/// bound `−K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixSpace<T> {
    pub big_n: T,
    pub alpha: T,
    pub n: usize,
    pub gamma: T,
    pub mu: T,
    pub k: T,
}

/// Closed-form minimal eigenvalue times `μ²` and the branch it comes from.
pub fn appendix_case_value<T: Real>(big_n: T, n: usize, gamma: T) -> (u8, T) {
    let gap = big_n - T::of_usize(n);
    let two = T::two();
    if gap >= -two / T::of(3.0) * gamma {
        (1, two * gamma)
    } else {
        let num = gap + two * gamma;
        (2, -gamma * num * num / (T::of(4.0) * gap * (gap + gamma)))
    }
}

/// Solves `min eigenvalue(μ) = −K` for the appendix weight.
pub fn appendix_space<T: Real>(big_n: T, alpha: T, k: T) -> Result<AppendixSpace<T>> {
    if !(big_n > T::of(3.0)) || !big_n.is_finite() {
        return Err(ModelError::InvalidDimension(big_n.as_f64()));
    }
    let ps = (big_n + T::two()) / (big_n - T::two());
    if !(alpha > T::one() && alpha < ps) {
        return Err(ModelError::InvalidAlpha { alpha: alpha.as_f64(), n: big_n.as_f64() });
    }
    if !(k > T::zero()) || !k.is_finite() {
        return Err(ModelError::InvalidCurvature(k.as_f64()));
    }
    let n = appendix_dimension(big_n);
    let gamma = appendix_gamma(n, alpha);
    let (_, c) = appendix_case_value(big_n, n, gamma);
    let mu = (-c / k).sqrt();
    Ok(AppendixSpace { big_n, alpha, n, gamma, mu, k })
}

/// Exact data at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixPoint<T> {
    pub r: T,
    pub u: T,
    pub du: T,
    pub d2u: T,
    pub laplacian: T,
    /// `Δ_w u + u^α`.
    pub residual: T,
}

impl<T: Real> AppendixSpace<T> {
    pub fn space(&self) -> WeightedSpace<T> {
        WeightedSpace { n: self.n, big_n: self.big_n, weight: Weight::Appendix { gamma: self.gamma, mu: self.mu } }
    }

    /// `k = 2/(α−1)`.
    fn k_exp(&self) -> T {
        T::two() / (self.alpha - T::one())
    }

    /// `A` with `u = A (μ² + r²)^{−k}`.
    fn amplitude(&self) -> T {
        let c = (T::of(4.0) * T::of_usize(self.n) / (self.alpha - T::one())).sqrt();
        (self.mu * c).powf(self.k_exp())
    }

    /// `(u, u′, u″)`.
    pub fn profile(&self, r: T) -> (T, T, T) {
        let k = self.k_exp();
        let a = self.amplitude();
        let s = self.mu * self.mu + r * r;
        let u = a * s.powf(-k);
        let du = -T::two() * k * a * r * s.powf(-k - T::one());
        let d2u = -T::two() * k * a * s.powf(-k - T::one())
            + T::of(4.0) * k * (k + T::one()) * a * r * r * s.powf(-k - T::two());
        (u, du, d2u)
    }

    /// Closed-form `minimum eigenvalue` over `ℝⁿ`.
    pub fn case_minimum(&self) -> (u8, T) {
        let (case, c) = appendix_case_value(self.big_n, self.n, self.gamma);
        (case, c / (self.mu * self.mu))
    }

    /// `|∇u|²/u² + u^{α−1}` at `r`.
    pub fn diagnostic(&self, r: T) -> T {
        let (u, du, _) = self.profile(r);
        (du / u).powi(2) + u.powf(self.alpha - T::one())
    }

    /// Same with the closed form `(4k²r² + 2knμ²)/(μ² + r²)²`.
    pub fn diagnostic_closed(&self, r: T) -> T {
        let k = self.k_exp();
        let m2 = self.mu * self.mu;
        let s = m2 + r * r;
        (T::of(4.0) * k * k * r * r + T::two() * k * T::of_usize(self.n) * m2) / (s * s)
    }
}

pub fn appendix_solution<T: Real>(space: &AppendixSpace<T>, r: T) -> AppendixPoint<T> {
    let (u, du, d2u) = space.profile(r);
    let laplacian = weighted_laplacian(&space.space(), r, du, d2u);
    AppendixPoint { r, u, du, d2u, laplacian, residual: laplacian + u.powf(space.alpha) }
}

/// Supremum of `|∇u|²/u² + u^{α−1}` and its ratio to `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sharpness<T> {
    pub sup: T,
    pub argmax: T,
    pub ratio: T,
}

pub fn sharpness_quantity<T: Real>(space: &AppendixSpace<T>) -> Sharpness<T> {
    let r_max = T::of(50.0) * space.mu;
    let (x, v) = sampled_min(|r| -space.diagnostic(r), T::zero(), r_max, 4001);
    let (x, v) = {
        let at0 = -space.diagnostic(T::zero());
        if at0 <= v {
            (T::zero(), at0)
        } else {
            (x, v)
        }
    };
    Sharpness { sup: -v, argmax: x, ratio: -v / space.k }
}

/// Maximum relative residual `max|Δ_w u + u^α| / max u^α` on `n_points`
/// equally spaced radii in `[0, r_max]`.
pub fn appendix_residual<T: Real>(space: &AppendixSpace<T>, r_max: T, n_points: usize) -> T {
    let mut res = T::zero();
    let mut scale = T::zero();
    for r in linspace(T::zero(), r_max, n_points) {
        let p = appendix_solution(space, r);
        res = res.max(p.residual.abs());
        scale = scale.max(p.u.powf(space.alpha));
    }
    res / scale
}

/// Refined minimiser of the radial eigenvalue over `[a, b]`.
pub fn radial_argmin<T: Real>(space: &WeightedSpace<T>, a: T, b: T) -> (T, T) {
    golden_min(|r| space.eigen_radial(r), a, b, T::of(1e-14))
}

/// JSON description of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDef {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: Option<f64>,
    #[serde(default)]
    pub weight: WeightDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightDef {
    #[default]
    Flat,
    Appendix {
        alpha: f64,
        mu: f64,
    },
    CustomRadial {
        phi: String,
        r: Vec<f64>,
        values: Vec<f64>,
    },
}

impl SpaceDef {
    pub fn build<T: Real>(&self) -> Result<WeightedSpace<T>> {
        let big_n = T::of(self.big_n.unwrap_or(self.n as f64));
        let weight = match &self.weight {
            WeightDef::Flat => Weight::Flat,
            WeightDef::Appendix { alpha, mu } => {
                Weight::Appendix { gamma: appendix_gamma(self.n, T::of(*alpha)), mu: T::of(*mu) }
            }
            WeightDef::CustomRadial { phi, r, values } => {
                if phi != "table" {
                    return Err(ModelError::InvalidWeight(format!("unsupported phi source `{phi}`")));
                }
                let spline =
                    CubicSpline::new(r.iter().map(|&x| T::of(x)).collect(), values.iter().map(|&x| T::of(x)).collect())
                        .ok_or_else(|| ModelError::InvalidWeight("table needs ≥ 3 increasing radii".into()))?;
                Weight::Tabulated(spline)
            }
        };
        WeightedSpace::new(self.n, big_n, weight)
    }
}

impl FromStr for SpaceDef {
    type Err = ModelError;

    /// Accepts JSON, `flat:n` or `appendix:N:α:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| ModelError::Parse(e.to_string()));
        }
        let bad = || ModelError::Parse(format!("unrecognised space `{s}`"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["flat", n] => {
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                Ok(SpaceDef { n, big_n: None, weight: WeightDef::Flat })
            }
            ["appendix", nn, a, k] => {
                let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
                let sp = appendix_space(num(nn)?, num(a)?, num(k)?)?;
                Ok(SpaceDef {
                    n: sp.n,
                    big_n: Some(sp.big_n),
                    weight: WeightDef::Appendix { alpha: sp.alpha, mu: sp.mu },
                })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn appendix_example() {
        let sp = appendix_space(5.0, 2.0, 1.0).unwrap();
        assert_eq!(sp.n, 4);
        assert_eq!(sp.gamma, -1.0);
        assert_relative_eq!(sp.mu, 2f64.sqrt(), max_relative = 1e-15);
        let sp4 = appendix_space(5.0, 2.0, 4.0).unwrap();
        assert_relative_eq!(sp4.mu, 0.5f64.sqrt(), max_relative = 1e-15);
        let half = appendix_space(4.5, 2.0, 1.0).unwrap();
        assert_eq!((half.n, half.gamma), (4, -1.0));
        assert!(matches!(appendix_space(5.0, 7.0 / 3.0, 1.0), Err(ModelError::InvalidAlpha { .. })));
    }

    #[test]
    fn appendix_profile_closed_form() {
        let sp = appendix_space(5.0, 2.0, 1.0).unwrap();
        let m2 = sp.mu * sp.mu;
        for &r in &[0.0, 0.3, 1.0, 7.0] {
            let s: f64 = m2 + r * r;
            assert_relative_eq!(sp.profile(r).0, 16.0 * m2 / (s * s), max_relative = 1e-14);
            assert_relative_eq!(sp.diagnostic(r), 16.0 / s, max_relative = 1e-12);
        }
        assert!(appendix_residual(&sp, 100.0, 2001) <= 1e-12);
    }

    #[test]
    fn sharpness_ratio_eight() {
        let sp = appendix_space(5.0, 2.0, 1.0).unwrap();
        let sh = sharpness_quantity(&sp);
        assert_relative_eq!(sh.ratio, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn flat_laplacian_of_square() {
        let sp = WeightedSpace::<f64>::flat(3);
        for &r in &[0.0, 0.5, 2.0] {
            assert_relative_eq!(weighted_laplacian(&sp, r, 2.0 * r, 2.0), 6.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn curvature_first_branch() {
        let sp = appendix_space(5.0, 2.0, 1.0).unwrap();
        let rep = curvature_bound(&sp.space(), 10.0 * sp.mu);
        assert_relative_eq!(rep.minimum, -1.0, max_relative = 1e-10);
        assert_relative_eq!(rep.k_eff, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn curvature_second_branch() {
        let sp = appendix_space(5.1, 2.0, 1.0).unwrap();
        assert_eq!(sp.case_minimum().0, 2);
        let rep = curvature_bound(&sp.space(), 10.0 * sp.mu);
        assert_relative_eq!(rep.minimum, sp.case_minimum().1, max_relative = 1e-8);
        assert_relative_eq!(rep.k_eff, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn weight_rules() {
        assert!(WeightedSpace::new(4, 4.0, Weight::Appendix { gamma: -1.0, mu: 1.0 }).is_err());
        let bad: RadialFn<f64> = Arc::new(|r| (r, 1.0, 0.0));
        assert!(WeightedSpace::new(2, 3.0, Weight::Custom { label: "bad".into(), phi: bad }).is_err());
    }

    #[test]
    fn space_shorthands() {
        let d: SpaceDef = "flat:4".parse().unwrap();
        assert_eq!(d.build::<f64>().unwrap().n(), 4);
        let d: SpaceDef = "appendix:5:2:1".parse().unwrap();
        let s = d.build::<f64>().unwrap();
        assert_eq!(s.big_n(), 5.0);
        let json = r#"{"n":4,"N":5.0,"weight":{"kind":"appendix","alpha":2.0,"mu":1.4142135623730951}}"#;
        let d: SpaceDef = json.parse().unwrap();
        assert_relative_eq!(curvature_bound(&d.build::<f64>().unwrap(), 20.0).k_eff, 1.0, max_relative = 1e-10);
    }
}
