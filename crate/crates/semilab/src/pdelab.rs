//! Radial boundary value problems `Δ_w u + f(u) = 0` on `[0, 2R]` and the
//! diagnostics used to test the estimates on them.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{coefficients_f, coefficients_g, Certificate, CoefficientState, Transform};
use crate::modelspace::{curvature_bound, weighted_laplacian, AppendixSpace, WeightedSpace};
use crate::nonlinearity::{limit_v1, NonlinearityError, NonlinearitySpec};
use crate::numerics::{bisect_log, hermite, locate, logspace};
use crate::relations::harnack_constant;
use crate::scalar::Real;
use crate::theorem::Theorem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdeError {
    #[error("Newton iteration did not converge in {iterations} steps (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("no positive Newton step found at iteration {0}")]
    PositivityLost(usize),
    #[error("solution norm {norm} exceeded the blow-up cap")]
    BlowUp { norm: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("estimate kind {kind} does not apply to theorem {theorem}")]
    KindMismatch { kind: EstimateKind, theorem: Theorem },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("f(u) ≤ 0 at u = {u}")]
    RangeViolation { u: f64 },
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

type Result<T, E = PdeError> = std::result::Result<T, E>;

/// Uniform grid `rᵢ = i h` on `[0, 2R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid<T> {
    pub r: Vec<T>,
    pub h: T,
    pub big_r: T,
}

impl<T: Real> RadialGrid<T> {
    pub fn uniform(big_r: T, intervals: usize) -> Result<Self> {
        if !(big_r > T::zero()) || !big_r.is_finite() || intervals < 4 {
            return Err(PdeError::InvalidConfig("need R > 0 and at least 4 intervals".into()));
        }
        let h = T::two() * big_r / T::of_usize(intervals);
        let mut r: Vec<T> = (0..=intervals).map(|i| T::of_usize(i) * h).collect();
        r[intervals] = T::two() * big_r;
        Ok(Self { r, h, big_r })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Index of the last node with `r ≤ radius`.
    pub fn last_within(&self, radius: T) -> usize {
        let tol = self.h * T::of(1e-9);
        self.r.iter().rposition(|&x| x <= radius + tol).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub intervals: usize,
    /// Relative Newton step size at which iteration stops.
    pub tol: T,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// `‖u‖_∞` cap as a multiple of the boundary value.
    pub blowup_factor: T,
    /// Starting iterate; the constant boundary value when `None`.
    pub initial: Option<Vec<T>>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            intervals: 2048,
            tol: T::of(1e-12),
            max_iter: 80,
            max_halvings: 40,
            blowup_factor: T::of(1e8),
            initial: None,
        }
    }
}

/// Where a profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileSource {
    Solver,
    Exact,
}

/// A positive radial profile on a grid.
#[derive(Debug, Clone)]
pub struct SolutionProfile<T> {
    pub grid: RadialGrid<T>,
    pub u: Vec<T>,
    pub du: Vec<T>,
    pub d2u: Vec<T>,
    pub boundary_value: T,
    /// `max |Δ_w u + f(u)|` over interior nodes.
    pub residual: T,
    pub iterations: usize,
    pub source: ProfileSource,
    pub space: WeightedSpace<T>,
    pub nonlinearity: String,
}

impl<T: Real> SolutionProfile<T> {
    /// Samples the exact appendix solution.
    pub fn from_appendix(app: &AppendixSpace<T>, big_r: T, intervals: usize) -> Result<Self> {
        let grid = RadialGrid::uniform(big_r, intervals)?;
        let (mut u, mut du, mut d2u) = (Vec::new(), Vec::new(), Vec::new());
        for &r in &grid.r {
            let (a, b, c) = app.profile(r);
            u.push(a);
            du.push(b);
            d2u.push(c);
        }
        let space = app.space();
        let residual = (0..grid.len())
            .map(|i| (weighted_laplacian(&space, grid.r[i], du[i], d2u[i]) + u[i].powf(app.alpha)).abs())
            .fold(T::zero(), T::max);
        let bv = u[u.len() - 1];
        Ok(Self {
            grid,
            u,
            du,
            d2u,
            boundary_value: bv,
            residual,
            iterations: 0,
            source: ProfileSource::Exact,
            space,
            nonlinearity: format!("t^{}", app.alpha),
        })
    }

    /// The constant profile `u ≡ c`.
    pub fn constant(
        space: &WeightedSpace<T>,
        spec: &NonlinearitySpec<T>,
        big_r: T,
        c: T,
        intervals: usize,
    ) -> Result<Self> {
        let grid = RadialGrid::uniform(big_r, intervals)?;
        let m = grid.len();
        Ok(Self {
            grid,
            u: vec![c; m],
            du: vec![T::zero(); m],
            d2u: vec![T::zero(); m],
            boundary_value: c,
            residual: spec.value(c).abs(),
            iterations: 0,
            source: ProfileSource::Exact,
            space: space.clone(),
            nonlinearity: spec.describe(),
        })
    }

    pub fn min_u(&self) -> T {
        self.u.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_u(&self) -> T {
        self.u.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// `(u, u′)` at an arbitrary radius by cubic Hermite interpolation.
    pub fn interpolate(&self, r: T) -> (T, T) {
        let i = locate(&self.grid.r, r);
        let (x0, x1) = (self.grid.r[i], self.grid.r[i + 1]);
        hermite(x0, x1, self.u[i], self.u[i + 1], self.du[i], self.du[i + 1], r)
    }

    /// `(u′, u″)` at an arbitrary radius.
    pub fn interpolate_derivative(&self, r: T) -> (T, T) {
        let i = locate(&self.grid.r, r);
        let (x0, x1) = (self.grid.r[i], self.grid.r[i + 1]);
        hermite(x0, x1, self.du[i], self.du[i + 1], self.d2u[i], self.d2u[i + 1], r)
    }
}

/// Coefficient of `u′` in the radial operator at node `r`.
fn drift_coefficient<T: Real>(space: &WeightedSpace<T>, r: T) -> T {
    T::of_usize(space.n() - 1) / r - space.drift(r)
}

fn residual_vector<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    grid: &RadialGrid<T>,
    u: &[T],
    bv: T,
) -> Vec<T> {
    let m = u.len();
    let h2 = grid.h * grid.h;
    let nn = T::of_usize(space.n());
    let at = |j: usize| if j < m { u[j] } else { bv };
    (0..m)
        .map(|i| {
            let f = spec.value(u[i]);
            if i == 0 {
                nn * T::two() * (at(1) - u[0]) / h2 + f
            } else {
                let c = drift_coefficient(space, grid.r[i]);
                (at(i + 1) - T::two() * u[i] + u[i - 1]) / h2 + c * (at(i + 1) - u[i - 1]) / (T::two() * grid.h) + f
            }
        })
        .collect()
}

fn sup_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Damped Newton iteration on the centred finite difference system with a
/// ghost node enforcing `u′(0) = 0`.
pub fn solve_radial_bvp<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    big_r: T,
    boundary_value: T,
    config: &SolverConfig<T>,
) -> Result<SolutionProfile<T>> {
    if !(boundary_value > T::zero()) || !boundary_value.is_finite() {
        return Err(PdeError::InvalidConfig("boundary value must be positive".into()));
    }
    let grid = RadialGrid::uniform(big_r, config.intervals)?;
    let m = config.intervals;
    let h = grid.h;
    let h2 = h * h;
    let nn = T::of_usize(space.n());
    let cap = config.blowup_factor * boundary_value;
    let mut u: Vec<T> = match &config.initial {
        Some(v) if v.len() == m + 1 => v[..m].to_vec(),
        Some(v) if v.len() == m => v.clone(),
        Some(_) => return Err(PdeError::InvalidConfig("initial guess has the wrong length".into())),
        None => vec![boundary_value; m],
    };
    if u.iter().any(|&x| !(x > T::zero())) {
        return Err(PdeError::InvalidConfig("initial guess must be positive".into()));
    }
    let drift: Vec<T> = (0..m).map(|i| if i == 0 { T::zero() } else { drift_coefficient(space, grid.r[i]) }).collect();
    let mut res = residual_vector(space, spec, &grid, &u, boundary_value);
    let mut norm = sup_norm(&res);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let mut sub = vec![T::zero(); m];
        let mut diag = vec![T::zero(); m];
        let mut sup = vec![T::zero(); m];
        for i in 0..m {
            let (_, df, _) = spec.evaluate(u[i])?;
            if i == 0 {
                diag[0] = -nn * T::two() / h2 + df;
                sup[0] = nn * T::two() / h2;
            } else {
                let c = drift[i] / (T::two() * h);
                sub[i] = T::one() / h2 - c;
                diag[i] = -T::two() / h2 + df;
                sup[i] = T::one() / h2 + c;
            }
        }
        let rhs: Vec<T> = res.iter().map(|&x| -x).collect();
        let delta = crate::numerics::solve_tridiagonal(&sub, &diag, &sup, &rhs)
            .ok_or_else(|| PdeError::NoConvergence { iterations, residual: norm.as_f64() })?;
        let full = sup_norm(&delta);
        if full <= config.tol * sup_norm(&u) {
            let cand: Vec<T> = u.iter().zip(&delta).map(|(&a, &d)| a + d).collect();
            if cand.iter().all(|&x| x > T::zero()) {
                res = residual_vector(space, spec, &grid, &cand, boundary_value);
                norm = sup_norm(&res);
                u = cand;
                converged = true;
                break;
            }
        }
        let mut lambda = T::one();
        let mut accepted = None;
        let mut any_positive = false;
        for _ in 0..=config.max_halvings {
            let cand: Vec<T> = u.iter().zip(&delta).map(|(&a, &d)| a + lambda * d).collect();
            if cand.iter().all(|&x| x > T::zero()) {
                any_positive = true;
                let top = sup_norm(&cand);
                if !(top <= cap) {
                    return Err(PdeError::BlowUp { norm: top.as_f64() });
                }
                let r = residual_vector(space, spec, &grid, &cand, boundary_value);
                let rn = sup_norm(&r);
                if rn.is_finite() && (rn <= (T::one() - T::of(1e-4) * lambda) * norm || rn <= T::of(1e-300)) {
                    accepted = Some((cand, r, rn, lambda));
                    break;
                }
            }
            lambda = lambda * T::half();
        }
        let Some((cand, r, rn, lam)) = accepted else {
            if !any_positive {
                return Err(PdeError::PositivityLost(iterations));
            }
            // Residual at round-off level: no further decrease is possible.
            let step = sup_norm(&delta);
            if step <= T::of(1e3) * config.tol * sup_norm(&u) {
                converged = true;
                break;
            }
            return Err(PdeError::NoConvergence { iterations, residual: norm.as_f64() });
        };
        let step = sup_norm(&delta) * lam;
        u = cand;
        res = r;
        norm = rn;
        if lam == T::one() && step <= config.tol * sup_norm(&u) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PdeError::NoConvergence { iterations, residual: norm.as_f64() });
    }
    u.push(boundary_value);
    let du = flux_derivative(space, spec, &grid, &u);
    let mut d2u = vec![T::zero(); m + 1];
    for i in 0..=m {
        let f = spec.value(u[i]);
        d2u[i] = if i == 0 { -f / nn } else { -f - drift_coefficient(space, grid.r[i]) * du[i] };
    }
    Ok(SolutionProfile {
        grid,
        u,
        du,
        d2u,
        boundary_value,
        residual: norm,
        iterations,
        source: ProfileSource::Solver,
        space: space.clone(),
        nonlinearity: spec.describe(),
    })
}

/// `u′` from the divergence form `(r^{n−1} e^{−φ} u′)′ = −r^{n−1} e^{−φ} f(u)`,
/// integrating `r^{n−1}` exactly against the piecewise linear interpolant of
/// `e^{−φ} f(u)`. Second order, without the `ε u / h` noise of differencing
/// nodal values.
pub fn flux_derivative<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    grid: &RadialGrid<T>,
    u: &[T],
) -> Vec<T> {
    let n = space.n();
    let phi0 = space.weight().eval(T::zero()).0;
    let w: Vec<T> = grid.r.iter().map(|&r| (phi0 - space.weight().eval(r).0).exp()).collect();
    let g: Vec<T> = u.iter().zip(&w).map(|(&x, &wi)| wi * spec.value(x)).collect();
    let mut binom = vec![T::one(); n];
    for k in 1..n {
        binom[k] = binom[k - 1] * T::of_usize(n - k) / T::of_usize(k);
    }
    let mut du = vec![T::zero(); u.len()];
    let mut acc = T::zero();
    for i in 1..u.len() {
        let a = grid.r[i - 1];
        let h = grid.r[i] - a;
        let (mut m0, mut m1) = (T::zero(), T::zero());
        for (k, &c) in binom.iter().enumerate() {
            let ak = a.powi((n - 1 - k) as i32);
            m0 = m0 + c * ak * h.powi(k as i32 + 1) / T::of_usize(k + 1);
            m1 = m1 + c * ak * h.powi(k as i32 + 2) / T::of_usize(k + 2);
        }
        acc = acc + g[i - 1] * m0 + (g[i] - g[i - 1]) / h * m1;
        du[i] = -acc / (grid.r[i].powi(n as i32 - 1) * w[i]);
    }
    du
}

/// Solves for every boundary value in parallel, preserving order.
pub fn solve_sweep<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    big_r: T,
    boundary_values: &[T],
    config: &SolverConfig<T>,
) -> Vec<Result<SolutionProfile<T>>> {
    boundary_values.par_iter().map(|&b| solve_radial_bvp(space, spec, big_r, b, config)).collect()
}

/// Largest boundary value (up to relative `1e-3`) for which the solver
/// converges from the constant initial guess, searching `[lo, hi]`.
pub fn convergent_limit<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    big_r: T,
    lo: T,
    hi: T,
    config: &SolverConfig<T>,
) -> Option<T> {
    let ok = |b: T| solve_radial_bvp(space, spec, big_r, b, config).is_ok();
    if !ok(lo) {
        return None;
    }
    if ok(hi) {
        return Some(hi);
    }
    let (mut a, mut b) = (lo, hi);
    while b / a > T::one() + T::of(1e-3) {
        let mid = (a * b).sqrt();
        if ok(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some(a)
}

/// `n_values` boundary values log-spaced over `[1e-3, 0.9]·b*`, with `b*`
/// the convergent limit.
pub fn boundary_sweep<T: Real>(
    space: &WeightedSpace<T>,
    spec: &NonlinearitySpec<T>,
    big_r: T,
    n_values: usize,
    config: &SolverConfig<T>,
) -> Result<Vec<T>> {
    let coarse = SolverConfig { intervals: config.intervals.min(512), ..config.clone() };
    let top = convergent_limit(space, spec, big_r, T::of(1e-6), T::of(1e6), &coarse)
        .ok_or(PdeError::NoConvergence { iterations: 0, residual: f64::NAN })?;
    Ok(logspace(top * T::of(1e-3), top * T::of(0.9), n_values.max(2)))
}

/// Transformation parameters of the diagnostic fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticParams<T> {
    pub beta: T,
    pub gamma: T,
    pub d: T,
    pub eps: T,
    pub transform: Transform,
}

impl<T: Real> DiagnosticParams<T> {
    pub fn from_certificate(cert: &Certificate<T>, eps: T) -> Self {
        Self { beta: cert.beta, gamma: cert.gamma, d: cert.d, eps, transform: cert.transform }
    }
}

/// Pointwise fields on the profile's grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticField<T> {
    pub r: Vec<T>,
    pub w: Vec<T>,
    pub f_aux: Vec<T>,
    pub g_aux: Vec<T>,
    /// `|∇u|²/u² + d f(u)/u`.
    pub q: Vec<T>,
    pub grad_log_sq: Vec<T>,
    pub f_over_u: Vec<T>,
}

pub fn diagnostics<T: Real>(
    profile: &SolutionProfile<T>,
    spec: &NonlinearitySpec<T>,
    p: &DiagnosticParams<T>,
) -> DiagnosticField<T> {
    let m = profile.grid.len();
    let mut out = DiagnosticField {
        r: profile.grid.r.clone(),
        w: Vec::with_capacity(m),
        f_aux: Vec::with_capacity(m),
        g_aux: Vec::with_capacity(m),
        q: Vec::with_capacity(m),
        grad_log_sq: Vec::with_capacity(m),
        f_over_u: Vec::with_capacity(m),
    };
    let b2 = p.beta * p.beta;
    for i in 0..m {
        let (u, du) = (profile.u[i], profile.du[i]);
        let ue = u + p.eps;
        let y = spec.value(u) / u;
        let g = (du / u).powi(2);
        let w = match p.transform {
            Transform::F => u.powf(-p.beta),
            Transform::G => ue.powf(-p.beta),
        };
        out.w.push(w);
        out.f_aux.push(ue.powf(-p.beta * p.gamma) * (b2 * g + p.d * y));
        out.g_aux.push(ue.powf(-p.beta * p.gamma) * (b2 * (du / ue).powi(2) + p.d * y));
        out.q.push(g + p.d * y);
        out.grad_log_sq.push(g);
        out.f_over_u.push(y);
    }
    out
}

/// The estimate being tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    GradientStrong,
    GradientWeak,
    #[serde(rename = "eps-I")]
    EpsI,
    #[serde(rename = "eps-II")]
    EpsII,
    UniversalBound,
    Harnack,
    Lichnerowicz,
}

impl std::fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimateKind::GradientStrong => "gradient-strong",
            EstimateKind::GradientWeak => "gradient-weak",
            EstimateKind::EpsI => "eps-I",
            EstimateKind::EpsII => "eps-II",
            EstimateKind::UniversalBound => "universal-bound",
            EstimateKind::Harnack => "harnack",
            EstimateKind::Lichnerowicz => "lichnerowicz",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for EstimateKind {
    type Err = PdeError;

    /// Case-insensitive match on the display name.
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PdeError::InvalidConfig(format!("unknown estimate kind `{s}`")))
    }
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 7] = [
        EstimateKind::GradientStrong,
        EstimateKind::GradientWeak,
        EstimateKind::EpsI,
        EstimateKind::EpsII,
        EstimateKind::UniversalBound,
        EstimateKind::Harnack,
        EstimateKind::Lichnerowicz,
    ];

    /// Kinds a certificate of `theorem` (in dimension `n`) bounds.
    pub fn admissible(theorem: Theorem, n: f64) -> &'static [EstimateKind] {
        use EstimateKind::*;
        match theorem {
            Theorem::UniversalGradient | Theorem::Superlinear | Theorem::LaneEmden => {
                &[GradientStrong, GradientWeak, UniversalBound, Harnack]
            }
            Theorem::WeakGradient => &[GradientWeak, Harnack],
            Theorem::Regularized if n >= 4.0 => &[EpsI],
            Theorem::Regularized => &[EpsII],
            Theorem::HarnackUniversal => &[UniversalBound],
            Theorem::Lichnerowicz => &[Lichnerowicz, Harnack],
        }
    }

    /// The natural kind for a theorem.
    pub fn primary(theorem: Theorem, n: f64) -> EstimateKind {
        Self::admissible(theorem, n)[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateConstants<T> {
    pub c: T,
    pub c_u: Option<T>,
    pub c_l: Option<T>,
    pub c_h: Option<T>,
}

/// One `ε` of a regularised check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsSample<T> {
    pub eps: T,
    pub measured: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport<T> {
    pub kind: EstimateKind,
    pub theorem: Theorem,
    pub measured: T,
    pub bound: T,
    pub ratio: T,
    pub pass: bool,
    pub k: T,
    pub big_r: T,
    pub eps: Option<T>,
    pub constants: EstimateConstants<T>,
    pub sweep: Vec<EpsSample<T>>,
}

/// Effective curvature bound of a space on `[0, 2R]`.
pub fn effective_k<T: Real>(space: &WeightedSpace<T>, big_r: T) -> T {
    curvature_bound(space, T::two() * big_r).k_eff
}

/// Unique `ε > 0` with `f(Lε)/(Lε) = K + 1/R²`.
pub fn choose_epsilon<T: Real>(spec: &NonlinearitySpec<T>, big_l: T, k: T, big_r: T) -> Result<T> {
    if !(big_l > T::zero()) || !(big_r > T::zero()) {
        return Err(PdeError::InvalidConfig("need L > 0 and R > 0".into()));
    }
    let target = k + T::one() / (big_r * big_r);
    let ratio = |e: T| spec.value(big_l * e) / (big_l * e);
    if !limit_v1(spec) {
        let at_one = ratio(T::one());
        if (at_one - target).abs() <= T::of(1e-12) * target {
            return Ok(T::one());
        }
        return Err(PdeError::NoRoot("f(t)/t does not vanish at 0".into()));
    }
    let g = |e: T| ratio(e) - target;
    let mut lo = T::of(1e-12);
    while g(lo) >= T::zero() && lo > T::of(1e-250) {
        lo = lo * T::of(1e-6);
    }
    let mut hi = T::one();
    let mut tries = 0;
    while !(g(hi) > T::zero()) {
        hi = hi * T::of(1e3);
        tries += 1;
        if tries > 90 || !hi.is_finite() {
            return Err(PdeError::NoRoot("f(t)/t stays below K + 1/R²".into()));
        }
    }
    bisect_log(g, lo, hi, T::of(1e-12)).ok_or_else(|| PdeError::NoRoot("no sign change".into()))
}

/// `sup_{r ≤ R}` of a nodal quantity.
fn sup_within<T: Real>(profile: &SolutionProfile<T>, big_r: T, q: impl Fn(usize) -> T) -> T {
    let last = profile.grid.last_within(big_r);
    (0..=last).map(q).fold(T::neg_infinity(), T::max)
}

/// `sup_{B(R)} u / inf_{B(R)} u`.
pub fn harnack_ratio<T: Real>(profile: &SolutionProfile<T>, big_r: T) -> T {
    let last = profile.grid.last_within(big_r);
    let sl = &profile.u[..=last];
    let sup = sl.iter().copied().fold(T::neg_infinity(), T::max);
    let inf = sl.iter().copied().fold(T::infinity(), T::min);
    sup / inf
}

/// Measures the estimate `kind` on `B(R)` and compares it with the bound
/// assembled from the certificate's constant.
pub fn check_estimate<T: Real>(
    profile: &SolutionProfile<T>,
    spec: &NonlinearitySpec<T>,
    cert: &Certificate<T>,
    k: T,
    big_r: T,
    kind: EstimateKind,
) -> Result<EstimateReport<T>> {
    if !EstimateKind::admissible(cert.theorem, cert.n.as_f64()).contains(&kind) {
        return Err(PdeError::KindMismatch { kind, theorem: cert.theorem });
    }
    if !(big_r > T::zero()) || big_r > profile.grid.r[profile.grid.len() - 1] {
        return Err(PdeError::InvalidConfig("R must lie inside the profile's grid".into()));
    }
    let c = cert.c;
    let base = k + T::one() / (big_r * big_r);
    let y = |i: usize| spec.value(profile.u[i]) / profile.u[i];
    let g = |i: usize| (profile.du[i] / profile.u[i]).powi(2);
    let mut constants = EstimateConstants { c, c_u: None, c_l: None, c_h: None };
    let mut sweep = Vec::new();
    let mut eps_used = None;
    let (measured, bound) = match kind {
        EstimateKind::GradientStrong => (sup_within(profile, big_r, |i| g(i) + y(i)), c * base),
        EstimateKind::GradientWeak => {
            constants.c_l = Some(c);
            (sup_within(profile, big_r, g), c * base)
        }
        EstimateKind::UniversalBound => {
            constants.c_u = Some(c);
            (sup_within(profile, big_r, y), c * base)
        }
        EstimateKind::Harnack => {
            let c_l = if cert.theorem == Theorem::Lichnerowicz {
                let l = cert.floors.second;
                c * (T::one() + k.sqrt() * big_r + (T::two() * k - l).pos() * big_r * big_r)
                    / (k * big_r * big_r + T::one())
            } else {
                c
            };
            let c_h = harnack_constant(c_l, k, big_r);
            constants.c_l = Some(c_l);
            constants.c_h = Some(c_h);
            (harnack_ratio(profile, big_r), c_h)
        }
        EstimateKind::Lichnerowicz => {
            let l = cert.floors.second;
            let b = c * (T::one() / (big_r * big_r) + k.sqrt() / big_r + (T::two() * k - l).pos());
            constants.c_l = Some(c);
            (sup_within(profile, big_r, g), b)
        }
        EstimateKind::EpsI | EstimateKind::EpsII => {
            let beta = cert.beta;
            let u0 = profile.u[0];
            let mut eps_list = logspace(T::of(1e-6) * u0, u0, 13);
            if let Ok(e) = choose_epsilon(spec, cert.big_l, k, big_r) {
                eps_list.push(e);
            }
            let mut worst: Option<EpsSample<T>> = None;
            for eps in eps_list {
                let lhs = sup_within(profile, big_r, |i| {
                    let u = profile.u[i];
                    let ue = u + eps;
                    let denom = if kind == EstimateKind::EpsI { u } else { ue };
                    ue.powf(-beta) * ((profile.du[i] / denom).powi(2) + y(i))
                });
                let rhs = c * eps.powf(-beta) * (base + spec.value(cert.big_l * eps) / eps);
                let s = EpsSample { eps, measured: lhs, bound: rhs };
                if worst.is_none_or(|w| lhs / rhs > w.measured / w.bound) {
                    worst = Some(s);
                }
                sweep.push(s);
            }
            let w = worst.expect("non-empty ε sweep");
            eps_used = Some(w.eps);
            (w.measured, w.bound)
        }
    };
    Ok(EstimateReport {
        kind,
        theorem: cert.theorem,
        measured,
        bound,
        ratio: measured / bound,
        pass: measured <= bound,
        k,
        big_r,
        eps: eps_used,
        constants,
        sweep,
    })
}

/// Worst pointwise value of `ΔF − RHS` of the first or second kind
/// differential inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectReport<T> {
    pub transform: Transform,
    pub h: T,
    pub min_defect: T,
    pub r_at_min: T,
    pub index: usize,
    /// `max F²` (resp. `G²`) over the checked nodes.
    pub scale: T,
    pub nodes: usize,
}

impl<T: Real> DefectReport<T> {
    /// `max(0, −min_defect)`.
    pub fn violation(&self) -> T {
        (-self.min_defect).pos()
    }
}

/// Evaluates `ΔF − RHS` at every node with `r ≤ 3R/2`, with `ΔF` by centred
/// differences of the nodal field.
pub fn verify_elliptic_inequality<T: Real>(
    profile: &SolutionProfile<T>,
    spec: &NonlinearitySpec<T>,
    p: &DiagnosticParams<T>,
    which: Transform,
    k: T,
) -> Result<DefectReport<T>> {
    for &u in &profile.u {
        if !(spec.value(u) > T::zero()) {
            return Err(PdeError::RangeViolation { u: u.as_f64() });
        }
    }
    let field = diagnostics(profile, spec, p);
    let vals = match which {
        Transform::F => &field.f_aux,
        Transform::G => &field.g_aux,
    };
    let grid = &profile.grid;
    let h = grid.h;
    let three_halves = T::of(1.5) * grid.big_r;
    let last = grid.last_within(three_halves).min(grid.len() - 2);
    let one = T::one();
    let two = T::two();
    let n = profile.space.big_n();
    let mut worst = (T::infinity(), 0usize);
    let mut scale = T::zero();
    for i in 0..=last {
        let (r, u, du) = (grid.r[i], profile.u[i], profile.du[i]);
        let (fm, f0, fp) = if i == 0 { (vals[1], vals[0], vals[1]) } else { (vals[i - 1], vals[i], vals[i + 1]) };
        let d1 = (fp - fm) / (two * h);
        let d2 = (fp - two * f0 + fm) / (h * h);
        let lap = weighted_laplacian(&profile.space, r, d1, d2);
        let (fu, dfu, d2fu) = spec.evaluate(u)?;
        let y = fu / u;
        let st = CoefficientState {
            n,
            beta: p.beta,
            gamma: p.gamma,
            d: p.d,
            eps: p.eps,
            u,
            ratio1: u * dfu / fu,
            ratio2: u * u * d2fu / fu,
        };
        let ue = u + p.eps;
        let rhs = match which {
            Transform::F => {
                let (cu, cv, cw) = coefficients_f(&st);
                let x = p.beta * p.beta * (du / u).powi(2);
                let weight = ue.powf(-p.beta * p.gamma);
                let s = u / ue;
                let grad_ln_w = -p.beta * du / u;
                -two * k * weight * x
                    + two * (one / p.beta - one + p.gamma * s) * d1 * grad_ln_w
                    + weight * (cu * x * x + cv * x * y + cw * y * y)
            }
            Transform::G => {
                let (cx, cy, cz) = coefficients_g(&st);
                let x = p.beta * p.beta * (du / ue).powi(2);
                let weight = ue.powf(-p.beta * p.gamma);
                let grad_ln_w = -p.beta * du / ue;
                -two * k * weight * x
                    + two * (one / p.beta - one + p.gamma) * d1 * grad_ln_w
                    + weight * (cx * x * x + cy * x * y + cz * y * y)
            }
        };
        let defect = lap - rhs;
        scale = scale.max(f0 * f0);
        if defect < worst.0 {
            worst = (defect, i);
        }
    }
    Ok(DefectReport {
        transform: which,
        h,
        min_defect: worst.0,
        r_at_min: grid.r[worst.1],
        index: worst.1,
        scale,
        nodes: last + 1,
    })
}

/// Defects at successive refinements with a fitted `c` in `−c h²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectStudy<T> {
    pub reports: Vec<DefectReport<T>>,
    /// `max (violation / h²)` over all but the finest level.
    pub c_fit: T,
    /// Successive violation ratios where both are above round-off.
    pub ratios: Vec<T>,
    pub pass: bool,
}

/// Passes when the finest level satisfies `min defect ≥ −2 c h²` (plus a
/// round-off allowance) with `c` fitted on the coarser levels.
pub fn defect_study<T: Real>(reports: Vec<DefectReport<T>>) -> DefectStudy<T> {
    let floor = |r: &DefectReport<T>| T::of(1e-9) * r.scale.max(T::one());
    let n = reports.len();
    let c_fit =
        reports[..n.saturating_sub(1).max(1)].iter().map(|r| r.violation() / (r.h * r.h)).fold(T::zero(), T::max);
    let ratios = reports
        .windows(2)
        .filter(|w| w[0].violation() > floor(&w[0]) && w[1].violation() > floor(&w[1]))
        .map(|w| w[0].violation() / w[1].violation())
        .collect();
    let last = &reports[n - 1];
    let pass = last.violation() <= T::two() * c_fit * last.h * last.h + floor(last);
    DefectStudy { reports, c_fit, ratios, pass }
}

/// Outcome of [`scaling_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport<T> {
    pub s: T,
    /// `max |Q(u_s)(r) − s² Q(u)(sr)| / max |s² Q(u)(sr)|`.
    pub deviation: T,
    /// `max |Δu_s + u_s^α| / max u_s^α`.
    pub residual: T,
    pub points: usize,
}

/// Checks `Q(u_s)(r) = s² Q(u)(sr)` for `u_s(x) = s^{2/(α−1)} u(sx)`, with
/// `Q = |∇u|²/u² + u^{α−1}`, on a flat-space Lane–Emden profile.
pub fn scaling_check<T: Real>(profile: &SolutionProfile<T>, alpha: T, s: T) -> Result<ScalingReport<T>> {
    if !profile.space.weight().is_flat() {
        return Err(PdeError::InvalidConfig("scaling check needs a flat space".into()));
    }
    if !(s > T::zero()) || !(alpha > T::one()) {
        return Err(PdeError::InvalidConfig("need s > 0 and α > 1".into()));
    }
    let k = T::two() / (alpha - T::one());
    let am1 = alpha - T::one();
    let q_nodes: Vec<T> = profile.u.iter().zip(&profile.du).map(|(&u, &du)| (du / u).powi(2) + u.powf(am1)).collect();
    let dq_nodes: Vec<T> = (0..profile.grid.len())
        .map(|i| {
            let (u, du, d2u) = (profile.u[i], profile.du[i], profile.d2u[i]);
            let g = du / u;
            T::two() * g * (d2u / u - g * g) + am1 * u.powf(am1 - T::one()) * du
        })
        .collect();
    let q_at = |x: T| {
        let i = locate(&profile.grid.r, x);
        let (x0, x1) = (profile.grid.r[i], profile.grid.r[i + 1]);
        hermite(x0, x1, q_nodes[i], q_nodes[i + 1], dq_nodes[i], dq_nodes[i + 1], x).0
    };
    let r_end = profile.grid.r[profile.grid.len() - 1];
    let nn = T::of_usize(profile.space.n());
    let (mut dev, mut scale, mut res, mut res_scale) = (T::zero(), T::zero(), T::zero(), T::zero());
    let mut points = 0;
    for &r in &profile.grid.r {
        let x = s * r;
        if x > r_end {
            break;
        }
        points += 1;
        let (u, du) = profile.interpolate(x);
        let (_, d2u) = profile.interpolate_derivative(x);
        let us = s.powf(k) * u;
        let dus = s.powf(k + T::one()) * du;
        let d2us = s.powf(k + T::two()) * d2u;
        let q_s = (dus / us).powi(2) + us.powf(am1);
        let target = s * s * q_at(x);
        dev = dev.max((q_s - target).abs());
        scale = scale.max(target.abs());
        let lap = if r > T::zero() { d2us + (nn - T::one()) / r * dus } else { nn * d2us };
        res = res.max((lap + us.powf(alpha)).abs());
        res_scale = res_scale.max(us.powf(alpha));
    }
    Ok(ScalingReport { s, deviation: dev / scale, residual: res / res_scale, points })
}

/// `max |u − u_exact| / max |u_exact|` against the appendix solution.
pub fn appendix_error<T: Real>(profile: &SolutionProfile<T>, app: &AppendixSpace<T>) -> T {
    let mut err = T::zero();
    let mut top = T::zero();
    for (i, &r) in profile.grid.r.iter().enumerate() {
        let exact = app.profile(r).0;
        err = err.max((profile.u[i] - exact).abs());
        top = top.max(exact.abs());
    }
    err / top
}

/// CSV table `r,u,du,Q,F,G`.
pub fn profile_csv<T: Real>(
    profile: &SolutionProfile<T>,
    spec: &NonlinearitySpec<T>,
    p: &DiagnosticParams<T>,
) -> String {
    let d = diagnostics(profile, spec, p);
    let mut out = String::from("r,u,du,Q,F,G\n");
    for i in 0..profile.grid.len() {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            profile.grid.r[i].as_f64(),
            profile.u[i].as_f64(),
            profile.du[i].as_f64(),
            d.q[i].as_f64(),
            d.f_aux[i].as_f64(),
            d.g_aux[i].as_f64()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelspace::appendix_space;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_constant() {
        let sp = WeightedSpace::<f64>::flat(3);
        let spec = NonlinearitySpec::custom(
            "zero",
            std::sync::Arc::new(|_| 0.0),
            std::sync::Arc::new(|_| 0.0),
            std::sync::Arc::new(|_| 0.0),
            false,
        );
        let p = solve_radial_bvp(&sp, &spec, 1.0, 1.0, &SolverConfig { intervals: 64, ..Default::default() }).unwrap();
        assert!(p.u.iter().all(|&u| (u - 1.0).abs() < 1e-14));
    }

    #[test]
    fn allen_cahn_equilibrium() {
        let sp = WeightedSpace::<f64>::flat(2);
        let spec = NonlinearitySpec::lichnerowicz(1.0, 1.0, 3.0, 0.0, 0.5).unwrap();
        let p = solve_radial_bvp(&sp, &spec, 1.0, 1.0, &SolverConfig { intervals: 64, ..Default::default() }).unwrap();
        assert!(p.u.iter().all(|&u| (u - 1.0).abs() < 1e-14));
    }

    #[test]
    fn appendix_second_order() {
        let app = appendix_space(5.0, 2.0, 1.0).unwrap();
        let big_r = 0.5;
        let bv = app.profile(2.0 * big_r).0;
        let errs: Vec<f64> = [1024, 2048]
            .iter()
            .map(|&m| {
                let cfg = SolverConfig { intervals: m, ..Default::default() };
                appendix_error(
                    &solve_radial_bvp(&app.space(), &NonlinearitySpec::power(2.0), big_r, bv, &cfg).unwrap(),
                    &app,
                )
            })
            .collect();
        assert!(errs[1] <= 1e-6, "{errs:?}");
        assert!((errs[0] / errs[1] - 4.0).abs() <= 0.2, "{errs:?}");
    }

    #[test]
    fn epsilon_closed_forms() {
        assert_relative_eq!(
            choose_epsilon(&NonlinearitySpec::power(2.0), 1.0, 0.0, 1.0).unwrap(),
            1.0,
            max_relative = 1e-11
        );
        let e = choose_epsilon(&NonlinearitySpec::power(3.0), 2.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(e, 2f64.sqrt() / 2.0, max_relative = 1e-11);
        assert!(choose_epsilon(&NonlinearitySpec::power(1.0), 1.0, 1.0, 1.0).is_err());
        assert_eq!(choose_epsilon(&NonlinearitySpec::power(1.0), 1.0, 0.0, 1.0).unwrap(), 1.0);
    }
}
