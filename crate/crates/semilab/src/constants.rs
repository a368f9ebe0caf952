//! Coefficients of the Bernstein-type inequalities and certified parameter
//! choices `(β, d, L, C)` for each supported estimate.
//!
//! A [`Certificate`] records the recipe that produced it, the floor values of
//! the three coefficients of the quadratic form and, once [`certify`] has run,
//! the worst margin observed on a log grid of `(u, ε)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::nonlinearity::{
    compute_indices, critical_exponents, inverse_bounded, rho, threshold_exponent, Family, IndexMethod, IndexReport,
    InverseModulus, NonlinearityError, NonlinearitySpec, SamplingGrid, ZERO_THRESHOLD,
};
use crate::numerics::{bisect, golden_min, logspace};
use crate::scalar::Real;
use crate::theorem::Theorem;

/// Default fraction of an analytic lower bound used as a certified floor.
pub const DEFAULT_THETA: f64 = 0.5;

/// Default envelope constant standing in for the cut-off function constants.
pub const DEFAULT_ENVELOPE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstantsError {
    #[error("invalid coefficient state: {0}")]
    InvalidState(String),
    #[error("negative radicand in H: {0}")]
    NegativeRadicand(f64),
    #[error("infeasible: {reason} (coefficient {coefficient}, u = {u}, ε = {eps}, margin = {margin})")]
    Infeasible { reason: String, coefficient: String, u: f64, eps: f64, margin: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("δ = {0} outside the admissible interval")]
    InvalidDelta(f64),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

impl ConstantsError {
    fn infeasible(reason: impl Into<String>) -> Self {
        ConstantsError::Infeasible {
            reason: reason.into(),
            coefficient: String::new(),
            u: f64::NAN,
            eps: f64::NAN,
            margin: f64::NAN,
        }
    }
}

type Result<T, E = ConstantsError> = std::result::Result<T, E>;

/// Pointwise data entering the coefficient formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientState<T> {
    pub n: T,
    pub beta: T,
    pub gamma: T,
    pub d: T,
    pub eps: T,
    pub u: T,
    /// `u f'(u) / f(u)`.
    pub ratio1: T,
    /// `u² f''(u) / f(u)`.
    pub ratio2: T,
}

impl<T: Real> CoefficientState<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(n: T, beta: T, gamma: T, d: T, eps: T, u: T, ratio1: T, ratio2: T) -> Result<Self> {
        let s = Self { n, beta, gamma, d, eps, u, ratio1, ratio2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta == T::zero() || !self.beta.is_finite() {
            return Err(ConstantsError::InvalidState("β must be finite and non-zero".into()));
        }
        if !(self.u > T::zero()) || !(self.u + self.eps > T::zero()) {
            return Err(ConstantsError::InvalidState("need u > 0 and u + ε > 0".into()));
        }
        if !(self.n > T::zero()) {
            return Err(ConstantsError::InvalidState("N must be positive".into()));
        }
        Ok(())
    }

    /// `u / (u + ε)`.
    fn s(&self) -> T {
        self.u / (self.u + self.eps)
    }
}

/// `(U, V, W)` of the first kind auxiliary function.
pub fn coefficients_f<T: Real>(st: &CoefficientState<T>) -> (T, T, T) {
    let one = T::one();
    let two = T::two();
    let CoefficientState { n, beta: b, gamma: g, d, ratio1: r1, ratio2: r2, .. } = *st;
    let s = st.s();
    let ib = one / b;
    let u = two / n * (one + ib).powi(2) + (g * ib - g * g) * s * s + two * (one - ib) * g * s - two;
    let v = T::of(4.0) / n * (one + b)
        + two * (one - r1)
        + d * (r2 / (b * b) - two * ib * (r1 - one))
        + g * s * (b + d * ((ib - g) * s + two - two * ib));
    let w = two * b * b / n + d * (b * g * s + one - r1);
    (u, v, w)
}

/// `(X, Y, Z)` of the second kind auxiliary function.
pub fn coefficients_g<T: Real>(st: &CoefficientState<T>) -> (T, T, T) {
    let one = T::one();
    let two = T::two();
    let CoefficientState { n, beta: b, gamma: g, d, ratio1: r1, ratio2: r2, .. } = *st;
    let s = st.s();
    let inv_s = one / s;
    let ib = one / b;
    let x = two / n * (one + ib).powi(2) + two * g - g * g - g * ib - two;
    let y = (T::of(4.0) / n * (one + b) + two + g * b) * s - two * r1
        + two * d * (g - one + ib) * (ib * inv_s * (r1 - one) - g)
        + d * (ib * ib * inv_s * inv_s * (r2 + two - two * r1) + g * (g + ib) - two * g * ib * inv_s * (r1 - one));
    let z = two * b * b / n * s * s + d * (b * g * s + one - r1);
    (x, y, z)
}

/// `2/N (1 + 1/β)² − 2`, the `γ = 0` value of `U` and `X`.
pub fn u_corner<T: Real>(n: T, beta: T) -> T {
    T::two() / n * (T::one() + T::one() / beta).powi(2) - T::two()
}

/// `(2/N (1 + 1/β) − 1)(1 + 1/β)`, the `γ = 1`, `ε = 0` value of `U` and `X`.
pub fn u_unit_gamma<T: Real>(n: T, beta: T) -> T {
    let k = T::one() + T::one() / beta;
    (T::two() / n * k - T::one()) * k
}

/// The function `H(β, d, l, N, Λ, Π)`.
pub fn h_value<T: Real>(beta: T, d: T, l: T, n: T, upper: T, second: T) -> Result<T> {
    let one = T::one();
    let two = T::two();
    let r1 = u_corner(n, beta) - l;
    let r2 = two / n * beta * beta + d * (one - upper) - l;
    if r1 < T::zero() || r2 < T::zero() {
        return Err(ConstantsError::NegativeRadicand(r1.min(r2).as_f64()));
    }
    let mut h = two * (r1 * r2).sqrt() + T::of(4.0) / n * (one + beta) + (two + two * d / beta) * (one - upper);
    if d != T::zero() {
        h = h + d / (beta * beta) * second;
    }
    Ok(h)
}

/// `Q(x, β, d) = 4/N (1+β) + 2(1−x) + β + d (1 + (1−x)/β)(1 − x/β)`.
pub fn q_value<T: Real>(x: T, beta: T, d: T, n: T) -> T {
    let one = T::one();
    T::of(4.0) / n * (one + beta) + T::two() * (one - x) + beta + d * (one + (one - x) / beta) * (one - x / beta)
}

/// Symmetry axis `1/2 + β + β²/d` of `x ↦ Q(x, β, d)`.
pub fn q_axis<T: Real>(beta: T, d: T) -> T {
    T::half() + beta + beta * beta / d
}

/// Minimum of `Q(·, β, d)` over `[lo, hi]`; `lo` may be `−∞`.
pub fn q_min_on<T: Real>(lo: T, hi: T, beta: T, d: T, n: T) -> T {
    if d <= T::zero() {
        return q_value(hi, beta, d, n);
    }
    let axis = q_axis(beta, d);
    let x = axis.max(lo).min(hi);
    q_value(x, beta, d, n)
}

/// `d₀ = 2β² / (N(Λ − 1 − β))`.
pub fn d_zero<T: Real>(n: T, upper: T, beta: T) -> T {
    T::two() * beta * beta / (n * (upper - T::one() - beta))
}

/// Which auxiliary function a certificate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Transform {
    /// `w = u^{-β}` with the first kind function `F`.
    F,
    /// `w = (u + ε)^{-β}` with the second kind function `G`.
    G,
}

impl Transform {
    pub fn names(self) -> [&'static str; 3] {
        match self {
            Transform::F => ["U", "V", "W"],
            Transform::G => ["X", "Y", "Z"],
        }
    }
}

/// How the three floors are confirmed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FloorRule<T> {
    /// `U ≥ l`, `W ≥ l` and `V + 2√((U−l)(W−l)) ≥ V₀`.
    Discriminant { l: T },
    /// `γ = d = 0` with sign-indefinite `f`: `U ≥ U₀`, `W ≥ W₀` and the mixed
    /// term `(4/N(1+β)+2) f/u − 2f' + S|f/u| − target ≥ V₀`, with
    /// `S = 2√((U − c₂) W)`. When `per_unit` is set the mixed term is divided
    /// by `|f/u|` first.
    SignIndefinite { c2: T, target: T, per_unit: bool },
    /// Each coefficient above its floor, relaxed by `L` on `{u < Lε}`.
    Direct { chi: bool },
}

/// Whether the regularisation parameter `ε` enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EpsMode {
    Zero,
    Regularized,
}

/// The three certified floor values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Floors<T> {
    pub first: T,
    pub second: T,
    pub third: T,
}

impl<T: Real> Floors<T> {
    fn as_array(&self) -> [T; 3] {
        [self.first, self.second, self.third]
    }
}

/// Terms the final constant `C` is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakdown<T> {
    pub envelope: T,
    /// Coefficient of `F²` in the final differential inequality.
    pub quadratic: T,
    /// Size of the drift coefficient paired with the cut-off gradient.
    pub drift: T,
    /// `min(β², d)` converting `F` back to the estimated quantity.
    pub divisor: T,
    /// Constant before the `h`-witness step (equal to `C` otherwise).
    pub base: T,
    pub witness_argument: Option<T>,
    pub witness_value: Option<T>,
}

/// Grid on which a certificate was checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertRange<T> {
    pub u_min: T,
    pub u_max: T,
    pub u_points: usize,
    pub eps_min: T,
    pub eps_max: T,
    pub eps_points: usize,
}

impl<T: Real> Default for CertRange<T> {
    fn default() -> Self {
        Self {
            u_min: T::of(1e-6),
            u_max: T::of(1e6),
            u_points: 121,
            eps_min: T::of(1e-6),
            eps_max: T::one(),
            eps_points: 61,
        }
    }
}

/// Outcome of [`certify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification<T> {
    pub range: CertRange<T>,
    pub points: usize,
    pub worst_margin: T,
    pub worst_coefficient: String,
    pub worst_u: T,
    pub worst_eps: T,
}

/// Parameters of the Lichnerowicz family needed by its recipe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LichnerowiczConstants<T> {
    pub case: u8,
    pub l_abc: T,
    pub liouville: T,
    pub beta: T,
    /// Recipe coefficient of `F²`.
    pub m: T,
}

/// A certified parameter tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub theorem: Theorem,
    pub recipe: String,
    pub transform: Transform,
    pub eps_mode: EpsMode,
    pub n: T,
    pub lower: T,
    pub upper: T,
    pub second: T,
    pub sampled: bool,
    pub beta: T,
    pub gamma: T,
    pub d: T,
    /// `l` of the discriminant recipes.
    pub l: Option<T>,
    /// `L`: the `F²` coefficient or, for regularised recipes, the size of the
    /// exceptional set `{u < Lε}`.
    pub big_l: T,
    /// Certified coefficient of `F²`.
    pub quadratic: T,
    pub alpha: Option<T>,
    pub beta0: Option<T>,
    pub delta: Option<T>,
    pub m: Option<T>,
    pub l_abc: Option<T>,
    pub liouville: Option<T>,
    pub theta: T,
    pub rule: FloorRule<T>,
    pub floors: Floors<T>,
    pub c: T,
    pub breakdown: Breakdown<T>,
    pub verification: Option<Verification<T>>,
}

impl<T: Real> Certificate<T> {
    pub fn floor_names(&self) -> [&'static str; 3] {
        self.transform.names()
    }
}

/// Knobs for [`synthesize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions<T> {
    /// Fraction of analytic lower bounds used as floors.
    pub theta: T,
    pub envelope: T,
    /// Pins `β` instead of the recipe's choice.
    pub beta: Option<T>,
    /// `α` of the monotonicity hypothesis (defaults to `Λ`).
    pub alpha: Option<T>,
    /// `β` of the `h`-inverse hypothesis (defaults to `λ − 1`).
    pub beta_v2: Option<T>,
    pub witness: Option<InverseModulus<T>>,
    /// `(a, σ, τ)` of the Lichnerowicz family.
    pub lichnerowicz: Option<(T, T, T)>,
    pub delta: Option<T>,
}

impl<T: Real> Default for SynthesisOptions<T> {
    fn default() -> Self {
        Self {
            theta: T::of(DEFAULT_THETA),
            envelope: T::of(DEFAULT_ENVELOPE),
            beta: None,
            alpha: None,
            beta_v2: None,
            witness: None,
            lichnerowicz: None,
            delta: None,
        }
    }
}

/// `C = (2/c)(2 + E(1 + drift²/c)) / divisor`.
fn assemble<T: Real>(quadratic: T, drift: T, divisor: T, envelope: T) -> Breakdown<T> {
    let two = T::two();
    let base = two / quadratic * (two + envelope * (T::one() + drift * drift / quadratic)) / divisor;
    Breakdown { envelope, quadratic, drift, divisor, base, witness_argument: None, witness_value: None }
}

fn divisor<T: Real>(beta: T, d: T) -> T {
    if d > T::zero() {
        (beta * beta).min(d)
    } else {
        beta * beta
    }
}

struct Draft<T> {
    recipe: String,
    transform: Transform,
    eps_mode: EpsMode,
    beta: T,
    gamma: T,
    d: T,
    l: Option<T>,
    big_l: T,
    quadratic: T,
    rule: FloorRule<T>,
    floors: Floors<T>,
    breakdown: Breakdown<T>,
    alpha: Option<T>,
    beta0: Option<T>,
    delta: Option<T>,
    m: Option<T>,
    l_abc: Option<T>,
    liouville: Option<T>,
}

impl<T: Real> Draft<T> {
    fn new(recipe: impl Into<String>, transform: Transform, beta: T, rule: FloorRule<T>) -> Self {
        let z = T::zero();
        Self {
            recipe: recipe.into(),
            transform,
            eps_mode: EpsMode::Zero,
            beta,
            gamma: z,
            d: z,
            l: None,
            big_l: z,
            quadratic: z,
            rule,
            floors: Floors { first: z, second: z, third: z },
            breakdown: assemble(T::one(), z, T::one(), z),
            alpha: None,
            beta0: None,
            delta: None,
            m: None,
            l_abc: None,
            liouville: None,
        }
    }
}

/// `β₀` of the discriminant recipe.
pub fn discriminant_beta<T: Real>(n: T, upper: T) -> T {
    if n > T::one() {
        T::two() / (n - T::one())
    } else {
        upper.max(T::one())
    }
}

/// Target value of `H` after the perturbation `(l, d)`.
pub fn discriminant_target<T: Real>(n: T, upper: T) -> T {
    if n > T::one() {
        (n + T::of(3.0)) / (n - T::one()) - upper
    } else {
        T::two()
    }
}

/// Finds `(l, d)` with `H(β₀, d, l) ≥ target` by bisection along the ray
/// `t ↦ (t l_max, t d_max)` from the corner `l = d = 0`, then halves the
/// boundary parameter.
pub fn discriminant_pair<T: Real>(n: T, upper: T, second: T, beta: T) -> Result<(T, T)> {
    let target = discriminant_target(n, upper);
    if !(target > T::zero()) {
        return Err(ConstantsError::infeasible("Λ ≥ p(N): the discriminant target is not positive"));
    }
    let l_max = u_corner(n, beta).min(T::two() / n * beta * beta);
    if !(l_max > T::zero()) {
        return Err(ConstantsError::infeasible("U(β₀) is not positive"));
    }
    let d_max = T::one();
    let ok = |t: T| matches!(h_value(beta, t * d_max, t * l_max, n, upper, second), Ok(h) if h >= target);
    let t_star = if ok(T::one()) {
        T::one()
    } else {
        let g = |t: T| if ok(t) { T::one() } else { -T::one() };
        bisect(g, T::zero(), T::one(), T::of(1e-10)).unwrap_or(T::zero())
    };
    let mut t = t_star * T::half();
    for _ in 0..60 {
        if t > T::zero() && ok(t) {
            return Ok((t * l_max, t * d_max));
        }
        t = t * T::half();
    }
    Err(ConstantsError::infeasible("no (l, d) pair found near the corner"))
}

fn synth_discriminant<T: Real>(n: T, ix: &IndexReport<T>, opts: &SynthesisOptions<T>) -> Result<Draft<T>> {
    if !ix.second_finite {
        return Err(ConstantsError::HypothesisViolation("Π must be finite".into()));
    }
    let beta = opts.beta.unwrap_or_else(|| discriminant_beta(n, ix.upper));
    let (l, d) = discriminant_pair(n, ix.upper, ix.second, beta)?;
    let mut dr = Draft::new("discriminant", Transform::F, beta, FloorRule::Discriminant { l });
    dr.d = d;
    dr.l = Some(l);
    dr.big_l = l * T::half();
    dr.quadratic = dr.big_l;
    dr.floors = Floors { first: l, second: discriminant_target(n, ix.upper), third: l };
    dr.breakdown = assemble(dr.quadratic, T::one() / beta - T::one(), divisor(beta, d), opts.envelope);
    Ok(dr)
}

/// `l`, `β = 4/(Nl − 2)` and `L = l − 2` of the second weak-gradient case.
pub fn weak_case2<T: Real>(n: T, alpha: T) -> (T, T, T) {
    let am = alpha - T::one();
    let l = T::two() * am / (n * am - T::of(4.0));
    let beta = T::of(4.0) / (n * l - T::two());
    (l, beta, l - T::two())
}

/// `β` and recipe `L` for the weak gradient estimate with exponent `α`.
pub fn weak_recipe<T: Real>(n: T, alpha: T) -> (u8, T, T) {
    let am = alpha - T::one();
    if alpha <= T::one() + T::of(4.0) / n {
        let beta = (T::one() / n).min(n * T::half() * am);
        (1, beta, T::two())
    } else {
        let (_, beta, big_l) = weak_case2(n, alpha);
        (2, beta, big_l)
    }
}

fn synth_weak<T: Real>(n: T, ix: &IndexReport<T>, opts: &SynthesisOptions<T>) -> Result<Draft<T>> {
    let alpha = opts.alpha.unwrap_or(ix.upper);
    let p = threshold_exponent(n);
    if !(alpha > T::one() && alpha < p) {
        return Err(ConstantsError::HypothesisViolation(format!("α = {alpha} must lie in (1, p(N))")));
    }
    let (case, rec_beta, rec_l) = weak_recipe(n, alpha);
    let beta = opts.beta.unwrap_or(rec_beta);
    let theta = opts.theta;
    let u = u_corner(n, beta);
    let w = T::two() * beta * beta / n;
    let c2 = theta * rec_l;
    let s = T::two() * ((u - c2).pos() * w).sqrt();
    let kappa = T::of(4.0) / n * (T::one() + beta) + T::two() - T::two() * alpha;
    let v_lb = s - kappa.abs();
    let mut dr = Draft::new(
        format!("weak-case-{case}"),
        Transform::F,
        beta,
        FloorRule::SignIndefinite { c2, target: T::zero(), per_unit: true },
    );
    dr.alpha = Some(alpha);
    dr.big_l = c2;
    dr.quadratic = c2;
    if case == 2 {
        dr.l = Some(weak_case2(n, alpha).0);
    }
    dr.floors = Floors { first: c2, second: theta * v_lb, third: theta * w };
    dr.breakdown = assemble(c2, T::one() / beta - T::one(), beta * beta, opts.envelope);
    Ok(dr)
}

/// The Lichnerowicz threshold `L(n, a, σ)` governing the Liouville theorem.
pub fn liouville_threshold<T: Real>(n: T, a: T, sigma: T) -> T {
    if a == T::zero() {
        return T::zero();
    }
    let k = sqrt_gap(n);
    if sigma < T::one() + T::two() / k {
        (sigma - T::one()) * a
    } else {
        T::two() / k
    }
}

/// `√N(√N − 1)`, zero at `N = 1` (so that `2/·` reads as `∞`).
fn sqrt_gap<T: Real>(n: T) -> T {
    let r = n.sqrt();
    r * (r - T::one())
}

/// Constants of the Lichnerowicz recipe for `f = a t − b t^σ + c t^τ`.
pub fn lichnerowicz_constants<T: Real>(n: T, a: T, sigma: T, tau: T, delta: T) -> Result<LichnerowiczConstants<T>> {
    let one = T::one();
    let two = T::two();
    let four = T::of(4.0);
    if !(sigma > one) || !(tau < one) || a < T::zero() {
        return Err(ConstantsError::HypothesisViolation("need σ > 1, τ < 1, a ≥ 0".into()));
    }
    if !(n >= one) {
        return Err(ConstantsError::HypothesisViolation("N must be at least 1".into()));
    }
    let k = sqrt_gap(n);
    let delta_max = four / k;
    if !(delta > T::zero() && delta < delta_max) {
        return Err(ConstantsError::InvalidDelta(delta.as_f64()));
    }
    let split = one + two / k;
    let l_abc = if sigma < split { two * (sigma - one) * a } else { delta };
    let liouville = liouville_threshold(n, a, sigma);
    let (case, beta, m) = if sigma <= one + two / n {
        // 4/N(1+β) − 4/N √((1+β)² − 2Nβ²) = 2(σ − 1) on (0, 1/(√(2N) − 1)].
        let top = one / ((two * n).sqrt() - one);
        let lhs =
            |b: T| four / n * (one + b - ((one + b).powi(2) - two * n * b * b).pos().sqrt()) - two * (sigma - one);
        let beta = if lhs(top) <= T::zero() { top } else { bisect(lhs, T::zero(), top, T::of(1e-14)).unwrap_or(top) };
        (1, beta, two)
    } else if sigma < split {
        let beta = n * (sigma - one) * T::half() - one;
        (2, beta, u_corner(n, beta))
    } else {
        let lo = (one / n).max(n * delta / four - one);
        let hi = one / (n.sqrt() - one);
        let beta = (lo + hi) * T::half();
        (3, beta, u_corner(n, beta))
    };
    Ok(LichnerowiczConstants { case, l_abc, liouville, beta, m })
}

fn synth_lichnerowicz<T: Real>(n: T, opts: &SynthesisOptions<T>) -> Result<Draft<T>> {
    let (a, sigma, tau) = opts
        .lichnerowicz
        .ok_or_else(|| ConstantsError::HypothesisViolation("Lichnerowicz parameters (a, σ, τ) required".into()))?;
    let k = sqrt_gap(n);
    let delta = opts.delta.unwrap_or_else(|| if k > T::zero() { T::two() / k } else { T::one() });
    let lc = lichnerowicz_constants(n, a, sigma, tau, delta)?;
    let beta = opts.beta.unwrap_or(lc.beta);
    let theta = opts.theta;
    let w = T::two() * beta * beta / n;
    let c2 = theta * lc.m;
    let l_cert = theta * lc.l_abc;
    let mut dr = Draft::new(
        format!("lichnerowicz-case-{}", lc.case),
        Transform::F,
        beta,
        FloorRule::SignIndefinite { c2, target: T::zero(), per_unit: false },
    );
    dr.big_l = c2;
    dr.quadratic = c2;
    dr.delta = Some(delta);
    dr.m = Some(lc.m);
    dr.l_abc = Some(lc.l_abc);
    dr.liouville = Some(lc.liouville);
    dr.floors = Floors { first: c2, second: l_cert, third: theta * w };
    let drift = T::one() / beta - T::one();
    let mut b = assemble(c2, drift, beta * beta, opts.envelope);
    // The (2K − L_abc)⁺ term enters with weight 2/c₂ rather than the envelope.
    b.base = T::two() / c2 * (opts.envelope * (T::one() + drift * drift / c2)).max(T::one()) / (beta * beta);
    dr.breakdown = b;
    Ok(dr)
}

/// Admissible `β` interval of the regularised recipes.
pub fn regularized_interval<T: Real>(n: T, upper: T) -> (u8, T, T) {
    let one = T::one();
    let two = T::two();
    let low_branch = two * n / (n + T::of(4.0)) * (upper - one - two / n);
    let high_branch = two * ((n - one) / (n + two) * upper - one);
    if n <= two {
        return (1, low_branch, T::infinity());
    }
    let cap = two / (n - two);
    let axis_cap = upper - (n - one) / (n - two);
    if n < T::of(3.0) && upper < (n + one) / (n - two) {
        (2, low_branch, cap)
    } else {
        (3, high_branch, cap.min(axis_cap))
    }
}

/// Case and open `β` interval of the Harnack-to-universal recipe for
/// `N > 2`: the low branch below `Λ = (N+1)/(N−2)`, the `Q`-branch above.
pub fn harnack_interval<T: Real>(n: T, upper: T) -> (u8, T, T) {
    let one = T::one();
    let two = T::two();
    let cap = two / (n - two);
    if upper < (n + one) / (n - two) {
        (2, two * n / (n + T::of(4.0)) * (upper - one - two / n), cap)
    } else {
        (3, two * ((n - one) / (n + two) * upper - one), cap.min(upper - (n - one) / (n - two)))
    }
}

fn pick_in<T: Real>(lo: T, hi: T) -> T {
    let lo = lo.max(T::zero());
    if hi.is_finite() {
        (lo + hi) * T::half()
    } else {
        lo + T::one()
    }
}

/// Maximises `min(g₁(d), g₂(d))` over `d ∈ (0, cap]`.
fn maximin_d<T: Real, A: Fn(T) -> T, B: Fn(T) -> T>(va: A, vb: B, cap: T) -> (T, T) {
    let obj = |d: T| -(va(d).min(vb(d)));
    let (d, m) = golden_min(obj, cap * T::of(1e-9), cap, cap * T::of(1e-10));
    (d, -m)
}

fn synth_direct<T: Real>(
    n: T,
    ix: &IndexReport<T>,
    opts: &SynthesisOptions<T>,
    beta_override: Option<T>,
    eps_mode: EpsMode,
) -> Result<Draft<T>> {
    let one = T::one();
    let two = T::two();
    let theta = opts.theta;
    let (lower, upper) = (ix.lower, ix.upper);
    let (transform, case, lo, hi) = match eps_mode {
        EpsMode::Regularized => {
            let (case, lo, hi) = regularized_interval(n, upper);
            let tr = if n >= T::of(4.0) { Transform::F } else { Transform::G };
            (tr, case, lo, hi)
        }
        EpsMode::Zero => {
            // Universal bound from a Harnack constant, with ε = 0.
            if n <= two {
                (Transform::F, 1, upper.max(one), T::infinity())
            } else {
                let (case, lo, hi) = harnack_interval(n, upper);
                (Transform::F, case, lo, hi)
            }
        }
    };
    let beta = match beta_override.or(opts.beta) {
        Some(b) => b,
        None => {
            if eps_mode == EpsMode::Zero && n <= two {
                lo
            } else {
                if !(lo < hi) {
                    return Err(ConstantsError::infeasible(format!("empty β interval ({lo}, {hi})")));
                }
                pick_in(lo, hi)
            }
        }
    };
    if !(beta > T::zero()) {
        return Err(ConstantsError::infeasible("β must be positive"));
    }
    let d_cap = if case == 3 { d_zero(n, upper, beta) } else { one };
    let d_cap = if d_cap > T::zero() && d_cap.is_finite() { d_cap } else { one };
    let v_lb = |d: T| q_min_on(lower, upper, beta, d, n);
    let w_lb = |d: T| two * beta * beta / n + d * (beta + one - upper);
    let (d, _) = maximin_d(v_lb, w_lb, d_cap);
    let (v_lb, w_lb) = (v_lb(d), w_lb(d));
    let u0 = u_unit_gamma(n, beta);
    let tag = match (eps_mode, transform) {
        (EpsMode::Zero, _) => "harnack-universal",
        (_, Transform::F) => "regularized-first",
        (_, Transform::G) => "regularized-second",
    };
    let mut dr = Draft::new(
        format!("{tag}-case-{case}"),
        transform,
        beta,
        FloorRule::Direct { chi: eps_mode == EpsMode::Regularized },
    );
    dr.eps_mode = eps_mode;
    dr.gamma = one;
    dr.d = d;
    dr.floors = Floors { first: theta * u0, second: theta * v_lb, third: theta * w_lb };
    let slack = one - theta;
    let big_l = match (eps_mode, transform) {
        (EpsMode::Zero, _) => {
            let f = dr.floors;
            f.first.min(f.second).min(f.third) * T::half()
        }
        (_, Transform::F) => {
            let a = beta / (slack * v_lb) - one;
            let b = d * beta / (slack * w_lb) - one;
            a.max(b).max(beta).max(d * beta).max(one)
        }
        (_, Transform::G) => {
            let c1 = beta + two + T::of(4.0) / n * (one + beta);
            let a2 = (lower - one) * (lower - two) / (beta * beta);
            let b2 = two * upper / beta;
            let quad = if a2 > T::zero() { (b2 - two * a2).pos().powi(2) / (T::of(4.0) * a2) } else { T::infinity() };
            let off_y = (c1 + d * b2) / (slack * v_lb);
            let off_z = (d * beta + T::of(4.0) * beta * beta / n) / (slack * w_lb);
            let on_y = c1 + d * quad;
            let on_z = d * beta + two * beta * beta / n;
            off_y.max(off_z).max(on_y).max(on_z).max(one)
        }
    };
    dr.big_l = big_l;
    let f = dr.floors;
    let scale = one.max(d).powi(2);
    dr.quadratic = if eps_mode == EpsMode::Zero { big_l } else { T::half() * f.first.min(f.third) / scale };
    let drift = match transform {
        Transform::F if eps_mode == EpsMode::Zero => one / beta,
        Transform::F => one / beta,
        Transform::G => one / beta,
    };
    dr.breakdown = assemble(dr.quadratic, drift, divisor(beta, d), opts.envelope);
    Ok(dr)
}

fn synth_superlinear<T: Real>(n: T, ix: &IndexReport<T>, opts: &SynthesisOptions<T>) -> Result<Draft<T>> {
    let r = rho(n, ix.upper)?;
    let (_, lo, hi) = regularized_interval(n, ix.upper);
    let beta_v2 = opts.beta_v2.unwrap_or(ix.lower - T::one());
    let top = beta_v2.min(hi);
    let beta0 = opts.beta.unwrap_or((r + top) * T::half());
    if !(beta0 > r.max(lo) && beta0 < top) {
        return Err(ConstantsError::infeasible(format!("β₀ = {beta0} outside ({r}, {top})")));
    }
    let witness = opts
        .witness
        .clone()
        .ok_or_else(|| ConstantsError::HypothesisViolation("an h-inverse witness is required".into()))?;
    let mut dr = synth_direct(n, ix, opts, Some(beta0), EpsMode::Regularized)?;
    dr.recipe = format!("superlinear/{}", dr.recipe);
    dr.beta0 = Some(beta0);
    let one = T::one();
    let c7 = dr.breakdown.base;
    let big_l = dr.big_l;
    let arg = c7 * T::two().powf(beta0) * (one + big_l) * big_l.powf(beta0);
    let h = witness
        .eval(arg)
        .ok_or_else(|| ConstantsError::infeasible("h-inverse witness undefined at the required argument"))?;
    dr.breakdown.witness_argument = Some(arg);
    dr.breakdown.witness_value = Some(h);
    dr.breakdown.base = c7 * (h * big_l + one).powf(beta0) * (one + big_l);
    Ok(dr)
}

/// Runs the recipe of `theorem` from structural indices alone.
pub fn synthesize<T: Real>(
    n: T,
    indices: &IndexReport<T>,
    theorem: Theorem,
    opts: &SynthesisOptions<T>,
) -> Result<Certificate<T>> {
    if !(n >= T::one()) || !n.is_finite() {
        return Err(ConstantsError::Nonlinearity(NonlinearityError::InvalidDimension(n.as_f64())));
    }
    let ex = critical_exponents(n, None)?;
    let draft = match theorem {
        Theorem::UniversalGradient => {
            if !(indices.upper < ex.p) {
                return Err(ConstantsError::infeasible("Λ ≥ p(N) under the strong gradient estimate"));
            }
            synth_discriminant(n, indices, opts)?
        }
        Theorem::WeakGradient => synth_weak(n, indices, opts)?,
        Theorem::Regularized => {
            if !(indices.upper < ex.p_s) {
                return Err(ConstantsError::HypothesisViolation("Λ ≥ p_S(N)".into()));
            }
            synth_direct(n, indices, opts, None, EpsMode::Regularized)?
        }
        Theorem::Superlinear => synth_superlinear(n, indices, opts)?,
        Theorem::LaneEmden => {
            let alpha = indices.upper;
            if !(alpha < ex.p_s) {
                return Err(ConstantsError::HypothesisViolation("α ≥ p_S(N)".into()));
            }
            let mut dr = if alpha < ex.p {
                synth_discriminant(n, indices, opts)?
            } else {
                let mut o = opts.clone();
                if o.witness.is_none() {
                    let r = rho(n, alpha)?;
                    let (_, _, hi) = regularized_interval(n, alpha);
                    let b0 = o.beta.unwrap_or((r + (alpha - T::one()).min(hi)) * T::half());
                    o.witness = Some(InverseModulus::Power { exponent: alpha - T::one() - b0 });
                }
                synth_superlinear(n, indices, &o)?
            };
            dr.recipe = format!("lane-emden/{}", dr.recipe);
            dr.alpha = Some(alpha);
            dr
        }
        Theorem::HarnackUniversal => {
            if !(indices.upper < ex.p_s) {
                return Err(ConstantsError::HypothesisViolation("Λ ≥ p_S(N)".into()));
            }
            synth_direct(n, indices, opts, None, EpsMode::Zero)?
        }
        Theorem::Lichnerowicz => synth_lichnerowicz(n, opts)?,
    };
    let c = draft.breakdown.base;
    Ok(Certificate {
        theorem,
        recipe: draft.recipe,
        transform: draft.transform,
        eps_mode: draft.eps_mode,
        n,
        lower: indices.lower,
        upper: indices.upper,
        second: indices.second,
        sampled: indices.method == IndexMethod::Sampled,
        beta: draft.beta,
        gamma: draft.gamma,
        d: draft.d,
        l: draft.l,
        big_l: draft.big_l,
        quadratic: draft.quadratic,
        alpha: draft.alpha,
        beta0: draft.beta0,
        delta: draft.delta,
        m: draft.m,
        l_abc: draft.l_abc,
        liouville: draft.liouville,
        theta: opts.theta,
        rule: draft.rule,
        floors: draft.floors,
        c,
        breakdown: draft.breakdown,
        verification: None,
    })
}

/// Computes indices and family parameters from `spec`, then synthesizes.
pub fn synthesize_for<T: Real>(
    spec: &NonlinearitySpec<T>,
    n: T,
    theorem: Theorem,
    opts: &SynthesisOptions<T>,
) -> Result<Certificate<T>> {
    let mut o = opts.clone();
    let indices = match spec.family() {
        Family::Lichnerowicz { a, sigma, tau, .. } => {
            o.lichnerowicz.get_or_insert((*a, *sigma, *tau));
            compute_indices(spec, &SamplingGrid::default()).unwrap_or(IndexReport {
                lower: T::neg_infinity(),
                upper: T::infinity(),
                second: T::neg_infinity(),
                lower_finite: false,
                upper_finite: false,
                second_finite: false,
                method: IndexMethod::Sampled,
                slack: T::zero(),
            })
        }
        _ => compute_indices(spec, &SamplingGrid::default())?,
    };
    if theorem == Theorem::Superlinear && o.witness.is_none() {
        let r = rho(n, indices.upper)?;
        let (_, _, hi) = regularized_interval(n, indices.upper);
        let top = o.beta_v2.unwrap_or(indices.lower - T::one()).min(hi);
        let b0 = o.beta.unwrap_or((r + top) * T::half());
        o.witness = inverse_bounded(spec, b0);
    }
    synthesize(n, &indices, theorem, &o)
}

/// Margins `(value − floor)` of the three checks at one grid point, or
/// `None` where the ratios of `f` are undefined.
fn point_margins<T: Real>(
    cert: &Certificate<T>,
    u: T,
    eps: T,
    fv: (T, T, T),
    ratios: (T, T),
    scale: T,
) -> Option<[T; 3]> {
    let (f, df, _) = fv;
    let (ratio1, ratio2) = ratios;
    let one = T::one();
    let two = T::two();
    let fl = cert.floors.as_array();
    let y = f / u;
    let tiny = f.abs() <= T::of(ZERO_THRESHOLD) * scale;
    match cert.rule {
        FloorRule::Discriminant { l } => {
            if tiny {
                return None;
            }
            let st = CoefficientState {
                n: cert.n,
                beta: cert.beta,
                gamma: T::zero(),
                d: cert.d,
                eps: T::zero(),
                u,
                ratio1,
                ratio2,
            };
            let (cu, cv, cw) = coefficients_f(&st);
            let s = two * ((cu - l).pos() * (cw - l).pos()).sqrt();
            Some([cu - fl[0], cv + s - fl[1], cw - fl[2]])
        }
        FloorRule::SignIndefinite { c2, target, per_unit } => {
            let cu = u_corner(cert.n, cert.beta);
            let cw = two * cert.beta * cert.beta / cert.n;
            let g = T::of(4.0) / cert.n * (one + cert.beta) + two;
            let s = two * ((cu - c2).pos() * cw).sqrt();
            let mixed = g * y - two * df;
            let v = if per_unit {
                if tiny {
                    return Some([cu - fl[0], T::infinity(), cw - fl[2]]);
                }
                (mixed - target) / y.abs() + s
            } else {
                mixed + s * y.abs() - target
            };
            Some([cu - fl[0], v - fl[1], cw - fl[2]])
        }
        FloorRule::Direct { chi } => {
            if tiny {
                return None;
            }
            let e = if cert.eps_mode == EpsMode::Zero { T::zero() } else { eps };
            let st = CoefficientState {
                n: cert.n,
                beta: cert.beta,
                gamma: cert.gamma,
                d: cert.d,
                eps: e,
                u,
                ratio1,
                ratio2,
            };
            let (a, b, c) = match cert.transform {
                Transform::F => coefficients_f(&st),
                Transform::G => coefficients_g(&st),
            };
            let relax = if chi && u < cert.big_l * e { cert.big_l } else { T::zero() };
            Some([a - fl[0], b - (fl[1] - relax), c - (fl[2] - relax)])
        }
    }
}

/// Re-evaluates the coefficient formulas on a log grid and records the worst
/// margin; fails with `Infeasible` on any violation or non-positive floor.
pub fn certify<T: Real>(
    cert: &Certificate<T>,
    spec: &NonlinearitySpec<T>,
    range: &CertRange<T>,
) -> Result<Certificate<T>> {
    let names = cert.floor_names();
    for (i, fl) in cert.floors.as_array().into_iter().enumerate() {
        if !(fl > T::zero()) || !fl.is_finite() {
            return Err(ConstantsError::Infeasible {
                reason: "non-positive floor".into(),
                coefficient: names[i].into(),
                u: f64::NAN,
                eps: f64::NAN,
                margin: fl.as_f64(),
            });
        }
    }
    let us = logspace(range.u_min, range.u_max, range.u_points.max(2));
    let uses_eps = cert.eps_mode == EpsMode::Regularized;
    let eps_list =
        if uses_eps { logspace(range.eps_min, range.eps_max, range.eps_points.max(2)) } else { vec![T::zero()] };
    let mut values = Vec::with_capacity(us.len());
    for &u in &us {
        let fv = spec.evaluate(u)?;
        let scale = spec_scale(spec, u, fv);
        values.push((fv, spec.ratios(u), scale));
    }
    // (margin, coefficient index, eps index, u index); ties broken by index.
    let worst = eps_list
        .par_iter()
        .enumerate()
        .map(|(j, &eps)| {
            let mut best: Option<(T, usize, usize, usize)> = None;
            for (i, &u) in us.iter().enumerate() {
                let Some(m) = point_margins(cert, u, eps, values[i].0, values[i].1, values[i].2) else { continue };
                for (k, &mk) in m.iter().enumerate() {
                    let mk = if mk.is_nan() { T::neg_infinity() } else { mk };
                    if best.is_none_or(|b| mk < b.0) {
                        best = Some((mk, k, j, i));
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some(x), Some(y)) => {
                    if y.0 < x.0 || (y.0 == x.0 && (y.2, y.3, y.1) < (x.2, x.3, x.1)) {
                        Some(y)
                    } else {
                        Some(x)
                    }
                }
            },
        );
    let Some((margin, k, j, i)) = worst else {
        return Err(ConstantsError::infeasible("no grid point with defined ratios"));
    };
    let (u, eps) = (us[i], eps_list[j]);
    if !(margin > T::zero()) {
        return Err(ConstantsError::Infeasible {
            reason: "floor violated on the grid".into(),
            coefficient: names[k].into(),
            u: u.as_f64(),
            eps: eps.as_f64(),
            margin: margin.as_f64(),
        });
    }
    let mut out = cert.clone();
    out.verification = Some(Verification {
        range: *range,
        points: us.len() * eps_list.len(),
        worst_margin: margin,
        worst_coefficient: names[k].into(),
        worst_u: u,
        worst_eps: eps,
    });
    Ok(out)
}

fn spec_scale<T: Real>(spec: &NonlinearitySpec<T>, u: T, fv: (T, T, T)) -> T {
    match spec.family() {
        Family::Lichnerowicz { a, b, sigma, c, tau } => {
            (*a * u).abs() + (*b * u.powf(*sigma)).abs() + (*c * u.powf(*tau)).abs()
        }
        _ => fv.0.abs() + (u * fv.1).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[allow(clippy::too_many_arguments)]
    fn st(n: f64, beta: f64, gamma: f64, d: f64, eps: f64, u: f64, r1: f64, r2: f64) -> CoefficientState<f64> {
        CoefficientState::new(n, beta, gamma, d, eps, u, r1, r2).unwrap()
    }

    #[test]
    fn first_kind_corner_values() {
        let (u, v, w) = coefficients_f(&st(2.0, 1.0, 0.0, 0.0, 0.0, 3.0, 2.0, 2.0));
        assert_abs_diff_eq!(u, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_gamma_limit_matches_closed_form() {
        for &(n, beta) in &[(5.0, 0.4), (4.0, 0.9), (6.0, 0.3)] {
            let (u, _, _) = coefficients_f(&st(n, beta, 1.0, 0.3, 1e-12, 1.0, 2.0, 2.0));
            assert_abs_diff_eq!(u, u_unit_gamma(n, beta), epsilon = 1e-8);
            let (x, _, _) = coefficients_g(&st(n, beta, 1.0, 0.3, 0.7, 1.0, 2.0, 2.0));
            assert_abs_diff_eq!(x, u_unit_gamma(n, beta), epsilon = 1e-12);
        }
        let (x, _, _) = coefficients_g(&st(4.0, 1.0, 1.0, 0.0, 0.5, 1.0, 2.0, 2.0));
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn second_kind_degenerate_corner() {
        let (x, _, _) = coefficients_g(&st(3.0, 0.7, 0.0, 0.0, 1e-14, 1.0, 2.0, 2.0));
        assert_abs_diff_eq!(x, u_corner(3.0, 0.7), epsilon = 1e-14);
    }

    #[test]
    fn invalid_state_rejected() {
        assert!(CoefficientState::new(3.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(CoefficientState::new(3.0, 1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn h_identity_and_radicand() {
        let h = h_value(1.0, 0.0, 0.0, 3.0, 2.0, 2.0).unwrap();
        assert_abs_diff_eq!(h, 2.0, epsilon = 1e-12);
        assert!(h_value(1.0, 0.0, 0.0, 1.0, 1.0, 0.0).unwrap() >= 4.0);
        let lmax = u_corner(3.0, 1.0f64).min(2.0 / 3.0);
        let h = h_value(1.0, 0.0, lmax, 3.0, 2.0, 2.0).unwrap();
        assert_abs_diff_eq!(h, 4.0 * 2.0 / 3.0 + 2.0 * (1.0 - 2.0), epsilon = 1e-12);
        assert!(matches!(h_value(1.0, 0.0, 10.0, 3.0, 2.0, 2.0), Err(ConstantsError::NegativeRadicand(_))));
    }

    #[test]
    fn q_axis_example() {
        let d0 = d_zero(5.0, 2.0, 0.5);
        assert_abs_diff_eq!(d0, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(q_axis(0.5, d0), 2.25, epsilon = 1e-14);
    }

    #[test]
    fn weak_examples() {
        let (l, beta, big_l) = weak_case2(3.0, 2.5);
        assert_abs_diff_eq!(l, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(beta, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(big_l, 4.0, epsilon = 1e-12);
        let (case, beta, big_l) = weak_recipe(4.0, 1.5);
        assert_eq!(case, 1);
        assert_abs_diff_eq!(beta, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(big_l, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn lichnerowicz_examples() {
        let c = lichnerowicz_constants(4.0, 1.0, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(c.l_abc, 0.5);
        assert_abs_diff_eq!(c.liouville, 1.0, epsilon = 1e-15);
        let c = lichnerowicz_constants(4.0, 3.0, 1.5, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(c.l_abc, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.liouville, 1.5, epsilon = 1e-15);
        assert_eq!(liouville_threshold(7.0, 0.0, 2.0), 0.0);
        assert!(matches!(lichnerowicz_constants(4.0, 1.0, 3.0, 0.5, 2.0), Err(ConstantsError::InvalidDelta(_))));
    }

    #[test]
    fn regularized_interval_example() {
        let (case, lo, hi) = regularized_interval(5.0, 2.0);
        assert_eq!(case, 3);
        assert_abs_diff_eq!(lo, 2.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 2.0 / 3.0, epsilon = 1e-15);
    }
}
