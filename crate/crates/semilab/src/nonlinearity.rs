//! The nonlinear term `f` of `Δu + f(u) = 0`: evaluation, structural
//! indices, critical exponents and hypothesis checks.
//!
//! The indices are
//!
//! * `λ = inf t f'(t)/f(t)`, `Λ = sup t f'(t)/f(t)`,
//! * `Π = inf t² f''(t)/f(t)`,
//!
//! taken over `t > 0`. They are exact for the power families and sampled on a
//! log grid otherwise.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::numerics::{bisect_log, golden_min, logspace};
use crate::scalar::Real;
use crate::theorem::Theorem;

/// Sampled ratios beyond this magnitude are reported as infinite.
pub const DIVERGENCE_CAP: f64 = 1e10;

/// Relative threshold below which `|f|` counts as a zero of `f`.
pub const ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NonlinearityError {
    #[error("argument must be positive, got {0}")]
    NonPositiveArgument(f64),
    #[error("custom nonlinearity returned a non-finite value at t = {0}")]
    EvaluationFailure(f64),
    #[error("f changes sign or vanishes near t = {0} although it was declared positive")]
    SignChange(f64),
    #[error("the second-order ratio t²f''/f is unbounded below")]
    Divergence,
    #[error("invalid nonlinearity parameters: {0}")]
    InvalidParameters(String),
    #[error("invalid dimension N = {0}")]
    InvalidDimension(f64),
    #[error("rho(N, Λ) is not defined for N = 1")]
    RhoUndefined,
    #[error("cannot parse nonlinearity: {0}")]
    Parse(String),
}

type Result<T, E = NonlinearityError> = std::result::Result<T, E>;

/// Function handle used by [`Family::Custom`].
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Closed-form families plus a user-supplied escape hatch.
#[derive(Clone)]
pub enum Family<T> {
    /// `f(t) = t^α`.
    PowerLaw { alpha: T },
    /// `f(t) = Σ kᵢ t^{αᵢ}` with `kᵢ > 0`.
    PowerSum { terms: Vec<(T, T)> },
    /// `f(t) = a t − b t^σ + c t^τ` with `σ > 1 > τ` and `a, b, c ≥ 0`.
    Lichnerowicz { a: T, b: T, sigma: T, c: T, tau: T },
    /// Arbitrary `f` with hand-written derivatives.
    Custom { label: String, f: ScalarFn<T>, df: ScalarFn<T>, d2f: ScalarFn<T> },
}

impl<T: Real> fmt::Debug for Family<T> {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PowerLaw { alpha } => write!(fm, "PowerLaw({alpha})"),
            Family::PowerSum { terms } => write!(fm, "PowerSum({terms:?})"),
            Family::Lichnerowicz { a, b, sigma, c, tau } => {
                write!(fm, "Lichnerowicz(a={a}, b={b}, σ={sigma}, c={c}, τ={tau})")
            }
            Family::Custom { label, .. } => write!(fm, "Custom({label})"),
        }
    }
}

/// A nonlinear term with its declared sign on `(0, ∞)`.
#[derive(Clone)]
pub struct NonlinearitySpec<T> {
    family: Family<T>,
    positive: bool,
}

impl<T: Real> fmt::Debug for NonlinearitySpec<T> {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("NonlinearitySpec").field("family", &self.family).field("positive", &self.positive).finish()
    }
}

impl<T: Real> NonlinearitySpec<T> {
    pub fn power(alpha: T) -> Self {
        Self { family: Family::PowerLaw { alpha }, positive: true }
    }

    pub fn power_sum(terms: Vec<(T, T)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(NonlinearityError::InvalidParameters("power sum needs at least one term".into()));
        }
        if terms.iter().any(|&(k, a)| !(k > T::zero()) || !a.is_finite() || !k.is_finite()) {
            return Err(NonlinearityError::InvalidParameters(
                "power sum coefficients must be positive and finite".into(),
            ));
        }
        Ok(Self { family: Family::PowerSum { terms }, positive: true })
    }

    pub fn lichnerowicz(a: T, b: T, sigma: T, c: T, tau: T) -> Result<Self> {
        let z = T::zero();
        if !(sigma > T::one()) || !(tau < T::one()) || a < z || b < z || c < z {
            return Err(NonlinearityError::InvalidParameters(format!(
                "need σ > 1, τ < 1 and a, b, c ≥ 0 (got a={a}, b={b}, σ={sigma}, c={c}, τ={tau})"
            )));
        }
        let positive = b == z && (a > z || c > z);
        Ok(Self { family: Family::Lichnerowicz { a, b, sigma, c, tau }, positive })
    }

    /// Custom `f` with derivatives; `positive` declares `f > 0` on `(0, ∞)`.
    pub fn custom(label: impl Into<String>, f: ScalarFn<T>, df: ScalarFn<T>, d2f: ScalarFn<T>, positive: bool) -> Self {
        Self { family: Family::Custom { label: label.into(), f, df, d2f }, positive }
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    /// Declared (power families, Lichnerowicz: derived) positivity of `f`.
    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// Whether indices and hypotheses are exact rather than sampled.
    pub fn is_analytic(&self) -> bool {
        matches!(self.family, Family::PowerLaw { .. } | Family::PowerSum { .. })
    }

    /// Exponent `α` if `f = t^α`.
    pub fn power_exponent(&self) -> Option<T> {
        match self.family {
            Family::PowerLaw { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// `(f, f', f'')` at `t > 0`.
    pub fn evaluate(&self, t: T) -> Result<(T, T, T)> {
        if !(t > T::zero()) {
            return Err(NonlinearityError::NonPositiveArgument(t.as_f64()));
        }
        let v = self.eval_unchecked(t);
        if let Family::Custom { .. } = self.family {
            if !(v.0.is_finite() && v.1.is_finite() && v.2.is_finite()) {
                return Err(NonlinearityError::EvaluationFailure(t.as_f64()));
            }
        }
        Ok(v)
    }

    /// `f(t)` without argument checks.
    pub fn value(&self, t: T) -> T {
        match &self.family {
            Family::PowerLaw { alpha } => t.powf(*alpha),
            Family::PowerSum { terms } => terms.iter().fold(T::zero(), |s, &(k, a)| s + k * t.powf(a)),
            Family::Lichnerowicz { a, b, sigma, c, tau } => *a * t - *b * t.powf(*sigma) + *c * t.powf(*tau),
            Family::Custom { f, .. } => f(t),
        }
    }

    pub(crate) fn eval_unchecked(&self, t: T) -> (T, T, T) {
        let one = T::one();
        let two = T::two();
        match &self.family {
            Family::PowerLaw { alpha } => {
                let a = *alpha;
                (t.powf(a), a * t.powf(a - one), a * (a - one) * t.powf(a - two))
            }
            Family::PowerSum { terms } => {
                terms.iter().fold((T::zero(), T::zero(), T::zero()), |(f, d, dd), &(k, a)| {
                    (f + k * t.powf(a), d + k * a * t.powf(a - one), dd + k * a * (a - one) * t.powf(a - two))
                })
            }
            Family::Lichnerowicz { a, b, sigma, c, tau } => {
                let (s, ta) = (*sigma, *tau);
                (
                    *a * t - *b * t.powf(s) + *c * t.powf(ta),
                    *a - *b * s * t.powf(s - one) + *c * ta * t.powf(ta - one),
                    -*b * s * (s - one) * t.powf(s - two) + *c * ta * (ta - one) * t.powf(ta - two),
                )
            }
            Family::Custom { f, df, d2f, .. } => (f(t), df(t), d2f(t)),
        }
    }

    /// Ratios `(t f'/f, t² f''/f)`; exact constants for a pure power.
    pub fn ratios(&self, t: T) -> (T, T) {
        match &self.family {
            Family::PowerLaw { alpha } => (*alpha, *alpha * (*alpha - T::one())),
            Family::PowerSum { terms } => {
                // Weighted averages of αᵢ and αᵢ(αᵢ−1) with weights kᵢ t^{αᵢ};
                // normalised by the largest log-weight to avoid overflow.
                let lt = t.ln();
                let m = terms.iter().map(|&(k, a)| k.ln() + a * lt).fold(T::neg_infinity(), T::max);
                let (mut s0, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
                for &(k, a) in terms {
                    let w = (k.ln() + a * lt - m).exp();
                    s0 = s0 + w;
                    s1 = s1 + w * a;
                    s2 = s2 + w * a * (a - T::one());
                }
                (s1 / s0, s2 / s0)
            }
            _ => {
                let (f, d, dd) = self.eval_unchecked(t);
                (t * d / f, t * t * dd / f)
            }
        }
    }

    /// Magnitude scale used to decide whether `f(t)` counts as zero.
    fn zero_scale(&self, t: T) -> T {
        match &self.family {
            Family::Lichnerowicz { a, b, sigma, c, tau } => {
                (*a * t).abs() + (*b * t.powf(*sigma)).abs() + (*c * t.powf(*tau)).abs()
            }
            _ => {
                let (f, d, _) = self.eval_unchecked(t);
                f.abs() + (t * d).abs()
            }
        }
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        format!("{:?}", self.family)
    }

    /// Serializable definition, absent for custom handles.
    pub fn to_def(&self) -> Option<NonlinearityDef> {
        match &self.family {
            Family::PowerLaw { alpha } => Some(NonlinearityDef::Power { alpha: alpha.as_f64() }),
            Family::PowerSum { terms } => Some(NonlinearityDef::Powersum {
                terms: terms.iter().map(|&(k, a)| [k.as_f64(), a.as_f64()]).collect(),
            }),
            Family::Lichnerowicz { a, b, sigma, c, tau } => Some(NonlinearityDef::Lichnerowicz {
                a: a.as_f64(),
                b: b.as_f64(),
                sigma: sigma.as_f64(),
                c: c.as_f64(),
                tau: tau.as_f64(),
            }),
            Family::Custom { .. } => None,
        }
    }
}

/// JSON form of the closed-form families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum NonlinearityDef {
    Power { alpha: f64 },
    Powersum { terms: Vec<[f64; 2]> },
    Lichnerowicz { a: f64, b: f64, sigma: f64, c: f64, tau: f64 },
}

impl NonlinearityDef {
    pub fn build<T: Real>(&self) -> Result<NonlinearitySpec<T>> {
        match self {
            NonlinearityDef::Power { alpha } => Ok(NonlinearitySpec::power(T::of(*alpha))),
            NonlinearityDef::Powersum { terms } => {
                NonlinearitySpec::power_sum(terms.iter().map(|[k, a]| (T::of(*k), T::of(*a))).collect())
            }
            NonlinearityDef::Lichnerowicz { a, b, sigma, c, tau } => {
                NonlinearitySpec::lichnerowicz(T::of(*a), T::of(*b), T::of(*sigma), T::of(*c), T::of(*tau))
            }
        }
    }
}

impl FromStr for NonlinearityDef {
    type Err = NonlinearityError;

    /// Accepts JSON or the shorthands `power:α`, `powersum:k:α,k:α,...` and
    /// `lichnerowicz:a:b:σ:c:τ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| NonlinearityError::Parse(e.to_string()));
        }
        let bad = || NonlinearityError::Parse(format!("unrecognised nonlinearity `{s}`"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        match head.to_ascii_lowercase().as_str() {
            "power" => Ok(NonlinearityDef::Power { alpha: num(rest)? }),
            "powersum" => {
                let terms = rest
                    .split(',')
                    .map(|pair| {
                        let (k, a) = pair.split_once(':').ok_or_else(bad)?;
                        Ok([num(k)?, num(a)?])
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NonlinearityDef::Powersum { terms })
            }
            "lichnerowicz" => {
                let v = rest.split(':').map(num).collect::<Result<Vec<_>>>()?;
                if v.len() != 5 {
                    return Err(bad());
                }
                Ok(NonlinearityDef::Lichnerowicz { a: v[0], b: v[1], sigma: v[2], c: v[3], tau: v[4] })
            }
            _ => Err(bad()),
        }
    }
}

/// Log-spaced sampling configuration for index computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    /// Fail with `Divergence` when `Π = −∞`.
    pub require_finite_second: bool,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self { lo: 1e-8, hi: 1e8, points: 4096, require_finite_second: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMethod {
    Analytic,
    Sampled,
}

/// The three structural indices of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexReport<T> {
    /// `λ = inf t f'/f`.
    pub lower: T,
    /// `Λ = sup t f'/f`.
    pub upper: T,
    /// `Π = inf t² f''/f`.
    pub second: T,
    pub lower_finite: bool,
    pub upper_finite: bool,
    pub second_finite: bool,
    pub method: IndexMethod,
    /// Resolution slack carried by sampled values (zero when analytic).
    pub slack: T,
}

impl<T: Real> IndexReport<T> {
    /// Exact indices of `t^α`.
    pub fn power(alpha: T) -> Self {
        Self {
            lower: alpha,
            upper: alpha,
            second: alpha * (alpha - T::one()),
            lower_finite: true,
            upper_finite: true,
            second_finite: true,
            method: IndexMethod::Analytic,
            slack: T::zero(),
        }
    }

    /// Indices with explicit values, tagged analytic.
    pub fn from_values(lower: T, upper: T, second: T) -> Self {
        Self {
            lower,
            upper,
            second,
            lower_finite: lower.is_finite(),
            upper_finite: upper.is_finite(),
            second_finite: second.is_finite(),
            method: IndexMethod::Analytic,
            slack: T::zero(),
        }
    }
}

struct Extremum<T> {
    value: T,
    finite: bool,
    slack: T,
}

fn refine_extremum<T: Real, G: Fn(T) -> T>(g: &G, ts: &[T], vals: &[T], maximize: bool, cap: T) -> Extremum<T> {
    let sign = if maximize { -T::one() } else { T::one() };
    let mut best = None;
    for (i, &v) in vals.iter().enumerate() {
        if !v.is_finite() {
            continue;
        }
        match best {
            None => best = Some(i),
            Some(j) if sign * v < sign * vals[j] => best = Some(i),
            _ => {}
        }
    }
    let Some(i) = best else {
        return Extremum { value: sign * T::infinity(), finite: false, slack: T::zero() };
    };
    let n = vals.len();
    let mut slack = T::zero();
    for j in [i.wrapping_sub(1), i + 1] {
        if j < n && vals[j].is_finite() {
            slack = slack.max((vals[j] - vals[i]).abs());
        }
    }
    let lo = ts[i.saturating_sub(1)].ln();
    let hi = ts[(i + 1).min(n - 1)].ln();
    let (_, refined) = golden_min(|s: T| sign * g(s.exp()), lo, hi, T::of(1e-13));
    let mut value = vals[i];
    if refined.is_finite() && refined < sign * value {
        value = sign * refined;
    }
    // An extremum pinned to the grid edge may keep moving beyond it.
    if i == 0 || i == n - 1 {
        let edge = ts[i];
        let factor = if i == 0 { T::of(1e-4) } else { T::of(1e4) };
        let mut t = edge;
        for _ in 0..4 {
            t = t * factor;
            let v = g(t);
            if !v.is_finite() || v.abs() > cap {
                return Extremum { value: sign * T::infinity(), finite: false, slack };
            }
        }
    }
    if value.abs() > cap {
        return Extremum { value: sign * T::infinity(), finite: false, slack };
    }
    Extremum { value, finite: true, slack }
}

/// Computes `λ`, `Λ`, `Π` for `spec`.
pub fn compute_indices<T: Real>(spec: &NonlinearitySpec<T>, grid: &SamplingGrid) -> Result<IndexReport<T>> {
    if let Family::PowerLaw { alpha } = spec.family {
        return Ok(IndexReport::power(alpha));
    }
    let ts = logspace(T::of(grid.lo), T::of(grid.hi), grid.points.max(8));
    let mut fs = Vec::with_capacity(ts.len());
    for &t in &ts {
        let (f, d, dd) = spec.evaluate(t)?;
        if !(f.is_finite() && d.is_finite() && dd.is_finite()) {
            return Err(NonlinearityError::EvaluationFailure(t.as_f64()));
        }
        fs.push(f);
    }
    let zero_tol = T::of(ZERO_THRESHOLD);
    let is_zero = |i: usize| fs[i].abs() <= zero_tol * spec.zero_scale(ts[i]);
    let crossing = (0..ts.len()).find(|&i| is_zero(i) || (i > 0 && fs[i].signum() != fs[i - 1].signum()));
    if let Some(i) = crossing {
        if spec.positive || fs.iter().all(|f| *f > T::zero()) {
            return Err(NonlinearityError::SignChange(ts[i].as_f64()));
        }
        // A simple zero makes t f'/f and t² f''/f unbounded on both sides.
        if grid.require_finite_second {
            return Err(NonlinearityError::Divergence);
        }
        let inf = T::infinity();
        return Ok(IndexReport {
            lower: -inf,
            upper: inf,
            second: -inf,
            lower_finite: false,
            upper_finite: false,
            second_finite: false,
            method: IndexMethod::Sampled,
            slack: T::zero(),
        });
    }
    if spec.positive && fs.iter().any(|f| *f <= T::zero()) {
        return Err(NonlinearityError::SignChange(ts[0].as_f64()));
    }
    let cap = T::of(DIVERGENCE_CAP);
    let r1 = |t: T| spec.ratios(t).0;
    let r2 = |t: T| spec.ratios(t).1;
    let v1: Vec<T> = ts.iter().map(|&t| r1(t)).collect();
    let v2: Vec<T> = ts.iter().map(|&t| r2(t)).collect();

    let report = match &spec.family {
        Family::PowerSum { terms } => {
            // t f'/f is a weighted mean of the αᵢ whose weights move
            // monotonically from the smallest to the largest exponent.
            let amin = terms.iter().map(|p| p.1).fold(T::infinity(), T::min);
            let amax = terms.iter().map(|p| p.1).fold(T::neg_infinity(), T::max);
            let limit_second = (amin * (amin - T::one())).min(amax * (amax - T::one()));
            let sampled = refine_extremum(&r2, &ts, &v2, false, cap);
            let interior = sampled.value < limit_second - T::of(1e-12) * (T::one() + limit_second.abs());
            IndexReport {
                lower: amin,
                upper: amax,
                second: if interior { sampled.value } else { limit_second },
                lower_finite: true,
                upper_finite: true,
                second_finite: true,
                method: if interior { IndexMethod::Sampled } else { IndexMethod::Analytic },
                slack: if interior { sampled.slack } else { T::zero() },
            }
        }
        _ => {
            let lo = refine_extremum(&r1, &ts, &v1, false, cap);
            let hi = refine_extremum(&r1, &ts, &v1, true, cap);
            let pi = refine_extremum(&r2, &ts, &v2, false, cap);
            IndexReport {
                lower: lo.value,
                upper: hi.value,
                second: pi.value,
                lower_finite: lo.finite,
                upper_finite: hi.finite,
                second_finite: pi.finite,
                method: IndexMethod::Sampled,
                slack: lo.slack.max(hi.slack).max(pi.slack),
            }
        }
    };
    if grid.require_finite_second && !report.second_finite {
        return Err(NonlinearityError::Divergence);
    }
    Ok(report)
}

/// `p(N)`, `p_S(N)` and optionally `ρ(N, Λ)`; infinities are `T::infinity()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSet<T> {
    pub p: T,
    pub p_s: T,
    pub rho: Option<T>,
}

/// Sobolev exponent `p_S(N)`.
pub fn sobolev_exponent<T: Real>(n: T) -> T {
    if n <= T::two() {
        T::infinity()
    } else {
        (n + T::two()) / (n - T::two())
    }
}

/// Threshold exponent `p(N) = (N+3)/(N−1)`.
pub fn threshold_exponent<T: Real>(n: T) -> T {
    if n <= T::one() {
        T::infinity()
    } else {
        (n + T::of(3.0)) / (n - T::one())
    }
}

/// Both candidate branches of `ρ(N, Λ)`: `(2N/(N+4)(Λ−1−2/N), 2(N−1)/(N+2)Λ − 2)`.
pub fn rho_branches<T: Real>(n: T, upper: T) -> (T, T) {
    let two = T::two();
    let four = T::of(4.0);
    let low = two * n / (n + four) * (upper - T::one() - two / n);
    let high = two * (n - T::one()) / (n + two) * upper - two;
    (low, high)
}

/// `ρ(N, Λ)` with its case split in `N` and `Λ`.
pub fn rho<T: Real>(n: T, upper: T) -> Result<T> {
    if !(n >= T::one()) {
        return Err(NonlinearityError::InvalidDimension(n.as_f64()));
    }
    if n == T::one() {
        return Err(NonlinearityError::RhoUndefined);
    }
    let (low, high) = rho_branches(n, upper);
    let two = T::two();
    let three = T::of(3.0);
    let use_low = n <= two || (n < three && upper < (n + T::one()) / (n - two));
    Ok(if use_low { low } else { high })
}

/// Value of each `ρ` branch at the internal boundary `Λ = (N+1)/(N−2)`,
/// `N ∈ (2, 3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoJump<T> {
    pub n: T,
    pub boundary: T,
    pub left: T,
    pub right: T,
    pub jump: T,
}

pub fn rho_jump<T: Real>(n: T) -> Result<RhoJump<T>> {
    if !(n > T::two() && n < T::of(3.0)) {
        return Err(NonlinearityError::InvalidDimension(n.as_f64()));
    }
    let boundary = (n + T::one()) / (n - T::two());
    let (left, right) = rho_branches(n, boundary);
    Ok(RhoJump { n, boundary, left, right, jump: right - left })
}

pub fn critical_exponents<T: Real>(n: T, upper: Option<T>) -> Result<ExponentSet<T>> {
    if !(n >= T::one()) || !n.is_finite() {
        return Err(NonlinearityError::InvalidDimension(n.as_f64()));
    }
    let rho = upper.map(|l| rho(n, l)).transpose()?;
    Ok(ExponentSet { p: threshold_exponent(n), p_s: sobolev_exponent(n), rho })
}

/// Inverse modulus `h` witnessing `g(t) ≤ C g(ε) ⟹ t ≤ h(C) ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InverseModulus<T> {
    /// `h(C) = max(1, C)^{1/exponent}`; exact for power families.
    Power { exponent: T },
    /// Empirical table on a bounded range, interpolated log-log.
    Table { c: Vec<T>, h: Vec<T>, t_min: T, t_max: T },
}

impl<T: Real> InverseModulus<T> {
    /// `h(C)`; `None` beyond a tabulated range.
    pub fn eval(&self, c: T) -> Option<T> {
        match self {
            InverseModulus::Power { exponent } => Some(c.max(T::one()).powf(T::one() / *exponent)),
            InverseModulus::Table { c: cs, h, .. } => {
                if c <= cs[0] {
                    return Some(h[0]);
                }
                let last = cs.len() - 1;
                if c > cs[last] {
                    return None;
                }
                let i = crate::numerics::locate(cs, c);
                let s = (c.ln() - cs[i].ln()) / (cs[i + 1].ln() - cs[i].ln());
                Some((h[i].ln() + s * (h[i + 1].ln() - h[i].ln())).exp())
            }
        }
    }
}

/// Auxiliary parameters for hypothesis checks.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Aux<T> {
    /// `α` of the monotonicity hypothesis `t^{-α} f` non-increasing.
    pub alpha: Option<T>,
    /// `β` of the `h`-inverse condition on `t^{-1-β} f`.
    pub beta: Option<T>,
}

/// Evaluation of every hypothesis relevant to `theorem`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport<T> {
    pub theorem: Theorem,
    pub n: T,
    pub indices: Option<IndexReport<T>>,
    pub exponents: ExponentSet<T>,
    pub f_positive: bool,
    pub upper_below_p: bool,
    pub upper_below_ps: bool,
    pub upper_in_window: bool,
    pub second_finite: bool,
    pub alpha: Option<T>,
    pub alpha_in_range: Option<bool>,
    pub power_ratio_nonincreasing: Option<bool>,
    pub ratio_nondecreasing: bool,
    pub lower_index_ok: bool,
    pub v1: bool,
    pub beta: Option<T>,
    pub beta_above_rho: Option<bool>,
    pub v2: Option<bool>,
    pub witness: Option<InverseModulus<T>>,
    pub family_ok: bool,
    pub sampled: bool,
    /// Names of the hypotheses the theorem needs.
    pub required: Vec<&'static str>,
    pub failed: Vec<&'static str>,
    pub passed: bool,
}

/// Log-spaced sample points of a grid.
pub fn grid_points<T: Real>(grid: &SamplingGrid) -> Vec<T> {
    logspace(T::of(grid.lo), T::of(grid.hi), grid.points.max(8))
}

/// `t f'/f` non-decreasing, via `t²f''/f ≥ r(r−1)` on the grid.
pub fn ratio_nondecreasing<T: Real>(spec: &NonlinearitySpec<T>, grid: &SamplingGrid) -> bool {
    let tol = T::of(1e-9);
    grid_points::<T>(grid).into_iter().all(|t| {
        let f = spec.value(t);
        if f.abs() <= T::of(ZERO_THRESHOLD) * spec.zero_scale(t) {
            return true;
        }
        let (r1, r2) = spec.ratios(t);
        let lhs = r2 - r1 * (r1 - T::one());
        lhs >= -tol * (T::one() + r1 * r1 + r2.abs())
    })
}

/// `t^{-α} f` non-increasing, i.e. `t f' ≤ α f` for all `t > 0`.
pub fn power_ratio_nonincreasing<T: Real>(spec: &NonlinearitySpec<T>, alpha: T, grid: &SamplingGrid) -> bool {
    match &spec.family {
        Family::PowerLaw { alpha: p } => *p <= alpha,
        Family::PowerSum { terms } => terms.iter().all(|&(_, a)| a <= alpha),
        Family::Lichnerowicz { a, b, sigma, c, tau } => {
            // a(1−α)t − b(σ−α)t^σ + c(τ−α)t^τ ≤ 0 for every t.
            let z = T::zero();
            let ok_a = *a == z || alpha >= T::one();
            let ok_c = *c == z || alpha >= *tau;
            let ok_b = *b == z || *sigma >= alpha || (*a == z && *c == z);
            if ok_a && ok_c && ok_b {
                return true;
            }
            sampled_power_ratio(spec, alpha, grid)
        }
        Family::Custom { .. } => sampled_power_ratio(spec, alpha, grid),
    }
}

fn sampled_power_ratio<T: Real>(spec: &NonlinearitySpec<T>, alpha: T, grid: &SamplingGrid) -> bool {
    grid_points::<T>(grid).into_iter().all(|t| {
        let (f, d, _) = spec.eval_unchecked(t);
        t * d - alpha * f <= T::of(1e-10) * (t * d).abs().max(f.abs())
    })
}

/// `lim_{t→0⁺} f(t)/t = 0`.
pub fn limit_v1<T: Real>(spec: &NonlinearitySpec<T>) -> bool {
    let z = T::zero();
    match &spec.family {
        Family::PowerLaw { alpha } => *alpha > T::one(),
        Family::PowerSum { terms } => terms.iter().all(|&(_, a)| a > T::one()),
        Family::Lichnerowicz { a, c, .. } => *a == z && *c == z,
        Family::Custom { .. } => {
            let r = |t: f64| (spec.value(T::of(t)) / T::of(t)).abs();
            let (a, b, c) = (r(1e-4), r(1e-6), r(1e-8));
            c < b && b < a && c < T::one()
        }
    }
}

/// `h`-inverse boundedness of `t^{-1-β} f`, with witness.
pub fn inverse_bounded<T: Real>(spec: &NonlinearitySpec<T>, beta: T) -> Option<InverseModulus<T>> {
    let one = T::one();
    match &spec.family {
        Family::PowerLaw { alpha } => {
            let e = *alpha - one - beta;
            (e > T::zero()).then_some(InverseModulus::Power { exponent: e })
        }
        Family::PowerSum { terms } => {
            let e = terms.iter().map(|&(_, a)| a - one - beta).fold(T::infinity(), T::min);
            (e > T::zero()).then_some(InverseModulus::Power { exponent: e })
        }
        _ => sampled_inverse_modulus(spec, beta),
    }
}

fn sampled_inverse_modulus<T: Real>(spec: &NonlinearitySpec<T>, beta: T) -> Option<InverseModulus<T>> {
    let (t_min, t_max) = (T::of(1e-6), T::of(1e6));
    let g = |t: T| spec.value(t) / t.powf(T::one() + beta);
    let ts = logspace(t_min, t_max, 601);
    let gs: Vec<T> = ts.iter().map(|&t| g(t)).collect();
    if gs.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) || gs.windows(2).any(|w| w[1] <= w[0]) {
        return None;
    }
    let cs = logspace(T::one(), T::of(1e6), 25);
    let mut hs = Vec::with_capacity(cs.len());
    let g_top = gs[gs.len() - 1];
    for &c in &cs {
        let mut worst = T::one();
        for (i, &eps) in ts.iter().enumerate().step_by(10) {
            let target = c * gs[i];
            if target >= g_top {
                break;
            }
            let t = bisect_log(|t| g(t) - target, eps, t_max, T::of(1e-12)).unwrap_or(t_max);
            worst = worst.max(t / eps);
        }
        hs.push(worst);
    }
    for i in 1..hs.len() {
        hs[i] = hs[i].max(hs[i - 1]);
    }
    Some(InverseModulus::Table { c: cs, h: hs, t_min, t_max })
}

/// Evaluates the hypotheses of `theorem` for `spec` in dimension `n`.
pub fn check_hypotheses<T: Real>(
    spec: &NonlinearitySpec<T>,
    n: T,
    theorem: Theorem,
    aux: Aux<T>,
    grid: &SamplingGrid,
) -> Result<ConditionReport<T>> {
    let exponents = critical_exponents(n, None)?;
    let indices = compute_indices(spec, grid).ok();
    let (lower, upper, second_finite) = match &indices {
        Some(ix) => (ix.lower, ix.upper, ix.second_finite),
        None => (T::neg_infinity(), T::infinity(), false),
    };
    let f_positive = spec.positive && indices.is_some();
    let upper_below_p = upper < exponents.p;
    let upper_below_ps = upper < exponents.p_s;
    let upper_in_window = upper >= exponents.p && upper < exponents.p_s;
    let ratio_nd = indices.is_some() && ratio_nondecreasing(spec, grid);
    let lower_index_ok = if n >= T::of(4.0) { lower >= T::one() } else { lower > T::two() };
    let alpha = aux.alpha.or(match theorem {
        Theorem::WeakGradient if upper.is_finite() => Some(upper),
        _ => None,
    });
    let alpha_in_range = alpha.map(|a| a > T::one() && a < exponents.p);
    let power_ratio = alpha.map(|a| power_ratio_nonincreasing(spec, a, grid));
    let v1 = limit_v1(spec);
    let rho_value = if n > T::one() && upper.is_finite() { rho(n, upper).ok() } else { None };
    let beta = aux.beta.or(match (theorem, rho_value) {
        (Theorem::Superlinear, Some(r)) => Some((r + lower - T::one()) * T::half()),
        _ => None,
    });
    let beta_above_rho = match (beta, rho_value) {
        (Some(b), Some(r)) => Some(b > r),
        (Some(_), None) => Some(false),
        _ => None,
    };
    let witness = beta.and_then(|b| inverse_bounded(spec, b));
    let v2 = beta.map(|_| witness.is_some());
    let family_ok = match (theorem, &spec.family) {
        (Theorem::LaneEmden, Family::PowerLaw { alpha }) => *alpha < exponents.p_s,
        (Theorem::LaneEmden, _) => false,
        (Theorem::Lichnerowicz, Family::Lichnerowicz { .. }) => true,
        (Theorem::Lichnerowicz, _) => false,
        _ => true,
    };
    let sampled = !spec.is_analytic();

    let mut checks: Vec<(&'static str, bool)> = Vec::new();
    match theorem {
        Theorem::UniversalGradient => {
            checks.push(("f_positive", f_positive));
            checks.push(("upper_below_p", upper_below_p));
            checks.push(("second_finite", second_finite));
        }
        Theorem::WeakGradient => {
            checks.push(("alpha_in_range", alpha_in_range.unwrap_or(false)));
            checks.push(("power_ratio_nonincreasing", power_ratio.unwrap_or(false)));
        }
        Theorem::Regularized | Theorem::Superlinear => {
            checks.push(("f_positive", f_positive));
            checks.push(("upper_in_window", upper_in_window));
            checks.push(("ratio_nondecreasing", ratio_nd));
            checks.push(("lower_index_ok", lower_index_ok));
            if theorem == Theorem::Superlinear {
                checks.push(("v1", v1));
                checks.push(("beta_above_rho", beta_above_rho.unwrap_or(false)));
                checks.push(("v2", v2.unwrap_or(false)));
            }
        }
        Theorem::LaneEmden => checks.push(("family_ok", family_ok)),
        Theorem::HarnackUniversal => {
            checks.push(("f_positive", f_positive));
            checks.push(("upper_below_ps", upper_below_ps));
            checks.push(("ratio_nondecreasing", ratio_nd));
        }
        Theorem::Lichnerowicz => checks.push(("family_ok", family_ok)),
    }
    let required = checks.iter().map(|c| c.0).collect();
    let failed: Vec<&'static str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    Ok(ConditionReport {
        theorem,
        n,
        indices,
        exponents,
        f_positive,
        upper_below_p,
        upper_below_ps,
        upper_in_window,
        second_finite,
        alpha,
        alpha_in_range,
        power_ratio_nonincreasing: power_ratio,
        ratio_nondecreasing: ratio_nd,
        lower_index_ok,
        v1,
        beta,
        beta_above_rho,
        v2,
        witness,
        family_ok,
        sampled,
        required,
        passed: failed.is_empty(),
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_triples() {
        assert_eq!(NonlinearitySpec::power(2.0).evaluate(3.0).unwrap(), (9.0, 6.0, 2.0));
        let ac = NonlinearitySpec::lichnerowicz(1.0, 1.0, 3.0, 0.0, 0.5).unwrap();
        assert_eq!(ac.evaluate(1.0).unwrap(), (0.0, -2.0, -6.0));
        let ps = NonlinearitySpec::power_sum(vec![(1.0, 2.0), (1.0, 3.0)]).unwrap();
        assert_eq!(ps.evaluate(2.0).unwrap(), (12.0, 16.0, 14.0));
        assert!(matches!(ps.evaluate(0.0), Err(NonlinearityError::NonPositiveArgument(_))));
    }

    #[test]
    fn custom_fault_is_reported() {
        let f: ScalarFn<f64> = Arc::new(|t| if t > 5.0 { f64::NAN } else { t });
        let one: ScalarFn<f64> = Arc::new(|_| 1.0);
        let zero: ScalarFn<f64> = Arc::new(|_| 0.0);
        let spec = NonlinearitySpec::custom("broken", f, one, zero, true);
        assert!(spec.evaluate(1.0).is_ok());
        assert_eq!(spec.evaluate(6.0), Err(NonlinearityError::EvaluationFailure(6.0)));
    }

    #[test]
    fn exponents_at_small_dimensions() {
        let e = critical_exponents(4.0f64, None).unwrap();
        assert_eq!(e.p_s, 3.0);
        assert!((e.p - 7.0 / 3.0).abs() < 1e-15);
        let e = critical_exponents(1.0f64, None).unwrap();
        assert!(e.p.is_infinite() && e.p_s.is_infinite());
        assert_eq!(critical_exponents(1.0f64, Some(2.0)), Err(NonlinearityError::RhoUndefined));
        assert!((rho(5.0f64, 2.0).unwrap() - 2.0 / 7.0).abs() < 1e-15);
        assert!(critical_exponents(0.5f64, None).is_err());
    }

    #[test]
    fn parse_shorthand_and_json() {
        let d: NonlinearityDef = "power:2".parse().unwrap();
        assert_eq!(d, NonlinearityDef::Power { alpha: 2.0 });
        let d: NonlinearityDef = r#"{"family":"powersum","terms":[[1.0,2.0],[1.0,3.0]]}"#.parse().unwrap();
        assert_eq!(d, "powersum:1:2,1:3".parse().unwrap());
        let d: NonlinearityDef = r#"{"family":"lichnerowicz","a":1,"b":1,"sigma":3,"c":0,"tau":0.5}"#.parse().unwrap();
        assert_eq!(d, "lichnerowicz:1:1:3:0:0.5".parse().unwrap());
        assert!("cubic:3".parse::<NonlinearityDef>().is_err());
    }

    #[test]
    fn lichnerowicz_validation() {
        assert!(NonlinearitySpec::lichnerowicz(1.0, 1.0, 0.5, 0.0, 0.5).is_err());
        assert!(NonlinearitySpec::lichnerowicz(-1.0, 1.0, 3.0, 0.0, 0.5).is_err());
        assert!(!NonlinearitySpec::lichnerowicz(1.0, 1.0, 3.0, 0.0, 0.5).unwrap().is_positive());
        assert!(NonlinearitySpec::lichnerowicz(1.0, 0.0, 3.0, 1.0, 0.5).unwrap().is_positive());
    }

    #[test]
    fn sign_changing_f_has_infinite_indices() {
        let ac = NonlinearitySpec::lichnerowicz(1.0, 1.0, 3.0, 0.0, 0.5).unwrap();
        let ix = compute_indices(&ac, &SamplingGrid::default()).unwrap();
        assert!(!ix.lower_finite && !ix.upper_finite && !ix.second_finite);
        let strict = SamplingGrid { require_finite_second: true, ..SamplingGrid::default() };
        assert_eq!(compute_indices(&ac, &strict), Err(NonlinearityError::Divergence));
    }

    #[test]
    fn declared_positive_custom_that_vanishes_is_rejected() {
        let f: ScalarFn<f64> = Arc::new(|t| t * t - t);
        let df: ScalarFn<f64> = Arc::new(|t| 2.0 * t - 1.0);
        let d2f: ScalarFn<f64> = Arc::new(|_| 2.0);
        let spec = NonlinearitySpec::custom("crossing", f, df, d2f, true);
        assert!(matches!(compute_indices(&spec, &SamplingGrid::default()), Err(NonlinearityError::SignChange(_))));
    }
}
