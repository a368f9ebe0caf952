//! Small numerical kernels: grids, tridiagonal solves, bracketing root and
//! extremum searches, and interpolation.
//!
//! Everything here is generic over [`Real`], which is why the routines are
//! local rather than borrowed from an `f64`-only crate.

use crate::scalar::Real;

/// `n` points evenly spaced on `[a, b]`, endpoints included.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / T::of_usize(n - 1);
            (0..n).map(|i| if i == n - 1 { b } else { a + step * T::of_usize(i) }).collect()
        }
    }
}

/// `n` points evenly spaced in `ln t` on `[a, b]`, with `0 < a < b`.
pub fn logspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    let (la, lb) = (a.ln(), b.ln());
    let mut out: Vec<T> = linspace(la, lb, n).into_iter().map(T::exp).collect();
    if let Some(first) = out.first_mut() {
        *first = a;
    }
    if n > 1 {
        out[n - 1] = b;
    }
    out
}

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `sub[i]` multiplies `x[i-1]` in row `i` (`sub[0]` unused), `sup[i]`
/// multiplies `x[i+1]` (last entry unused). Returns `None` on a zero pivot.
pub fn solve_tridiagonal<T: Real>(sub: &[T], diag: &[T], sup: &[T], rhs: &[T]) -> Option<Vec<T>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let tiny = T::min_positive_value();
    if diag[0].abs() <= tiny {
        return None;
    }
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        if m.abs() <= tiny || !m.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { sup[i] / m } else { T::zero() };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}

/// Bisection for a sign change of `g` on `[lo, hi]`.
///
/// Stops when the bracket width falls below `rel_tol·max(|lo|,|hi|)` (or an
/// absolute `rel_tol` near zero). Returns `None` if the endpoints do not
/// bracket a root.
pub fn bisect<T: Real, G: Fn(T) -> T>(g: G, mut lo: T, mut hi: T, rel_tol: T) -> Option<T> {
    let mut glo = g(lo);
    let ghi = g(hi);
    if glo == T::zero() {
        return Some(lo);
    }
    if ghi == T::zero() {
        return Some(hi);
    }
    if !(glo.is_finite() && ghi.is_finite()) || glo.signum() == ghi.signum() {
        return None;
    }
    for _ in 0..400 {
        let mid = lo + (hi - lo) * T::half();
        let scale = lo.abs().max(hi.abs()).max(T::one());
        if (hi - lo).abs() <= rel_tol * scale {
            return Some(mid);
        }
        let gm = g(mid);
        if gm == T::zero() {
            return Some(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Some(lo + (hi - lo) * T::half())
}

/// Bisection in `ln t` for a sign change on `[lo, hi]` with `0 < lo < hi`.
pub fn bisect_log<T: Real, G: Fn(T) -> T>(g: G, lo: T, hi: T, rel_tol: T) -> Option<T> {
    let mut a = lo;
    let mut b = hi;
    let mut ga = g(a);
    let gb = g(b);
    if ga == T::zero() {
        return Some(a);
    }
    if gb == T::zero() {
        return Some(b);
    }
    if !(ga.is_finite() && gb.is_finite()) || ga.signum() == gb.signum() {
        return None;
    }
    for _ in 0..400 {
        let mid = (a * b).sqrt();
        if (b - a) <= rel_tol * mid {
            return Some(mid);
        }
        let gm = g(mid);
        if gm == T::zero() {
            return Some(mid);
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    Some((a * b).sqrt())
}

/// Golden-section minimisation of `g` on `[a, b]`; returns `(x, g(x))`.
pub fn golden_min<T: Real, G: Fn(T) -> T>(g: G, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::of(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol * (T::one() + a.abs().max(b.abs())) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - (b - a) * inv_phi;
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + (b - a) * inv_phi;
            gd = g(d);
        }
    }
    if gc < gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Minimum of `g` over `[a, b]`: dense sampling followed by golden-section
/// refinement between the neighbours of the best sample.
pub fn sampled_min<T: Real, G: Fn(T) -> T>(g: G, a: T, b: T, samples: usize) -> (T, T) {
    let xs = linspace(a, b, samples.max(3));
    refine_min_on(&g, &xs)
}

/// Like [`sampled_min`] but over caller-supplied ordered nodes.
pub fn refine_min_on<T: Real, G: Fn(T) -> T>(g: &G, xs: &[T]) -> (T, T) {
    let mut best = 0;
    let mut best_val = T::infinity();
    for (i, &x) in xs.iter().enumerate() {
        let v = g(x);
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(xs.len() - 1)];
    let (x, v) = golden_min(g, lo, hi, T::of(1e-14));
    if v < best_val {
        (x, v)
    } else {
        (xs[best], best_val)
    }
}

/// Cubic Hermite interpolation on `[x0, x1]`; returns value and derivative.
#[allow(clippy::too_many_arguments)]
pub fn hermite<T: Real>(x0: T, x1: T, y0: T, y1: T, d0: T, d1: T, x: T) -> (T, T) {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::two();
    let three = T::of(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let six = T::of(6.0);
    let four = T::of(4.0);
    let dh00 = six * s2 - six * s;
    let dh10 = three * s2 - four * s + T::one();
    let dh01 = six * s - six * s2;
    let dh11 = three * s2 - two * s;
    let deriv = (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// Index `i` with `xs[i] <= x <= xs[i+1]` on an increasing table, clamped.
pub fn locate<T: Real>(xs: &[T], x: T) -> usize {
    let n = xs.len();
    if n < 2 || x <= xs[0] {
        return 0;
    }
    if x >= xs[n - 1] {
        return n - 2;
    }
    let (mut lo, mut hi) = (0, n - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if xs[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Natural cubic spline through tabulated points.
#[derive(Debug, Clone)]
pub struct CubicSpline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> CubicSpline<T> {
    /// Builds the spline; needs at least three strictly increasing nodes.
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Option<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n || xs.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let mut sub = vec![T::zero(); n];
        let mut diag = vec![T::one(); n];
        let mut sup = vec![T::zero(); n];
        let mut rhs = vec![T::zero(); n];
        let six = T::of(6.0);
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0;
            diag[i] = T::two() * (h0 + h1);
            sup[i] = h1;
            rhs[i] = six * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        let m = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Some(Self { xs, ys, m })
    }

    /// Value, first and second derivative at `x` (linear extrapolation of the
    /// end cubic outside the table).
    pub fn eval(&self, x: T) -> (T, T, T) {
        let i = locate(&self.xs, x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let six = T::of(6.0);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let y = a * self.ys[i] + b * self.ys[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / six;
        let dy = (self.ys[i + 1] - self.ys[i]) / h - (T::of(3.0) * a * a - T::one()) * h * m0 / six
            + (T::of(3.0) * b * b - T::one()) * h * m1 / six;
        let d2y = a * m0 + b * m1;
        (y, dy, d2y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_matches_dense_solution() {
        // [2 1 0; 1 3 1; 0 1 2] x = [3 5 3] -> x = [1 1 1]
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[2.0, 3.0, 2.0], &[1.0, 1.0, 0.0], &[3.0, 5.0, 3.0]).unwrap();
        for v in x {
            assert!((v - 1.0f64).abs() < 1e-14);
        }
    }

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bisect(|x: f64| x * x + 1.0, 0.0, 2.0, 1e-12).is_none());
        let r = bisect_log(|x: f64| x.ln() - 3.0, 1e-3, 1e6, 1e-14).unwrap();
        assert!((r - 3f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_min(|x: f64| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let (v, d) = hermite(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), 0.8);
        assert!((v - f(0.8)).abs() < 1e-13);
        assert!((d - df(0.8)).abs() < 1e-12);
    }

    #[test]
    fn spline_is_exact_on_lines_and_accurate_on_smooth_data() {
        let xs = linspace(0.0, 3.0, 61);
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let s = CubicSpline::new(xs.clone(), ys).unwrap();
        let (y, dy, d2y) = s.eval(1.234);
        assert!((y - 3.468).abs() < 1e-12 && (dy - 2.0).abs() < 1e-12 && d2y.abs() < 1e-10);
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let s = CubicSpline::new(xs, ys).unwrap();
        assert!((s.eval(1.5).0 - 1.5f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn logspace_hits_endpoints() {
        let g = logspace(1e-8f64, 1e8, 17);
        assert_eq!(g[0], 1e-8);
        assert_eq!(g[16], 1e8);
        assert!((g[8] - 1.0).abs() < 1e-12);
    }
}
