//! Adaptive Gauss-Legendre quadrature for the bound evaluators' smooth
//! one-dimensional integrands.

use std::sync::OnceLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre polynomial.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rules() -> &'static (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    static RULES: OnceLock<(Vec<(f64, f64)>, Vec<(f64, f64)>)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(10), gauss_legendre(21)))
}

fn apply_rule(rule: &[(f64, f64)], f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for &(x, w) in rule {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Adaptive integration of a smooth `f` over `[a, b]`.
///
/// The error target is `max(abs_tol, rel_tol * scale)` where `scale` is a
/// coarse magnitude estimate of the whole integral, so tiny-valued
/// integrals resolve to full relative precision without the recursion
/// chasing rounding noise panel by panel.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let (lo_rule, hi_rule) = rules();
    // coarse magnitude estimate over eight uniform panels
    let mut scale = 0.0;
    for i in 0..8 {
        let x0 = a + (b - a) * i as f64 / 8.0;
        let x1 = a + (b - a) * (i + 1) as f64 / 8.0;
        scale += apply_rule(hi_rule, &f, x0, x1).abs();
    }
    let tol = abs_tol.max(rel_tol * scale).max(f64::MIN_POSITIVE);

    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        lo_rule: &[(f64, f64)],
        hi_rule: &[(f64, f64)],
        depth: usize,
    ) -> f64 {
        let coarse = apply_rule(lo_rule, f, a, b);
        let fine = apply_rule(hi_rule, f, a, b);
        let err = (fine - coarse).abs();
        if err <= tol || err <= 2e-16 * fine.abs() || depth >= 20 {
            return fine;
        }
        let mid = 0.5 * (a + b);
        recurse(f, a, mid, tol / 2.0, lo_rule, hi_rule, depth + 1)
            + recurse(f, mid, b, tol / 2.0, lo_rule, hi_rule, depth + 1)
    }
    recurse(&f, a, b, tol, lo_rule, hi_rule, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_exponential_exactness() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-13, 0.0);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-11);

        let e = integrate(|x| (-x).exp(), 0.0, 30.0, 1e-13, 0.0);
        assert!(((e - (1.0 - (-30.0f64).exp())) / e).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, 2.0, 1e-13, 0.0);
        let exact = (1.0 - (20.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn relative_accuracy_on_tiny_scales() {
        // tiny-magnitude integrand still integrates to full relative
        // precision
        let c = 1e-12;
        let v = integrate(|x| c * (-3.0 * x).exp(), 0.0, 20.0, 1e-13, 0.0);
        let exact = c / 3.0;
        assert!(((v - exact) / exact).abs() < 1e-11);
    }

    #[test]
    fn sharp_peak_resolved() {
        // mass concentrated in a narrow region of a wide interval
        let v = integrate(|x: f64| (-(x * 50.0 - 5.0).powi(2)).exp(), 0.0, 45.0, 1e-13, 0.0);
        let exact = std::f64::consts::PI.sqrt() / 50.0; // full Gaussian mass
        assert!(((v - exact) / exact).abs() < 1e-9, "{v} vs {exact}");
    }
}
