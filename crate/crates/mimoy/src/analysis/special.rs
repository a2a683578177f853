//! Special functions needed by the closed-form outage bounds: the modified
//! Bessel function of the second kind of order one, and the digamma
//! function.

use crate::{Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function `K_1(x)` for positive `x`, accurate to better
/// than 1e-12 relative over `[1e-6, 50]`.
///
/// Uses the ascending series for `x < 2` and the Thompson-Barnett
/// continued fraction for `x >= 2`. Plain asymptotic expansion cannot hold
/// the accuracy target near `x = 2`, so the continued fraction replaces it.
pub fn bessel_k1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_k1: x must be positive, got {x}")));
    }
    if x < 2.0 {
        Ok(k1_series(x))
    } else {
        Ok(k1_continued_fraction(x))
    }
}

/// Ascending series:
/// `K1(z) = 1/z + sum_k (z/2)^{2k+1} / (k!(k+1)!) *
/// (ln(z/2) - (psi(k+1)+psi(k+2))/2)`.
fn k1_series(z: f64) -> f64 {
    let half = z / 2.0;
    let log_half = half.ln();
    let q = half * half;
    let mut sum = 1.0 / z;
    // term_k = (z/2)^{2k+1} / (k!(k+1)!); psi values advance by recurrence
    let mut term = half; // k = 0: (z/2) / (0! 1!)
    let mut psi_k1 = -EULER_GAMMA; // psi(1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(2)
    for k in 0..64 {
        let add = term * (log_half - 0.5 * (psi_k1 + psi_k2));
        sum += add;
        if add.abs() < 1e-18 * sum.abs() {
            break;
        }
        let kf = (k + 1) as f64;
        term *= q / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
    }
    sum
}

/// Steed/Thompson-Barnett CF2 evaluation of `K_0`, then the Wronskian-free
/// ladder to `K_1`; standard for `x >= 2`.
fn k1_continued_fraction(x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const MAX_ITER: usize = 200;
    // CF2 at order nu = 0: a1 = 1/4 - nu^2 = 1/4.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    // K_{nu+1} = K_nu (nu + x + 1/2 - h) / x at nu = 0
    k0 * (x + 0.5 - h) / x
}

/// Digamma function `psi(x)` for positive `x`, accurate to ~1e-14.
/// Recurrence lifts the argument above 6, then the Bernoulli asymptotic
/// series applies.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("digamma: x must be positive, got {x}")));
    }
    let mut value = 0.0;
    let mut t = x;
    while t < 10.0 {
        value -= 1.0 / t;
        t += 1.0;
    }
    // psi(t) ~ ln t - 1/(2t) - sum B_{2n} / (2n t^{2n})
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    value += t.ln() - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 120.0
                        - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k1_reference_points() {
        // high-precision reference values
        for (x, expect) in [
            (0.5, 1.656_441_120_003_300_9),
            (1.0, 0.601_907_230_197_234_6),
            (2.0, 0.139_865_881_816_522_43),
            (5.0, 4.044_613_445_452_164e-3),
            (10.0, 1.864_877_345_382_558_5e-5),
            (50.0, 3.444_102_226_717_555_6e-23),
        ] {
            let got = bessel_k1(x).unwrap();
            assert!(
                ((got - expect) / expect).abs() < 1e-12,
                "K1({x}) = {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn k1_small_argument_asymptote() {
        // x * K1(x) -> 1 as x -> 0
        let x = 1e-6;
        assert!((x * bessel_k1(x).unwrap() - 1.0).abs() < 1e-4);
        assert!(bessel_k1(0.0).is_err());
        assert!(bessel_k1(-1.0).is_err());
    }

    #[test]
    fn k1_matches_quadrature_oracle() {
        // K1(x) = int_0^inf exp(-x cosh t) cosh t dt, trapezoid on the
        // doubly-exponentially decaying integrand.
        let oracle = |x: f64| -> f64 {
            let h = 1e-3;
            let t_max = ((700.0 / x).max(4.0)).acosh() + 1.0;
            let steps = (t_max / h) as usize;
            let mut sum = 0.5 * (-x).exp(); // t = 0 endpoint, cosh 0 = 1
            for i in 1..=steps {
                let t = i as f64 * h;
                let ch = t.cosh();
                sum += (-x * ch).exp() * ch;
            }
            sum * h
        };
        for x in [0.05, 0.3, 1.0, 1.9, 2.0, 2.1, 4.0, 8.0, 20.0, 50.0] {
            let got = bessel_k1(x).unwrap();
            let orc = oracle(x);
            assert!(
                ((got - orc) / orc).abs() < 1e-10,
                "K1({x}) = {got} vs oracle {orc}"
            );
        }
    }

    #[test]
    fn digamma_reference_points_and_recurrence() {
        for (x, expect) in [
            (1.0, -0.577_215_664_901_532_9),
            (2.0, 0.422_784_335_098_467_14),
            (0.5, -1.963_510_026_021_423_5),
            (10.0, 2.251_752_589_066_721),
            (3.75, 1.182_537_388_611_796_2),
        ] {
            let got = digamma(x).unwrap();
            assert!((got - expect).abs() < 1e-12, "psi({x}) = {got}");
        }
        // psi(x + 1) = psi(x) + 1/x
        for x in [0.3, 1.0, 2.5, 7.2] {
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert!((lhs - rhs).abs() < 1e-12);
        }
        assert!(digamma(0.0).is_err());
    }

    #[test]
    fn digamma_series_oracle() {
        // truncated series + Euler-Maclaurin tail:
        // psi(x) = -gamma + sum_{k=0}^{K-1} (1/(k+1) - 1/(k+x)) + tail,
        // tail ~ -1/(2(K+x)) correction folded into large K truncation.
        let oracle = |x: f64| -> f64 {
            let big = 200_000usize;
            let mut s = -EULER_GAMMA;
            for k in 0..big {
                s += 1.0 / (k as f64 + 1.0) - 1.0 / (k as f64 + x);
            }
            // Euler-Maclaurin correction of the truncated difference sum
            let t = big as f64;
            s += (x - 1.0) / t - (x - 1.0) / (2.0 * t * t)
        ;
            s
        };
        for x in [0.7, 1.0, 2.0, 5.5, 10.0] {
            let got = digamma(x).unwrap();
            let orc = oracle(x);
            assert!((got - orc).abs() < 1e-8, "psi({x}): {got} vs {orc}");
        }
    }
}
