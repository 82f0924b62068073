//! Sine integral and the sinc derivatives used by the cluster functions.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

const SERIES_LIMIT: f64 = 4.0;

/// Sine integral `Si(x) = ∫₀ˣ sin(t)/t dt`.
///
/// Power series below `|x| = 4`; above, the convergent continued fraction
/// for `E₁(ix)` evaluated with the modified Lentz method.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= SERIES_LIMIT {
        sine_integral_series(x)
    } else {
        sine_integral_cf(x)
    }
}

fn sine_integral_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x; // x^(2n+1) / (2n+1)!
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        let k = f64::from(2 * n);
        term *= -x2 / (k * (k + 1.0));
        let add = term / (k + 1.0);
        sum += add;
        if add.abs() < 1e-17 * sum.abs() || n > 60 {
            break;
        }
    }
    sum
}

fn sine_integral_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..10_000u32 {
        let a = -f64::from((i - 1) * (i - 1));
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 2.0 * f64::EPSILON {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    FRAC_PI_2 + h.im
}

/// `sinc(x) = sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Derivative of `sinc(x)` with respect to `x`.
pub fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // -x/3 + x³/30 - x⁵/840 + x⁷/45360
        let x2 = x * x;
        x * (-1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 / 45_360.0)))
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn sine_integral_matches_quadrature() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 3.9, 4.0, 4.1, 6.283, 10.0, 31.4, 100.0] {
            let reference = quad::integrate_panels(sinc, 0.0, x, 64, 1e-15);
            let v = sine_integral(x);
            assert!(
                (v - reference).abs() < 1e-12,
                "Si({x}) = {v}, quadrature {reference}"
            );
        }
    }

    #[test]
    fn sine_integral_known_values() {
        // Si(π) (Wilbraham–Gibbs constant) and the large-x limit.
        assert!((sine_integral(std::f64::consts::PI) - 1.851_937_051_982_466_2).abs() < 1e-13);
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 1e-6);
        assert_eq!(sine_integral(0.0), 0.0);
        assert!((sine_integral(-2.0) + sine_integral(2.0)).abs() < 1e-16);
    }

    #[test]
    fn sinc_prime_is_continuous_across_branch() {
        for &x in &[0.0099, 0.01, 0.0101] {
            let h = 1e-6;
            let fd = (sinc(x + h) - sinc(x - h)) / (2.0 * h);
            assert!((sinc_prime(x) - fd).abs() < 1e-9);
        }
        assert_eq!(sinc_prime(0.0), 0.0);
    }
}
