use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Si(x) = ∫₀ˣ sin(u)/u du.
///
/// Power series for |x| ≤ 4, the continued fraction for E₁(ix) beyond.
pub fn sine_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("sine integral of {x}")));
    }
    if x < 0.0 {
        return sine_integral(-x).map(|v| -v);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= 4.0 {
        let x2 = x * x;
        let mut term = x; // x^{2k+1}/(2k+1)!
        let mut sum = x;
        let mut k = 0usize;
        loop {
            k += 1;
            let a = (2 * k) as f64;
            term *= -x2 / (a * (a + 1.0));
            let contrib = term / (a + 1.0);
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return Ok(sum);
    }

    // Modified Lentz evaluation of the continued fraction for E₁(ix).
    const TINY: f64 = 1e-300;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = one / b;
    let mut h = d;
    for i in 2..100_000u64 {
        let a = -(((i - 1) * (i - 1)) as f64);
        b += 2.0;
        d = one / (d * a + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    let (s, co) = x.sin_cos();
    h *= Complex64::new(co, -s);
    Ok(FRAC_PI_2 + h.im)
}

/// 1 − Si(u)/u, accurate for small u.
pub fn si_deficit(u: f64) -> f64 {
    let u = u.abs();
    if u < 1e-2 {
        let u2 = u * u;
        return u2 / 18.0 - u2 * u2 / 600.0 + u2 * u2 * u2 / 35280.0;
    }
    if !u.is_finite() {
        return 1.0;
    }
    1.0 - sine_integral(u).unwrap_or(FRAC_PI_2) / u
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
