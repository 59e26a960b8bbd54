use std::f64::consts::PI;

use crate::{Error, Result};

const RESCALE: f64 = 1e250;

fn check(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("bessel argument {x}")))
    }
}

/// Hankel asymptotic expansion of J₀ and J₁ for large positive x.
fn hankel_j01(x: f64) -> (f64, f64) {
    let mut out = [0.0; 2];
    for (nu, slot) in out.iter_mut().enumerate() {
        let mu = 4.0 * (nu * nu) as f64;
        let mut p = 0.0;
        let mut q = 0.0;
        let mut term = 1.0;
        let mut last = f64::INFINITY;
        for k in 0..60usize {
            if k % 2 == 0 {
                if (k / 2) % 2 == 0 {
                    p += term;
                } else {
                    p -= term;
                }
            } else if (k / 2) % 2 == 0 {
                q += term;
            } else {
                q -= term;
            }
            let odd = (2 * k + 1) as f64;
            let next = term * (mu - odd * odd) / ((k + 1) as f64 * 8.0 * x);
            if next.abs() < 1e-17 || next.abs() > last {
                break;
            }
            last = next.abs();
            term = next;
        }
        // cos(x - νπ/2 - π/4) and sin of the same phase, expanded to keep precision at large x.
        let (s, c) = x.sin_cos();
        let phase = nu as f64 * PI / 2.0 + PI / 4.0;
        let (sp, cp) = phase.sin_cos();
        let cw = c * cp + s * sp;
        let sw = s * cp - c * sp;
        *slot = (2.0 / (PI * x)).sqrt() * (p * cw - q * sw);
    }
    (out[0], out[1])
}

/// Unnormalised downward recurrence for J from `start`, filling `out[0..=nmax]`.
/// Returns the normalisation sum J₀ + 2ΣJ₂ₖ on the same scale.
fn miller_down(start: usize, nmax: usize, x: f64, out: &mut [f64]) -> f64 {
    let mut jp = 0.0; // J_{k+1}
    let mut j = 1e-300; // J_k
    let mut sum = 0.0;
    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = j;
        }
        if k % 2 == 0 {
            sum += if k == 0 { j } else { 2.0 * j };
        }
        if k == 0 {
            break;
        }
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            sum /= RESCALE;
            for v in out.iter_mut().take(nmax + 1).skip(k + 1) {
                *v /= RESCALE;
            }
        }
    }
    sum
}

fn miller_start(n: f64) -> usize {
    let m = n + 20.0 + (40.0 * n).sqrt();
    2 * ((m as usize) / 2 + 1)
}

/// J₀(x)..J_nmax(x) for x ≥ 0.
fn j_range_nonneg(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 25.0 {
        let start = miller_start(nmax.max(x.ceil() as usize) as f64);
        let sum = miller_down(start, nmax, x, &mut out);
        for v in &mut out {
            *v /= sum;
        }
        return out;
    }
    // Upward recurrence is stable while k < x.
    let (j0, j1) = hankel_j01(x);
    out[0] = j0;
    if nmax == 0 {
        return out;
    }
    out[1] = j1;
    let kx = x.floor() as usize;
    let up_to = nmax.min(kx.max(1));
    for k in 1..up_to {
        out[k + 1] = 2.0 * k as f64 / x * out[k] - out[k - 1];
    }
    if nmax > up_to {
        // Downward tail, matched at the larger of the two overlap values.
        let mut tail = vec![0.0; nmax + 1];
        let start = miller_start(nmax as f64);
        miller_down_partial(start, nmax, up_to - 1, x, &mut tail);
        let m = if out[up_to].abs() >= out[up_to - 1].abs() {
            up_to
        } else {
            up_to - 1
        };
        let scale = out[m] / tail[m];
        for k in up_to + 1..=nmax {
            out[k] = tail[k] * scale;
        }
    }
    out
}

/// Downward recurrence stopping at `stop`; values only matter up to a common factor.
fn miller_down_partial(start: usize, nmax: usize, stop: usize, x: f64, out: &mut [f64]) {
    let mut jp = 0.0;
    let mut j = 1e-300;
    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = j;
        }
        if k == stop {
            break;
        }
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        k -= 1;
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            for v in out.iter_mut().take(nmax + 1).skip(k + 1) {
                *v /= RESCALE;
            }
        }
    }
}

/// Integer-order Bessel functions J₀(x)..J_nmax(x).
pub fn bessel_j_range(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check(x)?;
    let mut out = j_range_nonneg(nmax, x.abs());
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

/// Integer-order Bessel function of the first kind Jₙ(x).
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    check(x)?;
    let m = n.unsigned_abs() as usize;
    let mut v = if x.abs() >= 25.0 && (m as f64) < x.abs() {
        j_range_nonneg(m, x.abs())[m]
    } else if x == 0.0 {
        if m == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        let ax = x.abs();
        let mut out = vec![0.0; m + 1];
        let start = miller_start(m.max(ax.ceil() as usize) as f64);
        let sum = miller_down(start, m, ax, &mut out);
        out[m] / sum
    };
    // Parity in order and in argument.
    let odd = m % 2 == 1;
    if odd && n < 0 {
        v = -v;
    }
    if odd && x < 0.0 {
        v = -v;
    }
    Ok(v)
}

/// Exponentially scaled modified Bessel functions e^{-y} Iₖ(y), k = 0..nmax, y ≥ 0.
pub fn bessel_i_scaled_range(nmax: usize, y: f64) -> Result<Vec<f64>> {
    check(y)?;
    if y < 0.0 {
        return Err(Error::Domain(format!("scaled I needs y ≥ 0, got {y}")));
    }
    let mut out = vec![0.0; nmax + 1];
    if y == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = miller_start(nmax.max(y.ceil() as usize) as f64);
    let mut ip = 0.0;
    let mut i = 1e-300;
    let mut sum = 0.0;
    let mut k = start;
    loop {
        if k <= nmax {
            out[k] = i;
        }
        sum += if k == 0 { i } else { 2.0 * i };
        if k == 0 {
            break;
        }
        let im = 2.0 * k as f64 / y * i + ip;
        ip = i;
        i = im;
        k -= 1;
        if i > RESCALE {
            i /= RESCALE;
            ip /= RESCALE;
            sum /= RESCALE;
            for v in out.iter_mut().skip(k + 1) {
                *v /= RESCALE;
            }
        }
    }
    // I₀ + 2ΣIₖ = e^y.
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Spherical Bessel j₁(x).
pub fn spherical_bessel_j1(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 10.0 + x2 * x2 / 280.0)
    } else {
        let (s, c) = x.sin_cos();
        (s / x - c) / x
    }
}

/// Spherical Bessel functions j₀(x)..j_lmax(x).
pub fn spherical_bessel_range(lmax: usize, x: f64) -> Result<Vec<f64>> {
    check(x)?;
    let mut out = vec![0.0; lmax + 1];
    let ax = x.abs();
    if ax == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let j0 = if ax < 1e-4 { 1.0 - ax * ax / 6.0 } else { ax.sin() / ax };
    let j1 = spherical_bessel_j1(ax);
    if (lmax as f64) < ax {
        out[0] = j0;
        if lmax >= 1 {
            out[1] = j1;
        }
        for l in 1..lmax {
            out[l + 1] = (2 * l + 1) as f64 / ax * out[l] - out[l - 1];
        }
    } else {
        let start = miller_start(lmax as f64);
        let mut jp = 0.0;
        let mut j = 1e-300;
        let mut l = start;
        loop {
            if l <= lmax {
                out[l] = j;
            }
            if l == 0 {
                break;
            }
            let jm = (2 * l + 1) as f64 / ax * j - jp;
            jp = j;
            j = jm;
            l -= 1;
            if j.abs() > RESCALE {
                j /= RESCALE;
                jp /= RESCALE;
                for v in out.iter_mut().skip(l + 1) {
                    *v /= RESCALE;
                }
            }
        }
        let scale = if j0.abs() >= j1.abs() || lmax == 0 {
            j0 / out[0]
        } else {
            j1 / out[1]
        };
        for v in &mut out {
            *v *= scale;
        }
    }
    if x < 0.0 {
        for (l, v) in out.iter_mut().enumerate() {
            if l % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}
