//! Optical standing-wave grating: grating functions and generalized Talbot coefficients.
//!
//! The grating acts on the longitudinal density matrix as
//! ⟨z|ρ|z'⟩ → R(z,z') t(z) t*(z') ⟨z|ρ|z'⟩ with t(z) = exp(−iφ₀ cos²kz).
//! Talbot coefficients are the Fourier coefficients of that product taken at
//! z = x − s/2, z' = x + s/2, over one grating period d = λ/2.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{PLANCK, SPEED_OF_LIGHT};
use crate::decoherence::ParticleSpec;
use crate::mathkit::{bessel_i_scaled_range, bessel_j, bessel_j_range, gauss_legendre, spherical_bessel_range};
use crate::mie::{phase_per_fluence, solve_mie, MieSolution};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Sign relating ζ_coh to φ₀ sin(πs/d) in the closed-form coefficients; fixed by
/// requiring the closed form to reproduce the mask Fourier series for a pure-phase grating.
pub const ZETA_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingSpec {
    pub wavelength: f64,
    /// Pulse energy per spot area E_L/a_L in J/m².
    pub fluence: f64,
    /// Intensity parameter I₀ = cε₀|E₀|²/2 in W/m². φ₀ does not depend on it.
    pub intensity: f64,
}

impl GratingSpec {
    pub fn new(wavelength: f64, fluence: f64) -> Result<Self> {
        if !(wavelength > 0.0 && fluence >= 0.0 && fluence.is_finite()) {
            return Err(Error::Domain(format!(
                "grating λ={wavelength} m, E_L/a_L={fluence} J/m²"
            )));
        }
        Ok(Self {
            wavelength,
            fluence,
            intensity: 1e9,
        })
    }

    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn period(&self) -> f64 {
        0.5 * self.wavelength
    }

    /// Photons per unit area in one travelling-wave component, (E_L/a_L)/(ħω).
    pub fn photons_per_area(&self) -> f64 {
        self.fluence * self.wavelength / (PLANCK * SPEED_OF_LIGHT)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GratingFunctions {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub c_abs: f64,
    pub zeta_coh: f64,
}

/// Fluence-independent optical response of one particle to the grating light.
///
/// Angular kernels are stored as Legendre series so that every shift s reduces to
/// spherical Bessel sums via ∫P_l(μ)e^{iκμ}dμ = 2iˡj_l(κ).
#[derive(Debug, Clone)]
pub struct GratingProfile {
    pub wavelength: f64,
    pub mie: MieSolution,
    pub sigma_abs: f64,
    /// φ₀ per unit E_L/a_L.
    pub phase_per_fluence: f64,
    /// (π/k²)(|S₁|² + |S₂|²)
    intensity_coeffs: Vec<f64>,
    /// (π/k²)Re[S₁(μ)S₁*(−μ) − S₂(μ)S₂*(−μ)]
    re_cross_coeffs: Vec<f64>,
    /// (π/k²)Im[S₁(μ)S₁*(−μ) − S₂(μ)S₂*(−μ)]
    im_cross_coeffs: Vec<f64>,
}

fn legendre_values(lmax: usize, mu: f64) -> Vec<f64> {
    let mut p = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = mu;
    }
    for l in 1..lmax {
        p[l + 1] = ((2 * l + 1) as f64 * mu * p[l] - l as f64 * p[l - 1]) / (l + 1) as f64;
    }
    p
}

impl GratingProfile {
    pub fn new(particle: &ParticleSpec, wavelength: f64) -> Result<Self> {
        let k = 2.0 * PI / wavelength;
        let omega = k * SPEED_OF_LIGHT;
        let m_rel = particle.material.eps(omega).sqrt();
        let mie = solve_mie(particle.radius, k, m_rel)?;
        Ok(Self::from_mie(mie, wavelength))
    }

    pub fn from_mie(mie: MieSolution, wavelength: f64) -> Self {
        let k = 2.0 * PI / wavelength;
        let lmax = 2 * mie.n_max;
        let gl = gauss_legendre(2 * mie.n_max + 4);
        let mut ic = vec![0.0; lmax + 1];
        let mut rc = vec![0.0; lmax + 1];
        let mut imc = vec![0.0; lmax + 1];
        let pre = PI / (k * k);
        for (&mu, &w) in gl.nodes.iter().zip(&gl.weights) {
            let (s1, s2) = mie.s1_s2(mu);
            let (r1, r2) = mie.s1_s2(-mu);
            let inten = pre * (s1.norm_sqr() + s2.norm_sqr());
            let g = (s1 * r1.conj() - s2 * r2.conj()) * pre;
            let pl = legendre_values(lmax, mu);
            for l in 0..=lmax {
                let wl = w * pl[l] * (2 * l + 1) as f64 * 0.5;
                ic[l] += wl * inten;
                rc[l] += wl * g.re;
                imc[l] += wl * g.im;
            }
        }
        let sigma_abs = mie.cross_sections(k).abs.max(0.0);
        let phase_per_fluence = phase_per_fluence(&mie, k);
        Self {
            wavelength,
            mie,
            sigma_abs,
            phase_per_fluence,
            intensity_coeffs: ic,
            re_cross_coeffs: rc,
            im_cross_coeffs: imc,
        }
    }

    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn period(&self) -> f64 {
        0.5 * self.wavelength
    }

    pub fn phi0(&self, fluence: f64) -> f64 {
        self.phase_per_fluence * fluence
    }

    fn photons(&self, fluence: f64) -> f64 {
        fluence * self.wavelength / (PLANCK * SPEED_OF_LIGHT)
    }

    /// Grating functions at shift `s` for the given E_L/a_L.
    pub fn functions(&self, fluence: f64, s: f64) -> Result<GratingFunctions> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("shift {s}")));
        }
        if s == 0.0 {
            return Ok(GratingFunctions::default());
        }
        let k = self.k();
        let kappa = k * s;
        let lmax = self.intensity_coeffs.len() - 1;
        let j = spherical_bessel_range(lmax, kappa)?;
        let two_c = 2.0 * self.photons(fluence);

        // ∫P e^{−iκμ} = Σ p_l 2(−i)^l j_l(κ), then F uses Re[e^{iκ}·that] − ∫P.
        let mut conv = ZERO;
        let mut re_even = 0.0;
        let mut im_odd = 0.0;
        for l in 0..=lmax {
            let phase = match l % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, -1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, 1.0),
            };
            conv += phase * (2.0 * self.intensity_coeffs[l] * j[l]);
            let sign = if (l / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if l % 2 == 0 {
                re_even += sign * 2.0 * self.re_cross_coeffs[l] * j[l];
            } else {
                im_odd += sign * 2.0 * self.im_cross_coeffs[l] * j[l];
            }
        }
        let total = 2.0 * self.intensity_coeffs[0];
        let f = two_c * ((Complex64::from_polar(1.0, kappa) * conv).re - total);
        let a = two_c * (re_even - 2.0 * self.re_cross_coeffs[0] * kappa.cos());
        let b = -two_c * im_odd;
        let d = self.period();
        let c_abs = 4.0 * self.sigma_abs * self.photons(fluence) * (1.0 - (PI * s / d).cos());
        let zeta_coh = ZETA_SIGN * self.phi0(fluence) * (PI * s / d).sin();
        Ok(GratingFunctions {
            a,
            b,
            f: f.min(0.0),
            c_abs: c_abs.max(0.0),
            zeta_coh,
        })
    }

    /// ∂b/∂s at s = 0, used by the classical limit.
    pub fn b_slope(&self, fluence: f64) -> f64 {
        let h1 = self.im_cross_coeffs.get(1).copied().unwrap_or(0.0);
        -2.0 * self.photons(fluence) * self.k() * 2.0 / 3.0 * h1
    }
}

pub fn grating_functions(
    particle: &ParticleSpec,
    grating: &GratingSpec,
    s: f64,
) -> Result<GratingFunctions> {
    GratingProfile::new(particle, grating.wavelength)?.functions(grating.fluence, s)
}

/// Fourier coefficients b_k, k = −n..n, of t(z) = exp(−iφ₀cos²kz); index k is stored at k + n.
pub fn coherent_fourier_coefficients(phi0: f64, n: usize) -> Result<Vec<Complex64>> {
    let half = 0.5 * phi0;
    let j = bessel_j_range(n, half)?;
    let global = Complex64::from_polar(1.0, -half);
    let mut out = vec![ZERO; 2 * n + 1];
    for k in -(n as i64)..=(n as i64) {
        let m = k.unsigned_abs() as usize;
        let jk = if k < 0 && m % 2 == 1 { -j[m] } else { j[m] };
        let mi = match k.rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        out[(k + n as i64) as usize] = global * mi * jk;
    }
    Ok(out)
}

fn order_for(x: f64) -> usize {
    let x = x.abs();
    (x + 10.0 * (1.0 + x.cbrt())).ceil() as usize + 4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TalbotMethod {
    /// Convolution of coherent coefficients with the DFT of the decoherence mask.
    Exact,
    /// Bessel-product closed form.
    #[default]
    ClosedForm,
    /// Evaluate both and fail if they disagree beyond 1e-6.
    Checked,
}

/// Convolution of coherent coefficients with the decoherence-mask DFT.
pub fn talbot_exact(n: i64, s_over_d: f64, phi0: f64, g: &GratingFunctions) -> Result<Complex64> {
    let kb = order_for(0.5 * phi0);
    let b = coherent_fourier_coefficients(phi0, kb)?;
    let coef = |k: i64| -> Complex64 {
        if k.unsigned_abs() as usize > kb {
            ZERO
        } else {
            b[(k + kb as i64) as usize]
        }
    };
    let a_tot = g.a + 0.5 * g.c_abs;
    let jr = order_for(a_tot.abs() + g.b.abs()) as i64;
    let mut m = 256usize;
    while m < 8 * (jr as usize + 8) {
        m *= 2;
    }
    let mask: Vec<Complex64> = (0..m)
        .map(|p| {
            let th = 2.0 * PI * p as f64 / m as f64;
            Complex64::new(g.f - 0.5 * g.c_abs + a_tot * th.cos(), g.b * th.sin()).exp()
        })
        .collect();
    let mut total = ZERO;
    let kb = kb as i64;
    for j in -jr..=jr {
        let mut rj = ZERO;
        for (p, v) in mask.iter().enumerate() {
            rj += v * Complex64::from_polar(1.0, -2.0 * PI * (j * p as i64) as f64 / m as f64);
        }
        rj /= m as f64;
        let mcoh = n - j;
        let mut bc = ZERO;
        for k in -kb..=kb {
            let other = coef(k - mcoh);
            if other == ZERO {
                continue;
            }
            bc += coef(k)
                * other.conj()
                * Complex64::from_polar(1.0, PI * (mcoh - 2 * k) as f64 * s_over_d);
        }
        total += bc * rj;
    }
    Ok(total)
}

/// (u/x)^p J_p(x) with x² = `x2` (either sign), scaled by e^{-shift}; returns values for
/// p = 0..=pmax together with the shift.
fn reduced_bessel(u: f64, x2: f64, pmax: usize) -> Result<(Vec<f64>, f64)> {
    let mut out = vec![0.0; pmax + 1];
    if x2.abs() <= 4.0 || u == 0.0 {
        // Ascending series (u/2)^p Σ (−x²/4)^j / (j!(p+j)!).
        let mut log_fact = 0.0;
        for (p, slot) in out.iter_mut().enumerate() {
            if p > 0 {
                log_fact += (p as f64).ln();
            }
            if u == 0.0 {
                *slot = if p == 0 { 1.0 } else { 0.0 };
                if p == 0 {
                    let mut term = 1.0;
                    let mut sum = 1.0;
                    for j in 1..200 {
                        term *= -x2 / 4.0 / (j as f64 * j as f64);
                        sum += term;
                        if term.abs() < 1e-18 * sum.abs() {
                            break;
                        }
                    }
                    *slot = sum;
                }
                continue;
            }
            let lead = p as f64 * (0.5 * u.abs()).ln() - log_fact;
            let mut term = 1.0;
            let mut sum = 1.0;
            for j in 1..200 {
                term *= -x2 / 4.0 / (j as f64 * (p + j) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            let sign = if u < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
            *slot = if lead < -700.0 { 0.0 } else { sign * lead.exp() * sum };
        }
        return Ok((out, 0.0));
    }
    let (vals, arg, shift) = if x2 > 0.0 {
        let x = x2.sqrt();
        (bessel_j_range(pmax, x)?, x, 0.0)
    } else {
        let y = (-x2).sqrt();
        (bessel_i_scaled_range(pmax, y)?, y, y)
    };
    let lr = (u.abs() / arg).ln();
    for (p, slot) in out.iter_mut().enumerate() {
        let v = vals[p];
        if v == 0.0 {
            continue;
        }
        let lg = p as f64 * lr + v.abs().ln();
        let sign = v.signum() * if u < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
        *slot = if lg < -700.0 { 0.0 } else { sign * lg.exp() };
    }
    Ok((out, shift))
}

/// Closed-form coefficient B_n = e^{F−c/2} Σ_k J_k(b') X_{n+k} with ζ = η φ₀ sin(πs/d),
/// b' = −b and X_m = ((ζ+A)/x)^m J_m(x), x² = ζ² − A², A = a + c_abs/2.
pub fn talbot_closed_form(n: i64, g: &GratingFunctions) -> Result<Complex64> {
    let zeta = g.zeta_coh;
    let a_tot = g.a + 0.5 * g.c_abs;
    let bp = -g.b;
    let kb = order_for(bp) as i64;
    let x2 = zeta * zeta - a_tot * a_tot;
    let pmax = (n.unsigned_abs() as i64 + kb) as usize;
    let (pos, s1) = reduced_bessel(zeta + a_tot, x2, pmax)?;
    let (neg, s2) = reduced_bessel(a_tot - zeta, x2, pmax)?;
    debug_assert_eq!(s1, s2);
    let jb = bessel_j_range(kb as usize, bp)?;
    let jk = |k: i64| -> f64 {
        let m = k.unsigned_abs() as usize;
        if k < 0 && m % 2 == 1 {
            -jb[m]
        } else {
            jb[m]
        }
    };
    let mut sum = 0.0;
    for k in -kb..=kb {
        let m = n + k;
        let x = if m >= 0 {
            pos[m as usize]
        } else {
            neg[m.unsigned_abs() as usize]
        };
        sum += jk(k) * x;
    }
    let scale = (g.f - 0.5 * g.c_abs + s1).exp();
    Ok(Complex64::new(sum * scale, 0.0))
}

pub fn talbot_with(
    n: i64,
    s_over_d: f64,
    phi0: f64,
    g: &GratingFunctions,
    method: TalbotMethod,
) -> Result<Complex64> {
    match method {
        TalbotMethod::Exact => talbot_exact(n, s_over_d, phi0, g),
        TalbotMethod::ClosedForm => talbot_closed_form(n, g),
        TalbotMethod::Checked => {
            let e = talbot_exact(n, s_over_d, phi0, g)?;
            let c = talbot_closed_form(n, g)?;
            if (e - c).norm() > 1e-6 {
                return Err(Error::Consistency(format!(
                    "Talbot B_{n} at s/d={s_over_d}: exact {e} vs closed form {c}"
                )));
            }
            Ok(c)
        }
    }
}

/// Quantum Talbot coefficient B_n(s/d), cross-checked between both constructions.
pub fn talbot_quantum(
    n: i64,
    s: f64,
    particle: &ParticleSpec,
    grating: &GratingSpec,
) -> Result<Complex64> {
    let profile = GratingProfile::new(particle, grating.wavelength)?;
    let g = profile.functions(grating.fluence, s)?;
    talbot_with(
        n,
        s / profile.period(),
        profile.phi0(grating.fluence),
        &g,
        TalbotMethod::Checked,
    )
}

/// Classical (ħ → 0) coefficient from a profile: J_n((b'(0) − φ₀π/d)s).
pub fn talbot_classical_from(profile: &GratingProfile, fluence: f64, n: i64, s: f64) -> Result<f64> {
    let arg = (profile.b_slope(fluence) - profile.phi0(fluence) * PI / profile.period()) * s;
    bessel_j(n, arg)
}

pub fn talbot_classical(
    n: i64,
    s: f64,
    particle: &ParticleSpec,
    grating: &GratingSpec,
) -> Result<f64> {
    let profile = GratingProfile::new(particle, grating.wavelength)?;
    talbot_classical_from(&profile, grating.fluence, n, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientKind {
    Quantum,
    Classical,
    CoherentOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TalbotCoefficients {
    pub values: Vec<Complex64>,
    pub shift: f64,
    pub truncation: usize,
    pub kind: CoefficientKind,
}

/// B_0..B_N at one shift.
pub fn talbot_coefficients(
    profile: &GratingProfile,
    fluence: f64,
    s: f64,
    truncation: usize,
    kind: CoefficientKind,
) -> Result<TalbotCoefficients> {
    let values = (0..=truncation as i64)
        .map(|n| match kind {
            CoefficientKind::Classical => {
                talbot_classical_from(profile, fluence, n, s).map(|v| Complex64::new(v, 0.0))
            }
            CoefficientKind::CoherentOnly => {
                let arg = -profile.phi0(fluence) * (PI * s / profile.period()).sin();
                bessel_j(n, arg).map(|v| Complex64::new(v, 0.0))
            }
            CoefficientKind::Quantum => {
                let g = profile.functions(fluence, s)?;
                talbot_closed_form(n, &g)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TalbotCoefficients {
        values,
        shift: s,
        truncation,
        kind,
    })
}
