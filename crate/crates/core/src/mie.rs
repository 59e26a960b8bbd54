//! Mie scattering by a homogeneous sphere.
//!
//! Amplitudes follow the Bohren–Huffman convention: for unit incident field the far
//! scattered field is `f e^{ikr}/r` with `f = (i/k)[S₂ E∥ ê∥ + S₁ E⊥ ê⊥]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::mathkit::{gauss_legendre, spherical_bessel_range};
use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct MieSolution {
    pub size_parameter: f64,
    pub relative_index: Complex64,
    /// a₁..a_nmax stored from index 0.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSections {
    pub sca: f64,
    pub abs: f64,
    pub ext: f64,
}

pub fn truncation_order(x: f64) -> usize {
    ((x + 4.05 * x.cbrt() + 2.0).floor() as usize).max(1)
}

/// Partial-wave coefficients for a sphere of radius `radius` in light of wavenumber `k`.
pub fn solve_mie(radius: f64, k: f64, m_rel: Complex64) -> Result<MieSolution> {
    solve_mie_with_order(radius, k, m_rel, None)
}

/// As [`solve_mie`], optionally overriding the truncation order.
pub fn solve_mie_with_order(
    radius: f64,
    k: f64,
    m_rel: Complex64,
    order: Option<usize>,
) -> Result<MieSolution> {
    if !(radius > 0.0 && k > 0.0) || !(m_rel.re.is_finite() && m_rel.im.is_finite()) {
        return Err(Error::Domain(format!("Mie inputs R={radius}, k={k}, m={m_rel}")));
    }
    let x = k * radius;
    if x > 1e4 {
        return Err(Error::Capability(format!(
            "size parameter {x:.3e} is beyond the stable range of the series"
        )));
    }
    let n_max = order.unwrap_or_else(|| truncation_order(x));
    let y = m_rel * x;

    // Logarithmic derivative D_n(mx) by downward recurrence.
    let nmx = (n_max as f64).max(y.norm()).ceil() as usize + 16;
    let mut d = vec![ZERO; nmx + 1];
    for n in (1..=nmx).rev() {
        let nf = n as f64 / y;
        d[n - 1] = nf - 1.0 / (d[n] + nf);
    }

    // Riccati–Bessel ψ_n = x j_n(x), χ_n = −x y_n(x).
    let j = spherical_bessel_range(n_max, x)?;
    let psi: Vec<f64> = j.iter().map(|v| x * v).collect();
    let mut chi = vec![0.0; n_max + 1];
    let (s, c) = x.sin_cos();
    chi[0] = c;
    let chi_m1 = -s;
    for n in 1..=n_max {
        let prev2 = if n == 1 { chi_m1 } else { chi[n - 2] };
        chi[n] = (2 * n - 1) as f64 / x * chi[n - 1] - prev2;
    }

    let mut a = Vec::with_capacity(n_max);
    let mut b = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let nx = n as f64 / x;
        let psi_n = psi[n];
        let psi_prev = psi[n - 1];
        let xi_n = Complex64::new(psi_n, -chi[n]);
        let xi_prev = Complex64::new(psi_prev, -chi[n - 1]);
        let ta = d[n] / m_rel + nx;
        let tb = d[n] * m_rel + nx;
        a.push((ta * psi_n - psi_prev) / (ta * xi_n - xi_prev));
        b.push((tb * psi_n - psi_prev) / (tb * xi_n - xi_prev));
    }
    Ok(MieSolution {
        size_parameter: x,
        relative_index: m_rel,
        a,
        b,
        n_max,
    })
}

fn dot(u: Vec3, v: Vec3) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn cross(u: Vec3, v: Vec3) -> Vec3 {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

fn cdot(e: CVec3, v: Vec3) -> Complex64 {
    e[0] * v[0] + e[1] * v[1] + e[2] * v[2]
}

impl MieSolution {
    /// Amplitude functions S₁(μ), S₂(μ) with μ = cos θ.
    pub fn s1_s2(&self, mu: f64) -> (Complex64, Complex64) {
        let mut s1 = ZERO;
        let mut s2 = ZERO;
        let mut pi_prev = 0.0;
        let mut pi_n = 1.0;
        for n in 1..=self.n_max {
            let nf = n as f64;
            let tau = nf * mu * pi_n - (nf + 1.0) * pi_prev;
            let w = (2.0 * nf + 1.0) / (nf * (nf + 1.0));
            let (an, bn) = (self.a[n - 1], self.b[n - 1]);
            s1 += (an * pi_n + bn * tau) * w;
            s2 += (an * tau + bn * pi_n) * w;
            let next = ((2.0 * nf + 1.0) * mu * pi_n - (nf + 1.0) * pi_prev) / nf;
            pi_prev = pi_n;
            pi_n = next;
        }
        (s1, s2)
    }

    /// Vector far-field amplitude (m) for a unit plane wave travelling along `k_in`
    /// with polarization `pol`, scattered into unit direction `n`.
    pub fn amplitude(&self, k: f64, k_in: Vec3, pol: CVec3, n: Vec3) -> CVec3 {
        let mu = dot(k_in, n).clamp(-1.0, 1.0);
        let (s1, s2) = self.s1_s2(mu);
        let perp = cross(n, k_in);
        let norm = dot(perp, perp).sqrt();
        let pre = I / k;
        if norm < 1e-12 {
            // S₁ = S₂ forward and S₁ = −S₂ backward; both reduce to S₁ times the polarization.
            return [pre * s1 * pol[0], pre * s1 * pol[1], pre * s1 * pol[2]];
        }
        let e_perp = [perp[0] / norm, perp[1] / norm, perp[2] / norm];
        let par_in = cross(k_in, e_perp);
        let par_out = cross(n, e_perp);
        let cp = cdot(pol, par_in) * s2;
        let cs = cdot(pol, e_perp) * s1;
        let mut f = [ZERO; 3];
        for (i, fi) in f.iter_mut().enumerate() {
            *fi = pre * (cp * par_out[i] + cs * e_perp[i]);
        }
        f
    }

    /// Amplitude for an x̂-polarized wave incident along `sign`·ẑ.
    pub fn scattering_amplitude(&self, k: f64, incidence_sign: i32, direction: Vec3) -> CVec3 {
        let kz = if incidence_sign >= 0 { 1.0 } else { -1.0 };
        let x = Complex64::new(1.0, 0.0);
        self.amplitude(k, [0.0, 0.0, kz], [x, ZERO, ZERO], direction)
    }

    pub fn cross_sections(&self, k: f64) -> CrossSections {
        let mut sca = 0.0;
        let mut ext = 0.0;
        for n in 1..=self.n_max {
            let w = (2 * n + 1) as f64;
            let (an, bn) = (self.a[n - 1], self.b[n - 1]);
            sca += w * (an.norm_sqr() + bn.norm_sqr());
            ext += w * (an + bn).re;
        }
        let f = 2.0 * PI / (k * k);
        CrossSections {
            sca: f * sca,
            abs: f * (ext - sca),
            ext: f * ext,
        }
    }

    /// Time-averaged axial force on the sphere centred at `z0` in the standing wave
    /// E₀ cos(kz) x̂, with `e0_sq` = |E₀|².
    pub fn standing_wave_force(&self, k: f64, e0_sq: f64, z0: f64) -> f64 {
        let e0 = e0_sq.sqrt();
        let waves = [
            (1.0, Complex64::from_polar(0.5 * e0, k * z0)),
            (-1.0, Complex64::from_polar(0.5 * e0, -k * z0)),
        ];
        let x = Complex64::new(1.0, 0.0);
        let pol = [x, ZERO, ZERO];
        let total = |n: Vec3| -> CVec3 {
            let mut sum = [ZERO; 3];
            for &(kz, amp) in &waves {
                let f = self.amplitude(k, [0.0, 0.0, kz], pol, n);
                for i in 0..3 {
                    sum[i] += amp * f[i];
                }
            }
            sum
        };

        // Interference of each incident wave with the forward field.
        let mut extinction = 0.0;
        for &(kz, amp) in &waves {
            let fwd = total([0.0, 0.0, kz]);
            extinction += kz * (4.0 * PI / k) * (amp.conj() * fwd[0]).im;
        }

        // Outgoing momentum flux of the scattered field, ∫ n_z |f|² dΩ.
        let gl = gauss_legendre(self.n_max + 8);
        let n_phi = 8;
        let mut flux = 0.0;
        for (&mu, &w) in gl.nodes.iter().zip(&gl.weights) {
            let st = (1.0 - mu * mu).sqrt();
            let mut ring = 0.0;
            for p in 0..n_phi {
                let phi = 2.0 * PI * (p as f64 + 0.5) / n_phi as f64;
                let n = [st * phi.cos(), st * phi.sin(), mu];
                let f = total(n);
                ring += f.iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
            flux += w * mu * ring * 2.0 * PI / n_phi as f64;
        }
        0.5 * EPSILON_0 * (extinction - flux)
    }

    /// F₀ = F_z(−λ/8) in a standing wave with intensity parameter I₀ = cε₀|E₀|²/2.
    pub fn axial_force_amplitude(&self, k: f64, intensity: f64) -> f64 {
        let e0_sq = 2.0 * intensity / (SPEED_OF_LIGHT * EPSILON_0);
        self.standing_wave_force(k, e0_sq, -PI / (4.0 * k))
    }
}

/// φ₀ = 8F₀(E_L/a_L)/(ħcε₀k|E₀|²).
pub fn eikonal_phase(force: f64, fluence: f64, k: f64, e0_sq: f64) -> f64 {
    8.0 * force * fluence / (HBAR * SPEED_OF_LIGHT * EPSILON_0 * k * e0_sq)
}

/// φ₀ per unit fluence (m²/J) for a solved sphere.
pub fn phase_per_fluence(sol: &MieSolution, k: f64) -> f64 {
    let intensity = 1.0;
    let e0_sq = 2.0 * intensity / (SPEED_OF_LIGHT * EPSILON_0);
    eikonal_phase(sol.axial_force_amplitude(k, intensity), 1.0, k, e0_sq)
}

/// Point-dipole phase 2Re(χ)(E_L/a_L)/(ħcε₀).
pub fn rayleigh_phase(chi_re: f64, fluence: f64) -> f64 {
    2.0 * chi_re * fluence / (HBAR * SPEED_OF_LIGHT * EPSILON_0)
}
