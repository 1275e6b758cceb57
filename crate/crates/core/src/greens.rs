//! Far-field path amplitudes `ψ` and polarization factors `U`.
//!
//! The far field of emitter `i` at direction `(θ, φ)` factorizes as
//! `E ∝ U(θ, φ) ψ(θ, z_i)`, with the common radial envelope `e^{ik₀r}/4πr`
//! dropped. `ψ` carries the optical path (direct wave plus any reflected or
//! scattered wave) and `U` the dipole's angular pattern.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Environment, K0};
use crate::specialfns::{
    fresnel_rp, fresnel_rs, legendre_fl_seq, mie_rtm_seq, spherical_hankel1_seq, Reflection,
};

const TRUNCATION_TOL: f64 = 1e-12;
pub const DEFAULT_L_MAX: usize = 60;

/// Direct free-space path amplitude `e^{-ik₀ z cos θ}`.
pub fn psi_free(theta: f64, z: f64) -> Complex64 {
    Complex64::from_polar(1.0, -K0 * z * theta.cos())
}

/// p- and s-reflection coefficients of a planar environment at polar angle `θ`.
pub fn planar_reflection(env: &Environment, theta: f64) -> Result<(Reflection, Reflection)> {
    let (rp, rs) = match *env {
        Environment::FreeSpace => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        Environment::PerfectMirror => (Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)),
        Environment::Substrate { epsilon } => (fresnel_rp(epsilon, theta), fresnel_rs(epsilon, theta)),
        Environment::Sphere { .. } => {
            return Err(Error::Unsupported("planar reflection requested for a sphere".into()))
        }
    };
    Ok((Reflection::new(rp), Reflection::new(rs)))
}

/// Direct wave plus image wave weighted by `r`: `e^{-ia} + r e^{ia}`, `a = k₀ z cos θ`.
///
/// This equals `e^{iα/2}(e^{-i(a+α/2)} + |r| e^{i(a+α/2)})` for `r = |r| e^{iα}`.
pub fn image_sum(theta: f64, z: f64, r: Complex64) -> Complex64 {
    let direct = psi_free(theta, z);
    direct + r * direct.conj()
}

/// Path amplitude of a vertical dipole above a planar environment.
pub fn psi_substrate_vertical(theta: f64, z: f64, env: &Environment) -> Result<Complex64> {
    let (rp, _) = planar_reflection(env, theta)?;
    Ok(image_sum(theta, z, rp.value))
}

/// Polarization-resolved path amplitudes of one emitter above a planar
/// environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathAmplitude {
    /// θ-polarized wave radiated by the in-plane dipole component.
    pub theta_par: Complex64,
    /// θ-polarized wave radiated by the vertical dipole component.
    pub theta_z: Complex64,
    /// φ-polarized wave radiated by the in-plane dipole component.
    pub phi_par: Complex64,
}

/// Angular factors multiplying the matching [`PathAmplitude`] channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationFactor {
    pub theta_par: f64,
    pub theta_z: f64,
    pub phi_par: f64,
}

impl PolarizationFactor {
    pub fn new(theta: f64, phi: f64, mu: [f64; 3]) -> Self {
        let [mx, my, mz] = mu;
        let (sp, cp) = phi.sin_cos();
        PolarizationFactor {
            theta_par: (mx * cp + my * sp) * theta.cos(),
            theta_z: -mz * theta.sin(),
            phi_par: -(mx * sp - my * cp),
        }
    }

    /// `U_θ` and `U_φ` of a dipole in free space.
    pub fn free_components(&self) -> (f64, f64) {
        (self.theta_par + self.theta_z, self.phi_par)
    }
}

impl PathAmplitude {
    pub fn new(theta: f64, z: f64, rp: Complex64, rs: Complex64) -> Self {
        PathAmplitude {
            theta_par: image_sum(theta, z, -rp),
            theta_z: image_sum(theta, z, rp),
            phi_par: image_sum(theta, z, rs),
        }
    }

    /// θ- and φ-polarized field amplitudes `(E_θ, E_φ)`.
    pub fn field(&self, u: &PolarizationFactor) -> (Complex64, Complex64) {
        (self.theta_par * u.theta_par + self.theta_z * u.theta_z, self.phi_par * u.phi_par)
    }
}

/// All three path channels of an emitter at height `z` together with the
/// polarization factors for dipole direction `mu` and detector azimuth `phi`.
pub fn psi_substrate_components(
    theta: f64,
    phi: f64,
    z: f64,
    env: &Environment,
    mu: [f64; 3],
) -> Result<(PathAmplitude, PolarizationFactor)> {
    let (rp, rs) = planar_reflection(env, theta)?;
    Ok((PathAmplitude::new(theta, z, rp.value, rs.value), PolarizationFactor::new(theta, phi, mu)))
}

/// Emitter position relative to the sphere centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Emitter at `+b ẑ`.
    Upper,
    /// Emitter at `-b ẑ`.
    Lower,
}

/// Multipole coefficients of the light scattered by a sphere for a vertical
/// dipole on the z axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereMultipoles {
    pub epsilon: Complex64,
    /// `k₀R`.
    pub kr: f64,
    /// `k₀b`.
    pub kb: f64,
    /// Entry `i` holds `c_{i+1}` for the upper emitter.
    pub c: Vec<Complex64>,
    /// Entry `i` holds `c̃_{i+1}` for the lower emitter.
    pub c_tilde: Vec<Complex64>,
    /// Mie coefficients `r_{l,TM}` that built the tables.
    pub r_tm: Vec<Complex64>,
    /// `h_l^{(1)}(k₀b)` for `l = 0..=l_max`.
    pub hankel: Vec<Complex64>,
    /// Whether the coefficients fell below the truncation tolerance before `l_max`.
    pub converged: bool,
}

impl SphereMultipoles {
    /// Builds the coefficient tables up to `l_max`, then truncates once
    /// `|c_l|` stays below `1e-12` of the largest coefficient seen.
    pub fn new(epsilon: Complex64, radius: f64, offset: f64, l_max: usize) -> Result<Self> {
        let mut m = Self::untruncated(epsilon, radius, offset, l_max)?;
        let peak = m.c.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            m.truncate(0);
            m.converged = true;
            return Ok(m);
        }
        let cutoff = m.c.iter().rposition(|c| c.norm() >= TRUNCATION_TOL * peak).map_or(0, |i| i + 1);
        m.converged = cutoff < l_max;
        m.truncate(cutoff);
        Ok(m)
    }

    /// Full tables up to `l_max` with no truncation.
    pub fn untruncated(epsilon: Complex64, radius: f64, offset: f64, l_max: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::Domain(format!("sphere radius must be positive, got {radius}")));
        }
        if !(offset > radius) {
            return Err(Error::Domain(format!("emitter inside sphere (b = {offset}, R = {radius})")));
        }
        if l_max == 0 {
            return Err(Error::Domain("l_max must be at least 1".into()));
        }
        let kr = K0 * radius;
        let kb = K0 * offset;
        let r_tm = mie_rtm_seq(l_max, epsilon, kr)?;
        let hankel = spherical_hankel1_seq(l_max, kb)?;
        let mut c = Vec::with_capacity(l_max);
        let mut c_tilde = Vec::with_capacity(l_max);
        for l in 1..=l_max {
            let r = r_tm[l - 1];
            let base = if r == Complex64::new(0.0, 0.0) {
                Complex64::new(0.0, 0.0)
            } else {
                (2 * l + 1) as f64 * r * hankel[l] / kb * Complex64::i().powu((l + 1) as u32)
            };
            let odd = l % 2 == 1;
            c.push(if odd { -base } else { base });
            c_tilde.push(-base);
        }
        Ok(SphereMultipoles { epsilon, kr, kb, c, c_tilde, r_tm, hankel, converged: true })
    }

    pub fn from_environment(env: &Environment, l_max: usize) -> Result<Self> {
        match *env {
            Environment::Sphere { epsilon, radius, offset } => Self::new(epsilon, radius, offset, l_max),
            _ => Err(Error::Unsupported(format!("multipoles requested for {} geometry", env.name()))),
        }
    }

    fn truncate(&mut self, n: usize) {
        self.c.truncate(n);
        self.c_tilde.truncate(n);
        self.r_tm.truncate(n);
        self.hankel.truncate(n + 1);
    }

    /// Highest multipole order kept.
    pub fn l_max(&self) -> usize {
        self.c.len()
    }

    /// `c_l` (upper) or `c̃_l` (lower), `l >= 1`.
    pub fn coefficient(&self, side: Side, l: usize) -> Option<Complex64> {
        let table = match side {
            Side::Upper => &self.c,
            Side::Lower => &self.c_tilde,
        };
        l.checked_sub(1).and_then(|i| table.get(i).copied())
    }

    /// Scattered part `Σ_l c_l f_l(cos θ)` of the path amplitude.
    pub fn scattered(&self, theta: f64, side: Side) -> Complex64 {
        let table = match side {
            Side::Upper => &self.c,
            Side::Lower => &self.c_tilde,
        };
        let f = legendre_fl_seq(table.len(), theta.cos());
        table.iter().zip(&f[1..]).map(|(c, fl)| c * fl).sum()
    }
}

/// Total path amplitude of a sphere-dimer emitter: the direct wave
/// `e^{∓ik₀b cos θ}` plus the scattered multipole sum.
pub fn psi_sphere(theta: f64, side: Side, multipoles: &SphereMultipoles) -> Complex64 {
    let b = multipoles.kb / K0;
    let direct = match side {
        Side::Upper => psi_free(theta, b),
        Side::Lower => psi_free(theta, -b),
    };
    direct + multipoles.scattered(theta, side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig4_sphere(eps: Complex64) -> SphereMultipoles {
        let lambda = 2.0 * PI * crate::model::HBAR_C_EV_NM / 3.0;
        SphereMultipoles::new(eps, 200.0 / lambda, 300.0 / lambda, DEFAULT_L_MAX).unwrap()
    }

    #[test]
    fn free_phase() {
        assert_relative_eq!(psi_free(FRAC_PI_2, 3.7).re, 1.0, epsilon = 1e-14);
        assert_eq!(psi_free(1.1, 0.0), c(1.0, 0.0));
        let v = psi_free(0.0, 0.5);
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mirror_vertical_dipole() {
        let env = Environment::PerfectMirror;
        let theta = (0.25f64 / 0.6).acos();
        let v = psi_substrate_vertical(theta, 0.6, &env).unwrap();
        assert!(v.norm() < 1e-14);
        for z in [0.0, 0.3, 1.7] {
            let v = psi_substrate_vertical(FRAC_PI_2, z, &env).unwrap();
            assert!((v - c(2.0, 0.0)).norm() < 1e-14);
        }
        for th in [0.1, 0.7, 1.3] {
            let v = psi_substrate_vertical(th, 0.8, &env).unwrap();
            assert_relative_eq!(v.re, 2.0 * (K0 * 0.8 * f64::cos(th)).cos(), epsilon = 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
    }

    #[test]
    fn vacuum_substrate_recovers_free_space() {
        let env = Environment::Substrate { epsilon: c(1.0, 0.0) };
        for th in [0.0, 0.4, 1.2, FRAC_PI_2] {
            let v = psi_substrate_vertical(th, 0.73, &env).unwrap();
            assert!((v - psi_free(th, 0.73)).norm() < 1e-15);
            let (p, _) = psi_substrate_components(th, 0.3, 0.73, &env, [0.6, 0.0, 0.8]).unwrap();
            for ch in [p.theta_par, p.theta_z, p.phi_par] {
                assert!((ch - psi_free(th, 0.73)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn printed_phase_split_equals_image_sum() {
        let eps = c(-5.0, 0.1);
        for th in [0.2, 0.9, 1.4] {
            let r = Reflection::new(fresnel_rp(eps, th));
            let a = K0 * 1.7 * f64::cos(th);
            let half = Complex64::from_polar(1.0, r.phase / 2.0);
            let printed = half
                * (Complex64::from_polar(1.0, -(a + r.phase / 2.0))
                    + r.modulus * Complex64::from_polar(1.0, a + r.phase / 2.0));
            assert!((printed - image_sum(th, 1.7, r.value)).norm() < 1e-14);
        }
    }

    #[test]
    fn components_reduce_for_vertical_dipole() {
        let env = Environment::Substrate { epsilon: c(2.13, 0.0) };
        let (p, u) = psi_substrate_components(0.8, 0.4, 0.6, &env, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.theta_z, psi_substrate_vertical(0.8, 0.6, &env).unwrap());
        assert_eq!(u.theta_par, 0.0);
        assert_eq!(u.phi_par, 0.0);
        assert_relative_eq!(u.theta_z, -f64::sin(0.8));
    }

    #[test]
    fn mirror_cancels_parallel_dipole_near_surface() {
        let env = Environment::PerfectMirror;
        let (p, _) = psi_substrate_components(0.5, 0.0, 1e-9, &env, [1.0, 0.0, 0.0]).unwrap();
        assert!(p.theta_par.norm() < 1e-7);
        assert!(p.phi_par.norm() < 1e-7);
    }

    #[test]
    fn sphere_rejects_planar_requests() {
        let env = Environment::Sphere { epsilon: c(2.0, 0.0), radius: 0.4, offset: 0.7 };
        assert!(psi_substrate_vertical(0.3, 0.1, &env).is_err());
    }

    #[test]
    fn vacuum_sphere_has_no_multipoles() {
        let m = SphereMultipoles::new(c(1.0, 0.0), 0.48, 0.73, 20).unwrap();
        assert!(m.converged);
        for th in [0.0, 1.0, 2.5, PI] {
            assert_eq!(psi_sphere(th, Side::Upper, &m), psi_free(th, 0.73));
            assert_eq!(psi_sphere(th, Side::Lower, &m), psi_free(th, -0.73));
        }
    }

    #[test]
    fn multipole_parity() {
        for eps in [c(2.13, 0.0), c(-5.0, 0.1), c(-3.0, 0.01)] {
            let m = fig4_sphere(eps);
            assert!(m.converged);
            for (l, (a, b)) in m.c.iter().zip(&m.c_tilde).enumerate() {
                let sign = if (l + 1) % 2 == 1 { 1.0 } else { -1.0 };
                assert_eq!(*b, sign * a);
            }
        }
    }

    #[test]
    fn diametric_mirror_symmetry() {
        let m = fig4_sphere(c(-3.0, 0.01));
        for th in [0.0, 0.3, 1.1, FRAC_PI_2, 2.9] {
            let up = psi_sphere(th, Side::Upper, &m);
            let down = psi_sphere(PI - th, Side::Lower, &m);
            assert!((up - down).norm() <= 1e-12 * up.norm().max(1.0));
        }
    }

    #[test]
    fn truncation_is_stable() {
        for eps in [c(2.13, 0.0), c(-5.0, 0.1), c(-3.0, 0.01)] {
            let m = fig4_sphere(eps);
            let l = m.l_max();
            assert!(l > 5 && l < DEFAULT_L_MAX);
            let full = SphereMultipoles::untruncated(eps, m.kr / K0, m.kb / K0, 2 * l).unwrap();
            for th in [0.0, 0.7, 1.9, PI] {
                let a = psi_sphere(th, Side::Upper, &m);
                let b = psi_sphere(th, Side::Upper, &full);
                assert!((a - b).norm() < 1e-10 * b.norm());
            }
        }
    }

    #[test]
    fn sphere_amplitude_matches_printed_expansion() {
        let m = fig4_sphere(c(-5.0, 0.1));
        let kb = m.kb;
        let (t, tp) = (0.4f64, 2.2f64);
        let psi = psi_sphere(t, Side::Upper, &m) * psi_sphere(tp, Side::Lower, &m)
            + psi_sphere(tp, Side::Upper, &m) * psi_sphere(t, Side::Lower, &m);
        let n = m.l_max();
        let f = legendre_fl_seq(n, t.cos());
        let fp = legendre_fl_seq(n, tp.cos());
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let mut expanded = e(-kb * (t.cos() - tp.cos())) + e(kb * (t.cos() - tp.cos()));
        for l in 1..=n {
            let (cl, ctl) = (m.c[l - 1], m.c_tilde[l - 1]);
            expanded += fp[l] * (ctl * e(-kb * t.cos()) + cl * e(kb * t.cos()));
            expanded += f[l] * (ctl * e(-kb * tp.cos()) + cl * e(kb * tp.cos()));
            for lp in 1..=n {
                let (clp, ctlp) = (m.c[lp - 1], m.c_tilde[lp - 1]);
                expanded += f[l] * fp[lp] * (cl * ctlp + clp * ctl);
            }
        }
        assert!((psi - expanded).norm() < 1e-10 * psi.norm().max(1.0));
    }

    proptest! {
        #[test]
        fn free_amplitude_is_a_phase(theta in 0.0..PI, z in -5.0f64..5.0) {
            prop_assert!((psi_free(theta, z).norm() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn image_bound(theta in 0.0..FRAC_PI_2, z in 0.0f64..3.0, re in 1.0f64..20.0) {
            let env = Environment::Substrate { epsilon: c(re, 0.0) };
            let (rp, _) = planar_reflection(&env, theta).unwrap();
            let v = psi_substrate_vertical(theta, z, &env).unwrap();
            prop_assert!(v.norm() <= 1.0 + rp.modulus + 1e-12);
        }
    }
}
