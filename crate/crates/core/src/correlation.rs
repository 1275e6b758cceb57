//! Two-photon amplitudes, intensities and the normalized correlation `g²`.
//!
//! For a detector pair at polar angles `(θ, θ′)` the symmetrized path
//! function is `Ψ = ψ₁(θ)ψ₂(θ′) + ψ₁(θ′)ψ₂(θ)` and
//!
//! ```text
//! g²(θ, θ′) = |Ψ|² ⟨σ₁†σ₂†σ₁σ₂⟩ / (S(θ) S(θ′)),   S(θ) = Σ_ij ψ_i*(θ) ψ_j(θ) ⟨σ_i†σ_j⟩.
//! ```
//!
//! When the path amplitudes depend on polarization (tilted dipoles above a
//! substrate) the field of each emitter is split into θ and φ components
//! and the four channel amplitudes `Ψ_{αβ}` replace `Ψ`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::CorrelatorSet;
use crate::error::{Error, Result};
use crate::greens::{
    image_sum, planar_reflection, psi_free, psi_sphere, PathAmplitude, PolarizationFactor, Side,
    SphereMultipoles, DEFAULT_L_MAX,
};
use crate::model::{DimerConfig, Environment, GridSpec};

/// Fraction of the largest marginal intensity below which `g²` is masked.
pub const MASK_FLOOR: f64 = 1e-14;

/// θ and φ field components of each emitter, `fields[i][α]`.
pub type EmitterFields = [[Complex64; 2]; 2];

/// Emitters and environment with everything that does not depend on the
/// detection angle precomputed.
#[derive(Debug, Clone)]
pub struct Scene {
    pub environment: Environment,
    pub dimer: DimerConfig,
    /// Detector azimuth.
    pub phi: f64,
    multipoles: Option<SphereMultipoles>,
}

impl Scene {
    pub fn new(environment: Environment, dimer: DimerConfig) -> Result<Self> {
        Self::with_lmax(environment, dimer, DEFAULT_L_MAX)
    }

    pub fn with_lmax(environment: Environment, dimer: DimerConfig, l_max: usize) -> Result<Self> {
        let multipoles = match environment {
            Environment::Sphere { .. } => {
                if !dimer.is_vertical() {
                    return Err(Error::Unsupported("sphere dimers are modelled with radial dipoles".into()));
                }
                Some(SphereMultipoles::from_environment(&environment, l_max)?)
            }
            _ => None,
        };
        Ok(Scene { environment, dimer, phi: 0.0, multipoles })
    }

    pub fn with_azimuth(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn multipoles(&self) -> Option<&SphereMultipoles> {
        self.multipoles.as_ref()
    }

    fn check_angle(&self, theta: f64) -> Result<()> {
        let max = self.environment.default_theta_max();
        if !(0.0..=max + 1e-12).contains(&theta) {
            return Err(Error::Domain(format!(
                "detection angle {theta} outside [0, {max}] for {} geometry",
                self.environment.name()
            )));
        }
        Ok(())
    }

    /// Whether a single scalar `ψ` per emitter describes the emission.
    pub fn is_polarization_independent(&self) -> bool {
        match self.environment {
            Environment::FreeSpace => true,
            _ => self.dimer.is_vertical(),
        }
    }

    /// Scalar path amplitudes `[ψ₁(θ), ψ₂(θ)]`.
    pub fn psi(&self, theta: f64) -> Result<[Complex64; 2]> {
        self.check_angle(theta)?;
        let (z1, z2) = (self.dimer.z1, self.dimer.z2);
        match &self.environment {
            Environment::FreeSpace => Ok([psi_free(theta, z1), psi_free(theta, z2)]),
            Environment::PerfectMirror | Environment::Substrate { .. } => {
                if !self.dimer.is_vertical() {
                    return Err(Error::Unsupported(
                        "tilted dipoles above a substrate have polarization-dependent paths; use psi_polarized".into(),
                    ));
                }
                let (rp, _) = planar_reflection(&self.environment, theta)?;
                Ok([image_sum(theta, z1, rp.value), image_sum(theta, z2, rp.value)])
            }
            Environment::Sphere { .. } => {
                let m = self.multipoles.as_ref().expect("sphere scene carries multipoles");
                Ok([psi_sphere(theta, Side::Upper, m), psi_sphere(theta, Side::Lower, m)])
            }
        }
    }

    /// Angular factor `U(θ)` of a vertical dipole.
    pub fn polarization(&self, theta: f64) -> f64 {
        -theta.sin()
    }

    /// θ- and φ-polarized field of each emitter at `θ`.
    pub fn fields(&self, theta: f64) -> Result<EmitterFields> {
        self.check_angle(theta)?;
        let mu = self.dimer.orientation;
        let u = PolarizationFactor::new(theta, self.phi, mu);
        let zs = [self.dimer.z1, self.dimer.z2];
        match &self.environment {
            Environment::FreeSpace => {
                let (ut, up) = u.free_components();
                Ok(zs.map(|z| {
                    let p = psi_free(theta, z);
                    [p * ut, p * up]
                }))
            }
            Environment::PerfectMirror | Environment::Substrate { .. } => {
                let (rp, rs) = planar_reflection(&self.environment, theta)?;
                Ok(zs.map(|z| {
                    let (et, ep) = PathAmplitude::new(theta, z, rp.value, rs.value).field(&u);
                    [et, ep]
                }))
            }
            Environment::Sphere { .. } => {
                let psi = self.psi(theta)?;
                let ut = self.polarization(theta);
                Ok(psi.map(|p| [p * ut, Complex64::new(0.0, 0.0)]))
            }
        }
    }

    /// Scalar two-photon path function `Ψ(θ, θ′)`.
    pub fn two_photon(&self, theta: f64, theta_p: f64) -> Result<Complex64> {
        Ok(two_photon_from(&self.psi(theta)?, &self.psi(theta_p)?))
    }

    /// The four polarization-resolved amplitudes `Ψ_{αβ}(θ, θ′)`.
    pub fn psi_polarized(&self, theta: f64, theta_p: f64) -> Result<[[Complex64; 2]; 2]> {
        Ok(polarized_from(&self.fields(theta)?, &self.fields(theta_p)?))
    }

    /// Emitted intensity `Σ_α |Σ_i E_{α,i}|²`-type contraction with the
    /// correlators, in units of a single excited emitter in free space seen at `θ = π/2`.
    pub fn intensity(&self, theta: f64, corr: &CorrelatorSet) -> Result<f64> {
        Ok(intensity_from_fields(&self.fields(theta)?, corr))
    }

    /// `g²(θ, θ′)` resolved over polarization channels; `None` where a
    /// marginal intensity is below `floor`.
    pub fn g2(&self, theta: f64, theta_p: f64, corr: &CorrelatorSet, floor: f64) -> Result<Option<f64>> {
        Ok(g2_from_fields(&self.fields(theta)?, &self.fields(theta_p)?, corr, floor))
    }

    /// `g²(θ, θ′)` from the scalar path function with the polarization factor
    /// cancelled analytically. Masked like [`Scene::g2`].
    pub fn g2_reduced(&self, theta: f64, theta_p: f64, corr: &CorrelatorSet, floor: f64) -> Result<Option<f64>> {
        if !self.is_polarization_independent() {
            return Err(Error::Unsupported("reduced g² needs polarization-independent paths".into()));
        }
        if self.intensity(theta, corr)? < floor || self.intensity(theta_p, corr)? < floor {
            return Ok(None);
        }
        let (a, b) = (self.psi(theta)?, self.psi(theta_p)?);
        let num = two_photon_from(&a, &b).norm_sqr() * corr.double_excitation;
        Ok(Some(num / (scalar_intensity(&a, corr) * scalar_intensity(&b, corr))))
    }

    /// Per-angle amplitudes on a grid axis.
    pub fn profile(&self, grid: &GridSpec) -> Result<AngularProfile> {
        let angles = grid.angles();
        let fields = angles.par_iter().map(|&t| self.fields(t)).collect::<Result<Vec<_>>>()?;
        let psi = if self.is_polarization_independent() {
            Some(angles.par_iter().map(|&t| self.psi(t)).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        Ok(AngularProfile { angles, psi, fields })
    }
}

/// Rejects dimers whose dipoles point in different directions: their photons
/// are distinguishable and the two-photon amplitude no longer applies.
pub fn check_orientations(mu1: [f64; 3], mu2: [f64; 3]) -> Result<()> {
    let diff: f64 = mu1.iter().zip(&mu2).map(|(a, b)| (a - b).abs()).sum();
    if diff > 1e-12 {
        return Err(Error::Domain(format!(
            "emitter orientations differ ({mu1:?} vs {mu2:?}); emitted photons are distinguishable"
        )));
    }
    Ok(())
}

pub fn two_photon_from(a: &[Complex64; 2], b: &[Complex64; 2]) -> Complex64 {
    a[0] * b[1] + b[0] * a[1]
}

pub fn polarized_from(a: &EmitterFields, b: &EmitterFields) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (al, row) in out.iter_mut().enumerate() {
        for (be, v) in row.iter_mut().enumerate() {
            *v = a[0][al] * b[1][be] + a[1][al] * b[0][be];
        }
    }
    out
}

/// `Σ_ij ψ_i* ψ_j ⟨σ_i†σ_j⟩`.
pub fn scalar_intensity(psi: &[Complex64; 2], corr: &CorrelatorSet) -> f64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            s += psi[i].conj() * psi[j] * corr.coherence[i][j];
        }
    }
    s.re.max(0.0)
}

pub fn intensity_from_fields(f: &EmitterFields, corr: &CorrelatorSet) -> f64 {
    (0..2).map(|al| scalar_intensity(&[f[0][al], f[1][al]], corr)).sum()
}

pub fn g2_from_fields(a: &EmitterFields, b: &EmitterFields, corr: &CorrelatorSet, floor: f64) -> Option<f64> {
    let (ia, ib) = (intensity_from_fields(a, corr), intensity_from_fields(b, corr));
    if ia < floor || ib < floor {
        return None;
    }
    let num: f64 = polarized_from(a, b).iter().flatten().map(|z| z.norm_sqr()).sum();
    Some(num * corr.double_excitation / (ia * ib))
}

/// Amplitudes evaluated once per grid angle and reused for every pair.
#[derive(Debug, Clone)]
pub struct AngularProfile {
    pub angles: Vec<f64>,
    /// Scalar `ψ` per emitter when polarization-independent.
    pub psi: Option<Vec<[Complex64; 2]>>,
    pub fields: Vec<EmitterFields>,
}

impl AngularProfile {
    pub fn intensities(&self, corr: &CorrelatorSet) -> Vec<f64> {
        self.fields.iter().map(|f| intensity_from_fields(f, corr)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::couplings_mirror;
    use crate::dynamics::{build_generator, correlators, steady_state, DensityMatrix};
    use crate::model::{Detuning, DriveConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mirror_scene() -> Scene {
        Scene::new(Environment::PerfectMirror, DimerConfig::axial(0.6, 0.8)).unwrap()
    }

    fn mirror_state(sym: bool) -> CorrelatorSet {
        let cp = couplings_mirror(0.6, 0.8).unwrap();
        let drive = if sym {
            DriveConfig { detuning: Detuning::CouplingMultiple(1.0), omega: [c(1.0, 0.0), c(1.0, 0.0)] }
        } else {
            DriveConfig { detuning: Detuning::CouplingMultiple(-1.0), omega: [c(0.1, 0.0), c(-0.1, 0.0)] }
        };
        correlators(&steady_state(&build_generator(&cp, &drive).unwrap()).unwrap().density)
    }

    #[test]
    fn free_space_quarter_wave_zero() {
        let s = Scene::new(Environment::FreeSpace, DimerConfig::axial(0.0, 0.5)).unwrap();
        assert!(s.two_photon(0.0, FRAC_PI_2).unwrap().norm() < 1e-15);
    }

    #[test]
    fn diagonal_is_twice_the_product() {
        let eps = Environment::Substrate { epsilon: c(-5.0, 0.1) };
        let sphere = Environment::Sphere { epsilon: c(2.13, 0.0), radius: 0.48, offset: 0.73 };
        for (env, dimer) in [
            (Environment::FreeSpace, DimerConfig::axial(0.1, 1.3)),
            (Environment::PerfectMirror, DimerConfig::axial(0.6, 0.8)),
            (eps, DimerConfig::axial(0.6, 1.7)),
            (sphere, DimerConfig::axial(0.73, -0.73)),
        ] {
            let s = Scene::new(env, dimer).unwrap();
            for th in [0.1, 0.9, 1.5] {
                let p = s.psi(th).unwrap();
                let v = s.two_photon(th, th).unwrap();
                assert!((v - 2.0 * p[0] * p[1]).norm() < 1e-14 * v.norm().max(1.0));
            }
        }
    }

    #[test]
    fn mirror_reduces_to_cosine_products() {
        let s = mirror_scene();
        let k = 2.0 * PI;
        for (t, tp) in [(0.2, 1.1), (0.7, 0.3), (1.5, 0.0), (0.9, 0.9)] {
            let (c1, c2) = (f64::cos(t), f64::cos(tp));
            let f = (k * 0.6 * c1).cos() * (k * 0.8 * c2).cos() + (k * 0.6 * c2).cos() * (k * 0.8 * c1).cos();
            let v = s.two_photon(t, tp).unwrap();
            assert!((v - c(4.0 * f, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn substrate_angles_above_horizon_rejected() {
        let s = mirror_scene();
        assert!(matches!(s.psi(2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vertical_dipole_channels() {
        let s = Scene::new(Environment::Substrate { epsilon: c(2.13, 0.0) }, DimerConfig::axial(0.6, 1.7)).unwrap();
        let (t, tp) = (0.4, 1.2);
        let pol = s.psi_polarized(t, tp).unwrap();
        let scalar = s.two_photon(t, tp).unwrap() * f64::sin(t) * f64::sin(tp);
        assert!((pol[0][0] - scalar).norm() < 1e-14);
        assert_eq!(pol[0][1], c(0.0, 0.0));
        assert_eq!(pol[1][0], c(0.0, 0.0));
        assert_eq!(pol[1][1], c(0.0, 0.0));
    }

    #[test]
    fn sphere_maps_ignore_azimuth() {
        let env = Environment::Sphere { epsilon: c(-5.0, 0.1), radius: 0.484, offset: 0.726 };
        let dimer = DimerConfig::axial(0.726, -0.726);
        let a = Scene::new(env, dimer).unwrap();
        let b = Scene::new(env, dimer).unwrap().with_azimuth(1.1);
        let corr = correlators(&DensityMatrix::basis(3));
        for (t, tp) in [(0.3, 2.0), (1.2, 1.9), (2.5, 0.4)] {
            assert_eq!(a.two_photon(t, tp).unwrap(), b.two_photon(t, tp).unwrap());
            assert_eq!(a.g2(t, tp, &corr, MASK_FLOOR).unwrap(), b.g2(t, tp, &corr, MASK_FLOOR).unwrap());
        }
    }

    #[test]
    fn vacuum_substrate_channels_factorize() {
        let mu = [0.5f64.sqrt(), 0.0, 0.5f64.sqrt()];
        let dimer = DimerConfig::axial(0.6, 1.7).with_orientation(mu);
        let s = Scene::new(Environment::Substrate { epsilon: c(1.0, 0.0) }, dimer)
            .unwrap()
            .with_azimuth(0.3);
        let free = Scene::new(Environment::FreeSpace, dimer).unwrap();
        let (t, tp) = (0.5, 1.3);
        let psi = free.two_photon(t, tp).unwrap();
        let u = |th: f64| PolarizationFactor::new(th, 0.3, mu).free_components();
        let (ua, ub) = (u(t), u(tp));
        let pol = s.psi_polarized(t, tp).unwrap();
        let expected = [[ua.0 * ub.0, ua.0 * ub.1], [ua.1 * ub.0, ua.1 * ub.1]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((pol[a][b] - psi * expected[a][b]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn tilted_dipoles_above_substrate_have_no_scalar_path() {
        let dimer = DimerConfig::axial(0.6, 1.7).with_orientation([0.6, 0.0, 0.8]);
        let s = Scene::new(Environment::PerfectMirror, dimer).unwrap();
        assert!(s.psi(0.3).is_err());
        assert!(s.g2_reduced(0.3, 0.4, &CorrelatorSet::single_excited(), 0.0).is_err());
    }

    #[test]
    fn differing_orientations_rejected() {
        assert!(check_orientations([0.0, 0.0, 1.0], [0.0, 0.0, 1.0]).is_ok());
        assert!(check_orientations([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn intensity_reference_and_nulls() {
        let free = Scene::new(Environment::FreeSpace, DimerConfig::axial(0.0, 0.7)).unwrap();
        let one = CorrelatorSet::single_excited();
        assert_relative_eq!(free.intensity(FRAC_PI_2, &one).unwrap(), 1.0, epsilon = 1e-15);
        let ground = correlators(&DensityMatrix::basis(0));
        assert_eq!(free.intensity(0.7, &ground).unwrap(), 0.0);
        assert_eq!(mirror_scene().intensity(0.0, &mirror_state(true)).unwrap(), 0.0);
    }

    #[test]
    fn masked_where_intensity_vanishes() {
        let s = mirror_scene();
        let corr = mirror_state(true);
        assert_eq!(s.g2(0.0, 0.5, &corr, 1e-14).unwrap(), None);
        assert!(s.g2(0.3, 0.5, &corr, 1e-14).unwrap().is_some());
    }

    #[test]
    fn interference_zero_is_state_independent() {
        let s = Scene::new(Environment::FreeSpace, DimerConfig::axial(0.0, 0.5)).unwrap();
        let t = 0.3f64;
        // cos θ′ = cos θ - 1 gives a phase difference of π.
        let tp = (t.cos() - 1.0).acos();
        for corr in [mirror_state(true), mirror_state(false)] {
            let v = s.g2(t, tp, &corr, 1e-14).unwrap().unwrap();
            assert!(v < 1e-28);
        }
    }

    proptest! {
        #[test]
        fn exchange_symmetry(t in 0.0..FRAC_PI_2, tp in 0.0..FRAC_PI_2, z1 in 0.0f64..2.0, dz in 0.01f64..2.0) {
            let s = Scene::new(Environment::Substrate { epsilon: c(-3.0, 0.01) }, DimerConfig::axial(z1, z1 + dz)).unwrap();
            prop_assert_eq!(s.two_photon(t, tp).unwrap(), s.two_photon(tp, t).unwrap());
        }

        #[test]
        fn reduced_and_channel_g2_agree(t in 0.05..PI - 0.05, tp in 0.05..PI - 0.05, a in 0.0..PI, b in 0.0..std::f64::consts::TAU) {
            let mu = [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()];
            let s = Scene::new(Environment::FreeSpace, DimerConfig::axial(0.2, 1.4).with_orientation(mu)).unwrap();
            let corr = mirror_state(true);
            let (x, y) = (s.g2(t, tp, &corr, 0.0).unwrap(), s.g2_reduced(t, tp, &corr, 0.0).unwrap());
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!((x - y).abs() <= 1e-10 * y.max(1.0));
            }
        }
    }
}
