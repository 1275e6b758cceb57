//! Decay rates `γ_ii`, dissipative coupling `γ₁₂` and coherent coupling
//! `g₁₂` of the dimer, all in units of `γ₀`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{image_sum, psi_free, psi_sphere, Side, SphereMultipoles};
use crate::model::{DimerConfig, Environment, K0};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSet {
    pub gamma11: f64,
    pub gamma22: f64,
    pub gamma12: f64,
    pub g12: f64,
}

impl CouplingSet {
    /// Two independent emitters with the free-space rate.
    pub fn uncoupled() -> Self {
        CouplingSet { gamma11: 1.0, gamma22: 1.0, gamma12: 0.0, g12: 0.0 }
    }

    /// Whether the dissipation matrix `[[γ11, γ12], [γ12, γ22]]` is positive semidefinite.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.gamma11 >= -tol
            && self.gamma22 >= -tol
            && self.gamma11 * self.gamma22 - self.gamma12 * self.gamma12 >= -tol
    }

    pub fn is_finite(&self) -> bool {
        [self.gamma11, self.gamma22, self.gamma12, self.g12].iter().all(|v| v.is_finite())
    }
}

/// `3(sin x - x cos x)/x³`, the dissipative coupling of two coaxial dipoles at
/// dimensionless separation `x = k₀d`.
pub fn gamma_axial(x: f64) -> f64 {
    let x = x.abs();
    if x < 0.1 {
        let x2 = x * x;
        3.0 * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45_360.0
            + x2 * x2 * x2 * x2 / 3_991_680.0)
    } else {
        3.0 * (x.sin() - x * x.cos()) / (x * x * x)
    }
}

/// `-(3/2)(cos x + x sin x)/x³`, the coherent coupling of two coaxial dipoles.
pub fn g_axial(x: f64) -> f64 {
    let x = x.abs();
    -1.5 * (x.cos() + x * x.sin()) / (x * x * x)
}

/// Couplings of two coaxial vertical dipoles in free space at separation `d` (in `λ₀`).
pub fn couplings_free(separation: f64) -> Result<CouplingSet> {
    if !(separation.abs() > 0.0) || !separation.is_finite() {
        return Err(Error::Singular(format!("free-space coupling at separation {separation}")));
    }
    let x = K0 * separation;
    Ok(CouplingSet { gamma11: 1.0, gamma22: 1.0, gamma12: gamma_axial(x), g12: g_axial(x) })
}

/// Couplings of two vertical dipoles at heights `z1`, `z2` above a perfect mirror.
///
/// Each emitter interacts with the other and with the other's image at
/// `-z_j`, so every entry is a sum of two free-space coaxial terms.
pub fn couplings_mirror(z1: f64, z2: f64) -> Result<CouplingSet> {
    if !(z1 >= 0.0 && z2 >= 0.0) {
        return Err(Error::Domain(format!("emitters must lie above the mirror (z1 = {z1}, z2 = {z2})")));
    }
    if z1 == z2 {
        return Err(Error::Singular("coincident emitters above the mirror".into()));
    }
    let d = K0 * (z2 - z1);
    let s = K0 * (z1 + z2);
    Ok(CouplingSet {
        gamma11: 1.0 + gamma_axial(2.0 * K0 * z1),
        gamma22: 1.0 + gamma_axial(2.0 * K0 * z2),
        gamma12: gamma_axial(d) + gamma_axial(s),
        g12: g_axial(d) + g_axial(s),
    })
}

/// Couplings of the diametric dimer at `±b ẑ` around a sphere of radius
/// `radius`, summing multipoles up to `l_max`.
///
/// The rate series converges like `(R/b)^{2l}`, far more slowly than the
/// far-field coefficients `c_l`, so it is summed to its own tolerance.
pub fn couplings_sphere(epsilon: Complex64, radius: f64, offset: f64, l_max: usize) -> Result<CouplingSet> {
    const TOL: f64 = 1e-14;
    let m = SphereMultipoles::untruncated(epsilon, radius, offset, l_max)?;
    let kb = m.kb;
    let mut self_sum = Complex64::new(0.0, 0.0);
    let mut cross_sum = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for (i, r) in m.r_tm.iter().enumerate() {
        let l = i + 1;
        if *r == Complex64::new(0.0, 0.0) {
            last = 0.0;
            continue;
        }
        let h = m.hankel[l] / kb;
        let term = (2 * l + 1) as f64 * (l * (l + 1)) as f64 * r * h * h;
        self_sum += term;
        cross_sum += if l % 2 == 1 { term } else { -term };
        last = term.norm();
    }
    if !(last <= TOL * self_sum.norm().max(1.0)) {
        return Err(Error::NonConvergent(format!(
            "sphere coupling series still at {last:e} after l_max = {l_max}"
        )));
    }
    let i = Complex64::i();
    let gamma_ii = 1.0 + (1.5 * i * self_sum).im;
    let free = couplings_free(2.0 * offset)?;
    Ok(CouplingSet {
        gamma11: gamma_ii,
        gamma22: gamma_ii,
        gamma12: free.gamma12 + (1.5 * i * cross_sum).im,
        g12: free.g12 - (0.75 * i * cross_sum).re,
    })
}

/// Couplings for any environment that admits them.
pub fn couplings_for(env: &Environment, dimer: &DimerConfig, l_max: usize) -> Result<CouplingSet> {
    if !dimer.is_vertical() {
        return Err(Error::Unsupported("coupling constants are implemented for vertical dipoles".into()));
    }
    match env {
        Environment::FreeSpace => couplings_free(dimer.separation()),
        Environment::PerfectMirror => couplings_mirror(dimer.z1, dimer.z2),
        Environment::Sphere { epsilon, radius, offset } => couplings_sphere(*epsilon, *radius, *offset, l_max),
        Environment::Substrate { .. } => Err(Error::Unsupported(
            "coupling constants over a finite-permittivity substrate require layered-media Green's functions"
                .into(),
        )),
    }
}

/// Dissipative rate `γ_ij` from the angular integral of the far-field
/// amplitudes of vertical dipoles, `(3/4)∫ Re(ψ_i* ψ_j)(1 - u²) du`, `u = cos θ`.
///
/// Free space integrates over the full sphere, the perfect mirror over the
/// upper half-space only. Valid for lossless environments.
pub fn gamma_farfield_integral(env: &Environment, zi: f64, zj: f64) -> Result<f64> {
    const TOL: f64 = 1e-13;
    match env {
        Environment::FreeSpace => integrate(
            |u| {
                let t = u.clamp(-1.0, 1.0).acos();
                (psi_free(t, zi).conj() * psi_free(t, zj)).re * (1.0 - u * u)
            },
            -1.0,
            1.0,
            TOL,
        )
        .map(|v| 0.75 * v),
        Environment::PerfectMirror => {
            let one = Complex64::new(1.0, 0.0);
            integrate(
                |u| {
                    let t = u.clamp(0.0, 1.0).acos();
                    (image_sum(t, zi, one).conj() * image_sum(t, zj, one)).re * (1.0 - u * u)
                },
                0.0,
                1.0,
                TOL,
            )
            .map(|v| 0.75 * v)
        }
        _ => Err(Error::Unsupported(format!(
            "far-field rate integral is implemented for free space and the perfect mirror, not {}",
            env.name()
        ))),
    }
}

/// `γ_ij` of the diametric sphere dimer from the radiated far field; equals
/// the series result for lossless spheres.
pub fn gamma_farfield_sphere(multipoles: &SphereMultipoles, a: Side, b: Side) -> Result<f64> {
    integrate(
        |u| {
            let t = u.clamp(-1.0, 1.0).acos();
            (psi_sphere(t, a, multipoles).conj() * psi_sphere(t, b, multipoles)).re * (1.0 - u * u)
        },
        -1.0,
        1.0,
        1e-12,
    )
    .map(|v| 0.75 * v)
}

/// Mirror couplings along a sweep of `z2` at fixed `z1`.
pub fn mirror_sweep(z1: f64, z2: &[f64]) -> Result<Vec<(f64, CouplingSet)>> {
    z2.iter().map(|&z| couplings_mirror(z1, z).map(|c| (z, c))).collect()
}

/// Writes a sweep as CSV with columns `z2_over_lambda0,gamma12_over_gamma0,g12_over_gamma0`.
pub fn write_coupling_csv<W: Write>(rows: &[(f64, CouplingSet)], mut out: W) -> io::Result<()> {
    writeln!(out, "z2_over_lambda0,gamma12_over_gamma0,g12_over_gamma0")?;
    for (z, c) in rows {
        writeln!(out, "{z},{},{}", c.gamma12, c.g12)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Closed forms for the perfect mirror exactly as derived from the
    /// half-space integral, written over the common `(z2² - z1²)³` denominator.
    fn printed_mirror(z1: f64, z2: f64) -> (f64, f64, f64) {
        let k = K0;
        let d = z2 - z1;
        let s = z1 + z2;
        let den = k.powi(6) * (z2 * z2 - z1 * z1).powi(3);
        let u = 2.0 * k * z1;
        let gamma11 = 1.0 - 3.0 * (u * u.cos() - u.sin()) / u.powi(3);
        let gamma12 = 3.0 / den
            * (s.powi(3) * k.powi(3) * ((k * d).sin() - k * d * (k * d).cos())
                - k.powi(4) * d.powi(3) * s * (k * s).cos()
                + d.powi(3) * k.powi(3) * (k * s).sin());
        let g12 = -0.5 * 3.0 / den
            * (s.powi(3) * d.signum() * k.powi(3) * (k * d * (k * d).sin() + (k * d).cos())
                + k.powi(4) * d.powi(3) * s * (k * s).sin()
                + d.powi(3) * k.powi(3) * (k * s).cos());
        (gamma11, gamma12, g12)
    }

    #[test]
    fn free_space_limits() {
        let c = couplings_free(1e-7).unwrap();
        assert_relative_eq!(c.gamma12, 1.0, epsilon = 1e-10);
        let c = couplings_free(1.0).unwrap();
        assert_relative_eq!(c.gamma12, -3.0 / (4.0 * PI * PI), max_relative = 1e-13);
        assert_relative_eq!(c.gamma12, -0.07599, epsilon = 5e-6);
        let c = couplings_free(1e6).unwrap();
        assert!(c.gamma12.abs() < 1e-6 && c.g12.abs() < 1e-6);
        assert!(couplings_free(0.0).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        let lo = gamma_axial(0.1 * (1.0 - 1e-12));
        let hi = gamma_axial(0.1 * (1.0 + 1e-12));
        assert_relative_eq!(lo, hi, max_relative = 1e-12);
    }

    #[test]
    fn mirror_matches_printed_closed_forms() {
        for z2 in [0.8, 1.0, 1.37, 2.5] {
            let c = couplings_mirror(0.6, z2).unwrap();
            let (g11, g12, gc) = printed_mirror(0.6, z2);
            assert_relative_eq!(c.gamma11, g11, max_relative = 1e-12);
            assert_relative_eq!(c.gamma12, g12, max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(c.g12, gc, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn mirror_limits_and_symmetry() {
        let near = couplings_mirror(1e-6, 3.0).unwrap();
        assert_relative_eq!(near.gamma11, 2.0, epsilon = 1e-10);
        let far = couplings_mirror(1e4, 2e4).unwrap();
        assert_relative_eq!(far.gamma11, 1.0, epsilon = 1e-4);
        let a = couplings_mirror(0.6, 1.3).unwrap();
        let b = couplings_mirror(1.3, 0.6).unwrap();
        assert_eq!(a.gamma12, b.gamma12);
        assert_eq!(a.g12, b.g12);
        assert!(couplings_mirror(0.6, 0.6).is_err());
        let close = couplings_mirror(0.6, 0.6 + 1e-6).unwrap();
        assert!(close.is_finite());
        assert_relative_eq!(close.gamma12, 1.0 + gamma_axial(2.4 * PI), epsilon = 1e-6);
    }

    #[test]
    fn quadrature_oracle_free_space() {
        let env = Environment::FreeSpace;
        assert_relative_eq!(gamma_farfield_integral(&env, 0.3, 0.3).unwrap(), 1.0, max_relative = 1e-8);
        let v = gamma_farfield_integral(&env, 0.0, 0.5).unwrap();
        assert_relative_eq!(v, couplings_free(0.5).unwrap().gamma12, max_relative = 1e-8);
    }

    #[test]
    fn quadrature_oracle_mirror_sweep() {
        let env = Environment::PerfectMirror;
        for i in 0..50 {
            let z2 = 1.0 + 1.5 * i as f64 / 49.0;
            let c = couplings_mirror(0.6, z2).unwrap();
            let q12 = gamma_farfield_integral(&env, 0.6, z2).unwrap();
            let q22 = gamma_farfield_integral(&env, z2, z2).unwrap();
            assert_relative_eq!(q12, c.gamma12, max_relative = 1e-6);
            assert_relative_eq!(q22, c.gamma22, max_relative = 1e-6);
        }
    }

    fn fig4_geometry() -> (f64, f64) {
        let lambda = 2.0 * PI * crate::model::HBAR_C_EV_NM / 3.0;
        (200.0 / lambda, 300.0 / lambda)
    }

    fn fig4(eps: Complex64) -> CouplingSet {
        let (r, b) = fig4_geometry();
        couplings_sphere(eps, r, b, 60).unwrap()
    }

    #[test]
    fn sphere_reference_values() {
        let cases = [
            (Complex64::new(2.13, 0.0), 1.05557604623393, 0.154137268248755, 0.0831128472713768),
            (Complex64::new(-5.0, 0.1), 1.29667871789695, -0.77228451076293, 0.0753567404835885),
            (Complex64::new(-3.0, 0.01), 1.01606065872657, -0.451932514307992, -0.586479803395681),
        ];
        for (eps, gii, g12, gc) in cases {
            let c = fig4(eps);
            assert_relative_eq!(c.gamma11, gii, max_relative = 1e-11);
            assert_relative_eq!(c.gamma12, g12, max_relative = 1e-11);
            assert_relative_eq!(c.g12, gc, max_relative = 1e-11);
            assert!(c.gamma11 > 0.0 && c.gamma12.abs() <= c.gamma11);
        }
    }

    #[test]
    fn lossless_sphere_series_matches_radiated_power() {
        let (r, b) = fig4_geometry();
        let m = SphereMultipoles::new(Complex64::new(2.13, 0.0), r, b, 60).unwrap();
        let c = fig4(Complex64::new(2.13, 0.0));
        let q11 = gamma_farfield_sphere(&m, Side::Upper, Side::Upper).unwrap();
        let q12 = gamma_farfield_sphere(&m, Side::Upper, Side::Lower).unwrap();
        assert_relative_eq!(q11, c.gamma11, max_relative = 1e-8);
        assert_relative_eq!(q12, c.gamma12, max_relative = 1e-8);
    }

    #[test]
    fn vacuum_sphere_is_free_space() {
        let c = couplings_sphere(Complex64::new(1.0, 0.0), 0.4, 0.7, 30).unwrap();
        assert_eq!(c, couplings_free(1.4).unwrap());
    }

    #[test]
    fn sphere_approaches_vacuum_continuously() {
        let base = couplings_free(2.0 * 0.7).unwrap();
        let mut last = f64::INFINITY;
        for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let c = couplings_sphere(Complex64::new(1.0 + delta, 0.0), 0.4, 0.7, 60).unwrap();
            let dev = (c.gamma12 - base.gamma12).abs() + (c.g12 - base.g12).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sphere_series_stable_under_doubling() {
        for eps in [Complex64::new(2.13, 0.0), Complex64::new(-5.0, 0.1), Complex64::new(-3.0, 0.01)] {
            let (r, b) = fig4_geometry();
            let a = couplings_sphere(eps, r, b, 60).unwrap();
            let b = couplings_sphere(eps, r, b, 120).unwrap();
            for (x, y) in [(a.gamma11, b.gamma11), (a.gamma12, b.gamma12), (a.g12, b.g12)] {
                assert_relative_eq!(x, y, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn short_series_is_reported() {
        let (r, b) = fig4_geometry();
        let err = couplings_sphere(Complex64::new(-5.0, 0.1), r, b, 10).unwrap_err();
        assert!(matches!(err, Error::NonConvergent(_)));
    }

    #[test]
    fn substrate_couplings_are_refused() {
        let env = Environment::Substrate { epsilon: Complex64::new(2.13, 0.0) };
        let err = couplings_for(&env, &DimerConfig::axial(0.6, 1.7), 60).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn csv_layout() {
        let rows = mirror_sweep(0.6, &[1.0, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_coupling_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "z2_over_lambda0,gamma12_over_gamma0,g12_over_gamma0");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,"));
    }

    proptest! {
        #[test]
        fn mirror_dissipation_is_physical(z1 in 0.01f64..3.0, dz in 0.01f64..3.0) {
            let c = couplings_mirror(z1, z1 + dz).unwrap();
            prop_assert!(c.gamma11 > 0.0 && c.gamma22 > 0.0);
            prop_assert!(c.is_positive_semidefinite(1e-12));
        }
    }
}
