//! Planar-interface Fresnel reflection coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Reflection coefficient stored both as a complex number and in the
/// modulus/phase split `r = |r| e^{iα}` used by the image-dipole amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub value: Complex64,
    pub modulus: f64,
    pub phase: f64,
}

impl Reflection {
    pub fn new(value: Complex64) -> Self {
        Reflection { value, modulus: value.norm(), phase: value.arg() }
    }
}

/// `sqrt(ε - sin²θ)` on the branch with non-negative imaginary part.
fn normal_wavenumber(eps: Complex64, theta: f64) -> Complex64 {
    let c = theta.cos();
    let q = ((eps - 1.0) + c * c).sqrt();
    if q.im < 0.0 || (q.im == 0.0 && q.re < 0.0) {
        -q
    } else {
        q
    }
}

pub fn fresnel_rp(eps: Complex64, theta: f64) -> Complex64 {
    let c = theta.cos();
    let q = normal_wavenumber(eps, theta);
    (eps * c - q) / (eps * c + q)
}

pub fn fresnel_rs(eps: Complex64, theta: f64) -> Complex64 {
    let c = theta.cos();
    let q = normal_wavenumber(eps, theta);
    (c - q) / (c + q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_has_no_reflection() {
        for i in 0..=10 {
            let th = i as f64 * std::f64::consts::FRAC_PI_2 / 10.0;
            assert!(fresnel_rp(Complex64::new(1.0, 0.0), th).norm() < 1e-15);
            assert!(fresnel_rs(Complex64::new(1.0, 0.0), th).norm() < 1e-15);
        }
    }

    #[test]
    fn perfect_conductor_limit() {
        let eps = Complex64::new(-1e8, 0.0);
        assert!((fresnel_rp(eps, 0.7) - 1.0).norm() < 1e-3);
        assert!((fresnel_rs(eps, 0.7) + 1.0).norm() < 1e-3);
    }

    #[test]
    fn normal_incidence() {
        let eps = Complex64::new(2.13, 0.0);
        let n = 2.13_f64.sqrt();
        assert_relative_eq!(fresnel_rp(eps, 0.0).re, (n - 1.0) / (n + 1.0), max_relative = 1e-12);
        assert_relative_eq!(fresnel_rp(eps, 0.0).re, 0.186811, epsilon = 1e-6);
    }

    #[test]
    fn modulus_phase_split() {
        let r = Reflection::new(fresnel_rp(Complex64::new(-5.0, 0.1), 0.4));
        let back = Complex64::from_polar(r.modulus, r.phase);
        assert!((back - r.value).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn passive_media_do_not_amplify(
            re in -50.0f64..50.0,
            im in 0.0f64..20.0,
            theta in 0.0f64..=std::f64::consts::FRAC_PI_2,
        ) {
            let eps = Complex64::new(re, im);
            prop_assert!(fresnel_rp(eps, theta).norm() <= 1.0 + 1e-12);
            prop_assert!(fresnel_rs(eps, theta).norm() <= 1.0 + 1e-12);
        }
    }
}
