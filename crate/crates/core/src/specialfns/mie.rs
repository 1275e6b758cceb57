//! TM (electric) Mie coefficients of a homogeneous sphere.
//!
//! `r_{l,TM}` is the ratio between the outgoing (`h_l`) and the regular
//! (`j_l`) amplitude of the l-th TM multipole outside the sphere. In the
//! Bohren-Huffman notation this is `r_l = -a_l`. With this choice the
//! multipole sums for the decay rates and the scattered far field are
//! mutually consistent and a small sphere reduces to the quasistatic
//! polarizability, `r_1 ≈ (2i/3) x³ (ε-1)/(ε+2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::{spherical_hankel1_seq, spherical_jn_seq};
use crate::error::{Error, Result};

fn is_vacuum(eps: Complex64) -> bool {
    eps == Complex64::new(1.0, 0.0)
}

fn check(eps: Complex64, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("size parameter must be positive, got {x}")));
    }
    if eps.im < 0.0 || !eps.re.is_finite() || !eps.im.is_finite() {
        return Err(Error::Domain(format!("permittivity must be passive, got {eps}")));
    }
    Ok(())
}

/// Logarithmic derivatives `D_n(z) = ψ_n'(z)/ψ_n(z)` for `n = 0..=n_max`,
/// by downward recurrence.
fn log_derivatives(n_max: usize, z: Complex64) -> Vec<Complex64> {
    let start = n_max + 16 + z.norm().ceil() as usize;
    let mut d = Complex64::new(0.0, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for n in (1..=start).rev() {
        let nz = n as f64 / z;
        if n <= n_max {
            out[n] = d;
        }
        d = nz - 1.0 / (d + nz);
    }
    out[0] = d;
    out
}

/// `r_{1,TM}, ..., r_{l_max,TM}` for permittivity `eps` and size parameter `x = k₀R`.
pub fn mie_rtm_seq(l_max: usize, eps: Complex64, x: f64) -> Result<Vec<Complex64>> {
    check(eps, x)?;
    if is_vacuum(eps) {
        return Ok(vec![Complex64::new(0.0, 0.0); l_max]);
    }
    let m = eps.sqrt();
    let d = log_derivatives(l_max, m * x);
    let j = spherical_jn_seq(l_max, x)?;
    let h = spherical_hankel1_seq(l_max, x)?;
    let out = (1..=l_max)
        .map(|n| {
            let psi = x * j[n];
            let psi_prev = x * j[n - 1];
            let xi = h[n] * x;
            let xi_prev = h[n - 1] * x;
            let w = d[n] / m + n as f64 / x;
            let a = (w * psi - psi_prev) / (w * xi - xi_prev);
            -a
        })
        .collect();
    Ok(out)
}

/// Single TM Mie coefficient `r_{l,TM}(ε, x)`, `l >= 1`.
pub fn mie_rtm(l: usize, eps: Complex64, x: f64) -> Result<Complex64> {
    if l == 0 {
        return Err(Error::Domain("Mie order starts at l = 1".into()));
    }
    Ok(mie_rtm_seq(l, eps, x)?[l - 1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MieCoefficientTable {
    pub l_max: usize,
    /// Entry `i` holds `r_{i+1,TM}`.
    pub r_tm: Vec<Complex64>,
}

impl MieCoefficientTable {
    pub fn new(l_max: usize, eps: Complex64, x: f64) -> Result<Self> {
        Ok(MieCoefficientTable { l_max, r_tm: mie_rtm_seq(l_max, eps, x)? })
    }

    pub fn get(&self, l: usize) -> Option<Complex64> {
        l.checked_sub(1).and_then(|i| self.r_tm.get(i).copied())
    }
}
