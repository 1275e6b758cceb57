//! Legendre polynomials and their first derivatives.
//!
//! The derivative `f_l(x) = dP_l/dx` is built with
//! `f_l = f_{l-2} + (2l-1) P_{l-1}`, which stays finite at `x = ±1`.
//! The associated function used for far fields follows
//! `P_l^1(cos θ) = -sin θ f_l(cos θ)`.

use crate::error::{Error, Result};

/// `P_0(x), ..., P_{l_max}(x)`.
pub fn legendre_p_seq(l_max: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(l_max + 1);
    p.push(1.0);
    if l_max >= 1 {
        p.push(x);
    }
    for l in 2..=l_max {
        let lf = l as f64;
        let next = ((2.0 * lf - 1.0) * x * p[l - 1] - (lf - 1.0) * p[l - 2]) / lf;
        p.push(next);
    }
    p
}

/// `f_0(x), ..., f_{l_max}(x)` with `f_l = P_l'`. Index 0 holds `f_0 = 0`.
pub fn legendre_fl_seq(l_max: usize, x: f64) -> Vec<f64> {
    let p = legendre_p_seq(l_max.saturating_sub(1), x);
    let mut f = vec![0.0; l_max + 1];
    for l in 1..=l_max {
        let below = if l >= 2 { f[l - 2] } else { 0.0 };
        f[l] = below + (2 * l - 1) as f64 * p[l - 1];
    }
    f
}

fn check(l: usize, x: f64) -> Result<()> {
    if l < 1 {
        return Err(Error::Domain("f_l requires l >= 1".into()));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("f_l requires |x| <= 1, got {x}")));
    }
    Ok(())
}

/// First derivative of the Legendre polynomial `P_l` at `x`.
pub fn legendre_fl(l: usize, x: f64) -> Result<f64> {
    check(l, x)?;
    Ok(legendre_fl_seq(l, x)[l])
}

/// Associated Legendre function `P_l^1(cos θ)` in the sign convention
/// `P_l^1(cos θ) = -sin θ f_l(cos θ)`.
pub fn assoc_legendre_p1(l: usize, theta: f64) -> Result<f64> {
    let x = theta.cos();
    check(l, x)?;
    Ok(-theta.sin() * legendre_fl_seq(l, x)[l])
}
