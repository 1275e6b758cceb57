//! Adaptive Gauss–Legendre integration on a finite interval.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

fn rules() -> &'static (GaussLegendre, GaussLegendre) {
    static RULES: OnceLock<(GaussLegendre, GaussLegendre)> = OnceLock::new();
    RULES.get_or_init(|| {
        let n = |k: usize| GaussLegendre::new(NonZeroUsize::new(k).unwrap());
        (n(20), n(41))
    })
}

/// Integrates `f` over `[a, b]` to the requested absolute tolerance by
/// bisecting panels until a 20-point and a 41-point rule agree.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 40;
    const MAX_PANELS: usize = 100_000;
    let (lo, hi) = rules();
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut panels = 0usize;
    let width = (b - a).abs().max(f64::MIN_POSITIVE);
    while let Some((x0, x1, depth)) = stack.pop() {
        panels += 1;
        let coarse = lo.integrate(x0, x1, &f);
        let fine = hi.integrate(x0, x1, &f);
        let err = (fine - coarse).abs();
        let budget = tol * (x1 - x0).abs() / width;
        if err <= budget.max(f64::EPSILON * fine.abs()) {
            total += fine;
            continue;
        }
        if depth >= MAX_DEPTH || panels >= MAX_PANELS {
            return Err(Error::Quadrature { lo: x0, hi: x1, error: err });
        }
        let mid = 0.5 * (x0 + x1);
        stack.push((mid, x1, depth + 1));
        stack.push((x0, mid, depth + 1));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(v, 9.0 - 3.0 + 3.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(|x| (40.0 * x).cos(), 0.0, PI, 1e-12).unwrap();
        assert!(v.abs() < 1e-12);
        let v = integrate(|x| x.sin().powi(2), 0.0, 100.0, 1e-12).unwrap();
        assert_relative_eq!(v, 50.0 - (200.0f64).sin() / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn kink_needs_subdivision() {
        let v = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(v, 4.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn divergent_integrand_reports_failure() {
        let r = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
