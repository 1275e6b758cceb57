//! Spherical Bessel and Hankel functions of real argument.
//!
//! `j_l` is evaluated by Miller's downward recurrence, normalised against the
//! closed forms of `j_0`/`j_1`; `y_l` by upward recurrence, which is stable
//! because `y_l` is the dominant solution.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RESCALE_ABOVE: f64 = 1e250;

fn check_arg(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("spherical Bessel argument must be positive, got {x}")))
    }
}

/// `j_0(x), ..., j_{l_max}(x)`.
pub fn spherical_jn_seq(l_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let start = l_max + 20 + (x.ceil() as usize) + (1.5 * (x.max(1.0) * 40.0).sqrt()) as usize;
    let mut out = vec![0.0; l_max + 1];
    let mut upper = 0.0_f64;
    let mut current = 1e-300_f64;
    for n in (0..=start).rev() {
        // j_{n-1} = (2n+1)/x j_n - j_{n+1}
        if n <= l_max {
            out[n] = current;
        }
        if n == 0 {
            break;
        }
        let lower = (2 * n + 1) as f64 / x * current - upper;
        upper = current;
        current = lower;
        if current.abs() > RESCALE_ABOVE {
            let s = 1.0 / current.abs();
            current *= s;
            upper *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    // `current` now holds the unnormalised j_0 and `upper` j_1.
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let scale = if j0.abs() >= j1.abs() { j0 / current } else { j1 / upper };
    for v in out.iter_mut() {
        *v *= scale;
    }
    Ok(out)
}

/// `y_0(x), ..., y_{l_max}(x)`.
pub fn spherical_yn_seq(l_max: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(l_max + 1);
    let y0 = -c / x;
    out.push(y0);
    if l_max >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..l_max {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

/// `h^(1)_0(x), ..., h^(1)_{l_max}(x)`.
pub fn spherical_hankel1_seq(l_max: usize, x: f64) -> Result<Vec<Complex64>> {
    let j = spherical_jn_seq(l_max, x)?;
    let y = spherical_yn_seq(l_max, x)?;
    Ok(j.into_iter().zip(y).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Spherical Hankel function of the first kind, `h^(1)_l(x) = j_l(x) + i y_l(x)`.
pub fn spherical_hankel1(l: usize, x: f64) -> Result<Complex64> {
    Ok(spherical_hankel1_seq(l, x)?[l])
}

/// Derivatives `j_l'(x)` given the sequence `j_0..j_{l_max}`; uses
/// `j_l' = j_{l-1} - (l+1)/x j_l` and `j_0' = -j_1`.
pub fn derivative_seq(values: &[f64], x: f64, next: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|l| {
            if l == 0 {
                -values.get(1).copied().unwrap_or(next)
            } else {
                values[l - 1] - (l + 1) as f64 / x * values[l]
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        let h0 = spherical_hankel1(0, PI).unwrap();
        assert!(h0.re.abs() < 1e-15);
        assert_relative_eq!(h0.im, 1.0 / PI, max_relative = 1e-14);

        // h_1(x) = -e^{ix}(x+i)/x^2
        let x = 1.0;
        let expected = -Complex64::new(0.0, x).exp() * Complex64::new(x, 1.0) / (x * x);
        let h1 = spherical_hankel1(1, x).unwrap();
        assert_relative_eq!(h1.re, expected.re, max_relative = 1e-14);
        assert_relative_eq!(h1.im, expected.im, max_relative = 1e-14);
        assert_relative_eq!(h1.re, 0.301169, epsilon = 1e-6);
        assert_relative_eq!(h1.im, -1.381773, epsilon = 1e-6);
    }

    #[test]
    fn three_term_recurrence() {
        let h = spherical_hankel1_seq(6, 2.0).unwrap();
        let rhs = h[5] * (11.0 / 2.0) - h[4];
        assert!((h[6] - rhs).norm() / h[6].norm() < 1e-12);
    }

    #[test]
    fn jn_small_argument_against_series() {
        // j_l(x) ~ x^l / (2l+1)!! for x -> 0
        let x = 1e-3;
        let j = spherical_jn_seq(10, x).unwrap();
        let mut dfact = 1.0;
        for l in 0..=10usize {
            if l > 0 {
                dfact *= (2 * l + 1) as f64;
            }
            let approx = x.powi(l as i32) / dfact;
            assert_relative_eq!(j[l], approx, max_relative = 1e-5);
        }
    }

    #[test]
    fn wronskian() {
        for &x in &[0.1, 0.7, 3.04, 4.56, 17.0, 60.0, 100.0] {
            let l_max = 60;
            let j = spherical_jn_seq(l_max + 1, x).unwrap();
            let y = spherical_yn_seq(l_max + 1, x).unwrap();
            let dj = derivative_seq(&j[..=l_max], x, j[l_max + 1]);
            let dy = derivative_seq(&y[..=l_max], x, y[l_max + 1]);
            for l in 0..=l_max {
                let w = j[l] * dy[l] - dj[l] * y[l];
                let scale = (j[l] * dy[l]).abs().max((dj[l] * y[l]).abs()).max(1.0 / (x * x));
                assert!(
                    (w - 1.0 / (x * x)).abs() / scale < 1e-10,
                    "l={l} x={x} w={w}"
                );
            }
        }
    }


    // (l, x, j_l(x), y_l(x)) at 40-digit precision.
    const REFERENCE: &[(usize, f64, f64, f64)] = &[
        (0, 0.1, 0.99833416646828152, -9.9500416527802571),
        (0, 3.04, 0.033361179709408508, 0.32725128399982219),
        (0, 4.56, -0.21675685349542336, 0.033289442653148154),
        (0, 100.0, -0.0050636564110975879, -0.0086231887228768393),
        (5, 0.1, 9.6163102329164487e-10, -945525187.56252575),
        (5, 3.04, 0.017349908986964472, -2.109897688007469),
        (5, 4.56, 0.081164794672164151, -0.42603472821363554),
        (5, 100.0, -0.0092901489349075718, 0.0037206784862748962),
        (20, 0.1, 7.6250923124090795e-46, -3.1987199351621122e+44),
        (20, 3.04, 3.1116135786700597e-16, -26073399830501.837),
        (20, 4.56, 9.0367865352720141e-13, -6071370086.1212925),
        (20, 100.0, 0.010107671283873054, 5.6317293788333957e-5),
        (40, 0.1, 1.5474121088950695e-101, -7.9782991215055084e+99),
        (40, 3.04, 3.0226054890774296e-42, -1.3473723022495213e+39),
        (40, 4.56, 3.1170552707175458e-35, -8.7413352952503731e+31),
        (40, 100.0, 0.010434108512084284, -0.00070484204069082525),
        (60, 0.1, 1.1851619979475744e-161, -6.9732864509800866e+159),
        (60, 3.04, 1.0712482656558716e-72, -2.5409728454365469e+69),
        (60, 4.56, 3.7579545937346582e-62, -4.8365503832518286e+58),
        (60, 100.0, -0.0048764691067704093, -0.010089473515786573),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(l, x, j, y) in REFERENCE {
            let js = spherical_jn_seq(l, x).unwrap();
            let ys = spherical_yn_seq(l, x).unwrap();
            assert_relative_eq!(js[l], j, max_relative = 1e-12);
            assert_relative_eq!(ys[l], y, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(spherical_hankel1(1, 0.0).is_err());
        assert!(spherical_hankel1(1, -2.0).is_err());
    }
}
