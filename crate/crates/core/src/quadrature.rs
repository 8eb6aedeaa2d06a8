//! Gauss–Legendre quadrature and the two log-cosine integrals over [0, π].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("zero-point quadrature".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        let mut converged = false;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    Ok((x, w))
}

/// `∫_a^b f` with a composite rule of `panels` panels of `order` points each.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> Result<f64> {
    let (x, w) = gauss_legendre(order)?;
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        sum += x.iter().zip(&w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum::<f64>();
    }
    Ok(0.5 * h * sum)
}

/// `∫₀^π log(1 + s·cos x) dx` for `s = ±1`.
///
/// With `x = 2t` the integrand becomes `log 2 + 2 log cos t` (or `2 log sin t`). The
/// logarithmic singularity at the zero `t₀` of cos/sin is split off as
/// `log|t − t₀|`, integrated in closed form, and the smooth rest goes to Gauss–Legendre.
pub fn log_cos_integral(sign: f64) -> Result<f64> {
    let h = PI / 2.0;
    let smooth = |t: f64| {
        if sign > 0.0 {
            let y = h - t;
            if y == 0.0 { 0.0 } else { (t.cos() / y).ln() }
        } else if t == 0.0 {
            0.0
        } else {
            (t.sin() / t).ln()
        }
    };
    let log_part = h * h.ln() - h;
    let log_trig = log_part + integrate(smooth, 0.0, h, 16, 20)?;
    Ok(2.0 * (h * 2f64.ln() + 2.0 * log_trig))
}

/// The same integral in the original variable, subtracting `2 log y` with `y` the
/// distance to the singular endpoint.
pub fn log_cos_integral_direct(sign: f64) -> Result<f64> {
    // 1 + s cos x = 2 cos²(x/2) or 2 sin²(x/2); split off log(x²) near the singular end
    let f = |x: f64| {
        let y = if sign > 0.0 { PI - x } else { x };
        if y == 0.0 {
            return 2f64.ln() + 2.0 * (0.5f64).ln();
        }
        (1.0 + sign * x.cos()).ln() - 2.0 * y.ln()
    };
    let singular = 2.0 * (PI * PI.ln() - PI);
    Ok(integrate(f, 0.0, PI, 32, 20)? + singular)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5).unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
        let (x1, w1) = gauss_legendre(1).unwrap();
        assert_eq!((x1[0], w1[0]), (0.0, 2.0));
    }

    #[test]
    fn log_cos_integrals() {
        let want = -PI * 2f64.ln();
        for s in [1.0, -1.0] {
            assert!((log_cos_integral(s).unwrap() - want).abs() < 1e-10);
            assert!((log_cos_integral_direct(s).unwrap() - want).abs() < 1e-10);
        }
    }
}
