use num_complex::Complex64;
use std::f64::consts::{E, PI};

use super::MathError;

const MAX_ITER: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

/// Branch `k` of the Lambert W function, the solution of `w e^w = z`.
///
/// Branch numbering follows the usual convention where `Im w` lies in
/// roughly `((2k-1)pi, (2k+1)pi]` for large `|z|`, the principal branch is
/// real on `[-1/e, inf)` and `W_{-1}` is real on `[-1/e, 0)`. Points on the
/// negative real axis are taken from the upper side of the cut.
pub fn lambert_w(k: i32, z: Complex64) -> Result<Complex64, MathError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MathError::NonFinite("lambert_w argument"));
    }
    // -0.0 imaginary parts would select the lower side of the cut
    let z = Complex64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im });

    if z.norm() == 0.0 {
        return if k == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(MathError::LambertNoConvergence { branch: k, z })
        };
    }

    let branch_point = Complex64::new(-1.0 / E, 0.0);
    if (z - branch_point).norm() < 1e-15 && (k == 0 || k == -1) {
        return Ok(Complex64::new(-1.0, 0.0));
    }

    let w = if k.abs() >= 2 {
        log_form_newton(k, z)?
    } else {
        halley(k, z, initial_guess(k, z))?
    };

    let residual = (w * w.exp() - z).norm() / z.norm();
    if !(residual <= residual_tol(w)) {
        return Err(MathError::LambertNoConvergence { branch: k, z });
    }
    Ok(w)
}

/// Evaluating `w e^w` loses about `|w|` ulps, which matters on far branches.
fn residual_tol(w: Complex64) -> f64 {
    RESIDUAL_TOL.max(4.0 * f64::EPSILON * w.norm())
}

fn initial_guess(k: i32, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let near_branch_point = (z + 1.0 / E).norm() < 0.3;

    if near_branch_point {
        let p = (2.0 * (E * z + 1.0)).sqrt();
        let series = |p: Complex64| -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
        match k {
            0 => return series(p),
            -1 if z.im >= 0.0 => return series(-p),
            1 if z.im < 0.0 => return series(-p),
            _ => {}
        }
    }

    if k == 0 {
        if z.norm() < 0.3 {
            return z * (one - z + 1.5 * z * z);
        }
        // a real seed never leaves the real axis, where W_0 has no root left of -1/e
        if z.norm() < 3.0 && z.re > -1.0 / E {
            return (one + z).ln();
        }
    }
    asymptotic(k, z)
}

fn asymptotic(k: i32, z: Complex64) -> Complex64 {
    let l1 = z.ln() + Complex64::new(0.0, 2.0 * PI * f64::from(k));
    let l2 = l1.ln();
    l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)
}

fn halley(k: i32, z: Complex64, mut w: Complex64) -> Result<Complex64, MathError> {
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom.norm() == 0.0 || !denom.re.is_finite() || !denom.im.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + w.norm()) {
            return Ok(w);
        }
    }
    let residual = (w * w.exp() - z).norm() / z.norm();
    if residual <= residual_tol(w) {
        Ok(w)
    } else {
        Err(MathError::LambertNoConvergence { branch: k, z })
    }
}

/// Newton on `w + ln w = ln z + 2 pi i k`, which pins the branch for `|k| >= 2`.
fn log_form_newton(k: i32, z: Complex64) -> Result<Complex64, MathError> {
    let target = z.ln() + Complex64::new(0.0, 2.0 * PI * f64::from(k));
    let mut w = asymptotic(k, z);
    for _ in 0..MAX_ITER {
        let g = w + w.ln() - target;
        let step = g / (1.0 + 1.0 / w);
        w -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + w.norm()) {
            return Ok(w);
        }
    }
    Err(MathError::LambertNoConvergence { branch: k, z })
}
