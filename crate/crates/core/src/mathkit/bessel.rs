//! Half-integer order Bessel functions.
//!
//! `bessel_i_half` evaluates `I_{n+1/2}(z)` for complex `z`. The real-argument
//! helper [`reduced_bessel_j`] returns `0F1(; nu+1; -y^2/4)`, the entire part of
//! `J_nu` with the `(y/2)^nu / Gamma(nu+1)` envelope removed. The series
//! solution of the delay equations is written in terms of that function so
//! that large orders never overflow.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::MathError;

const SMALL_ARG: f64 = 1e-8;
const EXP_LIMIT: f64 = 700.0;

/// `ln Gamma(x)` for positive `x`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Modified Bessel function of the first kind `I_{n+1/2}(z)` on the principal branch.
pub fn bessel_i_half(n: u32, z: Complex64) -> Result<Complex64, MathError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MathError::NonFinite("bessel_i_half argument"));
    }
    if z.re.abs() > EXP_LIMIT {
        return Err(MathError::BesselOverflow { order: n, z });
    }
    let nu = f64::from(n) + 0.5;
    let r = z.norm();
    if r == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if r < SMALL_ARG {
        return Ok(((z / 2.0).ln() * nu - ln_gamma(nu + 1.0)).exp());
    }
    if r < series_radius(n) {
        Ok(ascending_series(nu, z))
    } else {
        Ok(closed_form(n, z))
    }
}

fn series_radius(n: u32) -> f64 {
    0.7 * f64::from(n) + 4.0
}

fn ascending_series(nu: f64, z: Complex64) -> Complex64 {
    let q = z * z / 4.0;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for m in 1..500 {
        let m = f64::from(m);
        term *= q / (m * (m + nu));
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    ((z / 2.0).ln() * nu - ln_gamma(nu + 1.0)).exp() * sum
}

/// `(2 pi z)^{-1/2} [e^z P(-1/z) + (-1)^{n+1} e^{-z} P(1/z)]` with
/// `P(x) = sum_k (n+k)! / (k! (n-k)!) (x/2)^k`.
fn closed_form(n: u32, z: Complex64) -> Complex64 {
    let inv2z = 1.0 / (2.0 * z);
    let mut coeff = 1.0_f64;
    let mut plus = Complex64::new(0.0, 0.0);
    let mut minus = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for k in 0..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        plus += power * coeff * sign;
        minus += power * coeff;
        let kf = f64::from(k);
        let nf = f64::from(n);
        coeff *= (nf + kf + 1.0) * (nf - kf) / (kf + 1.0);
        power *= inv2z;
    }
    let parity = if n % 2 == 0 { -1.0 } else { 1.0 };
    (z.exp() * plus + parity * (-z).exp() * minus) / (2.0 * PI * z).sqrt()
}

/// `0F1(; k + 3/2; -y^2/4)` for spherical orders `k` in `lo..=hi`, i.e. the
/// reduced Bessel function `Gamma(nu+1) (2/y)^nu J_nu(y)` at `nu = k + 1/2`.
///
/// Entry `i` of the result belongs to order `lo + i`. Values are bounded by
/// one in magnitude for real `y`.
pub fn reduced_bessel_j(lo: usize, hi: usize, y: f64) -> Vec<f64> {
    assert!(lo <= hi);
    let y = y.abs();
    let mut out = vec![0.0; hi - lo + 1];
    let mut miller = None;
    for (i, slot) in out.iter_mut().enumerate() {
        let nu = (lo + i) as f64 + 0.5;
        let q = y * y / 4.0;
        *slot = if q <= nu + 1.0 {
            hypergeometric_series(nu, q)
        } else {
            let logs: &Vec<(f64, f64)> = miller.get_or_insert_with(|| spherical_j_logs(lo, hi, y));
            let (sign, ln_abs) = logs[i];
            if sign == 0.0 {
                0.0
            } else {
                let ln =
                    ln_gamma(nu + 1.0) + nu * (2.0 / y).ln() + 0.5 * (2.0 * y / PI).ln() + ln_abs;
                sign * ln.exp()
            }
        };
    }
    out
}

fn hypergeometric_series(nu: f64, q: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..2000 {
        let m = f64::from(m);
        term *= -q / (m * (m + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Spherical Bessel `j_k(y)` for `k` in `lo..=hi` by Miller's downward recurrence,
/// normalised with `sum (2k+1) j_k^2 = 1`. Returned as `(sign, ln|j_k|)`.
fn spherical_j_logs(lo: usize, hi: usize, y: f64) -> Vec<(f64, f64)> {
    let start = hi.max(y.ceil() as usize) + 30 + (10.0 * y.cbrt()) as usize;
    const RESCALE: f64 = 1e100;
    let ln_rescale = RESCALE.ln();

    // stored as (value, log scale at the time it was stored)
    let mut stored = vec![(0.0_f64, 0.0_f64); hi - lo + 1];
    let mut log_scale = 0.0;
    let mut upper = 0.0_f64;
    let mut current = 1e-30_f64;
    let mut norm = 0.0_f64;
    let mut f1 = 0.0;

    let mut k = start;
    loop {
        norm += (2 * k + 1) as f64 * current * current;
        if k >= lo && k <= hi {
            stored[k - lo] = (current, log_scale);
        }
        if k == 1 {
            f1 = current;
        }
        if k == 0 {
            break;
        }
        let lower = (2 * k + 1) as f64 / y * current - upper;
        upper = current;
        current = lower;
        k -= 1;
        if current.abs() > RESCALE {
            current /= RESCALE;
            upper /= RESCALE;
            norm /= RESCALE * RESCALE;
            log_scale -= ln_rescale;
            f1 /= RESCALE;
        }
    }

    let f0 = current;
    // log_scale <= 0 tracks the shrink applied to values stored later
    let ln_norm = 0.5 * norm.ln();
    let j0 = y.sin() / y;
    let j1 = y.sin() / (y * y) - y.cos() / y;
    let flip = if j0.abs() >= j1.abs() {
        (j0 * f0).signum()
    } else {
        (j1 * f1).signum()
    };

    stored
        .into_iter()
        .map(|(v, scale_at_store)| {
            if v == 0.0 {
                (0.0, f64::NEG_INFINITY)
            } else {
                // value in final units: v * exp(log_scale - scale_at_store)
                let ln_abs = v.abs().ln() + (log_scale - scale_at_store) - ln_norm;
                (flip * v.signum(), ln_abs)
            }
        })
        .collect()
}
