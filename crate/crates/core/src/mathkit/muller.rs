use num_complex::Complex64;

use super::MathError;

/// Muller's method for a complex root of `f`.
///
/// Stops when `|f(x)| <= tol` or the step satisfies `|dx| <= tol * max(1, |x|)`.
/// A degenerate parabola (all three samples equal) triggers one fixed
/// perturbation of the newest point before giving up.
pub fn muller_root<F>(
    mut f: F,
    seeds: [Complex64; 3],
    tol: f64,
    max_iter: usize,
) -> Result<Complex64, MathError>
where
    F: FnMut(Complex64) -> Complex64,
{
    if !(tol > 0.0) {
        return Err(MathError::InvalidArgument(
            "muller tolerance must be positive",
        ));
    }
    let [mut x0, mut x1, mut x2] = seeds;
    if x0 == x1 || x1 == x2 || x0 == x2 {
        return Err(MathError::InvalidArgument("muller seeds must be distinct"));
    }
    let mut f0 = f(x0);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut perturbed = false;

    for _ in 0..max_iter {
        if f2.norm() <= tol {
            return Ok(x2);
        }
        let h1 = x1 - x0;
        let h2 = x2 - x1;
        let d1 = (f1 - f0) / h1;
        let d2 = (f2 - f1) / h2;
        let a = (d2 - d1) / (h2 + h1);
        let b = d2 + h2 * a;
        let disc = (b * b - 4.0 * f2 * a).sqrt();
        let plus = b + disc;
        let minus = b - disc;
        let denom = if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        };

        if denom.norm() == 0.0 || !denom.re.is_finite() || !denom.im.is_finite() {
            if perturbed {
                return Err(MathError::MullerDegenerate { x: x2 });
            }
            perturbed = true;
            let scale = if x2.norm() > 0.0 { x2.norm() } else { 1.0 };
            x2 += Complex64::new(1e-8 * scale, 0.0);
            f2 = f(x2);
            continue;
        }

        let step = -2.0 * f2 / denom;
        let x3 = x2 + step;
        let f3 = f(x3);
        if !(f3.re.is_finite() && f3.im.is_finite()) {
            return Err(MathError::NonFinite("muller iterate"));
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
        if f2.norm() <= tol || step.norm() <= tol * x2.norm().max(1.0) {
            return Ok(x2);
        }
    }
    Err(MathError::MullerNoConvergence {
        iterations: max_iter,
        x: x2,
    })
}
