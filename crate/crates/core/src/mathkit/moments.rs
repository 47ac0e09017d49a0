use num_complex::Complex64;

/// Below this value of `|u| * max(|t1|, |t2|)` the moment differences are
/// summed as a Taylor series in `u`.
pub const SMALL_U_SCALE: f64 = 0.5;

/// Antiderivatives of `tau^{n-1} e^{u tau}` for `n = 1, 2, 3`:
/// `e^{u tau}/u`, `e^{u tau}(u tau - 1)/u^2` and `e^{u tau}(u^2 tau^2 - 2 u tau + 2)/u^3`.
pub fn exp_moments(u: Complex64, tau: f64) -> (Complex64, Complex64, Complex64) {
    let e = (u * tau).exp();
    let ut = u * tau;
    let g1 = e / u;
    let g2 = e * (ut - 1.0) / (u * u);
    let g3 = e * (ut * ut - 2.0 * ut + 2.0) / (u * u * u);
    (g1, g2, g3)
}

/// `[int_{t1}^{t2} tau^{n-1} e^{u tau} d tau]` for `n = 1, 2, 3`.
pub fn moment_differences(u: Complex64, t1: f64, t2: f64) -> [Complex64; 3] {
    moment_differences_with_exps(u, t1, t2, (u * t1).exp(), (u * t2).exp())
}

/// Same as [`moment_differences`] with `e1 = e^{u t1}` and `e2 = e^{u t2}` supplied
/// by the caller, typically as products of per-pole exponentials.
#[inline]
pub fn moment_differences_with_exps(
    u: Complex64,
    t1: f64,
    t2: f64,
    e1: Complex64,
    e2: Complex64,
) -> [Complex64; 3] {
    let scale = t1.abs().max(t2.abs());
    if u.norm() * scale < SMALL_U_SCALE {
        return taylor(u, t1, t2);
    }
    let inv = 1.0 / u;
    let a2 = u * t2;
    let a1 = u * t1;
    let g1 = (e2 - e1) * inv;
    let g2 = (e2 * (a2 - 1.0) - e1 * (a1 - 1.0)) * inv * inv;
    let g3 = (e2 * (a2 * a2 - 2.0 * a2 + 2.0) - e1 * (a1 * a1 - 2.0 * a1 + 2.0)) * inv * inv * inv;
    [g1, g2, g3]
}

fn taylor(u: Complex64, t1: f64, t2: f64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    // u^m / m!
    let mut coeff = Complex64::new(1.0, 0.0);
    // t^{m+1}
    let mut p2 = t2;
    let mut p1 = t1;
    for m in 0..60 {
        let mf = m as f64;
        let mut q2 = p2;
        let mut q1 = p1;
        let mut largest = 0.0_f64;
        for (n, slot) in out.iter_mut().enumerate() {
            let term = coeff * ((q2 - q1) / (mf + n as f64 + 1.0));
            *slot += term;
            largest = largest.max(term.norm() / slot.norm().max(f64::MIN_POSITIVE));
            q2 *= t2;
            q1 *= t1;
        }
        if m >= 5 && largest < 1e-17 {
            break;
        }
        coeff *= u / (mf + 1.0);
        p2 *= t2;
        p1 *= t1;
    }
    out
}
