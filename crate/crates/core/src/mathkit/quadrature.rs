use std::f64::consts::PI;
use std::sync::OnceLock;

const ORDER: usize = 16;

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..ORDER {
            // Newton on P_16 from the Chebyshev-like initial guess
            let mut x = (PI * (i as f64 + 0.75) / (ORDER as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=ORDER {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = ORDER as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Composite 16-point Gauss-Legendre rule on `panels` equal panels of `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = rule();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            panel += w * f(mid + 0.5 * width * x);
        }
        total += 0.5 * width * panel;
    }
    total
}

/// Nodes and weights of the same composite rule, for integrands that are
/// reused across many evaluations.
pub fn gauss_legendre_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = rule();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * ORDER);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        for (x, w) in nodes.iter().zip(weights) {
            out.push((mid + 0.5 * width * x, 0.5 * width * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let got = gauss_legendre(|x| x.powi(31) + 3.0 * x * x, -1.0, 2.0, 1);
        let exact = (2f64.powi(32) - 1.0) / 32.0 + 9.0;
        assert!((got - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn weights_sum_to_the_interval() {
        assert!((gauss_legendre(|_| 1.0, 0.0, 3.0, 7) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_reproduce_the_rule() {
        let f = |x: f64| (2.0 * x).sin() + x;
        let direct = gauss_legendre(f, -1.0, 4.0, 3);
        let summed: f64 = gauss_legendre_nodes(-1.0, 4.0, 3)
            .iter()
            .map(|&(x, w)| w * f(x))
            .sum();
        assert!((direct - summed).abs() < 1e-14);
    }
}
