//! Gauss-Legendre rules and small one-dimensional quadrature helpers.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Cached 16-point rule.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

/// Cached 32-point rule.
pub fn gl32() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(32))
}

/// Integrates `f` over `[lo, hi]` with the given rule on `[-1, 1]`.
pub fn integrate(rule: &(Vec<f64>, Vec<f64>), lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

/// Two-point Gauss rule on `[0, 1]` for a positive weight given through its
/// first four moments. Returns `([t1, t2], [w1, w2])`.
pub fn two_point_from_moments(mu: [f64; 4]) -> ([f64; 2], [f64; 2]) {
    let m = [1.0, mu[1] / mu[0], mu[2] / mu[0], mu[3] / mu[0]];
    // t^2 + c1 t + c0 orthogonal to 1 and t
    let det = m[1] * m[1] - m[0] * m[2];
    let c1 = (-m[2] * m[1] + m[3] * m[0]) / det;
    let c0 = (-m[3] * m[1] + m[2] * m[2]) / det;
    let disc = (c1 * c1 - 4.0 * c0).max(0.0).sqrt();
    let (t1, t2) = if c1 < 0.0 {
        let big = 0.5 * (-c1 + disc);
        (c0 / big, big)
    } else {
        let small = 0.5 * (-c1 - disc);
        (small, c0 / small)
    };
    let w2 = (m[1] - t1) / (t2 - t1);
    ([t1, t2], [mu[0] * (1.0 - w2), mu[0] * w2])
}
