//! Gauss–Legendre quadrature.

use std::sync::OnceLock;

/// Nodes and weights on `[-1, 1]` for `n` points, by Newton iteration on the
/// Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
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

/// The order-8 rule, computed once.
pub fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// `∫_a^b f` with the order-8 rule on `cells` equal sub-intervals.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cells: usize) -> f64 {
    let (x, w) = gl8();
    let h = (b - a) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let mid = a + (c as f64 + 0.5) * h;
        let s: f64 = x.iter().zip(w).map(|(xi, wi)| wi * f(mid + 0.5 * h * xi)).sum();
        total += 0.5 * h * s;
    }
    total
}

/// Tensor-product order-8 rule over `[lo, hi]` in two dimensions.
pub fn integrate_box2<F: Fn(f64, f64) -> f64>(f: F, lo: [f64; 2], hi: [f64; 2], cells: [usize; 2]) -> f64 {
    let (x, w) = gl8();
    let hx = (hi[0] - lo[0]) / cells[0] as f64;
    let hy = (hi[1] - lo[1]) / cells[1] as f64;
    let mut total = 0.0;
    for ci in 0..cells[0] {
        let mx = lo[0] + (ci as f64 + 0.5) * hx;
        for cj in 0..cells[1] {
            let my = lo[1] + (cj as f64 + 0.5) * hy;
            let mut s = 0.0;
            for (xa, wa) in x.iter().zip(w) {
                for (xb, wb) in x.iter().zip(w) {
                    s += wa * wb * f(mx + 0.5 * hx * xa, my + 0.5 * hy * xb);
                }
            }
            total += 0.25 * hx * hy * s;
        }
    }
    total
}
