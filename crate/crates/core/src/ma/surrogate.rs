//! Separable boundary surrogate `S(Z) = κ Σ_λ m_λ (cosh(μ λ(Z)) − 1)`.
//!
//! `S` is W-invariant and strictly convex. The log residual of the equation
//! is affine in `ln κ` with slope `n = r + Σ m_λ`, so `κ` is eliminated in
//! closed form and only the rate `μ` is searched. For a1xa1 with unit
//! multiplicities the fit recovers the exact solution (`μ = 1`, `κ = c^{1/4}`).

use serde::{Deserialize, Serialize};

use super::scheme::log_residual;
use crate::rootsys::RootSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Surrogate {
    pub kappa: f64,
    pub mu: f64,
}

const ARC_SAMPLES: usize = 64;

impl Surrogate {
    /// Fits `(κ, μ)` so the equation's log residual on the arc `|Z| = R`
    /// inside the chamber is minimal in least squares.
    pub fn fit(rs: &RootSystem, c: f64, radius: f64) -> Surrogate {
        let theta = rs.theta().expect("rank-two root system");
        let arc: Vec<[f64; 2]> = (0..ARC_SAMPLES)
            .map(|k| {
                let t = theta * (k as f64 + 0.5) / ARC_SAMPLES as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect();
        let n = rs.total_dimension() as f64;
        // Residuals at κ = 1; the optimal ln κ cancels their mean.
        let spread = |ln_mu: f64| -> (f64, f64) {
            let s = Surrogate {
                kappa: 1.0,
                mu: ln_mu.exp(),
            };
            let r: Vec<f64> = arc
                .iter()
                .map(|z| {
                    let (a, g) = s.derivatives(rs, z);
                    log_residual(rs, c, z, a, g).unwrap_or(1e3)
                })
                .collect();
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            (r.iter().map(|v| (v - mean) * (v - mean)).sum(), mean)
        };
        let (lo, hi) = (0.1f64.ln(), 10f64.ln());
        let scan = 60;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=scan {
            let x = lo + (hi - lo) * k as f64 / scan as f64;
            let v = spread(x).0;
            if v < best.0 {
                best = (v, x);
            }
        }
        // Golden-section refinement around the best scan point.
        let step = (hi - lo) / scan as f64;
        let (mut a, mut b) = (best.1 - step, best.1 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (spread(x1).0, spread(x2).0);
        for _ in 0..80 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = spread(x1).0;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = spread(x2).0;
            }
        }
        let ln_mu = 0.5 * (a + b);
        let mean = spread(ln_mu).1;
        Surrogate {
            kappa: (-mean / n).exp(),
            mu: ln_mu.exp(),
        }
    }

    pub fn value(&self, rs: &RootSystem, z: &[f64]) -> f64 {
        self.kappa
            * rs.roots()
                .iter()
                .map(|r| r.mult as f64 * ((self.mu * r.eval(z)).cosh() - 1.0))
                .sum::<f64>()
    }

    pub fn gradient(&self, rs: &RootSystem, z: &[f64]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for r in rs.roots() {
            let s = self.kappa * self.mu * r.mult as f64 * (self.mu * r.eval(z)).sinh();
            g[0] += s * r.coeffs[0];
            g[1] += s * r.coeffs[1];
        }
        g
    }

    /// Hessian as `(A11, A12, A22)`.
    pub fn hessian(&self, rs: &RootSystem, z: &[f64]) -> [f64; 3] {
        let mut a = [0.0; 3];
        for r in rs.roots() {
            let s = self.kappa * self.mu * self.mu * r.mult as f64 * (self.mu * r.eval(z)).cosh();
            a[0] += s * r.coeffs[0] * r.coeffs[0];
            a[1] += s * r.coeffs[0] * r.coeffs[1];
            a[2] += s * r.coeffs[1] * r.coeffs[1];
        }
        a
    }

    fn derivatives(&self, rs: &RootSystem, z: &[f64]) -> ([f64; 3], [f64; 2]) {
        (self.hessian(rs, z), self.gradient(rs, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::Family;

    #[test]
    fn recovers_the_separable_solution() {
        let rs = RootSystem::uniform(Family::A1xA1, 1);
        let s = Surrogate::fit(&rs, 16.0, 2.0);
        assert!((s.mu - 1.0).abs() < 1e-6, "{s:?}");
        assert!((s.kappa - 2.0).abs() < 1e-5, "{s:?}");
    }

    #[test]
    fn scale_equivariance() {
        // Multiplying c by s^n multiplies the best κ by s.
        let rs = RootSystem::uniform(Family::A2, 1);
        let n = rs.total_dimension() as f64;
        let a = Surrogate::fit(&rs, 1.0, 2.0);
        let b = Surrogate::fit(&rs, 3f64.powf(n), 2.0);
        assert!((b.kappa / a.kappa - 3.0).abs() < 1e-6);
        assert!((b.mu - a.mu).abs() < 1e-6);
    }

    #[test]
    fn surrogate_is_w_invariant() {
        let rs = RootSystem::uniform(Family::G2, 1);
        let s = Surrogate { kappa: 0.7, mu: 1.3 };
        let z = crate::rootsys::ChamberPoint::new(vec![0.9, 0.2]);
        let v = s.value(&rs, &z);
        for w in rs.weyl_orbit(&z) {
            assert!((s.value(&rs, &w) - v).abs() < 1e-12);
        }
    }
}
