//! Rank one. With `Δ₊ ⊆ {λ, 2λ}` and `λ(x e₁) = a x` the equation reads
//!
//! ```text
//! P · ρ̂′^{k−1} ρ̂″ = c · g(x),   g(x) = Π sinh^{m_λ}(2 a_λ x),   P = Π (2 a_λ)^{m_λ}
//! ```
//!
//! with `k = Σ m_λ + 1`, so `(ρ̂′^k)′ = (k c / P) g` and
//! `ρ̂′(x) = ((k c / P) ∫₀ˣ g)^{1/k}`. The integral is accumulated in log
//! form so that steep multiplicities do not overflow.

use serde::{Deserialize, Serialize};

use super::scheme::ln_sinh;
use crate::error::{Error, Result};
use crate::quadrature::gl8;
use crate::rootsys::RootSystem;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// A rank-one radial profile `ρ̂` on `[0, x_max]`, extended evenly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    rs: RootSystem,
    c: f64,
    dx: f64,
    /// `(a_λ, m_λ)` per root.
    terms: Vec<(f64, u32)>,
    k: f64,
    /// `ln(k c / P)`.
    log_pref: f64,
    /// Quadrature sub-cells per node interval.
    sub: usize,
    xs: Vec<f64>,
    /// `ln ∫₀^{x_j} g`.
    log_int: Vec<f64>,
    values: Vec<f64>,
}

/// Solves the rank-one equation by quadrature, gauge `ρ̂(0) = 0`.
pub fn solve_rank1(rs: &RootSystem, c: f64, x_max: f64, n_nodes: usize) -> Result<RadialProfile> {
    if rs.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: rs.rank(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidProblem(format!("c must be positive, got {c}")));
    }
    if !(x_max > 0.0 && x_max.is_finite()) || n_nodes < 2 {
        return Err(Error::InvalidProblem(format!(
            "need x_max > 0 and at least 2 nodes, got {x_max} and {n_nodes}"
        )));
    }
    let terms: Vec<(f64, u32)> = rs.roots().iter().map(|r| (r.coeffs[0].abs(), r.mult)).collect();
    let k = rs.total_multiplicity() as f64 + 1.0;
    let log_p: f64 = terms.iter().map(|(a, m)| *m as f64 * (2.0 * a).ln()).sum();
    let dx = x_max / (n_nodes - 1) as f64;
    let rate: f64 = terms.iter().map(|(a, m)| 2.0 * a * *m as f64).sum();
    let sub = ((rate * dx / 0.25).ceil() as usize).max(1);
    let mut p = RadialProfile {
        rs: rs.clone(),
        c,
        dx,
        terms,
        k,
        log_pref: (k * c).ln() - log_p,
        sub,
        xs: (0..n_nodes).map(|j| j as f64 * dx).collect(),
        log_int: vec![f64::NEG_INFINITY; n_nodes],
        values: vec![0.0; n_nodes],
    };
    for j in 1..n_nodes {
        let cell = p.log_cell(p.xs[j - 1], p.xs[j]);
        p.log_int[j] = log_add(p.log_int[j - 1], cell);
    }
    for j in 1..n_nodes {
        let (a, b) = (p.xs[j - 1], p.xs[j]);
        p.values[j] = p.values[j - 1] + p.integrate_slope(a, b);
    }
    Ok(p)
}

impl RadialProfile {
    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    /// `ln g(t)` for `t > 0`.
    fn log_g(&self, t: f64) -> f64 {
        self.terms.iter().map(|(a, m)| *m as f64 * ln_sinh(2.0 * a * t)).sum()
    }

    /// `ln ∫_a^b g` for `0 ≤ a < b`, scaled by `g(b)` (the maximum).
    fn log_cell(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return f64::NEG_INFINITY;
        }
        let top = self.log_g(b);
        let (x, w) = gl8();
        let h = (b - a) / self.sub as f64;
        let mut s = 0.0;
        for c in 0..self.sub {
            let mid = a + (c as f64 + 0.5) * h;
            for (xi, wi) in x.iter().zip(w) {
                s += wi * (self.log_g(mid + 0.5 * h * xi) - top).exp();
            }
        }
        top + (0.5 * h * s).ln()
    }

    fn node_below(&self, t: f64) -> usize {
        ((t / self.dx).floor() as usize).min(self.xs.len() - 1)
    }

    fn slope_nonneg(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let j = self.node_below(t);
        let li = log_add(self.log_int[j], self.log_cell(self.xs[j], t));
        ((self.log_pref + li) / self.k).exp()
    }

    fn integrate_slope(&self, a: f64, b: f64) -> f64 {
        let (x, w) = gl8();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        x.iter()
            .zip(w)
            .map(|(xi, wi)| wi * self.slope_nonneg(mid + half * xi))
            .sum::<f64>()
            * half
    }

    fn check(&self, x: f64) -> Result<()> {
        if !x.is_finite() || x.abs() > self.x_max() * (1.0 + 1e-12) {
            return Err(Error::OutsideDomain(vec![x]));
        }
        Ok(())
    }

    /// `ρ̂(x)`, even in `x`.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let t = x.abs().min(self.x_max());
        let j = self.node_below(t);
        Ok(self.values[j] + self.integrate_slope(self.xs[j], t))
    }

    /// `ρ̂′(x)`, odd in `x`; exact up to quadrature at any `x`.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(x.signum() * self.slope_nonneg(x.abs().min(self.x_max())))
    }

    /// `ρ̂″(x)` by a five-point difference of the exact `ρ̂′`.
    pub fn second_derivative(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let d = 1e-3 * self.x_max().min(1.0);
        let t = x.abs().min(self.x_max());
        let f = |s: f64| s.signum() * self.slope_nonneg(s.abs());
        if t + 2.0 * d > self.x_max() {
            // One-sided, still fourth order.
            let b = |k: f64| f(t - k * d);
            return Ok((25.0 * b(0.0) - 48.0 * b(1.0) + 36.0 * b(2.0) - 16.0 * b(3.0) + 3.0 * b(4.0)) / (12.0 * d));
        }
        Ok((-f(t + 2.0 * d) + 8.0 * f(t + d) - 8.0 * f(t - d) + f(t - 2.0 * d)) / (12.0 * d))
    }
}
