//! The Ricci-flat real Monge-Ampère equation
//!
//! ```text
//! Π_λ 2^{m_λ} λ(∇ρ)^{m_λ} · det D²ρ = c · Π_λ sinh^{m_λ}(2λ(Z))
//! ```
//!
//! written as `F̂₁(∇ρ)·det D²ρ = F̂₂(Z)`. Rank one reduces to a quadrature
//! ([`solve_rank1`]); rank two is solved on a truncated Weyl sector by a
//! damped Newton grid scheme ([`solve_rank2`]).

mod banded;
mod lattice;
mod rank1;
mod rank2;
mod residual;
mod scheme;
mod surrogate;

pub use banded::BandLu;
pub use lattice::{Lattice, SectorGrid, Slot, Symmetry};
pub use rank1::{solve_rank1, RadialProfile};
pub use rank2::{monotone_dirichlet_solve, solve_rank2, Solution};
pub use residual::{
    chamber_preservation, equation_residual, inner_nodes, min_hessian_eigenvalue, pointwise_residual, ChamberReport,
};
pub use scheme::Scheme;
pub use surrogate::Surrogate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootsys::RootSystem;

/// Regularization floor for `λ(∇ρ)` relative to `λ(Z)` near walls.
pub const WALL_EPS: f64 = 1e-8;

/// `F̂₁(Z) = Π 2^{m_λ} |λ(Z)|^{m_λ}`.
pub fn f1_hat(rs: &RootSystem, z: &[f64]) -> f64 {
    rs.roots()
        .iter()
        .map(|r| (2.0 * r.eval(z).abs()).powi(r.mult as i32))
        .product()
}

/// `F̂₂(Z) = c · Π |sinh 2λ(Z)|^{m_λ}`.
pub fn f2_hat(rs: &RootSystem, c: f64, z: &[f64]) -> f64 {
    c * rs
        .roots()
        .iter()
        .map(|r| (2.0 * r.eval(z)).sinh().abs().powi(r.mult as i32))
        .product::<f64>()
}

/// How the rank-two iteration is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// The fitted boundary surrogate, extended inside.
    #[default]
    Surrogate,
    /// `Σ m_λ (cosh 2λ(Z) − 1) · √c · 2^{−(n+r)/2}`, lowered by a constant
    /// until it lies below the boundary data.
    CoshSeed,
}

/// A rank-two Dirichlet problem on the truncated chamber sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub rs: RootSystem,
    pub c: f64,
    /// Truncation radius `R`.
    pub radius: f64,
    /// Nodes along a radius; the spacing is `R / (grid_n − 1)`.
    pub grid_n: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub init: Init,
    #[serde(default)]
    pub symmetry: Symmetry,
}

impl ProblemSpec {
    pub fn new(rs: RootSystem, c: f64, radius: f64, grid_n: usize, tol: f64, max_iter: usize) -> Result<Self> {
        let spec = ProblemSpec {
            rs,
            c,
            radius,
            grid_n,
            tol,
            max_iter,
            scheme: Scheme::default(),
            init: Init::default(),
            symmetry: Symmetry::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProblem(m));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius must be positive, got {}", self.radius));
        }
        if self.grid_n < 16 {
            return bad(format!("grid_n must be at least 16, got {}", self.grid_n));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        Ok(())
    }

    /// Lattice spacing.
    pub fn h(&self) -> f64 {
        self.radius / (self.grid_n - 1) as f64
    }
}
