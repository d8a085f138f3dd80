//! Checks on solved (or injected) potentials.

use serde::{Deserialize, Serialize};

use super::rank2::Solution;
use super::scheme::Scheme;
use super::{f1_hat, f2_hat};
use crate::error::Result;
use crate::kaehler::Potential;
use crate::rootsys::{RootSystem, WEYL_TOL};

/// `F̂₁(∇ρ)·det D²ρ − F̂₂(Z)` with the solver's own discrete operators, at
/// every unknown node. With the monotone scheme the determinant is the
/// wide-stencil one.
pub fn equation_residual(sol: &Solution) -> Vec<f64> {
    let rs = sol.root_system();
    let grid = sol.grid();
    let pairs = grid.lattice().orthogonal_pairs(grid.grid_n() > 128);
    (0..grid.len())
        .map(|k| {
            let z = grid.position(k);
            let Some((a, g)) = sol.derivatives(k, false) else {
                return f64::NAN;
            };
            let det = match sol.spec.scheme {
                Scheme::Centered => a[0] * a[2] - a[1] * a[1],
                Scheme::Monotone => wide_det(sol, k, &pairs),
            };
            f1_hat(rs, &g) * det - f2_hat(rs, sol.spec.c, &z)
        })
        .collect()
}

fn wide_det(sol: &Solution, k: usize, pairs: &[[(i32, i32); 2]]) -> f64 {
    let grid = sol.grid();
    let (i, j) = grid.coords(k);
    let h2 = grid.h() * grid.h();
    let u0 = sol.all_values()[k];
    let at = |a: i32, b: i32| {
        sol.grid()
            .index_of(&grid.lattice().position(grid.h(), a, b))
            .map(|l| sol.all_values()[l])
    };
    pairs
        .iter()
        .filter_map(|pair| {
            let mut p = 1.0;
            for v in pair {
                let d = (at(i + v.0, j + v.1)? + at(i - v.0, j - v.1)? - 2.0 * u0)
                    / (grid.lattice().length(*v).powi(2) * h2);
                p *= d.max(0.0);
            }
            Some(p)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `F̂₁(∇ρ(Z))·det D²ρ(Z) − F̂₂(Z)` for any potential.
pub fn pointwise_residual(rs: &RootSystem, c: f64, pot: &dyn Potential, z: &[f64]) -> Result<f64> {
    let g = pot.gradient(z)?;
    let h = pot.hessian(z)?;
    let det = match h.len() {
        1 => h[0][0],
        _ => h[0][0] * h[1][1] - h[0][1] * h[1][0],
    };
    Ok(f1_hat(rs, &g) * det - f2_hat(rs, c, z))
}

/// Unknown nodes with `|Z| ≤ R/2` at distance at least `2h` from every wall.
pub fn inner_nodes(sol: &Solution) -> Vec<usize> {
    let grid = sol.grid();
    let rs = sol.root_system();
    let (r, h) = (grid.radius(), grid.h());
    (0..grid.len())
        .filter(|&k| {
            let z = grid.position(k);
            z[0].hypot(z[1]) <= 0.5 * r * (1.0 + 1e-12)
                && rs
                    .roots()
                    .iter()
                    .all(|l| l.eval(&z).abs() / l.norm_sq().sqrt() >= 2.0 * h * (1.0 - 1e-9))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChamberReport {
    pub holds: bool,
    /// `min λ(∇ρ)/|λ|` over the checked nodes and roots.
    pub min_margin: f64,
    pub violations: usize,
    pub checked: usize,
}

/// Checks `λ(∇ρ) > 0` for every positive root at the given nodes, using the
/// centered gradient; nodes on walls are skipped.
pub fn chamber_preservation(sol: &Solution, nodes: &[usize]) -> ChamberReport {
    let rs = sol.root_system();
    let mut report = ChamberReport {
        holds: true,
        min_margin: f64::INFINITY,
        violations: 0,
        checked: 0,
    };
    for &k in nodes {
        let z = sol.grid().position(k);
        if rs.roots().iter().any(|l| l.eval(&z).abs() <= WEYL_TOL) {
            continue;
        }
        let Some((_, g)) = sol.derivatives(k, false) else {
            continue;
        };
        report.checked += 1;
        let margin = rs
            .roots()
            .iter()
            .map(|l| l.eval(&g) / l.norm_sq().sqrt())
            .fold(f64::INFINITY, f64::min);
        report.min_margin = report.min_margin.min(margin);
        if margin <= 0.0 {
            report.violations += 1;
            report.holds = false;
        }
    }
    report
}

/// Smallest eigenvalue of the centered discrete Hessian over the nodes.
pub fn min_hessian_eigenvalue(sol: &Solution, nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .filter_map(|&k| sol.derivatives(k, false))
        .map(|(a, _)| {
            let mean = 0.5 * (a[0] + a[2]);
            let rad = (0.25 * (a[0] - a[2]).powi(2) + a[1] * a[1]).sqrt();
            mean - rad
        })
        .fold(f64::INFINITY, f64::min)
}
