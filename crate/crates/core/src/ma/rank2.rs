//! Rank-two solver and its output.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::lattice::{SectorGrid, Slot};
use super::scheme::{self, Centered, Scheme};
use super::surrogate::Surrogate;
use super::{Init, ProblemSpec};
use crate::error::{Error, Result};
use crate::rootsys::RootSystem;

/// A discrete W-invariant potential on the truncated sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SolutionData", into = "SolutionData")]
pub struct Solution {
    pub spec: ProblemSpec,
    /// Dirichlet data source.
    pub surrogate: Surrogate,
    /// Constant subtracted after solving so that `ρ(0) = 0`.
    pub gauge_shift: f64,
    pub iterations: usize,
    /// Max-norm of the discrete log residual at exit.
    pub final_residual: f64,
    pub converged: bool,
    grid: SectorGrid,
    /// Unknown values followed by Dirichlet values.
    values: Vec<f64>,
}

/// File form: metadata plus every node with its value.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SolutionData {
    spec: ProblemSpec,
    surrogate: Surrogate,
    gauge_shift: f64,
    iterations: usize,
    final_residual: f64,
    converged: bool,
    unknowns: usize,
    nodes: Vec<[f64; 2]>,
    values: Vec<f64>,
}

impl From<Solution> for SolutionData {
    fn from(s: Solution) -> Self {
        SolutionData {
            unknowns: s.grid.len(),
            nodes: s.grid.positions(),
            spec: s.spec,
            surrogate: s.surrogate,
            gauge_shift: s.gauge_shift,
            iterations: s.iterations,
            final_residual: s.final_residual,
            converged: s.converged,
            values: s.values,
        }
    }
}

impl TryFrom<SolutionData> for Solution {
    type Error = Error;

    fn try_from(d: SolutionData) -> Result<Self> {
        d.spec.validate()?;
        let grid = SectorGrid::new(&d.spec.rs, d.spec.radius, d.spec.grid_n, d.spec.symmetry)?;
        if grid.len() != d.unknowns || grid.total() != d.nodes.len() || d.values.len() != d.nodes.len() {
            return Err(Error::Parse(format!(
                "solution has {} nodes ({} unknown), the spec's grid has {} ({} unknown)",
                d.nodes.len(),
                d.unknowns,
                grid.total(),
                grid.len()
            )));
        }
        let tol = 1e-9 * grid.h();
        for (k, z) in d.nodes.iter().enumerate() {
            let p = grid.position(k);
            if (p[0] - z[0]).abs() > tol || (p[1] - z[1]).abs() > tol {
                return Err(Error::Parse(format!(
                    "node {k} at {z:?} does not match the grid point {p:?}"
                )));
            }
        }
        Ok(Solution {
            spec: d.spec,
            surrogate: d.surrogate,
            gauge_shift: d.gauge_shift,
            iterations: d.iterations,
            final_residual: d.final_residual,
            converged: d.converged,
            grid,
            values: d.values,
        })
    }
}

impl Solution {
    /// Samples `f` on the grid of `spec` (unknown and Dirichlet nodes alike).
    /// `f` should be W-invariant; it is only evaluated on the sector.
    pub fn from_fn(spec: ProblemSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        spec.validate()?;
        let grid = SectorGrid::new(&spec.rs, spec.radius, spec.grid_n, spec.symmetry)?;
        let values: Vec<f64> = grid.positions().iter().map(|p| f(p)).collect();
        let surrogate = Surrogate::fit(&spec.rs, spec.c, spec.radius);
        let mut s = Solution {
            spec,
            surrogate,
            gauge_shift: 0.0,
            iterations: 0,
            final_residual: f64::NAN,
            converged: false,
            grid,
            values,
        };
        s.final_residual = s.log_residual_max();
        s.converged = s.final_residual <= s.spec.tol;
        Ok(s)
    }

    pub fn grid(&self) -> &SectorGrid {
        &self.grid
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.spec.rs
    }

    /// Values at the unknown nodes.
    pub fn values(&self) -> &[f64] {
        &self.values[..self.grid.len()]
    }

    /// Values at unknown and Dirichlet nodes.
    pub fn all_values(&self) -> &[f64] {
        &self.values
    }

    /// Unknown node positions.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        (0..self.grid.len()).map(|k| self.grid.position(k)).collect()
    }

    /// A copy with `f(Z)` added at every node.
    pub fn perturbed(&self, f: impl Fn(&[f64]) -> f64) -> Solution {
        let mut s = self.clone();
        for (k, v) in s.values.iter_mut().enumerate() {
            *v += f(&self.grid.position(k));
        }
        s
    }

    /// Value at a lattice point of the disc, reflected into the sector.
    pub fn value_at(&self, z: &[f64]) -> Option<f64> {
        self.grid.index_of(z).map(|k| self.values[k])
    }

    /// Discrete Hessian `(A11, A12, A22)` and gradient at unknown node `k`.
    pub fn derivatives(&self, k: usize, fourth: bool) -> Option<([f64; 3], [f64; 2])> {
        self.grid.derivatives(&self.values, k, fourth)
    }

    pub(crate) fn log_residual_max(&self) -> f64 {
        let r = match self.spec.scheme {
            Scheme::Centered => scheme_centered_residual(self),
            Scheme::Monotone => scheme::monotone_residual(&self.grid, &self.spec.rs, self.spec.c, &self.values),
        };
        r.map_or(f64::INFINITY, |r| r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

fn scheme_centered_residual(s: &Solution) -> Option<Vec<f64>> {
    let grid = &s.grid;
    (0..grid.len())
        .map(|k| {
            let (a, g) = grid.derivatives(&s.values, k, false)?;
            scheme::log_residual(&s.spec.rs, s.spec.c, &grid.position(k), a, g)
        })
        .collect()
}

fn cosh_seed(spec: &ProblemSpec, z: &[f64]) -> f64 {
    let n = spec.rs.total_dimension() as f64;
    let r = spec.rs.rank() as f64;
    let scale = spec.c.sqrt() * 2f64.powf(-(n + r) / 2.0);
    scale
        * spec
            .rs
            .roots()
            .iter()
            .map(|l| l.mult as f64 * ((2.0 * l.eval(z)).cosh() - 1.0))
            .sum::<f64>()
}

/// Initial values at every node. The cosh seed is lowered by a constant so
/// that it stays below the Dirichlet data on the band; a seed above the data
/// would put a concave kink at the boundary.
fn initial_values(spec: &ProblemSpec, grid: &SectorGrid, sur: &Surrogate) -> Vec<f64> {
    let data = |k: usize| sur.value(&spec.rs, &grid.position(k));
    match spec.init {
        Init::Surrogate => (0..grid.total()).map(data).collect(),
        Init::CoshSeed => {
            let shift = (grid.len()..grid.total())
                .map(|k| cosh_seed(spec, &grid.position(k)) - data(k))
                .fold(0.0f64, f64::max);
            (0..grid.total())
                .map(|k| {
                    if k < grid.len() {
                        cosh_seed(spec, &grid.position(k)) - shift
                    } else {
                        data(k)
                    }
                })
                .collect()
        }
    }
}

/// The centered Hessian is linear in the values and positive definite on the
/// surrogate data, so some blend `(1 − t)·u + t·data` is admissible. The
/// monotone scheme can leave a boundary layer that the centered scheme sees
/// as nonconvex; the smallest such `t` among `2^{-4}, …, 1` repairs it.
fn blend_until_admissible(sys: &Centered, values: &mut [f64], data: &[f64]) {
    if scheme::centered_admissible(sys, values) {
        return;
    }
    let n = sys.grid.len();
    let old = values[..n].to_vec();
    for e in (0..=4).rev() {
        let t = 0.5f64.powi(e);
        for k in 0..n {
            values[k] = (1.0 - t) * old[k] + t * data[k];
        }
        if scheme::centered_admissible(sys, values) {
            warn!("blended the iterate toward the boundary data with weight {t}");
            return;
        }
    }
}

/// Solves the rank-two equation on the truncated sector with Dirichlet data
/// from the fitted surrogate.
///
/// The centered scheme runs damped Newton from the initial guess; if it
/// stalls, a monotone-scheme stage moves the iterate and Newton restarts.
/// Non-convergence is not an error: the best iterate is returned with
/// `converged = false`.
pub fn solve_rank2(spec: &ProblemSpec) -> Result<Solution> {
    spec.validate()?;
    if spec.rs.rank() != 2 {
        return Err(Error::RankMismatch {
            expected: 2,
            got: spec.rs.rank(),
        });
    }
    let grid = SectorGrid::new(&spec.rs, spec.radius, spec.grid_n, spec.symmetry)?;
    let sur = Surrogate::fit(&spec.rs, spec.c, spec.radius);
    info!(
        "{} sector: {} unknowns, h = {:.4e}, surrogate κ = {:.6}, μ = {:.6}",
        spec.rs.family(),
        grid.len(),
        grid.h(),
        sur.kappa,
        sur.mu
    );
    let mut values = initial_values(spec, &grid, &sur);
    let data: Vec<f64> = grid.positions().iter().map(|p| sur.value(&spec.rs, p)).collect();

    let outcome = match spec.scheme {
        Scheme::Centered => {
            let sys = Centered {
                grid: &grid,
                rs: &spec.rs,
                c: spec.c,
            };
            let mut out = scheme::solve_centered(&sys, &mut values, spec.tol, spec.max_iter);
            if !out.converged && out.iterations < spec.max_iter {
                warn!("centered Newton stalled; running a monotone stage");
                let budget = spec.max_iter - out.iterations;
                let mono = scheme::solve_monotone(&grid, &spec.rs, spec.c, &mut values, spec.tol, budget.div_ceil(2));
                blend_until_admissible(&sys, &mut values, &data);
                let again = scheme::solve_centered(&sys, &mut values, spec.tol, budget - mono.iterations.min(budget));
                out = scheme::Outcome {
                    iterations: out.iterations + mono.iterations + again.iterations,
                    ..again
                };
            }
            out
        }
        Scheme::Monotone => scheme::solve_monotone(&grid, &spec.rs, spec.c, &mut values, spec.tol, spec.max_iter),
    };
    info!(
        "{}: {} after {} iterations, residual {:.3e}",
        spec.rs.family(),
        if outcome.converged {
            "converged"
        } else {
            "not converged"
        },
        outcome.iterations,
        outcome.residual
    );

    let origin = grid.index_of(&[0.0, 0.0]).expect("the origin is a grid node");
    let shift = values[origin];
    for v in &mut values {
        *v -= shift;
    }
    Ok(Solution {
        spec: spec.clone(),
        surrogate: sur,
        gauge_shift: shift,
        iterations: outcome.iterations,
        final_residual: outcome.residual,
        converged: outcome.converged,
        grid,
        values,
    })
}

/// Solves `min_{v⊥w} D_vv u · D_ww u = f` on the unknowns of `grid` with
/// `u = g` on the Dirichlet annulus, by the wide-stencil monotone scheme.
/// Returns unknown values followed by the Dirichlet values.
pub fn monotone_dirichlet_solve(
    grid: &SectorGrid,
    f: impl Fn(&[f64]) -> f64,
    g: impl Fn(&[f64]) -> f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut log_rhs = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let z = grid.position(k);
        let v = f(&z);
        if !(v > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "right-hand side must be positive, got {v} at {z:?}"
            )));
        }
        log_rhs.push(v.ln());
    }
    let mut values: Vec<f64> = grid.positions().iter().map(|p| g(p)).collect();
    let out = scheme::monotone_dirichlet(grid, log_rhs, &mut values, tol)?;
    if !out.converged {
        return Err(Error::InvalidProblem(format!(
            "monotone Dirichlet solve stalled at residual {:e}",
            out.residual
        )));
    }
    Ok(values)
}

impl Solution {
    /// Whether lattice point `(i, j)` is an unknown, a Dirichlet node, or
    /// off the grid.
    pub fn slot(&self, i: i32, j: i32) -> Slot {
        self.grid.slot(i, j)
    }
}
