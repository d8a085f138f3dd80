//! Discretizations of the rank-two equation and their Newton drivers.
//!
//! Both schemes solve the log form
//!
//! ```text
//! ln det A + Σ_λ m_λ ln q_λ − ln c = 0,   q_λ = 2 λ(G) / sinh 2λ(Z)
//! ```
//!
//! where `A`, `G` are the discrete Hessian and gradient. On a wall of `λ` the
//! quotient takes its limit `aᵀAa / |a|²` (the gradient is tangent to the wall
//! there); off walls `λ(G)` is floored at `WALL_EPS·λ(Z)`.
//!
//! * `Centered`: second-order centered differences along the lattice
//!   directions, full Newton.
//! * `Monotone`: `det A` replaced by the wide-stencil
//!   `min_{v⊥w} max(D_vv, δ)·max(D_ww, δ)`, semismooth Newton on the
//!   coupled system.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::banded::BandLu;
use super::lattice::{Lattice, SectorGrid, Slot};
use super::WALL_EPS;
use crate::error::Result;
use crate::rootsys::{RootSystem, WEYL_TOL};

const MAX_HALVINGS: usize = 20;
/// Below this a directional second difference enters the monotone scheme
/// through the tangent line of `ln` instead of `ln` itself.
const MONOTONE_FLOOR: f64 = 1e-10;

/// `ln d`, continued linearly below the floor so it stays C¹ and increasing.
fn soft_ln(d: f64) -> f64 {
    if d >= MONOTONE_FLOOR {
        d.ln()
    } else {
        MONOTONE_FLOOR.ln() + d / MONOTONE_FLOOR - 1.0
    }
}

fn soft_ln_slope(d: f64) -> f64 {
    1.0 / d.max(MONOTONE_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Centered,
    Monotone,
}

/// `ln sinh y` for `y > 0`, without overflow.
pub(crate) fn ln_sinh(y: f64) -> f64 {
    if y > 20.0 {
        y - std::f64::consts::LN_2 + (-2.0 * y).exp().ln_1p()
    } else {
        y.sinh().ln()
    }
}

/// `Σ m_λ ln q_λ` and its derivatives in `(A11, A12, A22)` and `G`.
/// `None` if a wall quotient is not positive.
pub(crate) fn root_terms(rs: &RootSystem, z: &[f64], a: [f64; 3], g: [f64; 2]) -> Option<(f64, [f64; 3], [f64; 2])> {
    let mut total = 0.0;
    let mut da = [0.0; 3];
    let mut dg = [0.0; 2];
    for root in rs.roots() {
        let m = root.mult as f64;
        let (p, q) = (root.coeffs[0], root.coeffs[1]);
        let lz = p * z[0] + q * z[1];
        if lz.abs() <= WEYL_TOL {
            let qa = p * p * a[0] + 2.0 * p * q * a[1] + q * q * a[2];
            if !(qa > 0.0) {
                return None;
            }
            total += m * (qa / (p * p + q * q)).ln();
            da[0] += m * p * p / qa;
            da[1] += m * 2.0 * p * q / qa;
            da[2] += m * q * q / qa;
        } else {
            let s = lz.signum();
            let lg = s * (p * g[0] + q * g[1]);
            let floor = WALL_EPS * lz.abs();
            let ln_sh = ln_sinh(2.0 * lz.abs());
            if lg > floor {
                total += m * ((2.0 * lg).ln() - ln_sh);
                dg[0] += m * s * p / lg;
                dg[1] += m * s * q / lg;
            } else {
                total += m * ((2.0 * floor).ln() - ln_sh);
            }
        }
    }
    Some((total, da, dg))
}

/// The log residual at a point with Hessian `a` and gradient `g`; `None`
/// unless `a` is positive definite.
pub(crate) fn log_residual(rs: &RootSystem, c: f64, z: &[f64], a: [f64; 3], g: [f64; 2]) -> Option<f64> {
    log_residual_grad(rs, c, z, a, g).map(|(r, _, _)| r)
}

fn log_residual_grad(
    rs: &RootSystem,
    c: f64,
    z: &[f64],
    a: [f64; 3],
    g: [f64; 2],
) -> Option<(f64, [f64; 3], [f64; 2])> {
    let det = a[0] * a[2] - a[1] * a[1];
    if !(a[0] > 0.0 && det > 0.0) {
        return None;
    }
    let (terms, mut da, dg) = root_terms(rs, z, a, g)?;
    da[0] += a[2] / det;
    da[1] += -2.0 * a[1] / det;
    da[2] += a[0] / det;
    Some((det.ln() + terms - c.ln(), da, dg))
}

/// Result of a Newton run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Outcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn max_abs(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn l2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Sparse rows `(column, value)` into a band matrix sized to fit.
fn band_matrix(rows: &[Vec<(usize, f64)>]) -> BandLu {
    let mut kl = 0;
    let mut ku = 0;
    for (i, row) in rows.iter().enumerate() {
        for &(j, _) in row {
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    let mut m = BandLu::zeros(rows.len(), kl, ku);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            m.add(i, j, v);
        }
    }
    m
}

/// A nonlinear system over the unknowns of a grid.
trait System: Sync {
    fn grid(&self) -> &SectorGrid;
    fn residual_at(&self, values: &[f64], k: usize) -> Option<f64>;
    fn row_at(&self, values: &[f64], k: usize) -> Vec<(usize, f64)>;

    fn residual(&self, values: &[f64]) -> Option<Vec<f64>> {
        (0..self.grid().len())
            .into_par_iter()
            .map(|k| self.residual_at(values, k))
            .collect()
    }
}

/// Adds `w` times the value at lattice point `(i, j)` to a Jacobian row.
fn push(grid: &SectorGrid, row: &mut Vec<(usize, f64)>, i: i32, j: i32, w: f64) {
    if let Slot::Unknown(l) = grid.slot(i, j) {
        row.push((l, w));
    }
}

fn value(grid: &SectorGrid, values: &[f64], i: i32, j: i32) -> Option<f64> {
    match grid.slot(i, j) {
        Slot::Unknown(l) | Slot::Band(l) => Some(values[l]),
        Slot::Outside => None,
    }
}

pub(crate) struct Centered<'a> {
    pub grid: &'a SectorGrid,
    pub rs: &'a RootSystem,
    pub c: f64,
}

impl System for Centered<'_> {
    fn grid(&self) -> &SectorGrid {
        self.grid
    }

    fn residual_at(&self, values: &[f64], k: usize) -> Option<f64> {
        let (a, g) = self.grid.derivatives(values, k, false)?;
        log_residual(self.rs, self.c, &self.grid.position(k), a, g)
    }

    fn row_at(&self, values: &[f64], k: usize) -> Vec<(usize, f64)> {
        let grid = self.grid;
        let (a, g) = grid.derivatives(values, k, false).expect("stencil inside the band");
        let (_, da, dg) =
            log_residual_grad(self.rs, self.c, &grid.position(k), a, g).expect("row assembled at a valid iterate");
        let (h, h2) = (grid.h(), grid.h() * grid.h());
        let (i, j) = grid.coords(k);
        let mut row = Vec::with_capacity(13);
        let mut center = 0.0;
        for d in grid.lattice().directions() {
            let w2 = (d.hess[0] * da[0] + d.hess[1] * da[1] + d.hess[2] * da[2]) / h2;
            let w1 = (d.grad[0] * dg[0] + d.grad[1] * dg[1]) / h;
            center -= 2.0 * w2;
            push(grid, &mut row, i + d.v.0, j + d.v.1, w2 + w1);
            push(grid, &mut row, i - d.v.0, j - d.v.1, w2 - w1);
        }
        row.push((k, center));
        row
    }
}

/// Second difference along lattice vector `v` at `(i, j)`, per unit length².
fn second(grid: &SectorGrid, values: &[f64], i: i32, j: i32, v: (i32, i32)) -> Option<f64> {
    let u0 = value(grid, values, i, j)?;
    let up = value(grid, values, i + v.0, j + v.1)?;
    let um = value(grid, values, i - v.0, j - v.1)?;
    Some((up + um - 2.0 * u0) / (grid.lattice().length(v).powi(2) * grid.h() * grid.h()))
}

/// Pushes the linearization of `m·soft_ln(D_v u)` at `(i, j)`.
fn push_second(
    grid: &SectorGrid,
    row: &mut Vec<(usize, f64)>,
    center: &mut f64,
    i: i32,
    j: i32,
    v: (i32, i32),
    d: f64,
    m: f64,
) {
    let w = m * soft_ln_slope(d) / (grid.lattice().length(v).powi(2) * grid.h() * grid.h());
    *center -= 2.0 * w;
    push(grid, row, i + v.0, j + v.1, w);
    push(grid, row, i - v.0, j - v.1, w);
}

/// The `Σ m ln q` terms evaluated live inside the monotone scheme. On a wall
/// the quotient is the floored second difference along the wall normal,
/// which is a lattice direction for every family.
pub(crate) struct RootFactors<'a> {
    rs: &'a RootSystem,
    normals: Vec<(i32, i32)>,
}

impl<'a> RootFactors<'a> {
    pub fn new(rs: &'a RootSystem, lattice: Lattice) -> Self {
        let normals = rs
            .roots()
            .iter()
            .map(|r| {
                let (p, q) = (r.coeffs[0], r.coeffs[1]);
                let mut best = ((0, 0), f64::INFINITY);
                for i in -4..=4 {
                    for j in -4..=4 {
                        let x = lattice.position(1.0, i, j);
                        let len = x[0].hypot(x[1]);
                        if len > 0.0 && (p * x[1] - q * x[0]).abs() < 1e-9 * len && len < best.1 {
                            best = ((i, j), len);
                        }
                    }
                }
                best.0
            })
            .collect();
        RootFactors { rs, normals }
    }

    fn log_q(&self, grid: &SectorGrid, values: &[f64], k: usize) -> Option<f64> {
        let z = grid.position(k);
        let (i, j) = grid.coords(k);
        let (_, g) = grid.derivatives(values, k, false)?;
        let mut total = 0.0;
        for (root, &n) in self.rs.roots().iter().zip(&self.normals) {
            let m = root.mult as f64;
            let lz = root.eval(&z);
            if lz.abs() <= WEYL_TOL {
                total += m * soft_ln(second(grid, values, i, j, n)?);
            } else {
                let lg = lz.signum() * root.eval(&g);
                total += m * ((2.0 * lg.max(WALL_EPS * lz.abs())).ln() - ln_sinh(2.0 * lz.abs()));
            }
        }
        Some(total)
    }

    fn push_row(&self, grid: &SectorGrid, values: &[f64], k: usize, row: &mut Vec<(usize, f64)>, center: &mut f64) {
        let z = grid.position(k);
        let (i, j) = grid.coords(k);
        let (_, g) = grid.derivatives(values, k, false).expect("stencil inside the band");
        let mut dg = [0.0; 2];
        for (root, &n) in self.rs.roots().iter().zip(&self.normals) {
            let m = root.mult as f64;
            let lz = root.eval(&z);
            if lz.abs() <= WEYL_TOL {
                let d = second(grid, values, i, j, n).expect("stencil inside the band");
                push_second(grid, row, center, i, j, n, d, m);
            } else {
                let s = lz.signum();
                let lg = s * root.eval(&g);
                if lg > WALL_EPS * lz.abs() {
                    dg[0] += m * s * root.coeffs[0] / lg;
                    dg[1] += m * s * root.coeffs[1] / lg;
                }
            }
        }
        for d in grid.lattice().directions() {
            let w = (d.grad[0] * dg[0] + d.grad[1] * dg[1]) / grid.h();
            push(grid, row, i + d.v.0, j + d.v.1, w);
            push(grid, row, i - d.v.0, j - d.v.1, -w);
        }
    }
}

pub(crate) struct Monotone<'a> {
    pub grid: &'a SectorGrid,
    pub pairs: Vec<[(i32, i32); 2]>,
    /// `ln c`, or `ln f` for a plain Dirichlet problem.
    pub log_rhs: Vec<f64>,
    pub roots: Option<RootFactors<'a>>,
}

impl Monotone<'_> {
    /// Active pair index, its two directional second derivatives and the
    /// value of the operator. `None` unless both are positive.
    fn active(&self, values: &[f64], k: usize) -> Option<(usize, [f64; 2], f64)> {
        let (i, j) = self.grid.coords(k);
        let mut best: Option<(usize, [f64; 2], f64)> = None;
        for (p, pair) in self.pairs.iter().enumerate() {
            let dd = [
                second(self.grid, values, i, j, pair[0])?,
                second(self.grid, values, i, j, pair[1])?,
            ];
            let val = soft_ln(dd[0]) + soft_ln(dd[1]);
            if best.is_none_or(|b| val < b.2) {
                best = Some((p, dd, val));
            }
        }
        best.filter(|b| b.1[0] > 0.0 && b.1[1] > 0.0)
    }
}

impl System for Monotone<'_> {
    fn grid(&self) -> &SectorGrid {
        self.grid
    }

    fn residual_at(&self, values: &[f64], k: usize) -> Option<f64> {
        let (_, _, op) = self.active(values, k)?;
        let q = match &self.roots {
            Some(f) => f.log_q(self.grid, values, k)?,
            None => 0.0,
        };
        Some(op + q - self.log_rhs[k])
    }

    fn row_at(&self, values: &[f64], k: usize) -> Vec<(usize, f64)> {
        let grid = self.grid;
        let (p, dd, _) = self.active(values, k).expect("row assembled at a valid iterate");
        let (i, j) = grid.coords(k);
        let mut row = Vec::with_capacity(17);
        let mut center = 0.0;
        for (s, &v) in self.pairs[p].iter().enumerate() {
            push_second(grid, &mut row, &mut center, i, j, v, dd[s], 1.0);
        }
        if let Some(f) = &self.roots {
            f.push_row(grid, values, k, &mut row, &mut center);
        }
        row.push((k, center));
        row
    }
}

/// Damped Newton on the unknown part of `values`. A step is halved until the
/// iterate is admissible (positive-definite discrete Hessians) and the
/// residual norm decreases, at most 20 times.
fn newton(sys: &dyn System, values: &mut [f64], tol: f64, max_iter: usize) -> Outcome {
    let n = sys.grid().len();
    let Some(mut r) = sys.residual(values) else {
        warn!("initial iterate is not discretely convex");
        return Outcome {
            iterations: 0,
            residual: f64::INFINITY,
            converged: false,
        };
    };
    let mut it = 0;
    while it < max_iter {
        let res = max_abs(&r);
        if res <= tol {
            return Outcome {
                iterations: it,
                residual: res,
                converged: true,
            };
        }
        it += 1;
        let rows: Vec<Vec<(usize, f64)>> = (0..n).into_par_iter().map(|k| sys.row_at(values, k)).collect();
        let mut jac = band_matrix(&rows);
        if let Err(e) = jac.factor() {
            warn!("Newton matrix: {e}");
            break;
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let du = jac.solve(&rhs);
        let base = l2(&r);
        let mut step = 1.0;
        let mut accepted = false;
        let old: Vec<f64> = values[..n].to_vec();
        for _ in 0..=MAX_HALVINGS {
            for k in 0..n {
                values[k] = old[k] + step * du[k];
            }
            if let Some(rt) = sys.residual(values) {
                if l2(&rt) < base {
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        debug!("Newton {it}: max residual {res:e}, step {step}");
        if !accepted {
            values[..n].copy_from_slice(&old);
            warn!("Newton stalled after {it} iterations at residual {res:e}");
            break;
        }
    }
    let res = max_abs(&r);
    Outcome {
        iterations: it,
        residual: res,
        converged: res <= tol,
    }
}

pub(crate) fn solve_centered(sys: &Centered, values: &mut [f64], tol: f64, max_iter: usize) -> Outcome {
    let floored = count_floored(sys, values);
    if floored > 0 {
        debug!("{floored} nodes start with λ(∇ρ) at the wall floor");
    }
    newton(sys, values, tol, max_iter)
}

/// Whether every centered Hessian is positive definite (and every wall
/// quotient positive).
pub(crate) fn centered_admissible(sys: &Centered, values: &[f64]) -> bool {
    sys.residual(values).is_some()
}

fn count_floored(sys: &Centered, values: &[f64]) -> usize {
    (0..sys.grid.len())
        .filter(|&k| {
            let z = sys.grid.position(k);
            let Some((_, g)) = sys.grid.derivatives(values, k, false) else {
                return false;
            };
            sys.rs.roots().iter().any(|r| {
                let lz = r.eval(&z);
                lz.abs() > WEYL_TOL && lz.signum() * r.eval(&g) <= WALL_EPS * lz.abs()
            })
        })
        .count()
}

fn monotone_system<'a>(grid: &'a SectorGrid, rs: &'a RootSystem, c: f64) -> Monotone<'a> {
    Monotone {
        grid,
        pairs: grid.lattice().orthogonal_pairs(grid.grid_n() > 128),
        log_rhs: vec![c.ln(); grid.len()],
        roots: Some(RootFactors::new(rs, grid.lattice())),
    }
}

/// Damped Newton on the monotone scheme, root factors included.
pub(crate) fn solve_monotone(
    grid: &SectorGrid,
    rs: &RootSystem,
    c: f64,
    values: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Outcome {
    newton(&monotone_system(grid, rs, c), values, tol, max_iter)
}

pub(crate) fn monotone_residual(grid: &SectorGrid, rs: &RootSystem, c: f64, values: &[f64]) -> Option<Vec<f64>> {
    monotone_system(grid, rs, c).residual(values)
}

/// Solves the Dirichlet problem `MA_h[u] = f` with the monotone scheme, `f`
/// given as `ln f` per unknown.
pub(crate) fn monotone_dirichlet(
    grid: &SectorGrid,
    log_rhs: Vec<f64>,
    values: &mut [f64],
    tol: f64,
) -> Result<Outcome> {
    let sys = Monotone {
        grid,
        pairs: grid.lattice().orthogonal_pairs(false),
        log_rhs,
        roots: None,
    };
    Ok(newton(&sys, values, tol, 200))
}
