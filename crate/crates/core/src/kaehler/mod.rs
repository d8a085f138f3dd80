//! Metric-level quantities of the potential `ρ` at a point `Z` of the flat.
//!
//! Conventions are taken literally, factors and signs included; where two
//! formulas that should agree differ by a constant, the ratio is reported
//! ([`det_identity_report`], [`lemma31_ratio`]) rather than corrected.

mod potential;

pub use potential::{CoshSum, EguchiHanson, GridPotential, HalfSquare, Potential, Separable};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ma::{inner_nodes, Solution};
use crate::rootsys::{ChamberPoint, RootSystem, WEYL_TOL};

/// Block-diagonal data at a point: an `r × r` block on the flat and one
/// scalar block per positive root, repeated with its multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianBlocks {
    pub a_block: Vec<Vec<f64>>,
    pub root_entries: Vec<RootEntry>,
    pub n_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootEntry {
    /// Index into `RootSystem::roots()`.
    pub root: usize,
    pub value: f64,
    pub mult: u32,
}

impl HermitianBlocks {
    /// `det` of the full `n × n` block-diagonal matrix.
    pub fn determinant(&self) -> f64 {
        let a = &self.a_block;
        let da = match a.len() {
            1 => a[0][0],
            _ => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        };
        da * self
            .root_entries
            .iter()
            .map(|e| e.value.powi(e.mult as i32))
            .product::<f64>()
    }

    /// The full `n × n` matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_total;
        let r = self.a_block.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..r {
            for j in 0..r {
                m[i][j] = self.a_block[i][j];
            }
        }
        let mut at = r;
        for e in &self.root_entries {
            for _ in 0..e.mult {
                m[at][at] = e.value;
                at += 1;
            }
        }
        m
    }
}

/// Real Hessian components on the flat and in root directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealHessian {
    /// Euclidean Hessian of `ρ`.
    pub a_block: Vec<Vec<f64>>,
    /// `−λ(∇ρ)/tanh λ(Z)` per positive root.
    pub root_scalars: Vec<f64>,
    /// Mixed flat/root and cross-root components; identically zero.
    pub mixed: f64,
}

/// Per-root shape-operator eigenvalues for a normal direction `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpectrum {
    /// `(−λ(v)/tanh λ(Z), −λ(v)·tanh λ(Z))` per positive root.
    pub pairs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetIdentity {
    /// `det` of the complex Hessian blocks.
    pub lhs: f64,
    /// `4^{−n} det D²ρ · 𝒟(ρ)(Z)`.
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyConstancy {
    /// `max |d/mean − 1|` over the sampled points, `d = |det|`.
    pub max_dev: f64,
    pub mean_det: f64,
}

/// Everything reported at one evaluation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub z: Vec<f64>,
    pub a_block: Vec<Vec<f64>>,
    pub root_entries: Vec<RootEntry>,
    pub det_lhs: f64,
    pub det_rhs: f64,
    pub ratio: f64,
    pub d_op: f64,
    pub cy_dev: f64,
}

fn off_walls(rs: &RootSystem, z: &[f64]) -> Result<()> {
    if z.len() != rs.rank() {
        return Err(Error::RankMismatch {
            expected: rs.rank(),
            got: z.len(),
        });
    }
    match rs.roots().iter().position(|r| r.eval(z).abs() <= WEYL_TOL) {
        Some(root) => Err(Error::OnWall {
            point: z.to_vec(),
            root,
        }),
        None => Ok(()),
    }
}

fn into_chamber(rs: &RootSystem, z: &[f64]) -> Result<Vec<f64>> {
    off_walls(rs, z)?;
    Ok(rs.reflect_into_chamber(&ChamberPoint::new(z.to_vec())).0 .0)
}

/// `λ(∇ρ(Z))` per positive root.
fn root_slopes(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<Vec<f64>> {
    let g = pot.gradient(z)?;
    Ok(rs.roots().iter().map(|r| r.eval(&g)).collect())
}

/// Hessian on the flat, `−λ(∇ρ)/tanh λ(Z)` in root directions, zero mixed
/// terms.
pub fn real_hessian_components(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<RealHessian> {
    let z = into_chamber(rs, z)?;
    let slopes = root_slopes(rs, pot, &z)?;
    Ok(RealHessian {
        a_block: pot.hessian(&z)?,
        root_scalars: rs
            .roots()
            .iter()
            .zip(&slopes)
            .map(|(r, s)| -s / r.eval(&z).tanh())
            .collect(),
        mixed: 0.0,
    })
}

fn blocks(rs: &RootSystem, pot: &dyn Potential, z: &[f64], flat: f64, root: f64) -> Result<HermitianBlocks> {
    let z = into_chamber(rs, z)?;
    let slopes = root_slopes(rs, pot, &z)?;
    let a_block = pot
        .hessian(&z)?
        .into_iter()
        .map(|row| row.into_iter().map(|v| flat * v).collect())
        .collect();
    let root_entries = rs
        .roots()
        .iter()
        .zip(&slopes)
        .enumerate()
        .map(|(i, (r, s))| RootEntry {
            root: i,
            value: -root * s / (2.0 * r.eval(&z)).sinh(),
            mult: r.mult,
        })
        .collect();
    Ok(HermitianBlocks {
        a_block,
        root_entries,
        n_total: rs.total_dimension() as usize,
    })
}

/// `∂²ρ^h/∂zᵢ∂z̄ⱼ`: `¼ D²ρ` on the flat, `−λ(∇ρ)/sinh 2λ(Z)` per root.
pub fn complex_hessian(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<HermitianBlocks> {
    blocks(rs, pot, z, 0.25, 1.0)
}

/// Induced metric: `½ D²ρ` on the flat, `−2λ(∇ρ)/sinh 2λ(Z)` per root.
pub fn induced_metric(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<HermitianBlocks> {
    blocks(rs, pot, z, 0.5, 2.0)
}

/// `𝒟(ρ)(Z) = (−1)^{n−r} Π (2λ(∇ρ)/sinh 2λ(Z))^{m_λ}`, evaluated at `Z`
/// itself (no reflection).
pub fn d_operator(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<f64> {
    off_walls(rs, z)?;
    let slopes = root_slopes(rs, pot, z)?;
    let sign = if rs.total_multiplicity().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(sign
        * rs.roots()
            .iter()
            .zip(&slopes)
            .map(|(r, s)| (2.0 * s / (2.0 * r.eval(z)).sinh()).powi(r.mult as i32))
            .product::<f64>())
}

fn det2(h: &[Vec<f64>]) -> f64 {
    match h.len() {
        1 => h[0][0],
        _ => h[0][0] * h[1][1] - h[0][1] * h[1][0],
    }
}

/// Compares the determinant of the complex Hessian blocks with
/// `4^{−n} det D²ρ · 𝒟(ρ)`. The ratio is `2^{n−r}` for every `ρ` and `Z`.
pub fn det_identity_report(rs: &RootSystem, pot: &dyn Potential, z: &[f64]) -> Result<DetIdentity> {
    let zc = into_chamber(rs, z)?;
    let lhs = complex_hessian(rs, pot, &zc)?.determinant();
    let n = rs.total_dimension() as i32;
    let rhs = 4f64.powi(-n) * det2(&pot.hessian(&zc)?) * d_operator(rs, pot, &zc)?;
    Ok(DetIdentity {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// `|det|` of the complex Hessian at each point and its spread.
pub fn cy_constancy_at(rs: &RootSystem, pot: &dyn Potential, points: &[Vec<f64>]) -> Result<CyConstancy> {
    let dets = points
        .iter()
        .map(|z| complex_hessian(rs, pot, z).map(|b| b.determinant().abs()))
        .collect::<Result<Vec<f64>>>()?;
    if dets.is_empty() {
        return Err(Error::InvalidProblem("no sample points".into()));
    }
    let mean = dets.iter().sum::<f64>() / dets.len() as f64;
    Ok(CyConstancy {
        max_dev: dets.iter().fold(0.0f64, |m, d| m.max((d / mean - 1.0).abs())),
        mean_det: mean,
    })
}

/// [`cy_constancy_at`] over the inner nodes of a grid solution, with
/// fourth-order differences of the grid values.
pub fn cy_constancy(rs: &RootSystem, sol: &Solution) -> Result<CyConstancy> {
    let pot = GridPotential { solution: sol };
    let points: Vec<Vec<f64>> = inner_nodes(sol)
        .into_iter()
        .map(|k| sol.grid().position(k).to_vec())
        .collect();
    cy_constancy_at(rs, &pot, &points)
}

/// Shape-operator eigenvalues `−λ(v)/tanh λ(Z)` and `−λ(v) tanh λ(Z)`.
pub fn shape_spectrum(rs: &RootSystem, z: &[f64], v: &[f64]) -> Result<ShapeSpectrum> {
    off_walls(rs, z)?;
    if v.len() != rs.rank() {
        return Err(Error::RankMismatch {
            expected: rs.rank(),
            got: v.len(),
        });
    }
    Ok(ShapeSpectrum {
        pairs: rs
            .roots()
            .iter()
            .map(|r| {
                let (lv, t) = (r.eval(v), r.eval(z).tanh());
                (-lv / t, -lv * t)
            })
            .collect(),
    })
}

/// `¼(−λ(∇ρ)/tanh λ(Z) + tanh λ(Z)·λ(∇ρ))` for root `root`.
pub fn lemma31_diagonal(rs: &RootSystem, pot: &dyn Potential, z: &[f64], root: usize) -> Result<f64> {
    let z = into_chamber(rs, z)?;
    let r = rs
        .roots()
        .get(root)
        .ok_or_else(|| Error::InvalidProblem(format!("no positive root #{root}")))?;
    let s = r.eval(&pot.gradient(&z)?);
    let t = r.eval(&z).tanh();
    Ok(0.25 * (-s / t + t * s))
}

/// `lemma31_diagonal / complex_hessian` root entry for `root` (`½` when the
/// slope is nonzero).
pub fn lemma31_ratio(rs: &RootSystem, pot: &dyn Potential, z: &[f64], root: usize) -> Result<f64> {
    let d = lemma31_diagonal(rs, pot, z, root)?;
    let e = complex_hessian(rs, pot, z)?.root_entries[root].value;
    Ok(d / e)
}

/// All per-point quantities; `cy_dev = |det|/mean_det − 1`.
pub fn point_report(rs: &RootSystem, pot: &dyn Potential, z: &[f64], mean_det: f64) -> Result<PointReport> {
    let b = complex_hessian(rs, pot, z)?;
    let d = det_identity_report(rs, pot, z)?;
    let zc = into_chamber(rs, z)?;
    Ok(PointReport {
        z: z.to_vec(),
        cy_dev: b.determinant().abs() / mean_det - 1.0,
        a_block: b.a_block,
        root_entries: b.root_entries,
        det_lhs: d.lhs,
        det_rhs: d.rhs,
        ratio: d.ratio,
        d_op: d_operator(rs, pot, &zc)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::Family;

    fn a1() -> RootSystem {
        RootSystem::uniform(Family::A1, 1)
    }

    #[test]
    fn eguchi_hanson_blocks() {
        let x = 0.8;
        let b = complex_hessian(&a1(), &EguchiHanson { c: 1.0 }, &[x]).unwrap();
        assert!((b.a_block[0][0] - 0.25 * x.cosh()).abs() < 1e-14);
        assert!((b.root_entries[0].value + 0.5 / x.cosh()).abs() < 1e-14);
        assert!((b.determinant().abs() - 1.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn induced_metric_doubles_complex_hessian() {
        let rs = RootSystem::uniform(Family::B2, 2);
        let pot = HalfSquare { rank: 2 };
        let z = [0.9, 0.2];
        let c = complex_hessian(&rs, &pot, &z).unwrap();
        let m = induced_metric(&rs, &pot, &z).unwrap();
        for (a, b) in c.to_dense().iter().flatten().zip(m.to_dense().iter().flatten()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn half_square_real_components() {
        let x = 1.3;
        let h = real_hessian_components(&a1(), &HalfSquare { rank: 1 }, &[x]).unwrap();
        assert_eq!(h.a_block, vec![vec![1.0]]);
        assert!((h.root_scalars[0] + x / x.tanh()).abs() < 1e-15);
        assert_eq!(h.mixed, 0.0);
    }

    #[test]
    fn d_operator_rank_one() {
        let x = 0.6;
        let d = d_operator(&a1(), &EguchiHanson { c: 1.0 }, &[x]).unwrap();
        assert!((d + 1.0 / x.cosh()).abs() < 1e-14);
    }

    #[test]
    fn walls_are_rejected() {
        let rs = RootSystem::uniform(Family::A2, 1);
        assert!(matches!(
            complex_hessian(&rs, &HalfSquare { rank: 2 }, &[1.0, 0.0]),
            Err(Error::OnWall { root: 0, .. })
        ));
    }

    #[test]
    fn shape_spectrum_product() {
        let rs = RootSystem::uniform(Family::G2, 1);
        let s = shape_spectrum(&rs, &[0.7, 0.1], &[0.3, -1.1]).unwrap();
        for (r, (pd, p)) in rs.roots().iter().zip(&s.pairs) {
            let lv = r.eval(&[0.3, -1.1]);
            assert!((pd * p - lv * lv).abs() < 1e-12);
        }
    }
}
