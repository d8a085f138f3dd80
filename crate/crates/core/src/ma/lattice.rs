//! Weyl-invariant lattices over the truncated chamber sector.
//!
//! The square lattice is invariant under the reflections of a1xa1 and b2,
//! the triangular one under those of a2 and g2, so reflecting a lattice point
//! into the chamber always lands on a lattice point. Unknowns are the lattice
//! points of the closed sector `{λᵢ(Z) ≥ 0, |Z| ≤ R}`; points in the annulus
//! `R < |Z| ≤ R + 3h` carry Dirichlet data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootsys::{ChamberPoint, Family, Membership, RootSystem};

const NONE: u32 = u32::MAX;

/// Width of the Dirichlet annulus, in lattice spacings.
pub const BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lattice {
    Square,
    Triangular,
}

/// Whether unknowns cover the chamber sector or the whole disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    Sector,
    /// Every lattice point of the disc is an unknown; no reflections.
    Full,
}

/// A lattice direction with its contributions to the Hessian `(A11, A12, A22)`
/// (per unit second difference `/h²`) and to the gradient (per unit central
/// difference `/h`).
#[derive(Debug, Clone, Copy)]
pub struct Direction {
    pub v: (i32, i32),
    pub hess: [f64; 3],
    pub grad: [f64; 2],
}

impl Lattice {
    pub fn for_family(f: Family) -> Result<Self> {
        match f {
            Family::A1xA1 | Family::B2 => Ok(Lattice::Square),
            Family::A2 | Family::G2 => Ok(Lattice::Triangular),
            other => Err(Error::RankMismatch {
                expected: 2,
                got: other.rank(),
            }),
        }
    }

    /// Second basis vector at unit spacing; the first is `(1, 0)`.
    fn b2(self) -> [f64; 2] {
        match self {
            Lattice::Square => [0.0, 1.0],
            Lattice::Triangular => [0.5, 0.75f64.sqrt()],
        }
    }

    pub fn position(self, h: f64, i: i32, j: i32) -> [f64; 2] {
        let b = self.b2();
        [h * (i as f64 + j as f64 * b[0]), h * j as f64 * b[1]]
    }

    /// Nearest lattice coordinates of `z`, if `z` is a lattice point.
    pub fn coords(self, h: f64, z: &[f64]) -> Option<(i32, i32)> {
        let b = self.b2();
        let jf = z[1] / (h * b[1]);
        let i_f = z[0] / h - jf * b[0];
        let (i, j) = (i_f.round() as i32, jf.round() as i32);
        let p = self.position(h, i, j);
        ((p[0] - z[0]).hypot(p[1] - z[1]) <= 1e-9 * h).then_some((i, j))
    }

    /// Directions of the second-order centered scheme.
    pub fn directions(self) -> Vec<Direction> {
        match self {
            Lattice::Square => vec![
                Direction {
                    v: (1, 0),
                    hess: [1.0, 0.0, 0.0],
                    grad: [0.5, 0.0],
                },
                Direction {
                    v: (0, 1),
                    hess: [0.0, 0.0, 1.0],
                    grad: [0.0, 0.5],
                },
                Direction {
                    v: (1, 1),
                    hess: [0.0, 0.25, 0.0],
                    grad: [0.0, 0.0],
                },
                Direction {
                    v: (1, -1),
                    hess: [0.0, -0.25, 0.0],
                    grad: [0.0, 0.0],
                },
            ],
            Lattice::Triangular => {
                let s3 = 3f64.sqrt();
                vec![
                    Direction {
                        v: (1, 0),
                        hess: [1.0, 0.0, -1.0 / 3.0],
                        grad: [1.0 / 3.0, 0.0],
                    },
                    Direction {
                        v: (0, 1),
                        hess: [0.0, 1.0 / s3, 2.0 / 3.0],
                        grad: [1.0 / 6.0, s3 / 6.0],
                    },
                    Direction {
                        v: (-1, 1),
                        hess: [0.0, -1.0 / s3, 2.0 / 3.0],
                        grad: [-1.0 / 6.0, s3 / 6.0],
                    },
                ]
            }
        }
    }

    /// Orthogonal direction pairs for the wide-stencil monotone scheme.
    pub fn orthogonal_pairs(self, wide: bool) -> Vec<[(i32, i32); 2]> {
        match self {
            Lattice::Square => {
                let mut p = vec![[(1, 0), (0, 1)], [(1, 1), (-1, 1)]];
                if wide {
                    p.push([(1, 2), (-2, 1)]);
                    p.push([(2, 1), (-1, 2)]);
                }
                p
            }
            Lattice::Triangular => vec![[(1, 0), (-1, 2)], [(0, 1), (2, -1)], [(-1, 1), (1, 1)]],
        }
    }

    /// Euclidean length of a lattice vector at unit spacing.
    pub fn length(self, v: (i32, i32)) -> f64 {
        let p = self.position(1.0, v.0, v.1);
        p[0].hypot(p[1])
    }
}

/// Where a lattice point's value lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Unknown(usize),
    /// Dirichlet value, stored after the unknowns.
    Band(usize),
    Outside,
}

/// The lattice points carrying values, with a lookup that maps every lattice
/// point of the disc (or annulus) to the value of its chamber image.
#[derive(Debug, Clone)]
pub struct SectorGrid {
    lattice: Lattice,
    h: f64,
    radius: f64,
    symmetry: Symmetry,
    m: i32,
    lookup: Vec<u32>,
    coords: Vec<(i32, i32)>,
    n_unknown: usize,
}

impl SectorGrid {
    /// Builds the grid, ordering unknowns row by row or by radius, whichever
    /// gives the narrower band (ghost couplings across walls preserve the
    /// radius, so the radial order suits slanted walls).
    pub fn new(rs: &RootSystem, radius: f64, grid_n: usize, symmetry: Symmetry) -> Result<Self> {
        let rows = SectorGrid::build(rs, radius, grid_n, symmetry, false)?;
        if symmetry == Symmetry::Full {
            return Ok(rows);
        }
        let rings = SectorGrid::build(rs, radius, grid_n, symmetry, true)?;
        Ok(if rings.bandwidth() < rows.bandwidth() {
            rings
        } else {
            rows
        })
    }

    fn build(rs: &RootSystem, radius: f64, grid_n: usize, symmetry: Symmetry, radial: bool) -> Result<Self> {
        let lattice = Lattice::for_family(rs.family())?;
        let h = radius / (grid_n - 1) as f64;
        let outer = radius + BAND * h;
        // On the triangular lattice |i| ≤ (1 + 1/√3)·|Z|/h.
        let m = (1.6 * outer / h).ceil() as i32 + 2;
        let side = (2 * m + 1) as usize;
        let in_disc = |p: &[f64; 2]| p[0].hypot(p[1]) <= radius * (1.0 + 1e-12);
        let in_band = |p: &[f64; 2]| !in_disc(p) && p[0].hypot(p[1]) <= outer * (1.0 + 1e-12);
        let owns = |p: &[f64; 2]| {
            symmetry == Symmetry::Full || rs.chamber_membership(&ChamberPoint::new(p.to_vec())) != Membership::Exterior
        };

        let mut unknown = Vec::new();
        let mut band = Vec::new();
        for j in -m..=m {
            for i in -m..=m {
                let p = lattice.position(h, i, j);
                if owns(&p) {
                    if in_disc(&p) {
                        unknown.push((i, j));
                    } else if in_band(&p) {
                        band.push((i, j));
                    }
                }
            }
        }
        if radial {
            let key = |&(i, j): &(i32, i32)| {
                let p = lattice.position(h, i, j);
                ((p[0].hypot(p[1]) / h * 1e6).round(), p[1].atan2(p[0]))
            };
            unknown.sort_by(|a, b| {
                let (ka, kb) = (key(a), key(b));
                ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
            });
        }
        let mut grid = SectorGrid {
            lattice,
            h,
            radius,
            symmetry,
            m,
            lookup: vec![NONE; side * side],
            n_unknown: unknown.len(),
            coords: unknown.into_iter().chain(band).collect(),
        };
        for (k, &(i, j)) in grid.coords.iter().enumerate() {
            let at = grid.cell(i, j).expect("owned nodes lie inside the lookup box");
            grid.lookup[at] = k as u32;
        }
        if symmetry == Symmetry::Sector {
            for j in -m..=m {
                for i in -m..=m {
                    let p = lattice.position(h, i, j);
                    let at = grid.cell(i, j).unwrap();
                    if grid.lookup[at] != NONE || !(in_disc(&p) || in_band(&p)) {
                        continue;
                    }
                    let (img, _) = rs.reflect_into_chamber(&ChamberPoint::new(p.to_vec()));
                    let (a, b) = lattice.coords(h, &img).ok_or_else(|| {
                        Error::InvalidRootSystem(format!(
                            "the {lattice:?} lattice is not invariant under this Weyl group"
                        ))
                    })?;
                    let target = grid.cell(a, b).map(|c| grid.lookup[c]).unwrap_or(NONE);
                    if target == NONE {
                        return Err(Error::InvalidRootSystem(format!(
                            "chamber image of lattice point ({i}, {j}) is not a grid node"
                        )));
                    }
                    grid.lookup[at] = target;
                }
            }
        }
        Ok(grid)
    }

    fn cell(&self, i: i32, j: i32) -> Option<usize> {
        let side = 2 * self.m + 1;
        let (a, b) = (i + self.m, j + self.m);
        (0..side).contains(&a).then_some(())?;
        (0..side).contains(&b).then_some(())?;
        Some((b * side + a) as usize)
    }

    /// Largest index distance between a node and a centered-stencil
    /// neighbour: the half-bandwidth of the Newton matrix.
    pub fn bandwidth(&self) -> usize {
        let dirs = self.lattice.directions();
        let mut bw = 0;
        for k in 0..self.n_unknown {
            let (i, j) = self.coords[k];
            for d in &dirs {
                for s in [-1, 1] {
                    if let Slot::Unknown(l) = self.slot(i + s * d.v.0, j + s * d.v.1) {
                        bw = bw.max(k.abs_diff(l));
                    }
                }
            }
        }
        bw
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Nodes along a radius.
    pub fn grid_n(&self) -> usize {
        (self.radius / self.h).round() as usize + 1
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Number of unknown nodes.
    pub fn len(&self) -> usize {
        self.n_unknown
    }

    pub fn is_empty(&self) -> bool {
        self.n_unknown == 0
    }

    /// Unknown plus Dirichlet nodes.
    pub fn total(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self, k: usize) -> (i32, i32) {
        self.coords[k]
    }

    pub fn position(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.coords[k];
        self.lattice.position(self.h, i, j)
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.total()).map(|k| self.position(k)).collect()
    }

    pub fn slot(&self, i: i32, j: i32) -> Slot {
        match self.cell(i, j).map(|c| self.lookup[c]) {
            Some(v) if v != NONE => {
                let v = v as usize;
                if v < self.n_unknown {
                    Slot::Unknown(v)
                } else {
                    Slot::Band(v)
                }
            }
            _ => Slot::Outside,
        }
    }

    /// Value index of the lattice point at `z` (reflected as needed).
    pub fn index_of(&self, z: &[f64]) -> Option<usize> {
        let (i, j) = self.lattice.coords(self.h, z)?;
        match self.slot(i, j) {
            Slot::Unknown(k) | Slot::Band(k) => Some(k),
            Slot::Outside => None,
        }
    }

    /// Discrete Hessian `(A11, A12, A22)` and gradient at node `k` from the
    /// value vector (unknowns followed by Dirichlet values). `fourth` selects
    /// fourth-order differences along the same directions.
    pub fn derivatives(&self, values: &[f64], k: usize, fourth: bool) -> Option<([f64; 3], [f64; 2])> {
        let (i, j) = self.coords[k];
        let at = |a: i32, b: i32| -> Option<f64> {
            match self.slot(a, b) {
                Slot::Unknown(l) | Slot::Band(l) => Some(values[l]),
                Slot::Outside => None,
            }
        };
        let u0 = values[k];
        let (h, h2) = (self.h, self.h * self.h);
        let mut a = [0.0; 3];
        let mut g = [0.0; 2];
        for d in self.lattice.directions() {
            let (p, q) = d.v;
            let up = at(i + p, j + q)?;
            let um = at(i - p, j - q)?;
            let (s, t) = if fourth {
                let up2 = at(i + 2 * p, j + 2 * q)?;
                let um2 = at(i - 2 * p, j - 2 * q)?;
                (
                    (-up2 + 16.0 * up - 30.0 * u0 + 16.0 * um - um2) / 12.0,
                    (-up2 + 8.0 * up - 8.0 * um + um2) / 6.0,
                )
            } else {
                (up + um - 2.0 * u0, up - um)
            };
            for c in 0..3 {
                a[c] += d.hess[c] * s / h2;
            }
            for c in 0..2 {
                g[c] += d.grad[c] * t / h;
            }
        }
        Some((a, g))
    }
}
