//! Convex functions sampled on uniform rectangular grids.
//!
//! Subgradients come from the piecewise-linear extension over the Freudenthal
//! triangulation: every square cell is split along its `(+1, +1)` diagonal
//! into a lower triangle `(v00, v10, v11)` and an upper triangle
//! `(v00, v01, v11)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::SubgradientSet;
use crate::error::{Error, Result};

/// Relative slack of the discrete convexity check.
pub const CONVEXITY_SLACK: f64 = 1e-9;
const LOCATE_TOL: f64 = 1e-9;

/// A grid function of rank one or two. Values are stored in C order
/// (`index = i0 * n1 + i1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFn {
    rank: usize,
    origin: Vec<f64>,
    h: f64,
    extents: Vec<usize>,
    values: Vec<f64>,
}

impl GridFn {
    pub fn new(origin: Vec<f64>, h: f64, extents: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let rank = origin.len();
        if !(1..=2).contains(&rank) || extents.len() != rank {
            return Err(Error::InvalidGrid(format!(
                "origin has {} coordinates and extents {}; rank must be 1 or 2",
                origin.len(),
                extents.len()
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if extents.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGrid("every extent must be at least 2".into()));
        }
        let len: usize = extents.iter().product();
        if values.len() != len {
            return Err(Error::InvalidGrid(format!(
                "expected {len} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("value #{i} is not finite")));
        }
        let g = GridFn {
            rank,
            origin,
            h,
            extents,
            values,
        };
        g.check_convexity()?;
        Ok(g)
    }

    /// Samples `f` on the grid.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(origin: Vec<f64>, h: f64, extents: Vec<usize>, f: F) -> Result<Self> {
        let rank = origin.len();
        let len: usize = extents.iter().product();
        let mut values = Vec::with_capacity(len);
        for idx in 0..len {
            let node = unflatten(&extents, idx);
            let x: Vec<f64> = (0..rank).map(|k| origin[k] + node[k] as f64 * h).collect();
            values.push(f(&x));
        }
        GridFn::new(origin, h, extents, values)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.rank)
            .map(|k| self.origin[k] + (self.extents[k] - 1) as f64 * self.h)
            .collect()
    }

    fn at(&self, node: &[usize]) -> f64 {
        self.values[flatten(&self.extents, node)]
    }

    pub fn node_position(&self, node: &[usize]) -> Vec<f64> {
        (0..self.rank)
            .map(|k| self.origin[k] + node[k] as f64 * self.h)
            .collect()
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn node(&self, index: usize) -> Vec<usize> {
        unflatten(&self.extents, index)
    }

    fn check_convexity(&self) -> Result<()> {
        let dirs: Vec<Vec<isize>> = if self.rank == 1 {
            vec![vec![1]]
        } else {
            vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]
        };
        for idx in 0..self.values.len() {
            let node = self.node(idx);
            let f0 = self.values[idx];
            for d in &dirs {
                let plus: Option<Vec<usize>> = self.shift(&node, d, 1);
                let minus: Option<Vec<usize>> = self.shift(&node, d, -1);
                if let (Some(p), Some(m)) = (plus, minus) {
                    let second = self.at(&p) - 2.0 * f0 + self.at(&m);
                    if second < -CONVEXITY_SLACK * (1.0 + f0.abs()) {
                        return Err(Error::NotConvex {
                            node,
                            second_difference: second,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn shift(&self, node: &[usize], d: &[isize], s: isize) -> Option<Vec<usize>> {
        node.iter()
            .zip(d)
            .zip(&self.extents)
            .map(|((&i, &di), &n)| {
                let j = i as isize + s * di;
                (j >= 0 && (j as usize) < n).then_some(j as usize)
            })
            .collect()
    }

    /// Gradient of the lower (`upper == false`) or upper triangle of cell `(i, j)`.
    fn triangle_gradient(&self, i: usize, j: usize, upper: bool) -> [f64; 2] {
        let h = self.h;
        let f00 = self.at(&[i, j]);
        let f10 = self.at(&[i + 1, j]);
        let f01 = self.at(&[i, j + 1]);
        let f11 = self.at(&[i + 1, j + 1]);
        if upper {
            [(f11 - f01) / h, (f01 - f00) / h]
        } else {
            [(f10 - f00) / h, (f11 - f10) / h]
        }
    }

    /// Triangles `(cell_i, cell_j, upper)` incident to node `(i, j)`.
    fn node_triangles(&self, i: usize, j: usize) -> Vec<(usize, usize, bool)> {
        let (n0, n1) = (self.extents[0], self.extents[1]);
        let mut out = Vec::with_capacity(6);
        if i + 1 < n0 && j + 1 < n1 {
            out.push((i, j, false));
            out.push((i, j, true));
        }
        if i >= 1 && j + 1 < n1 {
            out.push((i - 1, j, false));
        }
        if j >= 1 && i + 1 < n0 {
            out.push((i, j - 1, true));
        }
        if i >= 1 && j >= 1 {
            out.push((i - 1, j - 1, false));
            out.push((i - 1, j - 1, true));
        }
        out
    }

    /// Subgradient polytope at a grid node.
    pub fn node_subgradient(&self, node: &[usize]) -> SubgradientSet {
        if self.rank == 1 {
            let i = node[0];
            let mut slopes = Vec::new();
            if i >= 1 {
                slopes.push(vec![(self.values[i] - self.values[i - 1]) / self.h]);
            }
            if i + 1 < self.extents[0] {
                slopes.push(vec![(self.values[i + 1] - self.values[i]) / self.h]);
            }
            return SubgradientSet::hull(slopes);
        }
        let grads: Vec<Vec<f64>> = self
            .node_triangles(node[0], node[1])
            .into_iter()
            .map(|(ci, cj, up)| self.triangle_gradient(ci, cj, up).to_vec())
            .collect();
        SubgradientSet::hull(grads)
    }

    /// Subgradient of the piecewise-linear extension at an arbitrary point.
    pub fn subgradient(&self, x: &[f64]) -> Result<SubgradientSet> {
        if x.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: x.len(),
            });
        }
        let upper = self.upper();
        for k in 0..self.rank {
            let slack = LOCATE_TOL * self.h;
            if !(x[k] >= self.origin[k] - slack && x[k] <= upper[k] + slack) {
                return Err(Error::OutsideDomain(x.to_vec()));
            }
        }
        // Cell index and local coordinates in [0, 1].
        let local: Vec<(usize, f64)> = (0..self.rank)
            .map(|k| {
                let t = ((x[k] - self.origin[k]) / self.h).clamp(0.0, (self.extents[k] - 1) as f64);
                let mut c = t.floor() as usize;
                if c >= self.extents[k] - 1 {
                    c = self.extents[k] - 2;
                }
                (c, t - c as f64)
            })
            .collect();
        let near = |s: f64| -> Option<usize> {
            if s <= LOCATE_TOL {
                Some(0)
            } else if s >= 1.0 - LOCATE_TOL {
                Some(1)
            } else {
                None
            }
        };

        if self.rank == 1 {
            let (c, s) = local[0];
            return Ok(match near(s) {
                Some(k) => self.node_subgradient(&[c + k]),
                None => SubgradientSet::point(vec![(self.values[c + 1] - self.values[c]) / self.h]),
            });
        }

        let (i, s) = local[0];
        let (j, t) = local[1];
        if let (Some(a), Some(b)) = (near(s), near(t)) {
            return Ok(self.node_subgradient(&[i + a, j + b]));
        }
        let (n0, n1) = (self.extents[0], self.extents[1]);
        let mut tris: Vec<(usize, usize, bool)> = Vec::new();
        if (s - t).abs() <= LOCATE_TOL {
            tris.push((i, j, false));
            tris.push((i, j, true));
        } else if let Some(b) = near(t) {
            // Horizontal edge between the lower triangle above and the upper triangle below.
            let jj = j + b;
            if jj + 1 < n1 {
                tris.push((i, jj, false));
            }
            if jj >= 1 {
                tris.push((i, jj - 1, true));
            }
        } else if let Some(a) = near(s) {
            let ii = i + a;
            if ii + 1 < n0 {
                tris.push((ii, j, true));
            }
            if ii >= 1 {
                tris.push((ii - 1, j, false));
            }
        } else {
            tris.push((i, j, t > s));
        }
        Ok(SubgradientSet::hull(
            tris.into_iter()
                .map(|(a, b, up)| self.triangle_gradient(a, b, up).to_vec())
                .collect(),
        ))
    }

    /// Piecewise-linear interpolant value.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let upper = self.upper();
        for k in 0..self.rank {
            let slack = LOCATE_TOL * self.h;
            if x.len() != self.rank || !(x[k] >= self.origin[k] - slack && x[k] <= upper[k] + slack) {
                return Err(Error::OutsideDomain(x.to_vec()));
            }
        }
        let loc: Vec<(usize, f64)> = (0..self.rank)
            .map(|k| {
                let t = ((x[k] - self.origin[k]) / self.h).clamp(0.0, (self.extents[k] - 1) as f64);
                let c = (t.floor() as usize).min(self.extents[k] - 2);
                (c, t - c as f64)
            })
            .collect();
        if self.rank == 1 {
            let (c, s) = loc[0];
            return Ok((1.0 - s) * self.values[c] + s * self.values[c + 1]);
        }
        let ((i, s), (j, t)) = (loc[0], loc[1]);
        let f00 = self.at(&[i, j]);
        let f11 = self.at(&[i + 1, j + 1]);
        Ok(if s >= t {
            let f10 = self.at(&[i + 1, j]);
            f00 + s * (f10 - f00) + t * (f11 - f10)
        } else {
            let f01 = self.at(&[i, j + 1]);
            f00 + t * (f01 - f00) + s * (f11 - f01)
        })
    }

    /// CSV form: first row `r, origin..., h, extents...`, then one row per
    /// value of the first index.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let mut head: Vec<String> = vec![self.rank.to_string()];
        head.extend(self.origin.iter().map(|v| v.to_string()));
        head.push(self.h.to_string());
        head.extend(self.extents.iter().map(|v| v.to_string()));
        writeln!(s, "{}", head.join(",")).unwrap();
        let row = if self.rank == 1 {
            self.extents[0]
        } else {
            self.extents[1]
        };
        for chunk in self.values.chunks(row) {
            let cells: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty grid CSV".into()))?;
        let nums = |line: &str, lineno: usize| -> Result<Vec<f64>> {
            line.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {lineno}: `{}`: {e}", c.trim())))
                })
                .collect()
        };
        let h = nums(head, 1)?;
        let rank = *h.first().ok_or_else(|| Error::Parse("line 1: missing rank".into()))? as usize;
        if !(1..=2).contains(&rank) || h.len() != 2 + 2 * rank {
            return Err(Error::Parse(format!("line 1: malformed header for rank {rank}")));
        }
        let origin = h[1..1 + rank].to_vec();
        let spacing = h[1 + rank];
        let extents: Vec<usize> = h[2 + rank..].iter().map(|&v| v as usize).collect();
        let mut values = Vec::new();
        for (k, line) in lines.enumerate() {
            values.extend(nums(line, k + 2)?);
        }
        GridFn::new(origin, spacing, extents, values)
    }
}

fn flatten(extents: &[usize], node: &[usize]) -> usize {
    node.iter().zip(extents).fold(0, |acc, (&i, &n)| acc * n + i)
}

fn unflatten(extents: &[usize], mut idx: usize) -> Vec<usize> {
    let mut node = vec![0; extents.len()];
    for k in (0..extents.len()).rev() {
        node[k] = idx % extents[k];
        idx /= extents[k];
    }
    node
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paraboloid(h: f64, n: usize) -> GridFn {
        GridFn::from_fn(vec![-1.0, -1.0], h, vec![n, n], |x| x[0] * x[0] + x[1] * x[1] + 1.0).unwrap()
    }

    #[test]
    fn rejects_nonconvex_samples() {
        let err = GridFn::from_fn(vec![0.0], 0.1, vec![11], |x| -(x[0] * x[0])).unwrap_err();
        assert!(matches!(err, Error::NotConvex { .. }));
    }

    #[test]
    fn linear_function_has_singleton_subgradients() {
        let g = GridFn::from_fn(vec![0.0, 0.0], 0.25, vec![5, 5], |x| 2.0 * x[0] - x[1]).unwrap();
        for x in [[0.5, 0.5], [0.3, 0.7], [0.25, 0.6], [0.0, 0.0]] {
            let s = g.subgradient(&x).unwrap();
            assert!(s.is_singleton(), "{x:?}");
            let v = &s.vertices().unwrap()[0];
            assert!((v[0] - 2.0).abs() < 1e-12 && (v[1] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn node_subgradient_of_paraboloid_contains_true_gradient() {
        let g = paraboloid(0.1, 21);
        let s = g.subgradient(&[0.3, -0.2]).unwrap();
        assert!(s.contains(&[0.6, -0.4]));
        assert!(!s.is_singleton());
    }

    #[test]
    fn outside_domain() {
        let g = paraboloid(0.1, 21);
        assert!(matches!(g.subgradient(&[1.5, 0.0]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn interpolant_matches_nodes() {
        let g = paraboloid(0.1, 21);
        assert!((g.value(&[0.3, -0.2]).unwrap() - 1.13).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trip() {
        let g = paraboloid(0.25, 9);
        let back = GridFn::from_csv(&g.to_csv()).unwrap();
        assert_eq!(g, back);
        assert!(matches!(
            GridFn::from_csv("2,0,0,0.5,2,2\n1,x\n1,1\n"),
            Err(Error::Parse(_))
        ));
    }
}
