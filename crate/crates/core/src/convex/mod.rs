//! Convex functions on `ℝ^r` (`r ≤ 2`), multi-valued subgradients, and the
//! Alexandrov Monge-Ampère measure `B ↦ Vol((grad f)(B))` with its weighted
//! form `∫_{(grad f)(B)} F₁`.

mod fixtures;
mod grid;
pub mod hull;
mod measure;

pub use fixtures::{ClosedForm, KinkNorm};
pub use grid::{GridFn, CONVEXITY_SLACK};
pub use measure::{image_integral, ma_measure, weighted_ma_identity_check, MeasureOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The subdifferential at a point: a convex polytope given by its vertices,
/// or a Euclidean ball (the subdifferential of a norm at its apex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SubgradientSet {
    Polytope { vertices: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl SubgradientSet {
    pub fn point(p: Vec<f64>) -> Self {
        SubgradientSet::Polytope { vertices: vec![p] }
    }

    /// Convex hull of slopes in rank one or two.
    pub fn hull(points: Vec<Vec<f64>>) -> Self {
        assert!(!points.is_empty(), "a subgradient set is never empty");
        match points[0].len() {
            1 => {
                let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
                    SubgradientSet::point(vec![lo])
                } else {
                    SubgradientSet::Polytope {
                        vertices: vec![vec![lo], vec![hi]],
                    }
                }
            }
            _ => {
                let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
                SubgradientSet::Polytope {
                    vertices: hull::convex_hull(&pts).into_iter().map(|p| p.to_vec()).collect(),
                }
            }
        }
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            SubgradientSet::Polytope { vertices } => vertices.len() == 1,
            SubgradientSet::Ball { radius, .. } => *radius == 0.0,
        }
    }

    pub fn vertices(&self) -> Option<&[Vec<f64>]> {
        match self {
            SubgradientSet::Polytope { vertices } => Some(vertices),
            SubgradientSet::Ball { .. } => None,
        }
    }

    /// `min_{p ∈ S} ⟨p, d⟩`.
    pub fn min_dot(&self, d: &[f64]) -> f64 {
        let dot = |p: &[f64]| p.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
        match self {
            SubgradientSet::Polytope { vertices } => vertices.iter().map(|v| dot(v)).fold(f64::INFINITY, f64::min),
            SubgradientSet::Ball { center, radius } => {
                dot(center) - radius * d.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
        }
    }

    /// `max_{p ∈ S} ⟨p, d⟩`.
    pub fn max_dot(&self, d: &[f64]) -> f64 {
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        -self.min_dot(&neg)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            SubgradientSet::Ball { center, radius } => {
                center.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= radius + 1e-12
            }
            SubgradientSet::Polytope { vertices } => match p.len() {
                1 => {
                    let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                    let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                    p[0] >= lo - 1e-12 && p[0] <= hi + 1e-12
                }
                _ => {
                    let poly: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
                    hull::contains(&poly, [p[0], p[1]])
                }
            },
        }
    }

    /// Lebesgue measure (length in rank one, area in rank two).
    pub fn volume(&self) -> f64 {
        match self {
            SubgradientSet::Ball { center, radius } => match center.len() {
                1 => 2.0 * radius,
                _ => std::f64::consts::PI * radius * radius,
            },
            SubgradientSet::Polytope { vertices } => match vertices[0].len() {
                1 => {
                    let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                    let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                    hi - lo
                }
                _ => {
                    let poly: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
                    hull::polygon_area(&poly).abs()
                }
            },
        }
    }
}

/// Axis-aligned closed box. Unions of boxes (slices of `BorelBox`) stand in
/// for general Borel sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorelBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BorelBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidBox(format!(
                "corner dimensions {} and {} differ or are empty",
                lower.len(),
                upper.len()
            )));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::InvalidBox(format!(
                "need lower ≤ upper, got {lower:?} and {upper:?}"
            )));
        }
        Ok(BorelBox { lower, upper })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rank(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }
}

/// A convex function: a closed-form fixture or a grid sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexFn {
    ClosedForm(ClosedForm),
    Grid(GridFn),
}

impl ConvexFn {
    pub fn rank(&self) -> usize {
        match self {
            ConvexFn::ClosedForm(c) => c.rank(),
            ConvexFn::Grid(g) => g.rank(),
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            ConvexFn::ClosedForm(c) => c.value(x),
            ConvexFn::Grid(g) => g.value(x),
        }
    }

    /// The set of slopes of affine minorants touching the graph at `x`.
    pub fn subgradient(&self, x: &[f64]) -> Result<SubgradientSet> {
        match self {
            ConvexFn::ClosedForm(c) => c.subgradient(x),
            ConvexFn::Grid(g) => g.subgradient(x),
        }
    }
}

impl From<ClosedForm> for ConvexFn {
    fn from(c: ClosedForm) -> Self {
        ConvexFn::ClosedForm(c)
    }
}

impl From<GridFn> for ConvexFn {
    fn from(g: GridFn) -> Self {
        ConvexFn::Grid(g)
    }
}
