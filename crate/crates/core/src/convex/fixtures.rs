//! Closed-form convex functions with exact subdifferentials.

use serde::{Deserialize, Serialize};

use super::hull::convex_hull;
use super::SubgradientSet;
use crate::error::{Error, Result};

const KINK_TOL: f64 = 1e-12;

/// Norm used by the kinked fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KinkNorm {
    L1,
    L2,
}

/// Closed-form test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClosedForm {
    /// `½|x|²`.
    HalfSquaredNorm { rank: usize },
    /// `x₁² + x₂² + 1`.
    ShiftedParaboloid,
    /// `φ(‖x‖)` with `φ(t) = t + 1` on `[0, 1]` and `2t` beyond: the radial
    /// kink for `L2`, the diamond kink for `L1`.
    Kink { norm: KinkNorm },
    /// Euclidean norm `|x|`.
    Norm { rank: usize },
    /// `max_k (⟨s_k, x⟩ + b_k)`.
    MaxAffine { slopes: Vec<Vec<f64>>, offsets: Vec<f64> },
    /// `√c cosh x` on the line (the Eguchi–Hanson profile).
    EguchiHanson { c: f64 },
}

impl ClosedForm {
    /// Looks up the built-in fixtures by name: `ex33`, `ex34`, `ex35`,
    /// `norm`, `half-square`, `eguchi-hanson`.
    pub fn named(name: &str) -> Result<Self> {
        Ok(match name {
            "ex33" => ClosedForm::ShiftedParaboloid,
            "ex34" => ClosedForm::Kink { norm: KinkNorm::L2 },
            "ex35" => ClosedForm::Kink { norm: KinkNorm::L1 },
            "norm" => ClosedForm::Norm { rank: 2 },
            "half-square" => ClosedForm::HalfSquaredNorm { rank: 2 },
            "eguchi-hanson" => ClosedForm::EguchiHanson { c: 1.0 },
            other => return Err(Error::Unsupported(format!("unknown fixture `{other}`"))),
        })
    }

    pub fn rank(&self) -> usize {
        match self {
            ClosedForm::HalfSquaredNorm { rank } | ClosedForm::Norm { rank } => *rank,
            ClosedForm::ShiftedParaboloid | ClosedForm::Kink { .. } => 2,
            ClosedForm::MaxAffine { slopes, .. } => slopes.first().map_or(0, |s| s.len()),
            ClosedForm::EguchiHanson { .. } => 1,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let sq: f64 = x.iter().map(|v| v * v).sum();
        Ok(match self {
            ClosedForm::HalfSquaredNorm { .. } => 0.5 * sq,
            ClosedForm::ShiftedParaboloid => sq + 1.0,
            ClosedForm::Kink { norm } => {
                let t = kink_norm(*norm, x);
                if t <= 1.0 {
                    t + 1.0
                } else {
                    2.0 * t
                }
            }
            ClosedForm::Norm { .. } => sq.sqrt(),
            ClosedForm::MaxAffine { slopes, offsets } => affine_values(slopes, offsets, x)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max),
            ClosedForm::EguchiHanson { c } => c.sqrt() * x[0].cosh(),
        })
    }

    /// Hessian at `x`, if the function is twice differentiable there.
    pub fn hessian(&self, x: &[f64]) -> Result<Option<Vec<Vec<f64>>>> {
        self.check(x)?;
        let r = self.rank();
        let eye = |s: f64| -> Vec<Vec<f64>> {
            (0..r)
                .map(|i| (0..r).map(|j| if i == j { s } else { 0.0 }).collect())
                .collect()
        };
        Ok(match self {
            ClosedForm::HalfSquaredNorm { .. } => Some(eye(1.0)),
            ClosedForm::ShiftedParaboloid => Some(eye(2.0)),
            ClosedForm::EguchiHanson { c } => Some(vec![vec![c.sqrt() * x[0].cosh()]]),
            ClosedForm::Norm { .. } => {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n <= KINK_TOL {
                    None
                } else {
                    Some(
                        (0..r)
                            .map(|i| {
                                (0..r)
                                    .map(|j| ((i == j) as u8 as f64 - x[i] * x[j] / (n * n)) / n)
                                    .collect()
                            })
                            .collect(),
                    )
                }
            }
            ClosedForm::Kink { .. } | ClosedForm::MaxAffine { .. } => None,
        })
    }

    /// Whether the function is `C²` everywhere.
    pub fn is_smooth(&self) -> bool {
        matches!(
            self,
            ClosedForm::HalfSquaredNorm { .. } | ClosedForm::ShiftedParaboloid | ClosedForm::EguchiHanson { .. }
        )
    }

    /// Gradient of a smooth fixture.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self.subgradient(x)? {
            SubgradientSet::Polytope { vertices } if vertices.len() == 1 => Ok(vertices[0].clone()),
            _ => Err(Error::Unsupported(format!("not differentiable at {x:?}"))),
        }
    }

    /// The exact subdifferential at `x`.
    pub fn subgradient(&self, x: &[f64]) -> Result<SubgradientSet> {
        self.check(x)?;
        Ok(match self {
            ClosedForm::HalfSquaredNorm { .. } => SubgradientSet::point(x.to_vec()),
            ClosedForm::ShiftedParaboloid => SubgradientSet::point(x.iter().map(|v| 2.0 * v).collect()),
            ClosedForm::EguchiHanson { c } => SubgradientSet::point(vec![c.sqrt() * x[0].sinh()]),
            ClosedForm::Norm { rank } => {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n <= KINK_TOL {
                    SubgradientSet::Ball {
                        center: vec![0.0; *rank],
                        radius: 1.0,
                    }
                } else {
                    SubgradientSet::point(x.iter().map(|v| v / n).collect())
                }
            }
            ClosedForm::Kink { norm } => kink_subgradient(*norm, x),
            ClosedForm::MaxAffine { slopes, offsets } => {
                let vals = affine_values(slopes, offsets, x);
                let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let active: Vec<Vec<f64>> = vals
                    .iter()
                    .zip(slopes)
                    .filter(|(v, _)| top - **v <= KINK_TOL * (1.0 + top.abs()))
                    .map(|(_, s)| s.clone())
                    .collect();
                SubgradientSet::hull(active)
            }
        })
    }
}

fn affine_values(slopes: &[Vec<f64>], offsets: &[f64], x: &[f64]) -> Vec<f64> {
    slopes
        .iter()
        .zip(offsets)
        .map(|(s, b)| s.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + b)
        .collect()
}

fn kink_norm(norm: KinkNorm, x: &[f64]) -> f64 {
    match norm {
        KinkNorm::L1 => x.iter().map(|v| v.abs()).sum(),
        KinkNorm::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Chain rule for `φ ∘ ‖·‖` with `φ` convex and nondecreasing:
/// `∂(φ∘g)(x) = ⋃_{a ∈ ∂φ(g(x))} a·∂g(x) = conv(a₀·∂g(x) ∪ a₁·∂g(x))`.
fn kink_subgradient(norm: KinkNorm, x: &[f64]) -> SubgradientSet {
    let t = kink_norm(norm, x);
    let (a0, a1) = if (t - 1.0).abs() <= KINK_TOL {
        (1.0, 2.0)
    } else if t < 1.0 {
        (1.0, 1.0)
    } else {
        (2.0, 2.0)
    };
    let base: Vec<[f64; 2]> = match norm {
        KinkNorm::L2 => {
            if t <= KINK_TOL {
                return SubgradientSet::Ball {
                    center: vec![0.0, 0.0],
                    radius: a0,
                };
            }
            vec![[x[0] / t, x[1] / t]]
        }
        KinkNorm::L1 => {
            let comp = |v: f64| -> Vec<f64> {
                if v.abs() <= KINK_TOL {
                    vec![-1.0, 1.0]
                } else {
                    vec![v.signum()]
                }
            };
            let mut out = Vec::new();
            for p in comp(x[0]) {
                for q in comp(x[1]) {
                    out.push([p, q]);
                }
            }
            out
        }
    };
    let mut pts: Vec<[f64; 2]> = base.iter().map(|p| [a0 * p[0], a0 * p[1]]).collect();
    pts.extend(base.iter().map(|p| [a1 * p[0], a1 * p[1]]));
    SubgradientSet::Polytope {
        vertices: convex_hull(&pts).into_iter().map(|p| p.to_vec()).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_values_are_continuous() {
        for norm in [KinkNorm::L1, KinkNorm::L2] {
            let f = ClosedForm::Kink { norm };
            let a = f.value(&[1.0 - 1e-9, 0.0]).unwrap();
            let b = f.value(&[1.0 + 1e-9, 0.0]).unwrap();
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn max_affine_kink_is_hull_of_active_slopes() {
        let f = ClosedForm::MaxAffine {
            slopes: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -3.0]],
            offsets: vec![0.0, 0.0, -5.0, -5.0],
        };
        let s = f.subgradient(&[0.0, 0.0]).unwrap();
        let SubgradientSet::Polytope { vertices } = s else {
            panic!()
        };
        assert_eq!(vertices.len(), 2);
        assert!(vertices.contains(&vec![1.0, 0.0]) && vertices.contains(&vec![-1.0, 0.0]));
        assert!(f.subgradient(&[2.0, 0.0]).unwrap().is_singleton());
    }

    #[test]
    fn norm_hessian_annihilates_radial_direction() {
        let f = ClosedForm::Norm { rank: 2 };
        let h = f.hessian(&[3.0, 4.0]).unwrap().unwrap();
        let v = [h[0][0] * 3.0 + h[0][1] * 4.0, h[1][0] * 3.0 + h[1][1] * 4.0];
        assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        assert!(f.hessian(&[0.0, 0.0]).unwrap().is_none());
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        assert!(matches!(
            ClosedForm::ShiftedParaboloid.subgradient(&[1.0]),
            Err(Error::RankMismatch { .. })
        ));
    }
}
