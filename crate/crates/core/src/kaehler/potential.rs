//! Potentials that can be differentiated twice at a point.

use crate::error::{Error, Result};
use crate::ma::{RadialProfile, Solution, Surrogate};
use crate::rootsys::{ChamberPoint, RootSystem};

pub trait Potential: Sync {
    fn rank(&self) -> usize;
    fn value(&self, z: &[f64]) -> Result<f64>;
    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>>;
    /// Symmetric `r × r` Hessian.
    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>>;
}

fn check(rank: usize, z: &[f64]) -> Result<()> {
    if z.len() != rank {
        return Err(Error::RankMismatch {
            expected: rank,
            got: z.len(),
        });
    }
    Ok(())
}

/// `½|Z|²`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSquare {
    pub rank: usize,
}

impl Potential for HalfSquare {
    fn rank(&self) -> usize {
        self.rank
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check(self.rank, z)?;
        Ok(0.5 * z.iter().map(|v| v * v).sum::<f64>())
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check(self.rank, z)?;
        Ok(z.to_vec())
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        check(self.rank, z)?;
        Ok((0..self.rank)
            .map(|i| (0..self.rank).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect())
    }
}

/// `√c cosh x`.
#[derive(Debug, Clone, Copy)]
pub struct EguchiHanson {
    pub c: f64,
}

impl Potential for EguchiHanson {
    fn rank(&self) -> usize {
        1
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check(1, z)?;
        Ok(self.c.sqrt() * z[0].cosh())
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check(1, z)?;
        Ok(vec![self.c.sqrt() * z[0].sinh()])
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        check(1, z)?;
        Ok(vec![vec![self.c.sqrt() * z[0].cosh()]])
    }
}

impl Potential for RadialProfile {
    fn rank(&self) -> usize {
        1
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check(1, z)?;
        RadialProfile::value(self, z[0])
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check(1, z)?;
        Ok(vec![self.derivative(z[0])?])
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        check(1, z)?;
        Ok(vec![vec![self.second_derivative(z[0])?]])
    }
}

/// `ρ(x₁, x₂) = f(x₁) + g(x₂)` from two rank-one profiles; the a1xa1
/// solutions have this form.
#[derive(Debug, Clone)]
pub struct Separable<F, G> {
    pub first: F,
    pub second: G,
}

impl<F: Potential, G: Potential> Potential for Separable<F, G> {
    fn rank(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check(2, z)?;
        Ok(self.first.value(&z[..1])? + self.second.value(&z[1..])?)
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check(2, z)?;
        Ok(vec![
            self.first.gradient(&z[..1])?[0],
            self.second.gradient(&z[1..])?[0],
        ])
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        check(2, z)?;
        Ok(vec![
            vec![self.first.hessian(&z[..1])?[0][0], 0.0],
            vec![0.0, self.second.hessian(&z[1..])?[0][0]],
        ])
    }
}

/// The W-invariant surrogate `κ Σ m_λ (cosh μλ − 1)` as a potential.
#[derive(Debug, Clone)]
pub struct CoshSum {
    pub rs: RootSystem,
    pub surrogate: Surrogate,
}

impl Potential for CoshSum {
    fn rank(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        check(2, z)?;
        Ok(self.surrogate.value(&self.rs, z))
    }

    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        check(2, z)?;
        Ok(self.surrogate.gradient(&self.rs, z).to_vec())
    }

    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        check(2, z)?;
        let a = self.surrogate.hessian(&self.rs, z);
        Ok(vec![vec![a[0], a[1]], vec![a[1], a[2]]])
    }
}

/// A rank-two grid solution, differentiated by fourth-order differences
/// along the lattice directions. Points must be lattice points of the disc;
/// they are reflected into the sector and the derivatives mapped back.
#[derive(Debug, Clone, Copy)]
pub struct GridPotential<'a> {
    pub solution: &'a Solution,
}

impl GridPotential<'_> {
    fn at(&self, z: &[f64]) -> Result<(usize, Vec<f64>)> {
        check(2, z)?;
        let rs = self.solution.root_system();
        let (img, w) = rs.reflect_into_chamber(&ChamberPoint::new(z.to_vec()));
        let k = self
            .solution
            .grid()
            .index_of(&img)
            .filter(|&k| k < self.solution.grid().len())
            .ok_or_else(|| Error::OutsideDomain(z.to_vec()))?;
        Ok((k, rs.weyl_group()[w].matrix().to_vec()))
    }

    fn derivatives(&self, z: &[f64]) -> Result<([f64; 3], [f64; 2], Vec<f64>)> {
        let (k, m) = self.at(z)?;
        let (a, g) = self
            .solution
            .derivatives(k, true)
            .ok_or_else(|| Error::OutsideDomain(z.to_vec()))?;
        Ok((a, g, m))
    }
}

impl Potential for GridPotential<'_> {
    fn rank(&self) -> usize {
        2
    }

    fn value(&self, z: &[f64]) -> Result<f64> {
        let (k, _) = self.at(z)?;
        Ok(self.solution.all_values()[k])
    }

    /// `∇ρ(Z) = wᵀ ∇ρ(wZ)`.
    fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (_, g, m) = self.derivatives(z)?;
        Ok(vec![m[0] * g[0] + m[2] * g[1], m[1] * g[0] + m[3] * g[1]])
    }

    /// `D²ρ(Z) = wᵀ D²ρ(wZ) w`.
    fn hessian(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        let (a, _, m) = self.derivatives(z)?;
        let h = [[a[0], a[1]], [a[1], a[2]]];
        let w = [[m[0], m[1]], [m[2], m[3]]];
        let mut out = vec![vec![0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = (0..2)
                    .flat_map(|p| (0..2).map(move |q| (p, q)))
                    .map(|(p, q)| w[p][i] * h[p][q] * w[q][j])
                    .sum();
            }
        }
        Ok(out)
    }
}
