//! Solution files: a tagged JSON document, plus CSV views of it.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cyma::kaehler::Potential;
use cyma::ma::{equation_residual, RadialProfile, Solution};
use cyma::{Error, RootSystem};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Artifact {
    /// Rank one: `ρ̂` and `ρ̂′` at the quadrature nodes.
    Profile(ProfileTable),
    /// Rank two: the grid solution.
    Grid(Solution),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileTable {
    pub rs: RootSystem,
    pub c: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub drho: Vec<f64>,
}

impl ProfileTable {
    pub fn from_profile(p: &RadialProfile) -> cyma::Result<Self> {
        let x = p.nodes().to_vec();
        let drho = x.iter().map(|&t| p.derivative(t)).collect::<cyma::Result<_>>()?;
        Ok(ProfileTable {
            rs: p.root_system().clone(),
            c: p.c(),
            rho: p.node_values().to_vec(),
            x,
            drho,
        })
    }

    fn check(&self) -> Result<(), String> {
        let n = self.x.len();
        if n < 6 || self.rho.len() != n || self.drho.len() != n {
            return Err(format!("profile columns need equal lengths of at least 6, got {n}"));
        }
        if self.rs.rank() != 1 {
            return Err("a profile needs a rank-one root system".into());
        }
        let dx = self.x[1] - self.x[0];
        let uniform = self.x[0] == 0.0
            && dx > 0.0
            && self
                .x
                .iter()
                .enumerate()
                .all(|(j, &t)| (t - j as f64 * dx).abs() <= 1e-9 * dx);
        if !uniform {
            return Err("profile nodes must be uniform and start at 0".into());
        }
        Ok(())
    }

    fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    fn node(&self, x: f64) -> cyma::Result<usize> {
        let t = x / self.dx();
        let j = t.round();
        if (t - j).abs() > 1e-6 || j < 0.0 || j as usize >= self.x.len() {
            return Err(Error::OutsideDomain(vec![x]));
        }
        Ok(j as usize)
    }

    /// `ρ̂″` at node `j` from the `ρ̂′` column, fourth order throughout
    /// (one-sided at the far end).
    fn second(&self, j: usize) -> f64 {
        let d = &self.drho;
        let n = d.len();
        let dx = self.dx();
        if j >= 2 && j + 2 < n {
            (-d[j + 2] + 8.0 * d[j + 1] - 8.0 * d[j - 1] + d[j - 2]) / (12.0 * dx)
        } else if j < 2 {
            // ρ̂′ is odd, so mirror it across 0.
            let at = |i: isize| if i < 0 { -d[(-i) as usize] } else { d[i as usize] };
            let j = j as isize;
            (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * dx)
        } else {
            (25.0 * d[j] - 48.0 * d[j - 1] + 36.0 * d[j - 2] - 16.0 * d[j - 3] + 3.0 * d[j - 4]) / (12.0 * dx)
        }
    }
}

/// The table as a potential, evaluable at its nodes (and their negatives).
impl Potential for ProfileTable {
    fn rank(&self) -> usize {
        1
    }

    fn value(&self, z: &[f64]) -> cyma::Result<f64> {
        Ok(self.rho[self.node(z[0].abs())?])
    }

    fn gradient(&self, z: &[f64]) -> cyma::Result<Vec<f64>> {
        Ok(vec![z[0].signum() * self.drho[self.node(z[0].abs())?]])
    }

    fn hessian(&self, z: &[f64]) -> cyma::Result<Vec<Vec<f64>>> {
        Ok(vec![vec![self.second(self.node(z[0].abs())?)]])
    }
}

impl Artifact {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let bad = |message: String| CliError::Solution {
            path: path.to_path_buf(),
            message,
        };
        let a: Artifact = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if let Artifact::Profile(p) = &a {
            p.check().map_err(bad)?;
        }
        Ok(a)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("solution types serialize");
        s.push('\n');
        s
    }

    /// Profiles: `x,rho,drho`. Grids: one row per node with its equation
    /// residual (empty on Dirichlet nodes).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Artifact::Profile(p) => {
                out.push_str("x,rho,drho\n");
                for j in 0..p.x.len() {
                    let _ = writeln!(out, "{},{},{}", p.x[j], p.rho[j], p.drho[j]);
                }
            }
            Artifact::Grid(sol) => {
                out.push_str("x1,x2,value,residual,node\n");
                let res = equation_residual(sol);
                let n = sol.grid().len();
                for (k, v) in sol.all_values().iter().enumerate() {
                    let z = sol.grid().position(k);
                    if k < n {
                        let _ = writeln!(out, "{},{},{},{},unknown", z[0], z[1], v, res[k]);
                    } else {
                        let _ = writeln!(out, "{},{},{},,band", z[0], z[1], v);
                    }
                }
            }
        }
        out
    }
}
