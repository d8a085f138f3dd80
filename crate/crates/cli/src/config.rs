//! The JSON problem file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cyma::ma::{Init, ProblemSpec, Scheme, Symmetry};
use cyma::{Family, RootSystem};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub root_system: RootSystemBlock,
    pub solver: SolverBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSystemBlock {
    pub family: Family,
    /// Root label to multiplicity; `all` sets every orbit at once.
    pub multiplicities: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    /// Defaults to `2ⁿ`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub init: Init,
    #[serde(default)]
    pub symmetry: Symmetry,
    /// Rank one only.
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_n_nodes")]
    pub n_nodes: usize,
}

fn default_radius() -> f64 {
    2.0
}
fn default_grid_n() -> usize {
    64
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    50
}
fn default_x_max() -> f64 {
    5.0
}
fn default_n_nodes() -> usize {
    501
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Residual,
    CyConstancy,
    Chamber,
    DetIdentity,
}

impl Check {
    pub const ALL: [Check; 4] = [Check::Residual, Check::CyConstancy, Check::Chamber, Check::DetIdentity];
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyBlock {
    #[serde(default = "all_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

impl Default for VerifyBlock {
    fn default() -> Self {
        VerifyBlock {
            checks: all_checks(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Inner-region max `|residual|` over inner max `F̂₂`.
    pub residual: f64,
    pub cy_dev: f64,
    /// Relative spread of the determinant-identity ratio.
    pub det_ratio_spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-3,
            cy_dev: 1e-2,
            det_ratio_spread: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    /// Relative paths are taken from the config file's directory.
    pub dir: PathBuf,
    pub stem: String,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock {
            dir: PathBuf::from("out"),
            stem: "solution".into(),
            formats: vec![Format::Json, Format::Csv],
        }
    }
}

/// A parsed config and the directory it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    pub base: PathBuf,
}

impl Loaded {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = parse(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base.join(&self.config.output.dir)
    }

    pub fn output_path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.output_dir()
            .join(format!("{}{suffix}.{ext}", self.config.output.stem))
    }
}

pub fn parse(text: &str) -> serde_json::Result<Config> {
    serde_json::from_str(text)
}

impl Config {
    pub fn root_system(&self) -> Result<RootSystem, CliError> {
        RootSystem::build(self.root_system.family, &self.root_system.multiplicities).map_err(CliError::Invalid)
    }

    pub fn c(&self, rs: &RootSystem) -> f64 {
        self.solver.c.unwrap_or_else(|| 2f64.powi(rs.total_dimension() as i32))
    }

    pub fn problem(&self, rs: &RootSystem) -> Result<ProblemSpec, CliError> {
        let s = &self.solver;
        ProblemSpec::new(rs.clone(), self.c(rs), s.radius, s.grid_n, s.tol, s.max_iter)
            .map(|p| p.with_scheme(s.scheme).with_init(s.init).with_symmetry(s.symmetry))
            .map_err(CliError::Invalid)
    }
}
