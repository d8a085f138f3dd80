use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::{Deserialize, Serialize};

use cyma::convex::{ClosedForm, SubgradientSet};
use cyma::kaehler::{self, GridPotential, PointReport, Potential};
use cyma::ma::{self, ChamberReport, Solution};
use cyma::RootSystem;

use crate::artifact::{Artifact, ProfileTable};
use crate::config::{Check, Format, Loaded, Tolerances};
use crate::error::CliError;

/// Per-point reports kept in a verification report.
const MAX_POINTS: usize = 16;

/// What a command produced: text for stdout and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn solve(loaded: &Loaded) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let rs = cfg.root_system()?;
    let (artifact, summary, converged) = if rs.rank() == 1 {
        let s = &cfg.solver;
        let p = ma::solve_rank1(&rs, cfg.c(&rs), s.x_max, s.n_nodes).map_err(CliError::Invalid)?;
        let t = ProfileTable::from_profile(&p).map_err(CliError::Invalid)?;
        let summary = format!("{}: profile on [0, {}] with {} nodes", rs.family(), s.x_max, s.n_nodes);
        (Artifact::Profile(t), summary, true)
    } else {
        let spec = cfg.problem(&rs)?;
        let sol = ma::solve_rank2(&spec).map_err(CliError::Invalid)?;
        let summary = format!(
            "{}: {} after {} iterations, residual {:e}",
            rs.family(),
            if sol.converged { "converged" } else { "not converged" },
            sol.iterations,
            sol.final_residual
        );
        let converged = sol.converged;
        (Artifact::Grid(sol), summary, converged)
    };
    let mut stdout = summary + "\n";
    for f in &cfg.output.formats {
        let (path, text) = match f {
            Format::Json => (loaded.output_path("", "json"), artifact.to_json()),
            Format::Csv => (loaded.output_path("", "csv"), artifact.to_csv()),
        };
        write(&path, &text)?;
        let _ = writeln!(stdout, "wrote {}", path.display());
    }
    Ok(Outcome {
        stdout,
        code: if converged { 0 } else { 2 },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub family: String,
    pub c: f64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    /// Max `|F̂₁(∇ρ) det D²ρ − F̂₂|` over the inner region.
    pub residual_max: f64,
    pub max_f2: f64,
    pub residual_rel: f64,
    pub cy_dev: f64,
    pub mean_det: f64,
    /// `4^{−r} 2^{−Σm} c`, the value `|det|` takes on a solution.
    pub expected_det: f64,
    pub chamber: ChamberReport,
    pub det_ratio_mean: f64,
    pub det_ratio_spread: f64,
    pub min_hessian_eigenvalue: f64,
    pub inner_points: usize,
    pub points: Vec<PointReport>,
}

/// Inner-region points and the potential to differentiate there.
struct Subject<'a> {
    rs: RootSystem,
    c: f64,
    pot: Box<dyn Potential + 'a>,
    points: Vec<Vec<f64>>,
    solution: Option<&'a Solution>,
}

fn subject(artifact: &Artifact) -> Subject<'_> {
    match artifact {
        Artifact::Profile(t) => {
            let points = t.x.iter().filter(|&&x| x >= 0.1).map(|&x| vec![x]).collect();
            Subject {
                rs: t.rs.clone(),
                c: t.c,
                pot: Box::new(t.clone()),
                points,
                solution: None,
            }
        }
        Artifact::Grid(sol) => {
            let points = ma::inner_nodes(sol)
                .into_iter()
                .map(|k| sol.grid().position(k).to_vec())
                .filter(|z| {
                    sol.root_system()
                        .roots()
                        .iter()
                        .all(|r| r.eval(z).abs() > cyma::rootsys::WEYL_TOL)
                })
                .collect();
            Subject {
                rs: sol.root_system().clone(),
                c: sol.spec.c,
                pot: Box::new(GridPotential { solution: sol }),
                points,
                solution: Some(sol),
            }
        }
    }
}

pub fn verify_artifact(artifact: &Artifact, checks: &[Check], tol: &Tolerances) -> Result<VerifyReport, CliError> {
    let s = subject(artifact);
    if s.points.is_empty() {
        return Err(CliError::Numerical(
            "the inner region holds no evaluation points".into(),
        ));
    }
    let lib = CliError::Invalid;
    let pot: &dyn Potential = s.pot.as_ref();

    let (residual_max, max_f2) = match s.solution {
        Some(sol) => {
            let res = ma::equation_residual(sol);
            let inner = ma::inner_nodes(sol);
            let r = inner.iter().fold(0.0f64, |m, &k| m.max(res[k].abs()));
            let f = inner
                .iter()
                .fold(0.0f64, |m, &k| m.max(ma::f2_hat(&s.rs, s.c, &sol.grid().position(k))));
            (r, f)
        }
        None => {
            let mut r = 0.0f64;
            for z in &s.points {
                r = r.max(ma::pointwise_residual(&s.rs, s.c, pot, z).map_err(lib)?.abs());
            }
            let f = s.points.iter().fold(0.0f64, |m, z| m.max(ma::f2_hat(&s.rs, s.c, z)));
            (r, f)
        }
    };

    let cy = kaehler::cy_constancy_at(&s.rs, pot, &s.points).map_err(lib)?;
    let chamber = match s.solution {
        Some(sol) => ma::chamber_preservation(sol, &ma::inner_nodes(sol)),
        None => {
            let mut c = ChamberReport {
                holds: true,
                min_margin: f64::INFINITY,
                violations: 0,
                checked: 0,
            };
            for z in &s.points {
                let g = pot.gradient(z).map_err(lib)?;
                let m =
                    s.rs.roots()
                        .iter()
                        .map(|r| r.eval(&g) / r.norm_sq().sqrt())
                        .fold(f64::INFINITY, f64::min);
                c.checked += 1;
                c.min_margin = c.min_margin.min(m);
                if m <= 0.0 {
                    c.violations += 1;
                    c.holds = false;
                }
            }
            c
        }
    };
    let min_eig = match s.solution {
        Some(sol) => ma::min_hessian_eigenvalue(sol, &ma::inner_nodes(sol)),
        None => {
            let mut m = f64::INFINITY;
            for z in &s.points {
                m = m.min(pot.hessian(z).map_err(lib)?[0][0]);
            }
            m
        }
    };

    let mut ratios = Vec::with_capacity(s.points.len());
    for z in &s.points {
        ratios.push(kaehler::det_identity_report(&s.rs, pot, z).map_err(lib)?.ratio);
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let spread = (hi - lo) / mean_ratio.abs();

    let stride = s.points.len().div_ceil(MAX_POINTS);
    let mut points = Vec::new();
    for z in s.points.iter().step_by(stride) {
        points.push(kaehler::point_report(&s.rs, pot, z, cy.mean_det).map_err(lib)?);
    }

    let residual_rel = residual_max / max_f2;
    let r = s.rs.rank() as i32;
    let expected_det = 4f64.powi(-r) * 2f64.powi(-(s.rs.total_multiplicity() as i32)) * s.c;
    let mut results = Vec::new();
    for &check in checks {
        let (value, tolerance, passed) = match check {
            Check::Residual => (residual_rel, tol.residual, residual_rel <= tol.residual),
            Check::CyConstancy => (cy.max_dev, tol.cy_dev, cy.max_dev <= tol.cy_dev),
            Check::Chamber => (chamber.min_margin, 0.0, chamber.holds),
            Check::DetIdentity => (spread, tol.det_ratio_spread, spread <= tol.det_ratio_spread),
        };
        results.push(CheckResult {
            check,
            value,
            tolerance,
            passed,
        });
    }
    Ok(VerifyReport {
        family: s.rs.family().to_string(),
        c: s.c,
        passed: results.iter().all(|r| r.passed),
        checks: results,
        residual_max,
        max_f2,
        residual_rel,
        cy_dev: cy.max_dev,
        mean_det: cy.mean_det,
        expected_det,
        chamber,
        det_ratio_mean: mean_ratio,
        det_ratio_spread: spread,
        min_hessian_eigenvalue: min_eig,
        inner_points: s.points.len(),
        points,
    })
}

fn points_csv(report: &VerifyReport) -> String {
    let rank = report.points.first().map_or(0, |p| p.z.len());
    let mut out: String = (1..=rank).map(|i| format!("z{i},")).collect();
    out.push_str("det_lhs,det_rhs,ratio,d_op,cy_dev\n");
    for p in &report.points {
        for v in &p.z {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{},{},{},{},{}", p.det_lhs, p.det_rhs, p.ratio, p.d_op, p.cy_dev);
    }
    out
}

pub fn verify(loaded: &Loaded, solution: &Path) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let artifact = Artifact::read(solution)?;
    let family = match &artifact {
        Artifact::Profile(t) => t.rs.family(),
        Artifact::Grid(s) => s.root_system().family(),
    };
    if family != cfg.root_system.family {
        warn!(
            "config names {} but the solution is for {family}; verifying the solution's own problem",
            cfg.root_system.family
        );
    }
    let report = verify_artifact(&artifact, &cfg.verify.checks, &cfg.verify.tolerances)?;
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    let json: PathBuf = loaded.output_path("_report", "json");
    write(&json, &text)?;
    let csv = loaded.output_path("_points", "csv");
    write(&csv, &points_csv(&report))?;

    let mut stdout = String::new();
    for r in &report.checks {
        let _ = writeln!(
            stdout,
            "{:<12} {:<5} {:e} (tolerance {:e})",
            serde_json::to_value(r.check).unwrap().as_str().unwrap_or_default(),
            if r.passed { "pass" } else { "FAIL" },
            r.value,
            r.tolerance
        );
    }
    for p in [&json, &csv] {
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    info!("verification {}", if report.passed { "passed" } else { "failed" });
    Ok(Outcome {
        stdout,
        code: if report.passed { 0 } else { 2 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

pub fn export(solution: &Path, format: ExportFormat) -> Result<Outcome, CliError> {
    let a = Artifact::read(solution)?;
    Ok(Outcome {
        stdout: match format {
            ExportFormat::Json => a.to_json(),
            ExportFormat::Csv => a.to_csv(),
        },
        code: 0,
    })
}

pub fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad coordinate {s:?}: {e}"))
        })
        .collect()
}

pub fn subgradient(fixture: &str, point: &[f64]) -> Result<Outcome, CliError> {
    let f = ClosedForm::named(fixture).map_err(CliError::Invalid)?;
    let set: SubgradientSet = f.subgradient(point).map_err(CliError::Invalid)?;
    let mut stdout = serde_json::to_string(&set).expect("subgradient sets serialize");
    stdout.push('\n');
    Ok(Outcome { stdout, code: 0 })
}
