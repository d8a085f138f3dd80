use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cyma::ma::{equation_residual, solve_rank2, ProblemSpec, Solution};
use cyma::{Family, RootSystem};
use cyma_cli::artifact::Artifact;

fn cyma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyma")).args(args).output().unwrap()
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn a2_config(dir: &Path, stem: &str) -> PathBuf {
    config(
        dir,
        &format!("{stem}.json"),
        &format!(
            r#"{{
  "root_system": {{"family": "a2", "multiplicities": {{"all": 1}}}},
  "solver": {{"grid_n": 48, "tol": 1e-8}},
  "output": {{"dir": "out", "stem": "{stem}"}}
}}"#
        ),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rank_one_solution_is_the_cosh_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "a1.json",
        r#"{"root_system": {"family": "a1", "multiplicities": {"lambda": 1}},
            "solver": {"c": 1, "x_max": 4, "n_nodes": 401},
            "output": {"dir": ".", "stem": "a1", "formats": ["json"]}}"#,
    );
    let out = cyma(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let Artifact::Profile(t) = Artifact::read(&dir.path().join("a1.json")).unwrap() else {
        panic!("expected a profile");
    };
    for j in 0..t.x.len() {
        let x = t.x[j];
        assert!((t.rho[j] - (x.cosh() - 1.0)).abs() < 1e-9);
        assert!((t.drho[j] - x.sinh()).abs() < 1e-9);
    }
    assert!(!dir.path().join("a1.csv").exists());
}

#[test]
fn a1xa1_converges_at_grid_96() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "sq.json",
        r#"{"root_system": {"family": "a1xa1", "multiplicities": {"lambda1": 1, "lambda2": 1}},
            "solver": {"grid_n": 96, "max_iter": 50},
            "output": {"dir": "out", "stem": "sq", "formats": ["json"]}}"#,
    );
    let out = cyma(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0));
    let Artifact::Grid(sol) = Artifact::read(&dir.path().join("out/sq.json")).unwrap() else {
        panic!("expected a grid solution");
    };
    assert!(sol.converged && sol.iterations <= 50);
}

#[test]
fn malformed_config_exits_1_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "bad.json",
        "{\n  \"root_system\": {\"family\": \"a2\", \"multiplicities\": {\"all\": 1}},\n  \"solver\": {\"grid_n\": 64,}\n}\n",
    );
    let out = cyma(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");

    let cfg = config(
        dir.path(),
        "fam.json",
        r#"{"root_system": {"family": "e8", "multiplicities": {}}, "solver": {}}"#,
    );
    assert_eq!(cyma(&["solve", "--config", s(&cfg)]).status.code(), Some(1));

    let cfg = config(
        dir.path(),
        "grid.json",
        r#"{"root_system": {"family": "a2", "multiplicities": {"all": 1}}, "solver": {"grid_n": 8}}"#,
    );
    assert_eq!(cyma(&["solve", "--config", s(&cfg)]).status.code(), Some(1));
}

#[test]
fn non_convergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "short.json",
        r#"{"root_system": {"family": "g2", "multiplicities": {"all": 1}},
            "solver": {"grid_n": 32, "max_iter": 1, "tol": 1e-12},
            "output": {"dir": "out", "stem": "short", "formats": ["json"]}}"#,
    );
    let out = cyma(&["solve", "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    // The best iterate is still written.
    assert!(dir.path().join("out/short.json").exists());
}

#[test]
fn verify_passes_then_fails_on_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = a2_config(dir.path(), "a2");
    assert_eq!(cyma(&["solve", "--config", s(&cfg)]).status.code(), Some(0));
    let sol_path = dir.path().join("out/a2.json");
    let out = cyma(&["verify", "--config", s(&cfg), "--solution", s(&sol_path)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("out/a2_report.json").exists());
    assert!(dir.path().join("out/a2_points.csv").exists());

    let Artifact::Grid(sol) = Artifact::read(&sol_path).unwrap() else {
        panic!("expected a grid solution");
    };
    let bumped = sol.perturbed(|z| 1e-2 * (z[0] * z[0] + z[1] * z[1]).powi(2));
    let bad = dir.path().join("bumped.json");
    std::fs::write(&bad, Artifact::Grid(bumped).to_json()).unwrap();
    let out = cyma(&["verify", "--config", s(&cfg), "--solution", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.lines().any(|l| l.starts_with("residual") && l.contains("FAIL")),
        "{text}"
    );
}

#[test]
fn verify_missing_solution_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = a2_config(dir.path(), "a2");
    let out = cyma(&[
        "verify",
        "--config",
        s(&cfg),
        "--solution",
        s(&dir.path().join("nope.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.json"));
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = a2_config(&dir.path().join("."), "one");
    let b = a2_config(&dir.path().join("."), "two");
    for cfg in [&a, &b] {
        assert_eq!(cyma(&["solve", "--config", s(cfg)]).status.code(), Some(0));
    }
    for ext in ["json", "csv"] {
        let x = std::fs::read(dir.path().join(format!("out/one.{ext}"))).unwrap();
        let y = std::fs::read(dir.path().join(format!("out/two.{ext}"))).unwrap();
        assert!(x == y, "{ext} outputs differ");
    }
    // Thread count does not change the bytes either.
    let out = Command::new(env!("CARGO_BIN_EXE_cyma"))
        .args(["solve", "--config", s(&a)])
        .env("MA_CY_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let x = std::fs::read(dir.path().join("out/one.json")).unwrap();
    let y = std::fs::read(dir.path().join("out/two.json")).unwrap();
    assert!(x == y);
}

#[test]
fn bad_thread_count_exits_1() {
    let out = Command::new(env!("CARGO_BIN_EXE_cyma"))
        .args(["subgradient", "--fixture", "ex33", "--point", "1,0"])
        .env("MA_CY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reloaded_solution_reproduces_residuals() {
    let rs = RootSystem::uniform(Family::B2, 1);
    let spec = ProblemSpec::new(rs, 16.0, 2.0, 40, 1e-8, 50).unwrap();
    let sol = solve_rank2(&spec).unwrap();
    let text = Artifact::Grid(sol.clone()).to_json();
    let back: Artifact = serde_json::from_str(&text).unwrap();
    let Artifact::Grid(back) = back else { unreachable!() };
    let (r0, r1) = (equation_residual(&sol), equation_residual(&back));
    assert_eq!(r0.len(), r1.len());
    for (a, b) in r0.iter().zip(&r1) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert_eq!(sol.gauge_shift, back.gauge_shift);
}

#[test]
fn tampered_node_list_is_rejected() {
    let rs = RootSystem::uniform(Family::A2, 1);
    let spec = ProblemSpec::new(rs, 32.0, 2.0, 20, 1e-6, 5).unwrap();
    let sol = Solution::from_fn(spec, |z| z[0] * z[0] + z[1] * z[1]).unwrap();
    let mut v: serde_json::Value = serde_json::to_value(Artifact::Grid(sol)).unwrap();
    v["nodes"][3][0] = serde_json::json!(9.0);
    assert!(serde_json::from_value::<Artifact>(v).is_err());
}

#[test]
fn subgradient_fixtures() {
    let run = |f: &str, p: &str| {
        let out = cyma(&["subgradient", "--fixture", f, "--point", p]);
        assert_eq!(out.status.code(), Some(0));
        serde_json::from_slice::<cyma::convex::SubgradientSet>(&out.stdout).unwrap()
    };
    let s33 = run("ex33", "1,0");
    assert_eq!(s33.vertices().unwrap(), &[vec![2.0, 0.0]]);

    let s34 = run("ex34", "1,0");
    let mut v: Vec<Vec<f64>> = s34.vertices().unwrap().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(v, vec![vec![1.0, 0.0], vec![2.0, 0.0]]);

    let s35 = run("ex35", "1,0");
    let mut v: Vec<Vec<f64>> = s35.vertices().unwrap().to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(
        v,
        vec![vec![1.0, -1.0], vec![1.0, 1.0], vec![2.0, -2.0], vec![2.0, 2.0]]
    );

    assert_eq!(
        cyma(&["subgradient", "--fixture", "nope", "--point", "1,0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cyma(&["subgradient", "--fixture", "ex33", "--point", "1,x"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "bc1.json",
        r#"{"root_system": {"family": "bc1", "multiplicities": {"lambda": 2, "2lambda": 1}},
            "solver": {"x_max": 2, "n_nodes": 21},
            "output": {"dir": ".", "stem": "bc1", "formats": ["json"]}}"#,
    );
    assert_eq!(cyma(&["solve", "--config", s(&cfg)]).status.code(), Some(0));
    let path = dir.path().join("bc1.json");
    let csv = cyma(&["export", "--solution", s(&path), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("x,rho,drho"));
    assert_eq!(text.lines().count(), 22);
    let json = cyma(&["export", "--solution", s(&path), "--format", "json"]);
    assert_eq!(json.stdout, std::fs::read(&path).unwrap());
}
