use std::collections::BTreeMap;

use cyma::kaehler::{EguchiHanson, HalfSquare, Separable};
use cyma::ma::{
    equation_residual, f1_hat, f2_hat, monotone_dirichlet_solve, pointwise_residual, solve_rank1, solve_rank2,
    ProblemSpec, SectorGrid, Solution, Symmetry,
};
use cyma::{Family, RootSystem};
use proptest::prelude::*;

fn mults(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Integrates `y′ = (k c / P) g`, `ρ̂′ = y^{1/k}` by RK4.
fn rk4_profile(rs: &RootSystem, c: f64, x_max: f64, steps: usize) -> Vec<(f64, f64, f64)> {
    let terms: Vec<(f64, i32)> = rs.roots().iter().map(|r| (r.eval(&[1.0]), r.mult as i32)).collect();
    let k = terms.iter().map(|t| t.1).sum::<i32>() as f64 + 1.0;
    let p: f64 = terms.iter().map(|&(a, m)| (2.0 * a).powi(m)).product();
    let rhs = |x: f64| {
        k * c / p
            * terms
                .iter()
                .map(|&(a, m)| (2.0 * a * x).sinh().powi(m))
                .product::<f64>()
    };
    let dp = |y: f64| y.max(0.0).powf(1.0 / k);
    let h = x_max / steps as f64;
    let (mut x, mut y, mut rho) = (0.0, 0.0, 0.0);
    let mut out = vec![(0.0, 0.0, 0.0)];
    for _ in 0..steps {
        let (k1y, k1r) = (rhs(x), dp(y));
        let (k2y, k2r) = (rhs(x + h / 2.0), dp(y + h / 2.0 * k1y));
        let (k3y, k3r) = (rhs(x + h / 2.0), dp(y + h / 2.0 * k2y));
        let (k4y, k4r) = (rhs(x + h), dp(y + h * k3y));
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        rho += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        x += h;
        out.push((x, rho, dp(y)));
    }
    out
}

#[test]
fn rank_one_quadrature_matches_rk4() {
    for (f, m) in [
        (Family::A1, mults(&[("lambda", 1)])),
        (Family::A1, mults(&[("lambda", 3)])),
        (Family::Bc1, mults(&[("lambda", 2), ("2lambda", 1)])),
        (Family::Bc1, mults(&[("lambda", 4), ("2lambda", 3)])),
    ] {
        let rs = RootSystem::build(f, &m).unwrap();
        let c = 3.0;
        let prof = solve_rank1(&rs, c, 3.0, 301).unwrap();
        let ode = rk4_profile(&rs, c, 3.0, 30_000);
        for &(x, rho, d) in ode.iter().step_by(100).filter(|t| t.0 >= 0.1 - 1e-12) {
            let (v, g) = (prof.value(x).unwrap(), prof.derivative(x).unwrap());
            assert!(
                (v - rho).abs() <= 1e-7 * rho.abs().max(1.0),
                "{m:?} x={x}: {v} vs {rho}"
            );
            assert!((g - d).abs() <= 1e-7 * d.abs().max(1.0), "{m:?} x={x}: {g} vs {d}");
        }
    }
}

#[test]
fn rank_one_profile_solves_the_equation() {
    let rs = RootSystem::build(Family::Bc1, &mults(&[("lambda", 2), ("2lambda", 1)])).unwrap();
    for c in [1.0, 2.0] {
        let prof = solve_rank1(&rs, c, 4.0, 401).unwrap();
        for j in 1..=40 {
            let x = 0.1 * j as f64;
            let r = pointwise_residual(&rs, c, &prof, &[x]).unwrap();
            assert!(r.abs() <= 1e-8 * f2_hat(&rs, c, &[x]), "{x}: {r}");
        }
    }
}

#[test]
fn pointwise_residual_examples() {
    let a1 = RootSystem::uniform(Family::A1, 1);
    for c in [0.5, 1.0, 7.0] {
        for x in [0.0, 0.3, 1.7, 4.0] {
            let r = pointwise_residual(&a1, c, &EguchiHanson { c }, &[x]).unwrap();
            assert!(r.abs() <= 1e-8 * f2_hat(&a1, c, &[x]).max(1.0), "{c} {x}: {r}");
        }
    }

    // ∇(½|Z|²) = Z and det = 1, so the residual is F̂₁ − F̂₂.
    let rs = RootSystem::uniform(Family::A2, 1);
    for z in [[0.4, 0.1], [1.0, 0.5], [-0.3, 0.9]] {
        let r = pointwise_residual(&rs, 5.0, &HalfSquare { rank: 2 }, &z).unwrap();
        let want = f1_hat(&rs, &z) - f2_hat(&rs, 5.0, &z);
        assert!((r - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    // a1xa1 separates into two rank-one problems with constant √c.
    let sq = RootSystem::uniform(Family::A1xA1, 1);
    let c: f64 = 4.0;
    let one = solve_rank1(&RootSystem::uniform(Family::A1, 1), c.sqrt(), 3.0, 301).unwrap();
    let pot = Separable {
        first: one.clone(),
        second: one,
    };
    for z in [[0.2, 0.5], [1.3, 0.7], [2.5, 2.9]] {
        let r = pointwise_residual(&sq, c, &pot, &z).unwrap();
        assert!(r.abs() <= 1e-6 * f2_hat(&sq, c, &z), "{z:?}: {r}");
    }
}

#[test]
fn comparison_principle_on_a_small_sector() {
    let rs = RootSystem::uniform(Family::A1xA1, 1);
    let grid = SectorGrid::new(&rs, 1.5, 16, Symmetry::Sector).unwrap();
    let g = |z: &[f64]| 0.5 * (z[0] * z[0] + z[1] * z[1]) + 0.1 * z[0] * z[0] * z[1] * z[1];
    let small = |z: &[f64]| 1.0 + 0.2 * z[0] * z[0];
    let large = |z: &[f64]| 2.0 * small(z) + z[1] * z[1];
    let u_small = monotone_dirichlet_solve(&grid, small, g, 1e-10).unwrap();
    let u_large = monotone_dirichlet_solve(&grid, large, g, 1e-10).unwrap();
    for k in 0..grid.len() {
        assert!(u_large[k] <= u_small[k] + 1e-12, "{k}: {} > {}", u_large[k], u_small[k]);
    }
    for k in grid.len()..grid.total() {
        assert_eq!(u_large[k], u_small[k]);
    }
}

#[test]
fn full_disc_agrees_with_the_sector() {
    let rs = RootSystem::uniform(Family::A1xA1, 1);
    let spec = ProblemSpec::new(rs, 4.0, 2.0, 32, 1e-12, 50).unwrap();
    let sector = solve_rank2(&spec).unwrap();
    let full = solve_rank2(&spec.clone().with_symmetry(Symmetry::Full)).unwrap();
    assert!(sector.converged && full.converged);
    for z in sector.nodes() {
        let (a, b) = (sector.value_at(&z).unwrap(), full.value_at(&z).unwrap());
        assert!((a - b).abs() <= 1e-10, "{z:?}: {a} vs {b}");
        // The full solution is W-invariant on its own.
        let m = full.value_at(&[-z[0], z[1]]).unwrap();
        assert!((m - b).abs() <= 1e-10);
    }
}

#[test]
fn scaling_c_scales_the_solution() {
    let rs = RootSystem::uniform(Family::A2, 1);
    let n = rs.total_dimension() as i32;
    let spec = ProblemSpec::new(rs, 8.0, 2.0, 32, 1e-11, 50).unwrap();
    let base = solve_rank2(&spec).unwrap();
    let mut spec4 = spec.clone();
    spec4.c *= 4.0;
    let big = solve_rank2(&spec4).unwrap();
    let s = 4f64.powf(1.0 / n as f64);
    for (a, b) in base.all_values().iter().zip(big.all_values()) {
        assert!((b - s * a).abs() <= 1e-8 * a.abs().max(1.0), "{a} {b}");
    }
}

fn invariant_test_fn(rs: &RootSystem) -> impl Fn(&[f64]) -> f64 + '_ {
    move |z: &[f64]| {
        let r2 = z[0] * z[0] + z[1] * z[1];
        rs.roots().iter().map(|l| (1.3 * l.eval(z)).cosh()).sum::<f64>() + 0.1 * r2 * r2
    }
}

fn invariant_test_grad(rs: &RootSystem, z: &[f64]) -> [f64; 2] {
    let r2 = z[0] * z[0] + z[1] * z[1];
    let mut g = [0.4 * r2 * z[0], 0.4 * r2 * z[1]];
    for l in rs.roots() {
        let s = 1.3 * (1.3 * l.eval(z)).sinh();
        g[0] += s * l.coeffs[0];
        g[1] += s * l.coeffs[1];
    }
    g
}

#[test]
fn discrete_gradient_is_second_order() {
    for f in [Family::A1xA1, Family::A2, Family::B2, Family::G2] {
        let rs = RootSystem::uniform(f, 1);
        let err = |grid_n: usize| {
            let spec = ProblemSpec::new(rs.clone(), 1.0, 2.0, grid_n, 1e-6, 1).unwrap();
            let sol = Solution::from_fn(spec, invariant_test_fn(&rs)).unwrap();
            let mut e = 0.0f64;
            for k in 0..sol.grid().len() {
                let z = sol.grid().position(k);
                if z[0].hypot(z[1]) > 1.0 + 1e-9 {
                    continue;
                }
                let (_, g) = sol.derivatives(k, false).unwrap();
                let want = invariant_test_grad(&rs, &z);
                e = e.max((g[0] - want[0]).abs()).max((g[1] - want[1]).abs());
            }
            e
        };
        let order = (err(17) / err(33)).log2();
        assert!(order >= 1.9, "{f}: observed order {order}");
    }
}

#[test]
fn equation_residual_vanishes_for_the_a1xa1_solution() {
    // ρ = c^{1/4} Σ (cosh xᵢ − 1) solves a1xa1 exactly; the discrete
    // residual is the truncation error only.
    let rs = RootSystem::uniform(Family::A1xA1, 1);
    let c: f64 = 4.0;
    let exact = move |z: &[f64]| c.powf(0.25) * (z[0].cosh() + z[1].cosh() - 2.0);
    let mut prev = f64::INFINITY;
    for grid_n in [17, 33, 65] {
        let spec = ProblemSpec::new(rs.clone(), c, 2.0, grid_n, 1e-6, 1).unwrap();
        let sol = Solution::from_fn(spec, exact).unwrap();
        let scale = sol.nodes().iter().map(|z| f2_hat(&rs, c, z)).fold(0.0, f64::max);
        let r = equation_residual(&sol).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
        assert!(r < prev / 3.0, "{grid_n}: {r} after {prev}");
        prev = r;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_one_profile_is_convex_and_even(c in 0.1f64..20.0, m in 1i64..5, m2 in 1i64..4) {
        let rs = RootSystem::build(Family::Bc1, &mults(&[("lambda", m), ("2lambda", m2)])).unwrap();
        let prof = solve_rank1(&rs, c, 2.0, 101).unwrap();
        let mut last = -1.0;
        for j in 0..=40 {
            let x = 0.05 * j as f64;
            let d = prof.derivative(x).unwrap();
            prop_assert!(d >= last);
            prop_assert!(prof.second_derivative(x).unwrap() >= 0.0);
            prop_assert!((prof.value(-x).unwrap() - prof.value(x).unwrap()).abs() <= 1e-14);
            last = d;
        }
    }
}
