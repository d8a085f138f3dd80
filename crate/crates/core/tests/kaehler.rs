use cyma::kaehler::{
    complex_hessian, cy_constancy_at, d_operator, det_identity_report, induced_metric, lemma31_diagonal, lemma31_ratio,
    shape_spectrum, CoshSum, EguchiHanson, HalfSquare, Potential, Separable,
};
use cyma::ma::{solve_rank1, solve_rank2, Init, ProblemSpec, Surrogate};
use cyma::{ChamberPoint, Family, RootSystem};
use proptest::prelude::*;

const RANK_TWO: [Family; 4] = [Family::A1xA1, Family::A2, Family::B2, Family::G2];

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(RANK_TWO.to_vec())
}

/// Rejects points within `gap` of a wall.
fn off_walls(rs: &RootSystem, z: &[f64], gap: f64) -> bool {
    rs.roots().iter().all(|r| r.eval(z).abs() > gap)
}

fn cosh_sum(rs: &RootSystem, mu: f64) -> CoshSum {
    CoshSum {
        rs: rs.clone(),
        surrogate: Surrogate { kappa: 0.7, mu },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn d_operator_is_weyl_invariant(f in family(), x in -2.0f64..2.0, y in -2.0f64..2.0, mu in 0.5f64..2.0) {
        let rs = RootSystem::uniform(f, 1);
        let z = [x, y];
        prop_assume!(off_walls(&rs, &z, 0.05));
        let pot = cosh_sum(&rs, mu);
        let base = d_operator(&rs, &pot, &z).unwrap();
        for w in rs.weyl_group() {
            let wz = w.apply(&z);
            let v = d_operator(&rs, &pot, &wz).unwrap();
            prop_assert!((v - base).abs() <= 1e-10 * base.abs().max(1.0), "{f}: {v} vs {base}");
        }
        // Positive slopes and an even number of root directions give 𝒟 > 0.
        if rs.total_multiplicity().is_multiple_of(2) {
            let (p, _) = rs.reflect_into_chamber(&ChamberPoint::new(z.to_vec()));
            prop_assert!(d_operator(&rs, &pot, &p.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn shape_product_is_the_squared_root_value(
        f in family(),
        z in (-3.0f64..3.0, -3.0f64..3.0),
        v in (-3.0f64..3.0, -3.0f64..3.0),
    ) {
        let rs = RootSystem::uniform(f, 1);
        let (z, v) = ([z.0, z.1], [v.0, v.1]);
        prop_assume!(off_walls(&rs, &z, 1e-3));
        let s = shape_spectrum(&rs, &z, &v).unwrap();
        for (r, (pd, p)) in rs.roots().iter().zip(&s.pairs) {
            let lv = r.eval(&v);
            prop_assert!((pd * p - lv * lv).abs() <= 1e-12 * (lv * lv).max(1.0));
        }
    }

    #[test]
    fn induced_metric_is_twice_the_complex_hessian(f in family(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let rs = RootSystem::uniform(f, 2);
        let z = [x, y];
        prop_assume!(off_walls(&rs, &z, 1e-3));
        let pot = cosh_sum(&rs, 1.2);
        let (h, g) = (complex_hessian(&rs, &pot, &z).unwrap(), induced_metric(&rs, &pot, &z).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                prop_assert_eq!(g.a_block[i][j], 2.0 * h.a_block[i][j]);
            }
        }
        for (a, b) in h.root_entries.iter().zip(&g.root_entries) {
            prop_assert_eq!(b.value, 2.0 * a.value);
            prop_assert_eq!(a.mult, b.mult);
        }
    }

    #[test]
    fn lemma31_ratio_is_one_half(f in family(), x in -2.0f64..2.0, y in -2.0f64..2.0, mu in 0.5f64..2.0) {
        let rs = RootSystem::uniform(f, 1);
        let z = [x, y];
        prop_assume!(off_walls(&rs, &z, 1e-2));
        let pot = cosh_sum(&rs, mu);
        for k in 0..rs.roots().len() {
            prop_assert!((lemma31_ratio(&rs, &pot, &z, k).unwrap() - 0.5).abs() <= 1e-12);
        }
    }
}

/// The zero potential on the line.
struct Level;

impl Potential for Level {
    fn rank(&self) -> usize {
        1
    }
    fn value(&self, _: &[f64]) -> cyma::Result<f64> {
        Ok(0.0)
    }
    fn gradient(&self, _: &[f64]) -> cyma::Result<Vec<f64>> {
        Ok(vec![0.0])
    }
    fn hessian(&self, _: &[f64]) -> cyma::Result<Vec<Vec<f64>>> {
        Ok(vec![vec![0.0]])
    }
}

#[test]
fn eguchi_hanson_blocks() {
    let rs = RootSystem::uniform(Family::A1, 1);
    let pot = EguchiHanson { c: 1.0 };
    for x in [0.3, 1.0, 2.5] {
        let h = complex_hessian(&rs, &pot, &[x]).unwrap();
        assert!((h.a_block[0][0] - x.cosh() / 4.0).abs() < 1e-14);
        assert!((h.root_entries[0].value + 1.0 / (2.0 * x.cosh())).abs() < 1e-14);
        let d = det_identity_report(&rs, &pot, &[x]).unwrap();
        assert!((d.lhs + 0.125).abs() < 1e-14);
        assert!((d.rhs + 1.0 / 16.0).abs() < 1e-14);
        assert!((d.ratio - 2.0).abs() < 1e-13);
        assert!((d_operator(&rs, &pot, &[x]).unwrap() + 1.0 / x.cosh()).abs() < 1e-14);
        assert!((lemma31_diagonal(&rs, &pot, &[x], 0).unwrap() + 1.0 / (4.0 * x.cosh())).abs() < 1e-14);
        let s = shape_spectrum(&rs, &[x], &[x]).unwrap();
        assert!((s.pairs[0].0 + x / x.tanh()).abs() < 1e-14);
        assert!((s.pairs[0].1 + x * x.tanh()).abs() < 1e-14);
    }
    // A zero slope kills both diagonal formulas.
    let sq = RootSystem::uniform(Family::A1xA1, 1);
    let flat = Separable {
        first: Level,
        second: HalfSquare { rank: 1 },
    };
    // cos(π/2) leaves a rounding-level slope.
    assert!(lemma31_diagonal(&sq, &flat, &[0.4, 0.7], 1).unwrap().abs() < 1e-15);
    assert!(
        complex_hessian(&sq, &flat, &[0.4, 0.7]).unwrap().root_entries[1]
            .value
            .abs()
            < 1e-15
    );
}

#[test]
fn cy_constancy_separates_solutions_from_non_solutions() {
    let rs = RootSystem::uniform(Family::A1, 1);
    let pts: Vec<Vec<f64>> = (1..40).map(|j| vec![0.1 * j as f64]).collect();
    let eh = cy_constancy_at(&rs, &EguchiHanson { c: 3.0 }, &pts).unwrap();
    assert!(eh.max_dev <= 1e-8);
    assert!((eh.mean_det - 3.0 / 8.0).abs() < 1e-12);
    let hs = cy_constancy_at(&rs, &HalfSquare { rank: 1 }, &pts).unwrap();
    assert!(hs.max_dev > 0.5);
}

#[test]
fn det_ratio_is_constant_on_analytic_fixtures() {
    for f in RANK_TWO {
        let rs = RootSystem::uniform(f, 1);
        let fixtures: Vec<Box<dyn Potential>> = vec![Box::new(cosh_sum(&rs, 1.0)), Box::new(cosh_sum(&rs, 0.6))];
        let want = 2f64.powi(rs.total_multiplicity() as i32);
        for pot in &fixtures {
            let th = rs.theta().unwrap();
            for k in 0..100 {
                let t = th * (0.05 + 0.9 * ((k * 37) % 100) as f64 / 100.0);
                let r = 0.2 + 2.5 * k as f64 / 100.0;
                let d = det_identity_report(&rs, pot.as_ref(), &[r * t.cos(), r * t.sin()]).unwrap();
                assert!((d.ratio - want).abs() <= 1e-10 * want, "{f}: {}", d.ratio);
            }
        }
    }
}

/// Max relative spread of `|det|` of the complex Hessian of the rank-one
/// profile on `[0.2, 2]`.
fn rank_one_cy_dev(c: f64, x_max: f64, n_nodes: usize) -> f64 {
    let rs = RootSystem::uniform(Family::A1, 1);
    let p = solve_rank1(&rs, c, x_max, n_nodes).unwrap();
    let pts: Vec<Vec<f64>> = (1..=10).map(|j| vec![0.2 * j as f64]).collect();
    cy_constancy_at(&rs, &p, &pts).unwrap().max_dev
}

#[test]
fn cy_deviation_falls_with_solver_tolerance() {
    // Rank one is exact at any node count; the check is that it stays so.
    assert!(rank_one_cy_dev(2.0, 3.0, 31) <= 1e-8);

    let rs = RootSystem::uniform(Family::A1xA1, 1);
    let mut last = f64::INFINITY;
    for tol in [1e-2, 1e-3, 1e-4] {
        let spec = ProblemSpec::new(rs.clone(), 4.0, 2.0, 48, tol, 50)
            .unwrap()
            .with_init(Init::CoshSeed);
        let sol = solve_rank2(&spec).unwrap();
        assert!(sol.converged);
        let dev = cyma::kaehler::cy_constancy(&rs, &sol).unwrap().max_dev;
        assert!(dev <= last, "tol {tol}: {dev} after {last}");
        last = dev;
    }
}
