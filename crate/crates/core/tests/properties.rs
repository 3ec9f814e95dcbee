use std::f64::consts::PI;
use std::sync::Arc;

use fredholm_core::divdiff::{divided_difference_values, divided_difference};
use fredholm_core::linalg::LinearSystem;
use fredholm_core::projection::{project, residual};
use fredholm_core::solvers::{iterate, solve_collocation, solve_modified};
use fredholm_core::{
    sup_norm, CollocationGrid, EvaluableFunction, FredholmProblem, GaussRule, GreensKernel, IntegralOperator,
    PiecewisePolynomial, UniformMesh,
};
use proptest::prelude::*;

fn sine() -> EvaluableFunction {
    EvaluableFunction::new("sin", vec![], |s| (PI * s).sin())
}

fn poly(coeffs: Vec<f64>) -> impl Fn(f64) -> f64 + Clone + Send + Sync + 'static {
    move |t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn distinct_points(raw: Vec<f64>) -> Option<Vec<f64>> {
    let mut sorted = raw.clone();
    sorted.sort_by(f64::total_cmp);
    sorted.windows(2).all(|w| w[1] - w[0] > 1e-2).then_some(raw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divided_difference_is_symmetric(raw in prop::collection::vec(0.0f64..1.0, 2..6), seed in 0usize..720) {
        let pts = match distinct_points(raw) { Some(p) => p, None => return Ok(()) };
        let f = |t: f64| (2.0 * t).exp() + t.sin();
        let base = divided_difference_values(&pts, &pts.iter().map(|&t| f(t)).collect::<Vec<_>>()).unwrap();
        let mut perm = pts.clone();
        let m = perm.len();
        for i in (1..m).rev() {
            perm.swap(i, seed % (i + 1));
        }
        let got = divided_difference_values(&perm, &perm.iter().map(|&t| f(t)).collect::<Vec<_>>()).unwrap();
        prop_assert!((got - base).abs() <= 1e-8 * (1.0 + base.abs()), "{got} vs {base}");
    }

    #[test]
    fn divided_difference_is_linear(raw in prop::collection::vec(0.0f64..1.0, 2..5), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let pts = match distinct_points(raw) { Some(p) => p, None => return Ok(()) };
        let f: Vec<f64> = pts.iter().map(|t| t.cos()).collect();
        let g: Vec<f64> = pts.iter().map(|t| t * t * t).collect();
        let comb: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let lhs = divided_difference_values(&pts, &comb).unwrap();
        let rhs = a * divided_difference_values(&pts, &f).unwrap() + b * divided_difference_values(&pts, &g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()));
    }

    #[test]
    fn divided_difference_of_polynomial_is_leading_coefficient(
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..5),
        raw in prop::collection::vec(0.0f64..1.0, 5),
    ) {
        let pts = match distinct_points(raw) { Some(p) => p, None => return Ok(()) };
        let deg = coeffs.len() - 1;
        let p = poly(coeffs.clone());
        // deg + 1 points give the leading coefficient, more give zero
        let head = &pts[..deg + 1];
        let lead = divided_difference_values(head, &head.iter().map(|&t| p(t)).collect::<Vec<_>>()).unwrap();
        prop_assert!((lead - coeffs[deg]).abs() <= 1e-7);
        if deg + 2 <= pts.len() {
            let more = &pts[..deg + 2];
            let z = divided_difference_values(more, &more.iter().map(|&t| p(t)).collect::<Vec<_>>()).unwrap();
            prop_assert!(z.abs() <= 1e-6);
        }
    }

    #[test]
    fn hermite_data_matches_close_points(s in 0.1f64..0.9) {
        let f = |t: f64| (3.0 * t).sin();
        let df = |t: f64| 3.0 * (3.0 * t).cos();
        let exact = divided_difference(&[0.0, s, s], |p, k| match k {
            0 => Some(f(p)),
            1 => Some(df(p)),
            _ => None,
        }).unwrap();
        let eps = 1e-6;
        let near = divided_difference_values(&[0.0, s, s + eps], &[f(0.0), f(s), f(s + eps)]).unwrap();
        prop_assert!((exact - near).abs() <= 1e-5);
    }

    #[test]
    fn projection_is_idempotent(n in 1usize..12, r in 0usize..4, seed in any::<u64>()) {
        let grid = Arc::new(CollocationGrid::uniform(n, r).unwrap());
        let values: Vec<f64> = (0..grid.dim()).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
        let pp = PiecewisePolynomial::new(grid.clone(), values).unwrap();
        let again = project(&grid, &pp.to_function());
        for (a, b) in pp.values().iter().zip(again.values()) {
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn interpolation_reproduces_low_degree(n in 1usize..8, r in 0usize..4, coeffs in prop::collection::vec(-1.0f64..1.0, 7)) {
        let grid = Arc::new(CollocationGrid::uniform(n, r).unwrap());
        let c = coeffs[..=2 * r].to_vec();
        let p = poly(c);
        let f = EvaluableFunction::new("p", vec![], p.clone());
        let err = sup_norm(&residual(&grid, &f), &grid);
        prop_assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn gauss_rule_exact_to_degree_2q_minus_1(q in 1usize..30, a in -1.0f64..0.0, b in 0.1f64..1.0) {
        let rule = GaussRule::new(q).unwrap();
        let k = 2 * q - 1;
        let got = rule.integrate(a, b, |t| t.powi(k as i32)).unwrap();
        let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
        prop_assert!((got - exact).abs() <= 1e-13, "{got} vs {exact}");
    }

    #[test]
    fn operator_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, s in 0.0f64..1.0) {
        let op = IntegralOperator::new(Arc::new(GreensKernel::abs_exp()));
        let x = sine();
        let y = EvaluableFunction::new("kinked", vec![0.4], |t| (t - 0.4).abs());
        let comb = EvaluableFunction::linear_combination(&[(a, &x), (b, &y)]);
        let lhs = op.apply(&comb, s).unwrap();
        let rhs = a * op.apply(&x, s).unwrap() + b * op.apply(&y, s).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-14);
    }

    #[test]
    fn lu_solves_dominant_systems(n in 1usize..20, seed in any::<u64>()) {
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 2001) as f64 / 1000.0 - 1.0
        };
        let mut a: Vec<f64> = (0..n * n).map(|_| next()).collect();
        for i in 0..n {
            a[i * n + i] += n as f64 + 1.0;
        }
        let b: Vec<f64> = (0..n).map(|_| next()).collect();
        let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let sol = LinearSystem::new(a, b).unwrap().solve().unwrap();
        prop_assert!(sol.residual <= 1e-12 * (1.0 + bmax));
        prop_assert!(sol.condition >= 1.0 - 1e-12);
    }

    #[test]
    fn sloan_and_modified_nodal_identities(n in 2usize..7, r in 0usize..3, which in 0usize..2) {
        let kernel = Arc::new(if which == 0 { GreensKernel::bvp_green() } else { GreensKernel::abs_exp() });
        let op = IntegralOperator::new(kernel.clone());
        let f = EvaluableFunction::new("exp", vec![], f64::exp);
        let problem = FredholmProblem::new(kernel, f.clone());
        let grid = Arc::new(CollocationGrid::uniform(n, r).unwrap());
        let p = grid.local_dim();
        let col = solve_collocation(&problem, &grid).unwrap();
        let it = iterate(&problem, &col).unwrap();
        for (i, c) in col.nodal.values().iter().enumerate() {
            prop_assert!((grid.sample(&it.solution, i / p, i % p) - c).abs() <= 1e-9);
        }
        let md = solve_modified(&problem, &grid).unwrap();
        let defect = md.solution.sub(&op.image(&md.solution)).sub(&f);
        for i in 0..grid.dim() {
            prop_assert!(grid.sample(&defect, i / p, i % p).abs() <= 1e-8);
        }
    }
}

#[test]
fn interpolation_error_order() {
    let x = sine();
    let ns = [4usize, 8, 16, 32];
    for r in 0..=2 {
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| {
                let grid = Arc::new(CollocationGrid::uniform(n, r).unwrap());
                let e = sup_norm(&residual(&grid, &x), &grid);
                (-(n as f64).ln(), e.ln())
            })
            .collect();
        let m = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let target = 2.0 * r as f64 + 1.0;
        assert!((slope - target).abs() <= 0.25, "r = {r}: slope {slope}");
        // errors shrink monotonically
        assert!(pts.windows(2).all(|w| w[1].1 < w[0].1));
    }
}

#[test]
fn one_third_offset_interpolation_is_attained_at_left_limits() {
    let x = EvaluableFunction::new("4t", vec![], |t| 4.0 * t);
    for n in [2, 4, 8, 16] {
        let grid = Arc::new(CollocationGrid::new(UniformMesh::new(n).unwrap(), 0, Some(vec![1.0 / 3.0])).unwrap());
        let r = residual(&grid, &x);
        let expected = 8.0 / (3.0 * n as f64);
        assert!((sup_norm(&r, &grid) - expected).abs() <= 1e-12);
        // brute-force dense sampling stays below the closed form and approaches it
        let dense = (0..20_000).map(|i| r.eval(i as f64 / 20_000.0).abs()).fold(0.0, f64::max);
        assert!(dense <= expected + 1e-12 && dense >= expected - 1e-3, "{dense}");
    }
}
