mod common;

use common::nodal_error;
use fraccol::collocation::{build_matrices, make_points, CollocationRule, PointFamily};
use fraccol::denselin::DenseMatrix;
use fraccol::history::caputo_history_term;
use fraccol::spatial::{EllipticCoefficients, SpaceFunction, SpatialGrid};
use fraccol::specfun::{caputo_power_coefficient, gamma};
use fraccol::stepper::{
    assemble_step, collocation_residual, evaluate, solve, solve_fode, solve_with, Initial, PowerTerm, SolveOptions,
    Source, SubdiffusionProblem, TemporalMesh, TimeFunction,
};
use fraccol::{Classification, Error};
use proptest::prelude::*;

fn manufactured(time: TimeFunction) -> Source {
    Source::Manufactured {
        space: SpaceFunction::sin_pi(),
        time,
    }
}

fn problem(rule: CollocationRule, alpha: f64, mesh: TemporalMesh, n: usize, source: Source) -> SubdiffusionProblem {
    let initial = if matches!(source, Source::Manufactured { .. }) {
        Initial::Exact
    } else {
        Initial::Zero
    };
    SubdiffusionProblem {
        alpha,
        rule,
        mesh,
        grid: SpatialGrid::new(n, 0.0, 1.0).unwrap(),
        coeff: EllipticCoefficients::laplacian(),
        source,
        initial,
        semilinear: None,
    }
}

fn max_nodal_error(p: &SubdiffusionProblem) -> f64 {
    nodal_error(p, &solve(p).unwrap().values)
}

#[test]
fn polynomial_solutions_are_reproduced() {
    for family in PointFamily::BUILTIN {
        for m in 1..=5 {
            for (intervals, r) in [(4, 1.0), (8, 2.0)] {
                let p = problem(
                    make_points(family, m).unwrap(),
                    0.5,
                    TemporalMesh::new(intervals, 1.0, r).unwrap(),
                    20,
                    manufactured(TimeFunction::power(1.0, m as f64)),
                );
                let err = max_nodal_error(&p);
                assert!(err <= 1e-8, "{family} m={m} M={intervals}: {err}");
            }
        }
    }
}

#[test]
fn residual_vanishes_at_collocation_points_only() {
    let rule = make_points(PointFamily::Chebyshev, 2).unwrap();
    let alpha = 0.6;
    // t^3 is not in the trial space of m = 2
    let p = problem(
        rule.clone(),
        alpha,
        TemporalMesh::new(4, 1.0, 1.5).unwrap(),
        9,
        manufactured(TimeFunction::power(1.0, 3.0)),
    );
    let sol = solve(&p).unwrap();
    let res = collocation_residual(&sol, &p).unwrap();
    assert!(res.max_abs <= 1e-8 * res.scale, "{res:?}");

    // Rebuild D^alpha U + L U - f at s between the two collocation points.
    let theta = rule.theta();
    let s = 0.5 * (theta[0] + theta[1]);
    let probe = CollocationRule::custom(vec![s, 1.0]).unwrap();
    let lh = p.operator().unwrap();
    let k = 3;
    let t = p.mesh.collocation_time(k, s);
    let hist = caputo_history_term(&p.mesh, &sol.blocks, &probe, alpha, k, 0).unwrap();
    let block = &sol.blocks[k - 1];
    let tau = p.mesh.tau(k);
    let u = evaluate(&sol, t).unwrap();
    let mut lu = vec![0.0; u.len()];
    lh.apply_into(&u, &mut lu);
    let f = p.source_values(t, &lh).unwrap();
    let mut worst = 0.0f64;
    for x in 0..u.len() {
        let local: f64 = (1..=2)
            .map(|j| caputo_power_coefficient(j, alpha).unwrap() * s.powf(j as f64 - alpha) * block.row(j - 1)[x])
            .sum();
        let r = tau.powf(-alpha) * local + hist[x] + lu[x] - f[x];
        worst = worst.max(r.abs());
    }
    assert!(worst > 1e3 * res.max_abs.max(1e-14), "midpoint residual {worst}");
}

#[test]
fn first_order_rule_is_the_l1_scheme() {
    let time = TimeFunction::Powers {
        terms: vec![
            PowerTerm { coefficient: 1.0, power: 0.4 },
            PowerTerm { coefficient: -0.5, power: 2.0 },
        ],
    };
    let p = problem(
        make_points(PointFamily::Chebyshev, 1).unwrap(),
        0.4,
        TemporalMesh::new(32, 1.0, 2.0).unwrap(),
        15,
        manufactured(time),
    );
    let sol = solve(&p).unwrap();
    let reference = common::l1_reference(&p);
    let diff = sol
        .values
        .iter()
        .flatten()
        .zip(reference.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-10, "max difference {diff}");
}

#[test]
fn first_step_matches_kronecker_assembly() {
    let rule = make_points(PointFamily::Lobatto, 2).unwrap();
    let mut p = problem(rule.clone(), 0.3, TemporalMesh::new(3, 2.0, 2.0).unwrap(), 2, Source::Constant { value: 0.7 });
    p.coeff.c = SpaceFunction::constant(0.5);
    p.initial = Initial::Profile {
        space: SpaceFunction::Linear { c0: 1.0, c1: -0.5 },
    };
    let u0 = p.initial_values();
    let (b, rhs) = assemble_step(&p, 1, &u0, &[vec![0.0; 2], vec![0.0; 2]]).unwrap();
    let mats = build_matrices(&rule, 0.3).unwrap();
    let lh = p.operator().unwrap().to_dense();
    let ta = p.mesh.tau(1).powf(0.3);
    // kron(A, B)[(i n + x, j n + y)] = A_ij B_xy
    let kron = |a: &DenseMatrix, bm: &DenseMatrix| {
        let n = bm.dim();
        DenseMatrix::from_fn(a.dim() * n, |r, c| a[(r / n, c / n)] * bm[(r % n, c % n)])
    };
    let oracle = kron(&mats.m_alpha, &DenseMatrix::identity(2)).add(&kron(&mats.w, &lh).scale_rows(&[ta; 4]));
    for i in 0..4 {
        for j in 0..4 {
            assert!((b[(i, j)] - oracle[(i, j)]).abs() <= 1e-13 * oracle.max_abs(), "({i},{j})");
        }
    }
    let lu0 = lh.mul_vec(&u0);
    for l in 0..2 {
        for x in 0..2 {
            let want = ta * (0.7 - lu0[x]);
            assert!((rhs[l * 2 + x] - want).abs() <= 1e-13 * want.abs().max(1.0));
        }
    }
    assert!(assemble_step(&p, 0, &u0, &[vec![0.0; 2], vec![0.0; 2]]).is_err());
    assert!(assemble_step(&p, 1, &u0, &[vec![0.0; 2]]).is_err());
}

#[test]
fn interval_ends_are_continuous() {
    let p = problem(
        make_points(PointFamily::Equidistant, 3).unwrap(),
        0.7,
        TemporalMesh::new(5, 1.0, 2.0).unwrap(),
        6,
        manufactured(TimeFunction::power(1.0, 0.7)),
    );
    let sol = solve(&p).unwrap();
    for k in 1..=5 {
        let end: Vec<f64> = sol.values[k - 1]
            .iter()
            .zip(sol.blocks[k - 1].eval_increment(1.0))
            .map(|(u, d)| u + d)
            .collect();
        assert_eq!(end, sol.values[k]);
        assert_eq!(evaluate(&sol, p.mesh.node(k)).unwrap(), sol.values[k]);
    }
}

#[test]
fn gate_and_caps() {
    let p = problem(
        make_points(PointFamily::Chebyshev, 1).unwrap(),
        0.5,
        TemporalMesh::uniform(2, 1.0).unwrap(),
        3,
        Source::Zero,
    );
    // count every real eigenvalue below 1e3 as negative
    let strict = SolveOptions {
        classification: Classification {
            imag_rel: 1e-8,
            neg_real: -1e3,
        },
        ..SolveOptions::default()
    };
    assert!(matches!(solve_with(&p, &strict), Err(Error::RealNegativeEigenvalue { .. })));
    let big = problem(
        make_points(PointFamily::Chebyshev, 5).unwrap(),
        0.5,
        TemporalMesh::uniform(1, 1.0).unwrap(),
        801,
        Source::Zero,
    );
    assert!(matches!(solve(&big), Err(Error::SizeCap { .. })));
    let mut bad = p.clone();
    bad.alpha = 0.0;
    assert!(solve(&bad).is_err());
}

#[test]
fn fractional_ode_errors_decrease_under_refinement() {
    let alpha = 0.5;
    // D^alpha u + u = f with u = t^(1 + alpha)
    let f = TimeFunction::Powers {
        terms: vec![
            PowerTerm { coefficient: gamma(2.0 + alpha).unwrap(), power: 1.0 },
            PowerTerm { coefficient: 1.0, power: 1.0 + alpha },
        ],
    };
    let c = TimeFunction::Constant { value: 1.0 };
    for m in 1..=3 {
        let rule = make_points(PointFamily::Chebyshev, m).unwrap();
        let errors: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&intervals| {
                let mesh = TemporalMesh::new(intervals, 1.0, 2.0).unwrap();
                let sol = solve_fode(alpha, &rule, &mesh, &c, &f, 0.0).unwrap();
                mesh.nodes()
                    .iter()
                    .zip(&sol.values)
                    .map(|(t, u)| (u[0] - t.powf(1.0 + alpha)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "m={m}: {errors:?}");
    }
}

#[test]
fn fractional_ode_one_step_constant_source() {
    let alpha = 0.5;
    let rule = make_points(PointFamily::Chebyshev, 3).unwrap();
    let mesh = TemporalMesh::uniform(1, 1.0).unwrap();
    let sol = solve_fode(alpha, &rule, &mesh, &TimeFunction::Zero, &TimeFunction::Constant { value: 1.0 }, 0.0).unwrap();
    let exact = 1.0 / gamma(1.0 + alpha).unwrap();
    assert!((sol.values[1][0] - exact).abs() <= 0.05, "{} vs {exact}", sol.values[1][0]);
    let zero = solve_fode(alpha, &rule, &mesh, &TimeFunction::Zero, &TimeFunction::Zero, 0.0).unwrap();
    assert_eq!(zero.values[1], vec![0.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exactness_on_random_polynomials(
        family in prop::sample::select(PointFamily::BUILTIN.to_vec()),
        m in 1usize..=5,
        intervals in 1usize..=8,
        r in 1.0f64..3.0,
        alpha in 0.05f64..=1.0,
        n in 1usize..=20,
        coeffs in prop::collection::vec(-2.0f64..2.0, 6),
    ) {
        let terms = (0..=m).map(|p| PowerTerm { coefficient: coeffs[p], power: p as f64 }).collect();
        let p = problem(
            make_points(family, m).unwrap(),
            alpha,
            TemporalMesh::new(intervals, 1.0, r).unwrap(),
            n,
            manufactured(TimeFunction::Powers { terms }),
        );
        let err = max_nodal_error(&p);
        prop_assert!(err <= 1e-8, "error {}", err);
        let sol = solve(&p).unwrap();
        let res = collocation_residual(&sol, &p).unwrap();
        prop_assert!(res.max_abs <= 1e-8 * res.scale);
    }
}
