use fraccol::collocation::{build_matrices, make_points, vandermonde_det, CollocationRule, PointFamily};
use fraccol::wellposed::{
    charpoly_leverrier, charpoly_subsets, estimate_resolvent_bound, lax_milgram_check,
    lax_milgram_d_m2, spectrum,
};
use proptest::prelude::*;

const ALPHAS: [f64; 3] = [0.1, 0.5, 0.9];

#[test]
fn charpoly_paths_agree_and_are_positive() {
    for family in PointFamily::BUILTIN {
        for m in 1..=12 {
            let rule = make_points(family, m).unwrap();
            let det_w = vandermonde_det(&rule);
            for alpha in ALPHAS {
                let cp = charpoly_subsets(&rule, alpha).unwrap();
                assert!(cp.all_positive, "{family} m={m} alpha={alpha}: {:?}", cp.coefficients);
                assert!(
                    cp.cross_check_residual <= 1e-8,
                    "{family} m={m} alpha={alpha}: residual {}",
                    cp.cross_check_residual
                );
                let am = cp.coefficients[m];
                assert!((am - det_w).abs() <= 1e-10 * det_w, "{family} m={m}: {am} vs {det_w}");
                // det M_alpha = det D1 det W det D2
                let mats = build_matrices(&rule, alpha).unwrap();
                let det_ma = mats.d1.iter().chain(&mats.d2).product::<f64>() * det_w;
                let a0 = cp.coefficients[0];
                assert!((a0 - det_ma).abs() <= 1e-10 * det_ma, "{family} m={m}: {a0} vs {det_ma}");
            }
        }
    }
}

#[test]
fn leverrier_matches_vieta_from_spectrum() {
    let rule = CollocationRule::custom(vec![0.12, 0.3, 0.41, 0.66, 0.8, 1.0]).unwrap();
    for alpha in ALPHAS {
        let mats = build_matrices(&rule, alpha).unwrap();
        let lv = charpoly_leverrier(&mats).unwrap();
        let ev = spectrum(&rule, alpha).unwrap().eigenvalues;
        // prod (lambda_i - lambda) = sum_j (-lambda)^j e_{m-j}; scale by det W.
        let m = ev.len();
        let mut e = vec![num_complex::Complex64::new(0.0, 0.0); m + 1];
        e[0] = 1.0.into();
        for z in &ev {
            for k in (1..=m).rev() {
                e[k] = e[k] + e[k - 1] * z;
            }
        }
        let det_w = vandermonde_det(&rule);
        for j in 0..=m {
            let want = e[m - j].re * det_w;
            assert!((lv[j] - want).abs() <= 1e-7 * want.abs(), "j={j}: {} vs {want}", lv[j]);
        }
    }
}

#[test]
fn lax_milgram_boundary() {
    for alpha in [0.2, 0.5, 0.8] {
        let star = 1.0 - alpha / 2.0;
        let d = lax_milgram_d_m2(star, alpha).unwrap().unwrap();
        let rule = CollocationRule::custom(vec![star, 1.0]).unwrap();
        let rep = lax_milgram_check(&rule, alpha, &d).unwrap();
        assert!(rep.holds, "alpha={alpha}: {rep:?}");
        let t = star + 0.05;
        let rule = CollocationRule::custom(vec![t, 1.0]).unwrap();
        let rep = lax_milgram_check(&rule, alpha, &[1.0, t.powi(3)]).unwrap();
        assert!(!rep.holds, "alpha={alpha}: {rep:?}");
        assert!(lax_milgram_d_m2(t, alpha).unwrap().is_none());
    }
}

#[test]
fn resolvent_bound_dominates_inverse() {
    for family in PointFamily::BUILTIN {
        for m in [2, 5, 9] {
            let mats = build_matrices(&make_points(family, m).unwrap(), 0.6).unwrap();
            let est = estimate_resolvent_bound(&mats, None, None).unwrap();
            let inv = fraccol::denselin::Lu::new(&mats.m).unwrap().inverse().unwrap().inf_norm();
            assert!(est.c_m >= inv);
            assert!(est.tail_verified, "{family} m={m}: {}", est.tail_value);
        }
    }
}

fn sorted_rule() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, 1..6).prop_filter_map("distinct", |mut v| {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 0.02);
        v.push(1.0);
        Some(v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lax_milgram_scale_invariant(theta in sorted_rule(), alpha in 0.05f64..1.0, s in 1e-3f64..1e3,
                                   w in prop::collection::vec(0.01f64..10.0, 6)) {
        let rule = CollocationRule::custom(theta).unwrap();
        let d = &w[..rule.order()];
        let scaled: Vec<f64> = d.iter().map(|x| x * s).collect();
        let a = lax_milgram_check(&rule, alpha, d).unwrap();
        let b = lax_milgram_check(&rule, alpha, &scaled).unwrap();
        // Far from the boundary the verdict cannot depend on the scale.
        if a.min_eigenvalue.abs() > 1e3 * a.tolerance {
            prop_assert_eq!(a.holds, b.holds);
        }
    }

    #[test]
    fn no_real_negative_eigenvalue_for_random_rules(theta in sorted_rule(), alpha in 0.05f64..=1.0) {
        let rule = CollocationRule::custom(theta).unwrap();
        let s = spectrum(&rule, alpha).unwrap();
        prop_assert!(!s.has_real_negative, "{:?}", s.eigenvalues);
        let cp = charpoly_subsets(&rule, alpha).unwrap();
        prop_assert!(cp.all_positive);
        prop_assert!(cp.cross_check_residual <= 1e-8);
    }
}
