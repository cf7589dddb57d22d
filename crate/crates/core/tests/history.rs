use fraccol::collocation::{make_points, PointFamily};
use fraccol::history::{caputo_history_term, history_weights, history_weights_oracle};
use fraccol::specfun::gamma;
use fraccol::stepper::{CoefficientBlock, TemporalMesh};
use proptest::prelude::*;

const AS: [f64; 8] = [1.0, 1.001, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4];

#[test]
fn weights_match_quadrature_oracle() {
    for alpha in [0.1, 0.5, 0.9] {
        for a in AS {
            let w = history_weights(20, a, alpha).unwrap().values;
            for (i, &v) in w.iter().enumerate() {
                let o = history_weights_oracle(i, a, alpha, 1e-12).unwrap();
                assert!((v - o).abs() <= 1e-9 * o.abs(), "i={i} A={a} alpha={alpha}: {v} vs {o}");
            }
        }
    }
}

#[test]
fn linear_piece_memory_has_closed_form() {
    // u = t on [0, tau]; its memory at t is (t^(1-a) - (t - tau)^(1-a)) / Gamma(2 - a)
    let mesh = TemporalMesh::uniform(4, 1.0).unwrap();
    let rule = make_points(PointFamily::Chebyshev, 1).unwrap();
    let tau = mesh.tau(1);
    let block = CoefficientBlock::from_stacked(1, 2, vec![tau, 2.0 * tau]).unwrap();
    for alpha in [0.2, 0.5, 0.95] {
        for k in 2..=4 {
            let t = mesh.node(k);
            let h = caputo_history_term(&mesh, std::slice::from_ref(&block), &rule, alpha, k, 0);
            // only interval 1 is supplied, so ask for the term from it alone
            let h = if k == 2 {
                h.unwrap()
            } else {
                assert!(h.is_err());
                continue;
            };
            let want = (t.powf(1.0 - alpha) - (t - tau).powf(1.0 - alpha)) / gamma(2.0 - alpha).unwrap();
            assert!((h[0] - want).abs() <= 1e-13, "alpha={alpha}: {} vs {want}", h[0]);
            assert!((h[1] - 2.0 * want).abs() <= 2e-13);
        }
    }
}

#[test]
fn memory_vanishes_in_the_classical_limit() {
    let mesh = TemporalMesh::uniform(2, 1.0).unwrap();
    let rule = make_points(PointFamily::Chebyshev, 1).unwrap();
    let block = CoefficientBlock::from_stacked(1, 1, vec![0.5]).unwrap();
    assert_eq!(caputo_history_term(&mesh, &[block], &rule, 1.0, 2, 0).unwrap(), vec![0.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn weights_are_ordered_and_bounded(a in 1.0f64..1e3, alpha in 0.01f64..0.99) {
        let w = history_weights(12, a, alpha).unwrap().values;
        for (i, &v) in w.iter().enumerate() {
            let lower = a.powf(-alpha) / (i + 1) as f64;
            prop_assert!(v >= lower * (1.0 - 1e-12), "i={} {} < {}", i, v, lower);
            if a > 1.0 {
                let upper = (a - 1.0).powf(-alpha) / (i + 1) as f64;
                prop_assert!(v <= upper * (1.0 + 1e-12));
            }
        }
        prop_assert!(w.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn weights_decrease_in_a(a in 1.0f64..50.0, d in 0.01f64..5.0, alpha in 0.05f64..0.95) {
        let x = history_weights(6, a, alpha).unwrap().values;
        let y = history_weights(6, a + d, alpha).unwrap().values;
        prop_assert!(x.iter().zip(&y).all(|(p, q)| q < p));
    }
}
