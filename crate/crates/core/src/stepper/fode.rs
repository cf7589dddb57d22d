//! Scalar equation `D^alpha u + c(t) u = f(t)`.

use crate::collocation::{build_matrices, CollocationRule};
use crate::denselin::{DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::history::accumulate_history;
use crate::specfun::check_alpha;
use crate::wellposed::stepsize_from_matrices;

use super::{CoefficientBlock, PiecewiseSolution, StepDiagnostics, TemporalMesh, TimeFunction};

/// Steps `(D1 W D2 + tau^alpha D_c W) V = tau^alpha [f - c U_{k-1} - H]`
/// with `D_c = diag(c(t_k^l))`. Each step records the step-size advisory.
pub fn solve_fode(
    alpha: f64,
    rule: &CollocationRule,
    mesh: &TemporalMesh,
    c_hat: &TimeFunction,
    f: &TimeFunction,
    u0: f64,
) -> Result<PiecewiseSolution> {
    check_alpha(alpha)?;
    c_hat.check("c")?;
    f.check("f")?;
    if !u0.is_finite() {
        return Err(Error::domain("solve_fode", "initial value must be finite"));
    }
    let mats = build_matrices(rule, alpha)?;
    let m = rule.order();
    let theta = rule.theta();
    let mut sol = PiecewiseSolution::start(alpha, mesh.clone(), vec![u0]);
    for k in 1..=mesh.intervals() {
        let tau = mesh.tau(k);
        let ta = tau.powf(alpha);
        let times: Vec<f64> = theta.iter().map(|&th| mesh.collocation_time(k, th)).collect();
        let c: Vec<f64> = times.iter().map(|&t| c_hat.eval(t)).collect();
        let a = mats.m_alpha.add(&mats.w.scale_rows(&c).scale_rows(&vec![ta; m]));
        let lu = Lu::new(&a).map_err(|_| Error::SingularStep { interval: k })?;
        if lu.pivot_ratio() < 1e-14 {
            return Err(Error::SingularStep { interval: k });
        }
        let u_prev = sol.values[k - 1][0];
        let mut rhs = Vec::with_capacity(m);
        for (l, &t) in times.iter().enumerate() {
            let mut h = [0.0];
            accumulate_history(mesh, &sol.blocks, m, alpha, t, &mut h)?;
            rhs.push(ta * (f.eval(t) - c[l] * u_prev - h[0]));
        }
        let v = lu.solve(&rhs)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularStep { interval: k });
        }
        let res = residual(&a, &v, &rhs);
        let stepsize = stepsize_from_matrices(&mats, tau, &c)?;
        sol.push(
            CoefficientBlock::from_stacked(m, 1, v)?,
            StepDiagnostics {
                k,
                tau,
                pivot_ratio: lu.pivot_ratio(),
                solve_residual: res,
                iteration: None,
                stepsize: Some(stepsize),
            },
        );
    }
    Ok(sol)
}

fn residual(a: &DenseMatrix, v: &[f64], rhs: &[f64]) -> f64 {
    a.mul_vec(v).iter().zip(rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
