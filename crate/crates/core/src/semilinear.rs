//! Semilinear problems `D^alpha u + L u = f(x, t, u)` by fixed-point
//! iteration on each interval.
//!
//! The reaction term `c u` is moved into the right-hand side, so the step
//! matrix uses `L` with `c = 0` and the iterated source is
//! `f(x, t, u) - c(x) u` with Lipschitz bound `mu + max |c|`.

use crate::error::{Error, Result};
use crate::spatial::{assemble_operator, EllipticCoefficients, SpaceFunction, TridiagonalMatrix};
use crate::stepper::{
    certify, PiecewiseSolution, SemilinearSource, SolveOptions, Source, StepDiagnostics, Stepper,
    SubdiffusionProblem,
};
use crate::wellposed::{estimate_resolvent_bound, ResolventEstimate};

pub use crate::stepper::IterationReport;

/// `tau^alpha mu C_M < 1`, the sufficient condition for the fixed-point map
/// of one interval to contract.
pub fn contraction_check(alpha: f64, tau: f64, mu: f64, resolvent: &ResolventEstimate) -> bool {
    contraction_factor(alpha, tau, mu, resolvent) < 1.0
}

fn contraction_factor(alpha: f64, tau: f64, mu: f64, resolvent: &ResolventEstimate) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    tau.powf(alpha) * mu * resolvent.c_m
}

/// Adds `A sin(u)` to `f`, removing `A sin(u_exact)` for manufactured
/// sources so the manufactured solution stays exact.
pub(crate) fn add_nonlinearity(
    problem: &SubdiffusionProblem,
    nl: &SemilinearSource,
    t: f64,
    u: &[f64],
    f: &mut [f64],
) {
    let exact = match problem.source {
        Source::Manufactured { .. } => problem.exact(t),
        _ => None,
    };
    for (x, fx) in f.iter_mut().enumerate() {
        *fx += nl.eval(u[x]);
        if let Some(e) = &exact {
            *fx -= nl.eval(e[x]);
        }
    }
}

/// Data that stays fixed over a semilinear solve.
struct Context<'a> {
    stepper: Stepper<'a>,
    nl: SemilinearSource,
    /// Full operator, used to build manufactured sources.
    lh_full: TridiagonalMatrix,
    /// `c` at the nodes.
    c: Vec<f64>,
    mu_eff: f64,
    resolvent: ResolventEstimate,
}

impl<'a> Context<'a> {
    fn new(problem: &'a SubdiffusionProblem) -> Result<Self> {
        let nl = problem
            .semilinear
            .ok_or_else(|| Error::Config("problem has no semilinear source".into()))?;
        let lh_full = problem.operator()?;
        let reduced = EllipticCoefficients {
            c: SpaceFunction::constant(0.0),
            ..problem.coeff.clone()
        };
        let lh0 = assemble_operator(&problem.grid, &reduced)?;
        let c: Vec<f64> = problem.grid.nodes().iter().map(|&x| problem.coeff.c.eval(x)).collect();
        let c_max = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let stepper = Stepper::new(problem, lh0)?;
        let resolvent = estimate_resolvent_bound(&stepper.mats, None, None)?;
        Ok(Self {
            stepper,
            nl,
            lh_full,
            c,
            mu_eff: nl.mu() + c_max,
            resolvent,
        })
    }

    /// `f(x, t, u) - c u` at every node.
    fn source(&self, t: f64, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.stepper.problem;
        let mut f = p.source_values(t, &self.lh_full)?;
        add_nonlinearity(p, &self.nl, t, u, &mut f);
        for ((fx, cx), ux) in f.iter_mut().zip(&self.c).zip(u) {
            *fx -= cx * ux;
        }
        Ok(f)
    }

    fn step(&self, sol: &mut PiecewiseSolution, tol: f64, max_iter: usize) -> Result<()> {
        let st = &self.stepper;
        let p = st.problem;
        let k = sol.completed_steps() + 1;
        if k > p.mesh.intervals() {
            return Err(Error::domain("step_semilinear", "all intervals are already solved"));
        }
        let tau = p.mesh.tau(k);
        let factor = contraction_factor(p.alpha, tau, self.mu_eff, &self.resolvent);
        let fac = st.factor(k)?;
        let hist = st.history(sol, k)?;
        let theta = p.rule.theta();
        let times: Vec<f64> = theta.iter().map(|&th| p.mesh.collocation_time(k, th)).collect();
        let u_prev = sol.values[k - 1].clone();
        let mut uc = vec![u_prev.clone(); st.m];
        let mut updates = Vec::new();
        for _ in 0..max_iter {
            let f = times
                .iter()
                .zip(&uc)
                .map(|(&t, u)| self.source(t, u))
                .collect::<Result<Vec<_>>>()?;
            let rhs = st.rhs(fac.ta, &u_prev, &hist, &f);
            let (block, res) = st.solve_step(&fac, &rhs)?;
            let next = st.collocation_values(&u_prev, &block);
            let update = next
                .iter()
                .flatten()
                .zip(uc.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            updates.push(update);
            uc = next;
            if update <= tol {
                let iteration = IterationReport {
                    iterations: updates.len(),
                    final_update: update,
                    updates,
                    converged: true,
                    contraction_factor: factor,
                    contraction_check: factor < 1.0,
                };
                sol.push(
                    block,
                    StepDiagnostics {
                        k,
                        tau,
                        pivot_ratio: fac.lu.pivot_ratio(),
                        solve_residual: res,
                        iteration: Some(iteration),
                        stepsize: None,
                    },
                );
                return Ok(());
            }
        }
        Err(Error::FixedPoint {
            interval: k,
            iterations: max_iter,
            last_update: updates.last().copied().unwrap_or(f64::NAN),
            contraction: factor,
        })
    }
}

/// Solves the next interval of `sol` by fixed-point iteration, starting
/// from `U_{k-1}` at every collocation point, and appends it.
pub fn step_semilinear(
    problem: &SubdiffusionProblem,
    sol: &mut PiecewiseSolution,
    tol: f64,
    max_iter: usize,
) -> Result<IterationReport> {
    if !(tol > 0.0) {
        return Err(Error::domain("step_semilinear", format!("tol must be positive, got {tol}")));
    }
    let ctx = Context::new(problem)?;
    ctx.step(sol, tol, max_iter)?;
    Ok(sol.steps.last().and_then(|s| s.iteration.clone()).expect("iteration report present"))
}

pub fn solve_semilinear(problem: &SubdiffusionProblem, opts: &SolveOptions) -> Result<PiecewiseSolution> {
    problem.validate()?;
    certify(problem, &opts.classification)?;
    if !(opts.fixed_point_tol > 0.0) {
        return Err(Error::domain("solve_semilinear", "fixed-point tolerance must be positive"));
    }
    let ctx = Context::new(problem)?;
    let mut sol = PiecewiseSolution::start(problem.alpha, problem.mesh.clone(), problem.initial_values());
    for _ in 0..problem.mesh.intervals() {
        ctx.step(&mut sol, opts.fixed_point_tol, opts.max_iter)?;
    }
    Ok(sol)
}

/// Resolvent estimate and effective Lipschitz constant used for the
/// contraction advisories of a semilinear problem.
pub fn contraction_inputs(problem: &SubdiffusionProblem) -> Result<(ResolventEstimate, f64)> {
    let ctx = Context::new(problem)?;
    Ok((ctx.resolvent, ctx.mu_eff))
}
