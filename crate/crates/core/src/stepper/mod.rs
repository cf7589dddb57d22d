//! Continuous collocation time stepping.
//!
//! On interval `k` the solution is `U_{k-1} + sum_{j=1..m} V_{k,j} s^j` with
//! `s = (t - t_{k-1}) / tau_k`. Requiring the equation at the collocation
//! times `t_{k-1} + theta_l tau_k` gives, after multiplying by `tau_k^alpha`,
//! the block system
//!
//! `sum_j [(D1 W D2)_{lj} I + tau_k^alpha W_{lj} L_h] V_j
//!     = tau_k^alpha [f(t_k^l) - L_h U_{k-1} - H_l]`
//!
//! where `H_l` is the memory of the earlier intervals.

mod fode;
mod mesh;
mod problem;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{build_matrices, CollocationMatrices};
use crate::denselin::{DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::history::accumulate_history;
use crate::spatial::TridiagonalMatrix;
use crate::wellposed::{spectrum, Classification, StepsizeReport};

pub use fode::solve_fode;
pub use mesh::{MeshSpec, TemporalMesh};
pub use problem::{Initial, PowerTerm, SemilinearSource, Source, SubdiffusionProblem, TimeFunction};

/// Largest block system `m N` the dense solver accepts.
pub const MAX_STEP_DIM: usize = 4000;

/// Coefficients `V_{k,1..m}` of one interval, row `i` holding the
/// coefficient of `s^(i+1)` at every spatial node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl CoefficientBlock {
    pub fn from_stacked(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                found: data.len(),
            });
        }
        Ok(Self { m, n, data })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `sum_j V_j s^j` at every node, by Horner.
    pub fn eval_increment(&self, s: f64) -> Vec<f64> {
        let mut acc = vec![0.0; self.n];
        for i in (0..self.m).rev() {
            for (a, v) in acc.iter_mut().zip(self.row(i)) {
                *a = (*a + v) * s;
            }
        }
        acc
    }
}

/// Report of the fixed-point iteration on one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub final_update: f64,
    /// Max-norm updates of the collocation values, one per iteration.
    pub updates: Vec<f64>,
    pub converged: bool,
    /// `tau^alpha mu C_M`.
    pub contraction_factor: f64,
    pub contraction_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub k: usize,
    pub tau: f64,
    /// Smallest over largest LU pivot of the step matrix.
    pub pivot_ratio: f64,
    /// `max |B V - rhs|` of the final linear solve.
    pub solve_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<IterationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<StepsizeReport>,
}

/// Continuous piecewise polynomial in time with values on a spatial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSolution {
    pub alpha: f64,
    pub mesh: TemporalMesh,
    /// `U_k` for `k = 0..=M` (only those computed so far).
    pub values: Vec<Vec<f64>>,
    pub blocks: Vec<CoefficientBlock>,
    pub steps: Vec<StepDiagnostics>,
}

impl PiecewiseSolution {
    pub(crate) fn start(alpha: f64, mesh: TemporalMesh, u0: Vec<f64>) -> Self {
        Self {
            alpha,
            mesh,
            values: vec![u0],
            blocks: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, block: CoefficientBlock, diag: StepDiagnostics) {
        let prev = self.values.last().expect("initial values present");
        let inc = block.eval_increment(1.0);
        // U_k = U_{k-1} + sum_j V_{k,j}
        let next: Vec<f64> = prev.iter().zip(&inc).map(|(u, d)| u + d).collect();
        self.values.push(next);
        self.blocks.push(block);
        self.steps.push(diag);
    }

    pub fn nodes(&self) -> usize {
        self.values[0].len()
    }

    pub fn completed_steps(&self) -> usize {
        self.blocks.len()
    }
}

/// Knobs for [`solve_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub classification: Classification,
    /// Max-norm update at which the fixed-point iteration stops.
    pub fixed_point_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            classification: Classification::default(),
            fixed_point_tol: 1e-11,
            max_iter: 100,
        }
    }
}

/// Shared per-solve data: collocation matrices and the spatial operator.
pub(crate) struct Stepper<'a> {
    pub problem: &'a SubdiffusionProblem,
    pub mats: CollocationMatrices,
    /// Operator used in the step matrix.
    pub lh: TridiagonalMatrix,
    pub m: usize,
    pub n: usize,
}

/// Factored step matrix of one interval.
pub(crate) struct StepFactor {
    pub k: usize,
    pub ta: f64,
    pub matrix: DenseMatrix,
    pub lu: Lu,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a SubdiffusionProblem, lh: TridiagonalMatrix) -> Result<Self> {
        let m = problem.rule.order();
        let n = problem.grid.n;
        if m * n > MAX_STEP_DIM {
            return Err(Error::SizeCap {
                what: "step system dimension m*N",
                value: m * n,
                cap: MAX_STEP_DIM,
            });
        }
        Ok(Self {
            mats: build_matrices(&problem.rule, problem.alpha)?,
            problem,
            lh,
            m,
            n,
        })
    }

    pub fn factor(&self, k: usize) -> Result<StepFactor> {
        let ta = self.problem.mesh.tau(k).powf(self.problem.alpha);
        let matrix = step_matrix(&self.mats, &self.lh, ta);
        let lu = Lu::new(&matrix).map_err(|_| Error::SingularStep { interval: k })?;
        if lu.pivot_ratio() < 1e-14 {
            return Err(Error::SingularStep { interval: k });
        }
        Ok(StepFactor { k, ta, matrix, lu })
    }

    /// Memory `H_l` at each collocation time of interval `k`.
    pub fn history(&self, sol: &PiecewiseSolution, k: usize) -> Result<Vec<Vec<f64>>> {
        let mesh = &self.problem.mesh;
        let theta = self.problem.rule.theta();
        let past = &sol.blocks[..k - 1];
        (0..self.m)
            .into_par_iter()
            .map(|l| {
                let mut h = vec![0.0; self.n];
                accumulate_history(mesh, past, self.m, self.problem.alpha, mesh.collocation_time(k, theta[l]), &mut h)?;
                Ok(h)
            })
            .collect()
    }

    /// Stacked right-hand side `tau^alpha [f_l - L_h U_{k-1} - H_l]`.
    pub fn rhs(&self, ta: f64, u_prev: &[f64], hist: &[Vec<f64>], f: &[Vec<f64>]) -> Vec<f64> {
        let mut lu_prev = vec![0.0; self.n];
        self.lh.apply_into(u_prev, &mut lu_prev);
        let mut rhs = Vec::with_capacity(self.m * self.n);
        for l in 0..self.m {
            for x in 0..self.n {
                rhs.push(ta * (f[l][x] - lu_prev[x] - hist[l][x]));
            }
        }
        rhs
    }

    /// Solves one step and reports `max |B V - rhs|`.
    pub fn solve_step(&self, fac: &StepFactor, rhs: &[f64]) -> Result<(CoefficientBlock, f64)> {
        let v = fac.lu.solve(rhs)?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::SingularStep { interval: fac.k });
        }
        let bv = fac.matrix.mul_vec(&v);
        let res = bv.iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        Ok((CoefficientBlock::from_stacked(self.m, self.n, v)?, res))
    }

    /// `U(t_k^l) = U_{k-1} + (W V)_l` for each `l`.
    pub fn collocation_values(&self, u_prev: &[f64], block: &CoefficientBlock) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|l| {
                let mut u = u_prev.to_vec();
                for j in 0..self.m {
                    let w = self.mats.w[(l, j)];
                    for (ux, v) in u.iter_mut().zip(block.row(j)) {
                        *ux += w * v;
                    }
                }
                u
            })
            .collect()
    }
}

/// Dense step matrix `D1 W D2 (x) I + ta W (x) L_h` with unknowns ordered
/// `(j, node)`.
fn step_matrix(mats: &CollocationMatrices, lh: &TridiagonalMatrix, ta: f64) -> DenseMatrix {
    let m = mats.order();
    let n = lh.dim();
    let mut b = DenseMatrix::zeros(m * n);
    for l in 0..m {
        for j in 0..m {
            let ma = mats.m_alpha[(l, j)];
            let w = ta * mats.w[(l, j)];
            for x in 0..n {
                let row = l * n + x;
                b[(row, j * n + x)] += ma + w * lh.diag[x];
                if x > 0 {
                    b[(row, j * n + x - 1)] += w * lh.sub[x - 1];
                }
                if x + 1 < n {
                    b[(row, j * n + x + 1)] += w * lh.sup[x];
                }
            }
        }
    }
    b
}

/// The block system of interval `k` for given memory vectors `history[l]`.
/// `U_{k-1}` is taken from `u_prev`.
pub fn assemble_step(
    problem: &SubdiffusionProblem,
    k: usize,
    u_prev: &[f64],
    history: &[Vec<f64>],
) -> Result<(DenseMatrix, Vec<f64>)> {
    if k == 0 || k > problem.mesh.intervals() {
        return Err(Error::domain("assemble_step", format!("interval {k} out of range")));
    }
    let lh = problem.operator()?;
    let st = Stepper::new(problem, lh)?;
    if u_prev.len() != st.n {
        return Err(Error::DimensionMismatch {
            expected: st.n,
            found: u_prev.len(),
        });
    }
    if history.len() != st.m || history.iter().any(|h| h.len() != st.n) {
        return Err(Error::DimensionMismatch {
            expected: st.m * st.n,
            found: history.iter().map(Vec::len).sum(),
        });
    }
    let ta = problem.mesh.tau(k).powf(problem.alpha);
    let f = source_at_collocation(&st, k)?;
    Ok((step_matrix(&st.mats, &st.lh, ta), st.rhs(ta, u_prev, history, &f)))
}

fn source_at_collocation(st: &Stepper<'_>, k: usize) -> Result<Vec<Vec<f64>>> {
    let p = st.problem;
    p.rule
        .theta()
        .iter()
        .map(|&th| p.source_values(p.mesh.collocation_time(k, th), &st.lh))
        .collect()
}

/// Refuses rules whose matrix `M` has a real negative eigenvalue.
pub(crate) fn certify(problem: &SubdiffusionProblem, cls: &Classification) -> Result<()> {
    let rep = spectrum(&problem.rule, problem.alpha)?;
    match rep.worst_real_negative(cls) {
        Some(value) => Err(Error::RealNegativeEigenvalue { value }),
        None => Ok(()),
    }
}

/// Solves the problem with default options.
pub fn solve(problem: &SubdiffusionProblem) -> Result<PiecewiseSolution> {
    solve_with(problem, &SolveOptions::default())
}

/// Marches `k = 1..M`. Semilinear problems are handed to the fixed-point
/// stepper.
pub fn solve_with(problem: &SubdiffusionProblem, opts: &SolveOptions) -> Result<PiecewiseSolution> {
    problem.validate()?;
    certify(problem, &opts.classification)?;
    if problem.semilinear.is_some() {
        return crate::semilinear::solve_semilinear(problem, opts);
    }
    let st = Stepper::new(problem, problem.operator()?)?;
    let mut sol = PiecewiseSolution::start(problem.alpha, problem.mesh.clone(), problem.initial_values());
    for k in 1..=problem.mesh.intervals() {
        let fac = st.factor(k)?;
        let hist = st.history(&sol, k)?;
        let f = source_at_collocation(&st, k)?;
        let rhs = st.rhs(fac.ta, &sol.values[k - 1], &hist, &f);
        let (block, res) = st.solve_step(&fac, &rhs)?;
        sol.push(
            block,
            StepDiagnostics {
                k,
                tau: problem.mesh.tau(k),
                pivot_ratio: fac.lu.pivot_ratio(),
                solve_residual: res,
                iteration: None,
                stepsize: None,
            },
        );
    }
    Ok(sol)
}

/// Values at every node at time `t`. Mesh nodes return the stored `U_k`.
pub fn evaluate(sol: &PiecewiseSolution, t: f64) -> Result<Vec<f64>> {
    let k = sol.mesh.locate(t)?;
    if k > sol.completed_steps() {
        return Err(Error::MissingBlock(k));
    }
    let nodes = sol.mesh.nodes();
    if t == nodes[k] {
        return Ok(sol.values[k].clone());
    }
    if t == nodes[k - 1] {
        return Ok(sol.values[k - 1].clone());
    }
    let s = (t - nodes[k - 1]) / sol.mesh.tau(k);
    let inc = sol.blocks[k - 1].eval_increment(s);
    Ok(sol.values[k - 1].iter().zip(&inc).map(|(u, d)| u + d).collect())
}

pub fn evaluate_node(sol: &PiecewiseSolution, node: usize, t: f64) -> Result<f64> {
    if node >= sol.nodes() {
        return Err(Error::DimensionMismatch {
            expected: sol.nodes(),
            found: node + 1,
        });
    }
    Ok(evaluate(sol, t)?[node])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max |D^alpha U + L_h U - f(U)|` over all collocation points and nodes.
    pub max_abs: f64,
    /// Largest magnitude among the terms, at least 1.
    pub scale: f64,
}

/// Checks the equation at every collocation point of every interval.
/// The Caputo derivative is rebuilt from the coefficient blocks; semilinear
/// sources are evaluated at the solution itself.
pub fn collocation_residual(sol: &PiecewiseSolution, problem: &SubdiffusionProblem) -> Result<ResidualReport> {
    let lh = problem.operator()?;
    let st = Stepper::new(problem, lh)?;
    let mut max_abs = 0.0f64;
    let mut scale = 1.0f64;
    let theta = problem.rule.theta();
    for k in 1..=sol.completed_steps() {
        let tau_ma = problem.mesh.tau(k).powf(-problem.alpha);
        let hist = st.history(sol, k)?;
        let block = &sol.blocks[k - 1];
        let uc = st.collocation_values(&sol.values[k - 1], block);
        let mut lu = vec![0.0; st.n];
        for l in 0..st.m {
            let t = problem.mesh.collocation_time(k, theta[l]);
            let mut f = problem.source_values(t, &st.lh)?;
            if let Some(nl) = &problem.semilinear {
                crate::semilinear::add_nonlinearity(problem, nl, t, &uc[l], &mut f);
            }
            st.lh.apply_into(&uc[l], &mut lu);
            for x in 0..st.n {
                let local: f64 = (0..st.m).map(|j| st.mats.m_alpha[(l, j)] * block.row(j)[x]).sum();
                let d_alpha = tau_ma * local + hist[l][x];
                let r = d_alpha + lu[x] - f[x];
                max_abs = max_abs.max(r.abs());
                scale = scale.max(d_alpha.abs()).max(lu[x].abs()).max(f[x].abs());
            }
        }
    }
    Ok(ResidualReport { max_abs, scale })
}
