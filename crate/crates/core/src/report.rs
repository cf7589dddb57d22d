//! Deterministic CSV and JSON output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::ProblemConfig;
use crate::error::Result;
use crate::semilinear::{contraction_inputs, IterationReport};
use crate::stepper::{collocation_residual, solve_with, PiecewiseSolution, SubdiffusionProblem};
use crate::wellposed::{spectrum_with, Classification, ResolventEstimate, SpectrumReport};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // no negative zero in output
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

pub const SPECTRUM_HEADER: &str = "family,m,alpha,index,re,im,is_real,is_real_negative";

/// One row per eigenvalue, in report order.
pub fn spectrum_csv(reports: &[SpectrumReport], cls: &Classification) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for rep in reports {
        for (i, z) in rep.eigenvalues.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                rep.family,
                rep.m,
                fmt_f64(rep.alpha),
                i,
                fmt_f64(z.re),
                fmt_f64(z.im),
                cls.is_real(*z),
                cls.is_real_negative(*z)
            );
        }
    }
    out
}

/// `t,x,u` at every mesh node and interior grid node.
pub fn solution_csv(sol: &PiecewiseSolution, problem: &SubdiffusionProblem) -> String {
    let mut out = String::from("t,x,u\n");
    let xs = problem.grid.nodes();
    for (t, u) in sol.mesh.nodes().iter().zip(&sol.values) {
        for (x, v) in xs.iter().zip(u) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*x), fmt_f64(*v));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub has_real_negative: bool,
    pub all_real_parts_positive: bool,
    pub min_real_part: f64,
    pub real_eigenvalue_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemilinearSummary {
    pub converged: bool,
    pub contraction_check: bool,
    pub mu_effective: f64,
    pub resolvent: ResolventEstimate,
    pub iterations: Vec<usize>,
    pub max_contraction_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub alpha: f64,
    pub m: usize,
    pub intervals: usize,
    pub nodes: usize,
    pub residual_max: f64,
    pub residual_scale: f64,
    /// Max nodal error at the mesh nodes, for manufactured problems.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    pub min_pivot_ratio: f64,
    pub certificate: CertificateSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearSummary>,
    pub warnings: Vec<String>,
}

/// Builds the problem, solves it and summarizes the run.
pub fn run_solve(cfg: &ProblemConfig) -> Result<(SubdiffusionProblem, PiecewiseSolution, SolveReport)> {
    let problem = cfg.into_problem()?;
    let opts = cfg.solve_options()?;
    let warnings = problem.validate()?;
    let spec = spectrum_with(&problem.rule, problem.alpha, &opts.classification)?;
    let sol = solve_with(&problem, &opts)?;
    let report = summarize(&problem, &sol, &spec, warnings)?;
    Ok((problem, sol, report))
}

pub fn summarize(
    problem: &SubdiffusionProblem,
    sol: &PiecewiseSolution,
    spec: &SpectrumReport,
    warnings: Vec<String>,
) -> Result<SolveReport> {
    let res = collocation_residual(sol, problem)?;
    let max_error = sol
        .mesh
        .nodes()
        .iter()
        .zip(&sol.values)
        .map(|(&t, u)| {
            problem
                .exact(t)
                .map(|e| e.iter().zip(u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })
        .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)));
    let semilinear = match problem.semilinear {
        Some(_) => {
            let (resolvent, mu_effective) = contraction_inputs(problem)?;
            let reports: Vec<&IterationReport> = sol.steps.iter().filter_map(|s| s.iteration.as_ref()).collect();
            Some(SemilinearSummary {
                converged: reports.iter().all(|r| r.converged),
                contraction_check: reports.iter().all(|r| r.contraction_check),
                mu_effective,
                resolvent,
                iterations: reports.iter().map(|r| r.iterations).collect(),
                max_contraction_factor: reports.iter().map(|r| r.contraction_factor).fold(0.0, f64::max),
            })
        }
        None => None,
    };
    let mut warnings = warnings;
    if let Some(s) = &semilinear {
        if !s.contraction_check {
            warnings.push(format!(
                "contraction condition tau^alpha mu C_M < 1 fails (max factor {})",
                s.max_contraction_factor
            ));
        }
    }
    Ok(SolveReport {
        alpha: problem.alpha,
        m: problem.rule.order(),
        intervals: problem.mesh.intervals(),
        nodes: problem.grid.n,
        residual_max: res.max_abs,
        residual_scale: res.scale,
        max_error,
        min_pivot_ratio: sol.steps.iter().map(|s| s.pivot_ratio).fold(f64::INFINITY, f64::min),
        certificate: CertificateSummary {
            has_real_negative: spec.has_real_negative,
            all_real_parts_positive: spec.all_real_parts_positive,
            min_real_part: spec.min_real_part,
            real_eigenvalue_count: spec.real_eigenvalue_count,
        },
        semilinear,
        warnings,
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
