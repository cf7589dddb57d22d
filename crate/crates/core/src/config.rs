//! JSON problem description.
//!
//! ```text
//! {
//!   "alpha": 0.5, "m": 2, "points": "chebyshev",
//!   "mesh": {"M": 8, "T": 1.0, "r": 2.0},
//!   "space": {"N": 20, "xl": 0.0, "xr": 1.0,
//!             "a": {"kind": "constant", "value": 1.0},
//!             "b": {"kind": "constant", "value": 0.0},
//!             "c": {"kind": "constant", "value": 0.0}},
//!   "source": {"kind": "manufactured", "space": {"kind": "sine"},
//!              "time": {"kind": "powers", "terms": [{"coefficient": 1.0, "power": 2.0}]}},
//!   "initial": {"kind": "exact"},
//!   "semilinear": {"kind": "sine", "amplitude": 0.1, "mu": 0.1},
//!   "tolerances": {"fixed_point_tol": 1e-11, "max_iter": 100}
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::collocation::{make_points, CollocationRule, PointFamily};
use crate::error::{Error, Result};
use crate::spatial::{EllipticCoefficients, SpaceFunction, SpatialGrid};
use crate::stepper::{Initial, MeshSpec, SemilinearSource, SolveOptions, Source, SubdiffusionProblem, TemporalMesh};
use crate::wellposed::Classification;

/// A family name or an explicit list of abscissas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointsSpec {
    Family(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default)]
    pub xl: f64,
    #[serde(default = "one")]
    pub xr: f64,
    #[serde(default = "unit")]
    pub a: SpaceFunction,
    #[serde(default = "zero")]
    pub b: SpaceFunction,
    #[serde(default = "zero")]
    pub c: SpaceFunction,
}

fn one() -> f64 {
    1.0
}

fn unit() -> SpaceFunction {
    SpaceFunction::constant(1.0)
}

fn zero() -> SpaceFunction {
    SpaceFunction::constant(0.0)
}

/// Optional overrides of solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub fixed_point_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub imag_rel: Option<f64>,
    pub neg_real: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub alpha: f64,
    pub m: usize,
    pub points: PointsSpec,
    pub mesh: MeshSpec,
    pub space: SpaceSpec,
    pub source: Source,
    pub initial: Initial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearSource>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn rule(&self) -> Result<CollocationRule> {
        let rule = match &self.points {
            PointsSpec::Family(name) => {
                let family: PointFamily = name.parse().map_err(config_err)?;
                if family == PointFamily::Custom {
                    return Err(Error::Config("'custom' points need an explicit array".into()));
                }
                make_points(family, self.m).map_err(config_err)?
            }
            PointsSpec::Explicit(theta) => CollocationRule::custom(theta.clone()).map_err(config_err)?,
        };
        if rule.order() != self.m {
            return Err(Error::Config(format!("m = {} but {} points given", self.m, rule.order())));
        }
        Ok(rule)
    }

    pub fn into_problem(&self) -> Result<SubdiffusionProblem> {
        let mesh = TemporalMesh::try_from(self.mesh).map_err(config_err)?;
        let grid = SpatialGrid::new(self.space.n, self.space.xl, self.space.xr).map_err(config_err)?;
        let problem = SubdiffusionProblem {
            alpha: self.alpha,
            rule: self.rule()?,
            mesh,
            grid,
            coeff: EllipticCoefficients {
                a: self.space.a.clone(),
                b: self.space.b.clone(),
                c: self.space.c.clone(),
            },
            source: self.source.clone(),
            initial: self.initial.clone(),
            semilinear: self.semilinear,
        };
        problem.validate().map_err(config_err)?;
        Ok(problem)
    }

    pub fn solve_options(&self) -> Result<SolveOptions> {
        let mut opts = SolveOptions::default();
        let t = &self.tolerances;
        if let Some(v) = t.fixed_point_tol {
            opts.fixed_point_tol = v;
        }
        if let Some(v) = t.max_iter {
            opts.max_iter = v;
        }
        let Classification { imag_rel, neg_real } = opts.classification;
        opts.classification = Classification {
            imag_rel: t.imag_rel.unwrap_or(imag_rel),
            neg_real: t.neg_real.unwrap_or(neg_real),
        };
        let positive = [opts.fixed_point_tol, opts.classification.imag_rel, opts.classification.neg_real];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) || opts.max_iter == 0 {
            return Err(Error::Config("tolerances must be positive and max_iter at least 1".into()));
        }
        Ok(opts)
    }
}

/// Input errors found while building a problem count as configuration
/// errors; certificate failures keep their own type.
fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other if other.is_certificate_failure() => other,
        other => Error::Config(other.to_string()),
    }
}
