use serde::{Deserialize, Serialize};

use crate::collocation::CollocationRule;
use crate::error::{Error, Result};
use crate::spatial::{assemble_operator, EllipticCoefficients, SpaceFunction, SpatialGrid, TridiagonalMatrix};
use crate::specfun::{caputo_power, check_alpha};

use super::TemporalMesh;

/// `coefficient * t^power`, `power >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub power: f64,
}

/// A function of `t` from a small catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TimeFunction {
    Zero,
    Constant { value: f64 },
    /// `sum coefficient * t^power`
    Powers { terms: Vec<PowerTerm> },
}

impl TimeFunction {
    pub fn power(coefficient: f64, power: f64) -> Self {
        TimeFunction::Powers {
            terms: vec![PowerTerm { coefficient, power }],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Zero => 0.0,
            TimeFunction::Constant { value } => *value,
            TimeFunction::Powers { terms } => terms
                .iter()
                .map(|p| if p.power == 0.0 { p.coefficient } else { p.coefficient * t.powf(p.power) })
                .sum(),
        }
    }

    /// Caputo derivative of order `alpha` at `t > 0`.
    pub fn caputo(&self, alpha: f64, t: f64) -> Result<f64> {
        match self {
            TimeFunction::Zero | TimeFunction::Constant { .. } => Ok(0.0),
            TimeFunction::Powers { terms } => terms
                .iter()
                .map(|p| Ok(p.coefficient * caputo_power(p.power, alpha, t)?))
                .sum(),
        }
    }

    pub(crate) fn check(&self, what: &str) -> Result<()> {
        let ok = match self {
            TimeFunction::Zero => true,
            TimeFunction::Constant { value } => value.is_finite(),
            TimeFunction::Powers { terms } => terms
                .iter()
                .all(|p| p.coefficient.is_finite() && p.power.is_finite() && p.power >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("{what}: powers must be finite and nonnegative")))
        }
    }
}

/// Right-hand side `f(x, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Source {
    Zero,
    Constant { value: f64 },
    /// `space(x) * time(t)`
    Separable { space: SpaceFunction, time: TimeFunction },
    /// Source for the exact solution `u = space(x) time(t)`, built with the
    /// discrete operator: `f = D^alpha time * space + time * L_h space`.
    Manufactured { space: SpaceFunction, time: TimeFunction },
}

/// Initial values `u_0(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Initial {
    Zero,
    Constant { value: f64 },
    Profile { space: SpaceFunction },
    /// Samples of the manufactured solution at `t = 0`.
    Exact,
}

/// `f(x, t, u) = amplitude sin(u) + g(x, t)` with Lipschitz constant `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SemilinearSource {
    Sine { amplitude: f64, mu: f64 },
}

impl SemilinearSource {
    pub fn sine(amplitude: f64) -> Self {
        SemilinearSource::Sine {
            amplitude,
            mu: amplitude.abs(),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            SemilinearSource::Sine { amplitude, .. } => *amplitude,
        }
    }

    /// Declared Lipschitz bound of `u -> f(x, t, u)`.
    pub fn mu(&self) -> f64 {
        match self {
            SemilinearSource::Sine { mu, .. } => *mu,
        }
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            SemilinearSource::Sine { amplitude, .. } => amplitude * u.sin(),
        }
    }

    fn check(&self) -> Result<()> {
        let SemilinearSource::Sine { amplitude, mu } = *self;
        if !(amplitude.is_finite() && mu.is_finite() && mu >= amplitude.abs()) {
            return Err(Error::Config(format!(
                "semilinear source: mu = {mu} must be finite and at least |amplitude| = {}",
                amplitude.abs()
            )));
        }
        Ok(())
    }
}

/// `D^alpha u + L u = f` on `(0, T]` with Dirichlet conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdiffusionProblem {
    pub alpha: f64,
    pub rule: CollocationRule,
    pub mesh: TemporalMesh,
    pub grid: SpatialGrid,
    pub coeff: EllipticCoefficients,
    pub source: Source,
    pub initial: Initial,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semilinear: Option<SemilinearSource>,
}

impl SubdiffusionProblem {
    /// Checks component invariants; returns coefficient warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        check_alpha(self.alpha)?;
        let warnings = self.coeff.validate(&self.grid)?;
        match &self.source {
            Source::Constant { value } if !value.is_finite() => {
                return Err(Error::Config("source: non-finite value".into()))
            }
            Source::Separable { time, .. } | Source::Manufactured { time, .. } => time.check("source")?,
            _ => {}
        }
        if matches!(self.initial, Initial::Exact) && !matches!(self.source, Source::Manufactured { .. }) {
            return Err(Error::Config("initial 'exact' requires a manufactured source".into()));
        }
        if let Some(s) = &self.semilinear {
            s.check()?;
        }
        Ok(warnings)
    }

    pub fn operator(&self) -> Result<TridiagonalMatrix> {
        assemble_operator(&self.grid, &self.coeff)
    }

    pub fn initial_values(&self) -> Vec<f64> {
        let nodes = self.grid.nodes();
        match &self.initial {
            Initial::Zero => vec![0.0; nodes.len()],
            Initial::Constant { value } => vec![*value; nodes.len()],
            Initial::Profile { space } => nodes.iter().map(|&x| space.eval(x)).collect(),
            Initial::Exact => self.exact(0.0).unwrap_or_else(|| vec![0.0; nodes.len()]),
        }
    }

    /// Nodal values of the manufactured solution, if there is one.
    pub fn exact(&self, t: f64) -> Option<Vec<f64>> {
        match &self.source {
            Source::Manufactured { space, time } => {
                let tv = time.eval(t);
                Some(self.grid.nodes().iter().map(|&x| space.eval(x) * tv).collect())
            }
            _ => None,
        }
    }

    /// `f(x_i, t)` for the linear part of the source. `lh` is the operator
    /// the manufactured source is built with.
    pub fn source_values(&self, t: f64, lh: &TridiagonalMatrix) -> Result<Vec<f64>> {
        let nodes = self.grid.nodes();
        Ok(match &self.source {
            Source::Zero => vec![0.0; nodes.len()],
            Source::Constant { value } => vec![*value; nodes.len()],
            Source::Separable { space, time } => {
                let tv = time.eval(t);
                nodes.iter().map(|&x| space.eval(x) * tv).collect()
            }
            Source::Manufactured { space, time } => {
                let phi: Vec<f64> = nodes.iter().map(|&x| space.eval(x)).collect();
                let mut lphi = vec![0.0; phi.len()];
                lh.apply_into(&phi, &mut lphi);
                let dt = time.caputo(self.alpha, t)?;
                let tv = time.eval(t);
                phi.iter().zip(&lphi).map(|(p, l)| dt * p + tv * l).collect()
            }
        })
    }
}
