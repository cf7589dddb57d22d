//! Second-order finite differences for
//! `L u = -(a u')' + b u' + c u` on an interval with homogeneous Dirichlet
//! conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid of `n` interior nodes on `[xl, xr]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n: usize,
    pub xl: f64,
    pub xr: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, xl: f64, xr: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("SpatialGrid", "at least one interior node is required"));
        }
        if !(xl.is_finite() && xr.is_finite() && xr > xl) {
            return Err(Error::domain("SpatialGrid", format!("bad interval [{xl}, {xr}]")));
        }
        Ok(Self { n, xl, xr })
    }

    pub fn h(&self) -> f64 {
        (self.xr - self.xl) / (self.n + 1) as f64
    }

    /// Interior node `i` (0-based).
    pub fn x(&self, i: usize) -> f64 {
        self.xl + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

/// A function of `x` from a small catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceFunction {
    /// `value`
    Constant { value: f64 },
    /// `c0 + c1 x`
    Linear { c0: f64, c1: f64 },
    /// `offset + amplitude sin(frequency pi x + phase)`
    Sine {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `sum_k coeffs[k] x^k`
    Polynomial { coeffs: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl SpaceFunction {
    pub fn constant(value: f64) -> Self {
        SpaceFunction::Constant { value }
    }

    /// `sin(pi x)`
    pub fn sin_pi() -> Self {
        SpaceFunction::Sine {
            amplitude: 1.0,
            frequency: 1.0,
            phase: 0.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SpaceFunction::Constant { value } => *value,
            SpaceFunction::Linear { c0, c1 } => c0 + c1 * x,
            SpaceFunction::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => offset + amplitude * (frequency * std::f64::consts::PI * x + phase).sin(),
            SpaceFunction::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            SpaceFunction::Constant { .. } => 0.0,
            SpaceFunction::Linear { c1, .. } => *c1,
            SpaceFunction::Sine {
                amplitude,
                frequency,
                phase,
                ..
            } => {
                let w = frequency * std::f64::consts::PI;
                amplitude * w * (w * x + phase).cos()
            }
            SpaceFunction::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, c)| acc * x + k as f64 * c),
        }
    }

    fn check(&self, what: &str) -> Result<()> {
        let finite = match self {
            SpaceFunction::Constant { value } => value.is_finite(),
            SpaceFunction::Linear { c0, c1 } => c0.is_finite() && c1.is_finite(),
            SpaceFunction::Sine {
                amplitude,
                frequency,
                phase,
                offset,
            } => [amplitude, frequency, phase, offset].iter().all(|v| v.is_finite()),
            SpaceFunction::Polynomial { coeffs } => coeffs.iter().all(|v| v.is_finite()),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::Config(format!("{what}: non-finite parameter")))
        }
    }
}

/// Coefficients `a`, `b`, `c` of the elliptic operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticCoefficients {
    pub a: SpaceFunction,
    pub b: SpaceFunction,
    pub c: SpaceFunction,
}

impl EllipticCoefficients {
    /// `-u''`
    pub fn laplacian() -> Self {
        Self {
            a: SpaceFunction::constant(1.0),
            b: SpaceFunction::constant(0.0),
            c: SpaceFunction::constant(0.0),
        }
    }

    /// Checks `a > 0` at all nodes and midpoints; returns warnings when
    /// neither `c >= 0` nor `c - b'/2 >= 0` holds at every node.
    pub fn validate(&self, grid: &SpatialGrid) -> Result<Vec<String>> {
        self.a.check("a")?;
        self.b.check("b")?;
        self.c.check("c")?;
        let h = grid.h();
        let a_min = (0..=2 * (grid.n + 1))
            .map(|k| self.a.eval(grid.xl + 0.5 * k as f64 * h))
            .fold(f64::INFINITY, f64::min);
        if !(a_min > 0.0) {
            return Err(Error::Config(format!(
                "diffusion coefficient a must be positive on the grid (min {a_min})"
            )));
        }
        let nodes = grid.nodes();
        let c_ok = nodes.iter().all(|&x| self.c.eval(x) >= 0.0);
        let cb_ok = nodes
            .iter()
            .all(|&x| self.c.eval(x) - 0.5 * self.b.derivative(x) >= 0.0);
        let mut warnings = Vec::new();
        if !(c_ok || cb_ok) {
            warnings.push(
                "neither c >= 0 nor c - b'/2 >= 0 holds on the grid; the operator may not be coercive"
                    .to_string(),
            );
        }
        Ok(warnings)
    }
}

/// Tridiagonal matrix; `sub[i]` sits at `(i + 1, i)`, `sup[i]` at `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalMatrix {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i == j + 1 {
            self.sub[j]
        } else if j == i + 1 {
            self.sup[i]
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> crate::denselin::DenseMatrix {
        crate::denselin::DenseMatrix::from_fn(self.dim(), |i, j| self.get(i, j))
    }

    /// `out = L u`, without allocation.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.sub[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.sup[i] * u[i + 1];
            }
            out[i] = s;
        }
    }
}

/// Assembles the conservative central-difference operator:
/// row `i` is `-(a_{i+1/2}(u_{i+1} - u_i) - a_{i-1/2}(u_i - u_{i-1})) / h^2
/// + b_i (u_{i+1} - u_{i-1}) / (2h) + c_i u_i`.
pub fn assemble_operator(grid: &SpatialGrid, coeff: &EllipticCoefficients) -> Result<TridiagonalMatrix> {
    coeff.validate(grid)?;
    let n = grid.n;
    let h = grid.h();
    let h2 = h * h;
    let mut sub = Vec::with_capacity(n.saturating_sub(1));
    let mut diag = Vec::with_capacity(n);
    let mut sup = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        let x = grid.x(i);
        let a_left = coeff.a.eval(x - 0.5 * h);
        let a_right = coeff.a.eval(x + 0.5 * h);
        let b = coeff.b.eval(x);
        diag.push((a_left + a_right) / h2 + coeff.c.eval(x));
        if i > 0 {
            sub.push(-a_left / h2 - b / (2.0 * h));
        }
        if i + 1 < n {
            sup.push(-a_right / h2 + b / (2.0 * h));
        }
    }
    Ok(TridiagonalMatrix { sub, diag, sup })
}

pub fn apply_operator(lh: &TridiagonalMatrix, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != lh.dim() {
        return Err(Error::DimensionMismatch {
            expected: lh.dim(),
            found: u.len(),
        });
    }
    let mut out = vec![0.0; u.len()];
    lh.apply_into(u, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denselin::symmetric_eigenvalues;

    #[test]
    fn laplacian_stencil() {
        let g = SpatialGrid::new(3, 0.0, 1.0).unwrap();
        assert_eq!(g.h(), 0.25);
        let l = assemble_operator(&g, &EllipticCoefficients::laplacian()).unwrap();
        assert_eq!(l.diag, vec![32.0; 3]);
        assert_eq!(l.sub, vec![-16.0; 2]);
        assert_eq!(l.sup, vec![-16.0; 2]);
        let mut coeff = EllipticCoefficients::laplacian();
        coeff.c = SpaceFunction::constant(1.0);
        let l1 = assemble_operator(&g, &coeff).unwrap();
        assert_eq!(l1.diag, vec![33.0; 3]);
    }

    #[test]
    fn laplacian_spectrum() {
        let g = SpatialGrid::new(3, 0.0, 1.0).unwrap();
        let l = assemble_operator(&g, &EllipticCoefficients::laplacian()).unwrap();
        let ev = symmetric_eigenvalues(&l.to_dense()).unwrap();
        let h = g.h();
        let want = 4.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
        assert!((ev[0] - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn quadratic_is_differentiated_exactly() {
        let g = SpatialGrid::new(9, 0.0, 1.0).unwrap();
        let l = assemble_operator(&g, &EllipticCoefficients::laplacian()).unwrap();
        let u: Vec<f64> = g.nodes().iter().map(|x| x * (1.0 - x)).collect();
        for v in apply_operator(&l, &u).unwrap() {
            assert!((v - 2.0).abs() <= 1e-12);
        }
        assert_eq!(apply_operator(&l, &[0.0; 9]).unwrap(), vec![0.0; 9]);
        assert!(apply_operator(&l, &[0.0; 3]).is_err());
    }

    #[test]
    fn rejects_nonpositive_diffusion() {
        let g = SpatialGrid::new(4, 0.0, 1.0).unwrap();
        let mut coeff = EllipticCoefficients::laplacian();
        coeff.a = SpaceFunction::Linear { c0: -0.5, c1: 1.0 };
        assert!(assemble_operator(&g, &coeff).is_err());
        let mut coeff = EllipticCoefficients::laplacian();
        coeff.c = SpaceFunction::constant(-1.0);
        assert_eq!(coeff.validate(&g).unwrap().len(), 1);
    }

    #[test]
    fn catalog_json() {
        let f: SpaceFunction = serde_json::from_str(r#"{"kind":"sine"}"#).unwrap();
        assert_eq!(f, SpaceFunction::sin_pi());
        let p: SpaceFunction = serde_json::from_str(r#"{"kind":"polynomial","coeffs":[1,2,3]}"#).unwrap();
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.derivative(2.0), 14.0);
        assert!(serde_json::from_str::<SpaceFunction>(r#"{"kind":"cosh"}"#).is_err());
    }
}
