//! Collocation point families and the matrices of the step system.
//!
//! A rule of order `m` has abscissas `0 < theta_1 < ... < theta_m = 1` inside
//! the unit interval; the local solution `sum_j v_j s^j` has no constant
//! term, so `W[l][j] = theta_l^j` for `j = 1..m`.
//!
//! Families:
//! - `chebyshev`: `theta_l = (cos(pi (m - l) / m) + 1) / 2`.
//! - `equidistant`: `theta_l = l / m`.
//! - `lobatto`: the `m + 1` Gauss-Lobatto-Legendre nodes on `[-1, 1]` (the
//!   endpoints and the roots of `P_m'`) mapped to `[0, 1]`, with the node at
//!   0 dropped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::denselin::extended::{self, Dd, ExtMatrix};
use crate::denselin::{DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::specfun::{caputo_power_coefficient, check_alpha};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFamily {
    Chebyshev,
    Equidistant,
    Lobatto,
    Custom,
}

impl PointFamily {
    pub const BUILTIN: [PointFamily; 3] = [
        PointFamily::Chebyshev,
        PointFamily::Equidistant,
        PointFamily::Lobatto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PointFamily::Chebyshev => "chebyshev",
            PointFamily::Equidistant => "equidistant",
            PointFamily::Lobatto => "lobatto",
            PointFamily::Custom => "custom",
        }
    }
}

impl fmt::Display for PointFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PointFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chebyshev" => Ok(PointFamily::Chebyshev),
            "equidistant" | "uniform" => Ok(PointFamily::Equidistant),
            "lobatto" => Ok(PointFamily::Lobatto),
            "custom" => Ok(PointFamily::Custom),
            other => Err(Error::InvalidRule(format!("unknown point family '{other}'"))),
        }
    }
}

/// Collocation abscissas in `(0, 1]` with `theta_m == 1.0` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationRule {
    family: PointFamily,
    theta: Vec<f64>,
}

impl CollocationRule {
    /// Wraps user-supplied abscissas. The last one must be 1 to within
    /// `1e-12`; it is then stored as exactly `1.0`.
    pub fn custom(theta: Vec<f64>) -> Result<Self> {
        Self::validated(PointFamily::Custom, theta)
    }

    /// Parses a JSON array of strictly increasing reals ending in 1.0.
    pub fn from_json(text: &str) -> Result<Self> {
        let theta: Vec<f64> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidRule(format!("custom points: {e}")))?;
        Self::custom(theta)
    }

    fn validated(family: PointFamily, mut theta: Vec<f64>) -> Result<Self> {
        let m = theta.len();
        if m == 0 {
            return Err(Error::InvalidRule("at least one collocation point is required".into()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidRule("non-finite collocation point".into()));
        }
        if (theta[m - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidRule(format!(
                "last collocation point must be 1, got {}",
                theta[m - 1]
            )));
        }
        theta[m - 1] = 1.0;
        if theta[0] <= 0.0 {
            return Err(Error::InvalidRule(format!(
                "collocation points must be positive, got {}",
                theta[0]
            )));
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRule(
                "collocation points must be strictly increasing".into(),
            ));
        }
        Ok(Self { family, theta })
    }

    pub fn family(&self) -> PointFamily {
        self.family
    }

    /// Order `m` (number of collocation points).
    pub fn order(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
}

/// Builds the `m`-point rule of a named family.
pub fn make_points(family: PointFamily, m: usize) -> Result<CollocationRule> {
    if m == 0 {
        return Err(Error::InvalidRule("order m must be at least 1".into()));
    }
    let theta = match family {
        PointFamily::Chebyshev => (1..=m)
            .map(|l| ((std::f64::consts::PI * (m - l) as f64 / m as f64).cos() + 1.0) / 2.0)
            .collect(),
        PointFamily::Equidistant => (1..=m).map(|l| l as f64 / m as f64).collect(),
        PointFamily::Lobatto => lobatto_points(m),
        PointFamily::Custom => {
            return Err(Error::InvalidRule(
                "custom rules need explicit points".into(),
            ))
        }
    };
    CollocationRule::validated(family, theta)
}

/// Legendre `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n' from P_n and P_{n-1}; interior points only.
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn lobatto_points(m: usize) -> Vec<f64> {
    let nf = m as f64;
    let mut nodes = Vec::with_capacity(m);
    for k in (1..m).rev() {
        // Interior GLL nodes are the roots of P_m'; Newton with P_m'' taken
        // from the Legendre equation (1 - x^2) P'' = 2x P' - m(m+1) P.
        let mut x = (std::f64::consts::PI * k as f64 / nf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let ddp = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() <= 1e-14 * x.abs().max(1e-3) {
                break;
            }
        }
        nodes.push((x + 1.0) / 2.0);
    }
    nodes.push(1.0);
    nodes
}

/// `W`, `D1`, `D2` and the derived `M_alpha = D1 W D2`, `M = M_alpha W^-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationMatrices {
    pub alpha: f64,
    pub w: DenseMatrix,
    /// Diagonal of `D1`: `theta_l^-alpha`.
    pub d1: Vec<f64>,
    /// Diagonal of `D2`: `c_j`.
    pub d2: Vec<f64>,
    pub m_alpha: DenseMatrix,
    pub m: DenseMatrix,
}

impl CollocationMatrices {
    pub fn order(&self) -> usize {
        self.d1.len()
    }
}

/// Vandermonde-type matrix `W[l][j] = theta_l^(j+1)`.
pub fn vandermonde_matrix(rule: &CollocationRule) -> DenseMatrix {
    let theta = rule.theta();
    DenseMatrix::from_fn(theta.len(), |l, j| theta[l].powi(j as i32 + 1))
}

/// Builds the collocation matrices for `(rule, alpha)`; `M` comes from
/// solving `M W = M_alpha` with a pivoted LU of `W^T`.
pub fn build_matrices(rule: &CollocationRule, alpha: f64) -> Result<CollocationMatrices> {
    check_alpha(alpha)?;
    let m = rule.order();
    let w = vandermonde_matrix(rule);
    let d1: Vec<f64> = rule.theta().iter().map(|t| (-alpha * t.ln()).exp()).collect();
    let d2 = (1..=m)
        .map(|j| caputo_power_coefficient(j, alpha))
        .collect::<Result<Vec<_>>>()?;
    let m_alpha = w.scale_rows(&d1).scale_cols(&d2);
    let mt = Lu::new(&w.transpose())?.solve_matrix(&m_alpha.transpose())?;
    Ok(CollocationMatrices {
        alpha,
        w,
        d1,
        d2,
        m_alpha,
        m: mt.transpose(),
    })
}

/// Closed form `det W = prod theta_j * prod_{i<j} (theta_j - theta_i)`.
pub fn vandermonde_det(rule: &CollocationRule) -> f64 {
    let t = rule.theta();
    let mut det: f64 = t.iter().product();
    for j in 0..t.len() {
        for i in 0..j {
            det *= t[j] - t[i];
        }
    }
    det
}

/// Determinant of the generalized Vandermonde matrix `[theta_i^beta_k]`.
///
/// Entries `theta^beta` are formed in double-double as `theta^floor(beta)`
/// times an `f64` power for the fractional part, and the elimination runs in
/// double-double, so integer exponents lose nothing to entry rounding.
pub fn generalized_vandermonde_det(theta: &[f64], beta: &[f64]) -> Result<f64> {
    let m = theta.len();
    if beta.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: beta.len(),
        });
    }
    if m == 0 {
        return Err(Error::domain("generalized_vandermonde_det", "empty input"));
    }
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    if !(theta[0] > 0.0 && increasing(theta)) || theta.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(
            "generalized_vandermonde_det",
            "nodes must be positive, finite and strictly increasing",
        ));
    }
    if !(beta[0] > 0.0 && increasing(beta)) || beta.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain(
            "generalized_vandermonde_det",
            "exponents must be positive, finite and strictly increasing",
        ));
    }
    let mut a = ExtMatrix::zeros(m);
    for (i, &t) in theta.iter().enumerate() {
        for (k, &b) in beta.iter().enumerate() {
            let whole = b.floor();
            let frac = b - whole;
            let mut v = Dd::from(t).powi(whole as u32);
            if frac != 0.0 {
                v *= Dd::from(t.powf(frac));
            }
            a.set(i, k, v);
        }
    }
    extended::det_scaled(a)
}
