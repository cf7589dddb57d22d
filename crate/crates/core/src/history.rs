//! Memory term of the Caputo derivative for piecewise-polynomial functions.
//!
//! On interval `j` the solution is `U_{j-1} + sum_i V_{j,i} s^i`. Its
//! contribution to the Caputo derivative at a later time `t` is
//! `tau_j^-alpha / Gamma(1 - alpha) * sum_i i V_{j,i} I_{i-1}(A)` with
//! `A = (t - t_{j-1}) / tau_j` and the weights
//! `I_i(A) = int_0^1 u^i (A - u)^-alpha du`.

use serde::{Deserialize, Serialize};

use crate::collocation::CollocationRule;
use crate::error::{Error, Result};
use crate::specfun::{check_alpha, reciprocal_gamma};
use crate::stepper::{CoefficientBlock, TemporalMesh};

/// Above this `A` the weights come from the power series in `1/A`; at or
/// below it from the forward recurrence.
pub const A_SWITCH: f64 = 1.25;

const SERIES_REL_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryWeightTable {
    pub alpha: f64,
    pub a: f64,
    /// `I_0 .. I_{i_max}`.
    pub values: Vec<f64>,
}

/// Weights `I_0 .. I_{i_max}` at `A >= 1`.
pub fn history_weights(i_max: usize, a: f64, alpha: f64) -> Result<HistoryWeightTable> {
    check_alpha(alpha)?;
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::domain("history_weights", format!("A = {a} must be >= 1")));
    }
    if alpha == 1.0 && a == 1.0 {
        return Err(Error::domain("history_weights", "I_0 diverges at A = 1 for alpha = 1"));
    }
    let values = if a <= A_SWITCH {
        recurrence(i_max, a, alpha)
    } else {
        series(i_max, a, alpha)
    };
    Ok(HistoryWeightTable { alpha, a, values })
}

pub(crate) fn recurrence(i_max: usize, a: f64, alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(i_max + 1);
    let beta = 1.0 - alpha;
    // (A - 1)^(1 - alpha); exactly 1 at alpha = 1 and exactly 0 at A = 1.
    let tail = if beta == 0.0 { 1.0 } else { (a - 1.0).powf(beta) };
    let i0 = if beta == 0.0 {
        a.ln() - (a - 1.0).ln()
    } else {
        (a.powf(beta) - tail) / beta
    };
    out.push(i0);
    for i in 1..=i_max {
        let fi = i as f64;
        let prev = out[i - 1];
        out.push((fi * a * prev - tail) / (fi + beta));
    }
    out
}

pub(crate) fn series(i_max: usize, a: f64, alpha: f64) -> Vec<f64> {
    let lead = a.powf(-alpha);
    (0..=i_max)
        .map(|i| {
            // (alpha)_n / (n! A^n)
            let mut coeff = 1.0;
            let mut sum = 1.0 / (i as f64 + 1.0);
            for n in 1..SERIES_MAX_TERMS {
                let nf = n as f64;
                coeff *= (alpha + nf - 1.0) / (nf * a);
                let term = coeff / (i as f64 + nf + 1.0);
                sum += term;
                if term < SERIES_REL_TOL * sum {
                    break;
                }
            }
            lead * sum
        })
        .collect()
}

// Gauss-Kronrod 7/15 nodes on [-1, 1] (positive half, descending) and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

/// One Kronrod estimate and its difference from the embedded Gauss rule.
fn gauss_kronrod(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive interval halving on `[lo, hi]` until the summed error estimate
/// is below `tol`. Returns `(value, error)`.
fn adaptive(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64, budget: &mut usize) -> Result<(f64, f64)> {
    let mut stack = vec![(lo, hi)];
    let mut value = 0.0;
    let mut error = 0.0;
    let width = hi - lo;
    while let Some((a, b)) = stack.pop() {
        let (v, e) = gauss_kronrod(f, a, b);
        let local = tol * (b - a) / width;
        // the Gauss/Kronrod difference cannot drop below roundoff
        let floor = 50.0 * f64::EPSILON * v.abs();
        if e <= local.max(floor) || b - a <= 1e-15 * width.max(1e-300) {
            value += v;
            error += e;
            continue;
        }
        if *budget == 0 {
            return Err(Error::Quadrature {
                tol,
                estimate: value + v,
                error: error + e,
            });
        }
        *budget -= 1;
        let mid = 0.5 * (a + b);
        stack.push((mid, b));
        stack.push((a, mid));
    }
    Ok((value, error))
}

/// Reference value of `I_i(A)` by adaptive quadrature, for validation.
///
/// `[0, 1]` is cut geometrically toward the kernel singularity at `u = 1`
/// (pieces `[1 - 2^-k, 1 - 2^-(k+1)]`) and each piece is integrated
/// adaptively. The last sliver `[1 - delta, 1]` is integrated exactly for
/// the kernel with `u^i` replaced by the midpoint of `[1 - i delta, 1]`.
pub fn history_weights_oracle(i: usize, a: f64, alpha: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(a >= 1.0 && a.is_finite()) {
        return Err(Error::domain("history_weights_oracle", format!("A = {a} must be >= 1")));
    }
    if alpha == 1.0 && a == 1.0 {
        return Err(Error::domain("history_weights_oracle", "divergent integral"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("history_weights_oracle", "tolerance must be positive"));
    }
    // In v = 1 - u the kernel argument A - 1 + v is formed without
    // cancellation, which matters on the short pieces near v = 0.
    let a1 = a - 1.0;
    let f = |v: f64| (1.0 - v).powi(i as i32) * (a1 + v).powf(-alpha);
    // int_0^d (A - 1 + v)^-alpha dv
    let kernel_tail = |d: f64| {
        if alpha == 1.0 {
            ((a1 + d) / a1).ln()
        } else {
            let b = 1.0 - alpha;
            ((a1 + d).powf(b) - a1.powf(b)) / b
        }
    };
    let mut budget = 200_000usize;
    let mut total = 0.0;
    let mut err = 0.0;
    let mut hi = 1.0;
    let mut d = 0.5;
    loop {
        let scale = gauss_kronrod(&f, d, hi).0.abs().max(total);
        let (v, e) = adaptive(&f, d, hi, tol * scale / 64.0, &mut budget)?;
        total += v;
        err += e;
        // On [0, d], (1 - d)^i <= (1 - v)^i <= 1, so replacing it by
        // 1 - i d / 2 is off by at most i d / 2 times the kernel integral.
        let sliver = kernel_tail(d);
        let freeze = 0.5 * i as f64 * d * sliver;
        if freeze <= 0.1 * tol * total {
            total += sliver * (1.0 - 0.5 * i as f64 * d);
            err += freeze;
            break;
        }
        hi = d;
        d *= 0.5;
        if d < 1e-300 {
            return Err(Error::Quadrature {
                tol,
                estimate: total,
                error: err,
            });
        }
    }
    if err > tol * total.abs() {
        return Err(Error::Quadrature {
            tol,
            estimate: total,
            error: err,
        });
    }
    Ok(total)
}

/// Memory contribution at the collocation time `t_k^ell` (1-based `k`,
/// 0-based `ell`) from intervals `1 .. k-1`; one value per spatial node.
pub fn caputo_history_term(
    mesh: &TemporalMesh,
    blocks: &[CoefficientBlock],
    rule: &CollocationRule,
    alpha: f64,
    k: usize,
    ell: usize,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if k == 0 || k > mesh.intervals() {
        return Err(Error::domain("caputo_history_term", format!("interval {k} out of range")));
    }
    let m = rule.order();
    if ell >= m {
        return Err(Error::domain("caputo_history_term", format!("collocation index {ell} >= {m}")));
    }
    if blocks.len() < k - 1 {
        return Err(Error::MissingBlock(blocks.len() + 1));
    }
    let n = blocks.first().map_or(0, CoefficientBlock::nodes);
    let t = mesh.collocation_time(k, rule.theta()[ell]);
    let mut out = vec![0.0; n];
    accumulate_history(mesh, &blocks[..k - 1], m, alpha, t, &mut out)?;
    Ok(out)
}

/// Adds the memory of `past` (intervals `1..=past.len()`) at time `t` to `out`.
pub(crate) fn accumulate_history(
    mesh: &TemporalMesh,
    past: &[CoefficientBlock],
    m: usize,
    alpha: f64,
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    let pref = reciprocal_gamma(1.0 - alpha)?;
    if pref == 0.0 {
        return Ok(());
    }
    let mut scaled = vec![0.0; m];
    for (j0, block) in past.iter().enumerate() {
        let j = j0 + 1;
        if block.order() != m || block.nodes() != out.len() {
            return Err(Error::DimensionMismatch {
                expected: m * out.len(),
                found: block.order() * block.nodes(),
            });
        }
        let tau = mesh.tau(j);
        let a = ((t - mesh.node(j - 1)) / tau).max(1.0);
        let w = history_weights(m - 1, a, alpha)?.values;
        let factor = pref * tau.powf(-alpha);
        for (i, s) in scaled.iter_mut().enumerate() {
            *s = factor * (i + 1) as f64 * w[i];
        }
        for (i, s) in scaled.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(block.row(i)) {
                *o += s * v;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_a_equal_one() {
        let w = history_weights(1, 1.0, 0.5).unwrap().values;
        assert!((w[0] - 2.0).abs() <= 1e-15);
        assert!((w[1] - 4.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn small_alpha_limit() {
        let w = history_weights(1, 2.0, 1e-12).unwrap().values;
        assert!((w[1] - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn oracle_examples() {
        assert!((history_weights_oracle(0, 1.0, 0.5, 1e-12).unwrap() - 2.0).abs() <= 1e-11);
        let far = history_weights_oracle(0, 1e6, 0.5, 1e-12).unwrap();
        assert!((far - 1e-3).abs() <= 1e-9);
        let r = history_weights_oracle(3, 1.5, 0.3, 1e-12).unwrap();
        let w = history_weights(3, 1.5, 0.3).unwrap().values[3];
        assert!((r - w).abs() <= 1e-10 * r);
    }

    #[test]
    fn branches_agree_at_switch() {
        for alpha in [0.1, 0.5, 0.9, 1.0] {
            let r = recurrence(20, A_SWITCH, alpha);
            let s = series(20, A_SWITCH, alpha);
            for (x, y) in r.iter().zip(&s) {
                assert!((x - y).abs() <= 1e-12 * y, "alpha={alpha}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(history_weights(2, 0.99, 0.5).is_err());
        assert!(history_weights(2, 2.0, 0.0).is_err());
        assert!(history_weights(2, 1.0, 1.0).is_err());
        assert!(history_weights_oracle(0, 1.0, 1.0, 1e-12).is_err());
    }
}
