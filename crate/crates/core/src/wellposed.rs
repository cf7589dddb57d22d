//! Well-posedness certificates for the collocation step.
//!
//! The step is uniquely solvable for every nonnegative self-adjoint spatial
//! operator when `M = M_alpha W^-1` has no real negative eigenvalue. The
//! eigenvalue test is complemented by positivity of the characteristic
//! polynomial `det(M_alpha - lambda W) = sum_j (-lambda)^j a_j`, a coercivity
//! (Lax-Milgram) test, a step-size test for scalar equations with a
//! time-dependent reaction coefficient, and a grid estimate of
//! `sup_{lambda >= 0} ||(M + lambda I)^-1||`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{build_matrices, vandermonde_det, CollocationMatrices, CollocationRule, PointFamily};
use crate::denselin::extended::{self, Dd, ExtMatrix};
use crate::denselin::{eigenvalues, symmetric_part_psd, ComplexValue, DenseMatrix, Lu};
use crate::error::{Error, Result};
use crate::specfun::check_alpha;

/// Largest order for which the subset expansion of the characteristic
/// polynomial is enumerated.
pub const MAX_SUBSET_ORDER: usize = 16;

/// Largest order accepted by the Faddeev-LeVerrier path.
pub const MAX_LEVERRIER_ORDER: usize = 20;

/// Tolerances that decide whether a computed eigenvalue counts as real and
/// as real negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `lambda` is real iff `|Im lambda| <= imag_rel * max(1, |lambda|)`.
    pub imag_rel: f64,
    /// A real `lambda` is negative iff `Re lambda < -neg_real`.
    pub neg_real: f64,
}

impl Default for Classification {
    fn default() -> Self {
        Self {
            imag_rel: 1e-8,
            neg_real: 1e-10,
        }
    }
}

impl Classification {
    pub fn is_real(&self, z: ComplexValue) -> bool {
        z.im.abs() <= self.imag_rel * z.norm().max(1.0)
    }

    pub fn is_real_negative(&self, z: ComplexValue) -> bool {
        self.is_real(z) && z.re < -self.neg_real
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub m: usize,
    pub alpha: f64,
    pub family: PointFamily,
    pub eigenvalues: Vec<ComplexValue>,
    pub has_real_negative: bool,
    pub all_real_parts_positive: bool,
    pub real_eigenvalue_count: usize,
    pub min_real_part: f64,
}

impl SpectrumReport {
    /// Classifies an already computed eigenvalue list.
    pub fn classify(
        family: PointFamily,
        alpha: f64,
        eigenvalues: Vec<ComplexValue>,
        cls: &Classification,
    ) -> Self {
        let min_real_part = eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        Self {
            m: eigenvalues.len(),
            alpha,
            family,
            has_real_negative: eigenvalues.iter().any(|&z| cls.is_real_negative(z)),
            all_real_parts_positive: eigenvalues.iter().all(|z| z.re > 0.0),
            real_eigenvalue_count: eigenvalues.iter().filter(|&&z| cls.is_real(z)).count(),
            min_real_part,
            eigenvalues,
        }
    }

    /// The real-negative eigenvalue of largest modulus, if any.
    pub fn worst_real_negative(&self, cls: &Classification) -> Option<f64> {
        self.eigenvalues
            .iter()
            .filter(|&&z| cls.is_real_negative(z))
            .map(|z| z.re)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }
}

/// Eigenvalues of `M` with the default classification.
pub fn spectrum(rule: &CollocationRule, alpha: f64) -> Result<SpectrumReport> {
    spectrum_with(rule, alpha, &Classification::default())
}

pub fn spectrum_with(
    rule: &CollocationRule,
    alpha: f64,
    cls: &Classification,
) -> Result<SpectrumReport> {
    let mats = build_matrices(rule, alpha)?;
    let ev = eigenvalues(&mats.m)?;
    Ok(SpectrumReport::classify(rule.family(), alpha, ev, cls))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharPolyReport {
    /// `a_0 .. a_m` with `det(M_alpha - lambda W) = sum_j (-lambda)^j a_j`.
    pub coefficients: Vec<f64>,
    pub all_positive: bool,
    /// `max_j |a_j - b_j| / |b_j|` against the Faddeev-LeVerrier values `b_j`.
    pub cross_check_residual: f64,
    /// The Faddeev-LeVerrier coefficients used for the cross-check.
    pub leverrier: Vec<f64>,
}

/// Characteristic-polynomial coefficients by expansion over column subsets.
///
/// `a_j` is the sum over all `I` with `#I = j` of the determinant of the
/// matrix whose columns `k in I` come from `W` and the others from
/// `M_alpha`. Each such determinant is `prod_{k not in I} c_k` times a
/// generalized Vandermonde determinant with exponents `k - alpha` (`k` not
/// in `I`) or `k` (`k in I`).
pub fn charpoly_subsets(rule: &CollocationRule, alpha: f64) -> Result<CharPolyReport> {
    check_alpha(alpha)?;
    let m = rule.order();
    if m > MAX_SUBSET_ORDER {
        return Err(Error::SizeCap {
            what: "subset expansion order",
            value: m,
            cap: MAX_SUBSET_ORDER,
        });
    }
    let mats = build_matrices(rule, alpha)?;
    let theta = rule.theta();
    // Columns of W and of D1 W (the power-rule factor c_k is applied outside).
    let int_col: Vec<Vec<Dd>> = (1..=m)
        .map(|k| theta.iter().map(|&t| Dd::from(t).powi(k as u32)).collect())
        .collect();
    let frac_col: Vec<Vec<Dd>> = (1..=m)
        .map(|k| {
            theta
                .iter()
                .map(|&t| {
                    if alpha == 1.0 {
                        Dd::from(t).powi(k as u32 - 1)
                    } else {
                        Dd::from(t).powi(k as u32 - 1) * Dd::from(t.powf(1.0 - alpha))
                    }
                })
                .collect()
        })
        .collect();
    let c: Vec<Dd> = mats.d2.iter().map(|&x| Dd::from(x)).collect();

    let dets: Vec<(usize, f64)> = (0u32..1 << m)
        .into_par_iter()
        .map(|mask| -> Result<(usize, f64)> {
            let mut a = ExtMatrix::zeros(m);
            let mut factor = Dd::ONE;
            for k in 0..m {
                let in_subset = mask & (1 << k) != 0;
                let col = if in_subset { &int_col[k] } else { &frac_col[k] };
                if !in_subset {
                    factor *= c[k];
                }
                for (l, v) in col.iter().enumerate() {
                    a.set(l, k, *v);
                }
            }
            let d = extended::det_scaled(a)?;
            Ok((mask.count_ones() as usize, (Dd::from(d) * factor).to_f64()))
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![Dd::ZERO; m + 1];
    for (j, d) in dets {
        sums[j] += Dd::from(d);
    }
    let coefficients: Vec<f64> = sums.into_iter().map(Dd::to_f64).collect();
    let leverrier = charpoly_leverrier(&mats)?;
    let cross_check_residual = coefficients
        .iter()
        .zip(&leverrier)
        .map(|(a, b)| if *b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() })
        .fold(0.0, f64::max);
    Ok(CharPolyReport {
        all_positive: coefficients.iter().all(|&a| a > 0.0),
        coefficients,
        cross_check_residual,
        leverrier,
    })
}

/// Characteristic-polynomial coefficients from the Faddeev-LeVerrier
/// recursion applied to `W^-1 M_alpha`, scaled by `det W`.
///
/// Runs in double-double. The nodes are read back from the first column of
/// `W` and the entries of `W` and `M_alpha` are rebuilt from them, so the
/// only `f64` roundings are those of `theta^(1 - alpha)` and `c_j`.
pub fn charpoly_leverrier(mats: &CollocationMatrices) -> Result<Vec<f64>> {
    let m = mats.order();
    if m > MAX_LEVERRIER_ORDER {
        return Err(Error::SizeCap {
            what: "Faddeev-LeVerrier order",
            value: m,
            cap: MAX_LEVERRIER_ORDER,
        });
    }
    let alpha = mats.alpha;
    let theta = mats.w.column(0);
    let mut w = ExtMatrix::zeros(m);
    let mut ma = ExtMatrix::zeros(m);
    for (l, &t) in theta.iter().enumerate() {
        let frac = if alpha == 1.0 { Dd::ONE } else { Dd::from(t.powf(1.0 - alpha)) };
        for k in 0..m {
            let p = Dd::from(t).powi(k as u32);
            w.set(l, k, p * Dd::from(t));
            ma.set(l, k, p * frac * Dd::from(mats.d2[k]));
        }
    }
    let b = extended::solve_matrix(&w, &ma)?;

    // det(lambda I - B) = sum_j p_j lambda^j with p_m = 1.
    let mut p = vec![Dd::ZERO; m + 1];
    p[m] = Dd::ONE;
    let mut mk = ExtMatrix::zeros(m);
    for k in 1..=m {
        // M_k = B M_{k-1} + p_{m-k+1} I
        let mut next = b.matmul(&mk);
        for i in 0..m {
            let v = next.at(i, i) + p[m - k + 1];
            next.set(i, i, v);
        }
        mk = next;
        p[m - k] = -(b.matmul(&mk).trace() / Dd::from(k as f64));
    }

    // det(M_alpha - lambda W) = det W (-1)^m det(lambda I - B), so
    // a_j = (-1)^(m - j) p_j det W.
    let rule = CollocationRule::custom(theta)?;
    let det_w = Dd::from(vandermonde_det(&rule));
    Ok((0..=m)
        .map(|j| {
            let v = p[j] * det_w;
            if (m - j) % 2 == 0 { v } else { -v }.to_f64()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaxMilgramReport {
    pub holds: bool,
    pub min_eigenvalue: f64,
    /// Tolerance the minimum eigenvalue was compared against.
    pub tolerance: f64,
}

/// Coercivity test: is the symmetric part of `W^T diag(d) W D2 / c_1`
/// positive semidefinite (up to `1e-12` times its norm)?
pub fn lax_milgram_check(rule: &CollocationRule, alpha: f64, d: &[f64]) -> Result<LaxMilgramReport> {
    let m = rule.order();
    if d.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: d.len(),
        });
    }
    if let Some(bad) = d.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain("lax_milgram_check", format!("weight {bad} is not positive")));
    }
    let mats = build_matrices(rule, alpha)?;
    let c1 = mats.d2[0];
    let d2_hat: Vec<f64> = mats.d2.iter().map(|c| c / c1).collect();
    let s = mats.w.transpose().matmul(&mats.w.scale_rows(d)).scale_cols(&d2_hat);
    let tolerance = 1e-12 * s.symmetric_part().inf_norm();
    let psd = symmetric_part_psd(&s, tolerance)?;
    Ok(LaxMilgramReport {
        holds: psd.psd,
        min_eigenvalue: psd.min_eigenvalue,
        tolerance,
    })
}

/// The explicit weight `D = diag(1, theta_1^3)` for the two-point rule
/// `(theta_1, 1)`; it is available iff `theta_1 <= 1 - alpha / 2`.
pub fn lax_milgram_d_m2(theta1: f64, alpha: f64) -> Result<Option<[f64; 2]>> {
    check_alpha(alpha)?;
    if !(theta1 > 0.0 && theta1 < 1.0) {
        return Err(Error::OutOfRange {
            value: theta1,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok((theta1 <= 1.0 - 0.5 * alpha).then(|| [1.0, theta1.powi(3)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepsizeReport {
    pub holds: bool,
    /// `||(D1 W D2)^-1 D_c W||_inf`.
    pub norm: f64,
    /// `tau^alpha * norm`; the test holds iff this is below 1.
    pub bound: f64,
}

/// Sufficient step-size condition for the scalar equation with reaction
/// coefficient samples `c_values[l] = c(theta_l)`.
pub fn ode_stepsize_check(
    rule: &CollocationRule,
    alpha: f64,
    tau: f64,
    c_values: &[f64],
) -> Result<StepsizeReport> {
    let mats = build_matrices(rule, alpha)?;
    stepsize_from_matrices(&mats, tau, c_values)
}

pub(crate) fn stepsize_from_matrices(
    mats: &CollocationMatrices,
    tau: f64,
    c_values: &[f64],
) -> Result<StepsizeReport> {
    let m = mats.order();
    if c_values.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: c_values.len(),
        });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::domain("ode_stepsize_check", format!("step {tau} must be positive")));
    }
    let rhs = mats.w.scale_rows(c_values);
    let norm = Lu::new(&mats.m_alpha)?.solve_matrix(&rhs)?.inf_norm();
    let bound = tau.powf(mats.alpha) * norm;
    Ok(StepsizeReport {
        holds: bound < 1.0,
        norm,
        bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventEstimate {
    /// Largest sampled `||(M + lambda I)^-1||_inf`; an estimate of the
    /// supremum, not a bound.
    pub c_m: f64,
    /// Where the largest value was seen.
    pub argmax_lambda: f64,
    /// Sampling: `0` plus `samples` log-spaced points in `[lambda_min, lambda_max]`.
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub samples: usize,
    /// `lambda_max * ||R(lambda_max)||`, which tends to 1.
    pub tail_value: f64,
    pub tail_verified: bool,
}

/// Grid estimate of `sup_{lambda >= 0} ||(M + lambda I)^-1||_inf`.
///
/// Defaults: `lambda_max = 1e6 ||M||`, `samples = 200`.
pub fn estimate_resolvent_bound(
    mats: &CollocationMatrices,
    lambda_max: Option<f64>,
    samples: Option<usize>,
) -> Result<ResolventEstimate> {
    let cls = Classification::default();
    let ev = eigenvalues(&mats.m)?;
    if let Some(z) = ev.iter().find(|&&z| cls.is_real_negative(z)) {
        return Err(Error::RealNegativeEigenvalue { value: z.re });
    }
    let norm_m = mats.m.inf_norm();
    let lambda_min = 1e-3 * norm_m;
    let lambda_max = lambda_max.unwrap_or(1e6 * norm_m);
    let samples = samples.unwrap_or(200).max(2);
    if !(lambda_max > lambda_min && lambda_max.is_finite()) {
        return Err(Error::domain(
            "estimate_resolvent_bound",
            format!("lambda_max {lambda_max} must exceed {lambda_min}"),
        ));
    }
    let ratio = (lambda_max / lambda_min).ln() / (samples - 1) as f64;
    let grid = std::iter::once(0.0).chain((0..samples).map(|i| {
        if i == samples - 1 {
            lambda_max
        } else {
            lambda_min * (ratio * i as f64).exp()
        }
    }));

    let mut c_m = 0.0;
    let mut argmax_lambda = 0.0;
    let mut last = 0.0;
    for lambda in grid {
        let r = resolvent_norm(&mats.m, lambda)?;
        if r > c_m {
            c_m = r;
            argmax_lambda = lambda;
        }
        last = r;
    }
    let tail_value = lambda_max * last;
    Ok(ResolventEstimate {
        c_m,
        argmax_lambda,
        lambda_min,
        lambda_max,
        samples,
        tail_value,
        tail_verified: (0.9..=1.1).contains(&tail_value),
    })
}

fn resolvent_norm(m: &DenseMatrix, lambda: f64) -> Result<f64> {
    let shifted = m.add_diagonal(lambda);
    let lu = Lu::new(&shifted).map_err(|_| Error::ResolventUndefined { lambda })?;
    if lu.pivot_ratio() < 1e-14 {
        return Err(Error::ResolventUndefined { lambda });
    }
    Ok(lu.inverse()?.inf_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collocation::make_points;
    use crate::specfun::caputo_power_coefficient;

    fn two_point(theta1: f64) -> CollocationRule {
        CollocationRule::custom(vec![theta1, 1.0]).unwrap()
    }

    /// Coefficients of the two-point polynomial from its closed form.
    fn m2_closed_form(t: f64, alpha: f64) -> [f64; 3] {
        let c1 = caputo_power_coefficient(1, alpha).unwrap();
        let c2 = caputo_power_coefficient(2, alpha).unwrap();
        let a2 = t * (1.0 - t);
        let a1 = c1 * (t.powf(1.0 - alpha) - t * t) + c2 * (t - t.powf(2.0 - alpha));
        let a0 = c1 * c2 * t.powf(1.0 - alpha) * (1.0 - t);
        [a0, a1, a2]
    }

    #[test]
    fn scalar_spectrum() {
        let r = make_points(PointFamily::Chebyshev, 1).unwrap();
        let s = spectrum(&r, 0.5).unwrap();
        assert_eq!(s.m, 1);
        assert!((s.eigenvalues[0].re - 1.128_379_167_1).abs() <= 1e-10);
        assert!(!s.has_real_negative && s.all_real_parts_positive);
        assert_eq!(s.real_eigenvalue_count, 1);
    }

    #[test]
    fn two_point_spectrum_and_coefficients() {
        let s = spectrum(&two_point(0.5), 0.5).unwrap();
        assert_eq!(s.real_eigenvalue_count, 0);
        assert!((s.eigenvalues[0].re - 1.472_239_013_114_837).abs() <= 1e-12);
        assert!((s.eigenvalues[1].im - 0.483_069_144_134_598).abs() <= 1e-12);
        assert_eq!(s.eigenvalues[0].conj(), s.eigenvalues[1]);

        let cp = charpoly_subsets(&two_point(0.5), 0.5).unwrap();
        let want = m2_closed_form(0.5, 0.5);
        for (a, w) in cp.coefficients.iter().zip(want) {
            assert!((a - w).abs() <= 1e-12 * w, "{a} vs {w}");
        }
        assert_eq!(cp.coefficients[2], 0.25);
        assert!((cp.coefficients[1] - 0.736_119_506_557_418_6).abs() <= 1e-12);
        assert!((cp.coefficients[0] - 0.600_210_877_438_070_7).abs() <= 1e-12);
        assert!(cp.all_positive && cp.cross_check_residual <= 1e-10);
    }

    #[test]
    fn scalar_charpoly() {
        for theta in [1.0] {
            let r = CollocationRule::custom(vec![theta]).unwrap();
            let cp = charpoly_subsets(&r, 0.5).unwrap();
            let c1 = caputo_power_coefficient(1, 0.5).unwrap();
            assert!((cp.coefficients[0] - c1).abs() <= 1e-15);
            assert_eq!(cp.coefficients[1], 1.0);
            let lv = charpoly_leverrier(&build_matrices(&r, 0.5).unwrap()).unwrap();
            assert!((lv[0] - c1).abs() <= 1e-15 && lv[1] == 1.0);
        }
    }

    #[test]
    fn subset_cap() {
        let r = make_points(PointFamily::Chebyshev, 17).unwrap();
        assert!(matches!(charpoly_subsets(&r, 0.5), Err(Error::SizeCap { .. })));
        assert!(charpoly_leverrier(&build_matrices(&r, 0.5).unwrap()).is_ok());
    }

    #[test]
    fn classical_limit_charpoly() {
        let r = make_points(PointFamily::Lobatto, 5).unwrap();
        let cp = charpoly_subsets(&r, 1.0).unwrap();
        assert!(cp.all_positive);
        assert!(cp.cross_check_residual <= 1e-10, "{}", cp.cross_check_residual);
    }

    #[test]
    fn lax_milgram_examples() {
        let rep = lax_milgram_check(&two_point(0.5), 0.5, &[1.0, 0.125]).unwrap();
        assert!(rep.holds && rep.min_eigenvalue > 0.0);
        // The 2x2 determinant condition, scaled by 4, is 0.034722.
        let c = 4.0 / 3.0;
        let (t, p) = (0.5f64, 0.125);
        let det4 = 4.0 * c * (t * t + p) * (t.powi(4) + p) - (1.0 + c).powi(2) * (t.powi(3) + p).powi(2);
        assert!((det4 - 0.034_722).abs() <= 1e-6);
        assert!(!lax_milgram_check(&two_point(0.9), 0.5, &[1.0, 0.729]).unwrap().holds);
        let one = CollocationRule::custom(vec![1.0]).unwrap();
        assert!(lax_milgram_check(&one, 0.3, &[2.0]).unwrap().holds);
        assert!(lax_milgram_check(&one, 0.3, &[0.0]).is_err());
    }

    #[test]
    fn lax_milgram_weights() {
        assert_eq!(lax_milgram_d_m2(0.5, 0.5).unwrap(), Some([1.0, 0.125]));
        let d = lax_milgram_d_m2(0.8, 0.4).unwrap().unwrap();
        assert!((d[1] - 0.512).abs() <= 1e-15);
        assert_eq!(lax_milgram_d_m2(0.9, 0.5).unwrap(), None);
        assert!(lax_milgram_d_m2(1.0, 0.5).is_err());
    }

    #[test]
    fn stepsize_examples() {
        let one = CollocationRule::custom(vec![1.0]).unwrap();
        let threshold = 4.0 / std::f64::consts::PI;
        assert!(ode_stepsize_check(&one, 0.5, 0.999 * threshold, &[1.0]).unwrap().holds);
        assert!(!ode_stepsize_check(&one, 0.5, 1.001 * threshold, &[1.0]).unwrap().holds);
        let zero = ode_stepsize_check(&two_point(0.5), 0.5, 1e9, &[0.0, 0.0]).unwrap();
        assert!(zero.holds && zero.norm == 0.0);
        assert!(ode_stepsize_check(&two_point(0.5), 0.5, 1e-6, &[1.0, 1.0]).unwrap().holds);
    }

    #[test]
    fn resolvent_examples() {
        let one = CollocationRule::custom(vec![1.0]).unwrap();
        let est = estimate_resolvent_bound(&build_matrices(&one, 0.5).unwrap(), None, None).unwrap();
        assert!((est.c_m - 0.886_227).abs() <= 1e-6);
        assert_eq!(est.argmax_lambda, 0.0);
        assert!(est.tail_verified);
        let mats = build_matrices(&two_point(0.5), 0.5).unwrap();
        let est = estimate_resolvent_bound(&mats, None, None).unwrap();
        assert!(est.tail_verified);
        let inv = Lu::new(&mats.m).unwrap().inverse().unwrap().inf_norm();
        assert!(est.c_m >= inv);
    }
}
