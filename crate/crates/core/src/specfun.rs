//! Gamma function and the Caputo power-rule coefficients.
//!
//! Only positive arguments occur here: the largest one is `j + 1 - alpha`
//! for the highest collocation order, so a fixed Lanczos sum is enough.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum for `x >= 1`; no argument checks.
fn lanczos(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    // w^(z + 1/2) split in two halves so that large z stays finite.
    let half = w.powf(0.5 * z + 0.25);
    (2.0 * std::f64::consts::PI).sqrt() * half * (half * (-w).exp()) * sum
}

/// Gamma function for positive finite arguments.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("gamma", format!("argument {x} must be positive and finite")));
    }
    if x.fract() == 0.0 && x <= 31.0 {
        // (x - 1)! exactly; every factorial up to 22! is representable.
        return Ok((1..x as u64).fold(1.0, |acc, k| acc * k as f64));
    }
    if x < 1.0 {
        // Gamma(x) = Gamma(x + 1) / x keeps the Lanczos sum in its accurate range.
        Ok(lanczos(x + 1.0) / x)
    } else {
        Ok(lanczos(x))
    }
}

/// `1 / Gamma(x)` extended by zero at `x = 0`, which is what the memory
/// prefactor `1 / Gamma(1 - alpha)` needs in the classical limit `alpha = 1`.
pub fn reciprocal_gamma(x: f64) -> Result<f64> {
    if x == 0.0 {
        Ok(0.0)
    } else {
        gamma(x).map(f64::recip)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("alpha", format!("{alpha} is not in (0, 1]")))
    }
}

/// Coefficient `c_j = Gamma(j + 1) / Gamma(j + 1 - alpha)` of the power rule
/// `D^alpha t^j = c_j t^(j - alpha)`.
pub fn caputo_power_coefficient(j: usize, alpha: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::domain("caputo_power_coefficient", "j must be at least 1"));
    }
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(j as f64);
    }
    let jf = j as f64;
    Ok(gamma(jf + 1.0)? / gamma(jf + 1.0 - alpha)?)
}

/// Caputo derivative of `t^p` (real `p >= 0`) at `t > 0`.
pub fn caputo_power(p: f64, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p < 0.0 {
        return Err(Error::domain("caputo_power", format!("negative power {p}")));
    }
    let coeff = gamma(p + 1.0)? / gamma(p + 1.0 - alpha)?;
    Ok(coeff * t.powf(p - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // Reference values from a 30-digit evaluation.
    const REFERENCE: [(f64, f64); 12] = [
        (0.001, 999.423_772_484_595_466_11),
        (0.1, 9.513_507_698_668_731_836_3),
        (0.5, 1.772_453_850_905_516_027_3),
        (1.5, 0.886_226_925_452_758_013_65),
        (2.5, 1.329_340_388_179_137_020_5),
        (3.7, 4.170_651_783_796_603_165_4),
        (7.25, 1_155.381_013_919_989_687_2),
        (10.3, 716_430.689_062_375_244_55),
        (17.9, 267_228_695_810_197.450_64),
        (25.5, 3.086_770_540_528_696_782_8e24),
        (31.5, 1.470_922_564_714_727_123_3e33),
        (32.0, 8.222_838_654_177_922_817_7e33),
    ];

    #[test]
    fn gamma_matches_reference() {
        for (x, want) in REFERENCE {
            let got = gamma(x).unwrap();
            assert!(rel(got, want) <= 1e-13, "gamma({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn gamma_at_integers_and_half() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert!(rel(gamma(5.0).unwrap(), 24.0) <= 1e-14);
        assert!(rel(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt()) <= 1e-14);
    }

    #[test]
    fn gamma_rejects_bad_arguments() {
        for x in [0.0, -1.5, f64::NAN, f64::INFINITY] {
            assert!(matches!(gamma(x), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn power_coefficients() {
        assert_eq!(caputo_power_coefficient(1, 1.0).unwrap(), 1.0);
        assert!(rel(caputo_power_coefficient(1, 0.5).unwrap(), 1.128_379_167_095_512_573_9) <= 1e-13);
        assert!(rel(caputo_power_coefficient(2, 0.5).unwrap(), 1.504_505_556_127_350_098_5) <= 1e-13);
        assert!(rel(caputo_power_coefficient(20, 0.3).unwrap(), 2.469_342_029_014_793_126) <= 1e-13);
        for j in 1..=32 {
            assert_eq!(caputo_power_coefficient(j, 1.0).unwrap(), j as f64);
            for alpha in [0.01, 0.3, 0.77, 0.999] {
                assert!(caputo_power_coefficient(j, alpha).unwrap() > 0.0);
            }
        }
        assert!(caputo_power_coefficient(0, 0.5).is_err());
        assert!(caputo_power_coefficient(1, 0.0).is_err());
        assert!(caputo_power_coefficient(1, 1.2).is_err());
    }

    #[test]
    fn power_rule_limits() {
        assert_eq!(caputo_power(0.0, 0.4, 2.0).unwrap(), 0.0);
        // D^1 t^3 = 3 t^2
        assert!(rel(caputo_power(3.0, 1.0, 2.0).unwrap(), 12.0) <= 1e-14);
        assert_eq!(reciprocal_gamma(0.0).unwrap(), 0.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn recurrence(x in 0.1f64..30.0) {
                let lhs = gamma(x + 1.0).unwrap();
                let rhs = x * gamma(x).unwrap();
                prop_assert!((lhs - rhs).abs() / lhs <= 1e-13);
            }

            #[test]
            fn coefficient_ratio(alpha in 1e-6f64..1.0) {
                let c1 = caputo_power_coefficient(1, alpha).unwrap();
                let c2 = caputo_power_coefficient(2, alpha).unwrap();
                let want = 2.0 / (2.0 - alpha);
                prop_assert!((c2 / c1 - want).abs() <= 1e-12 * want);
            }
        }
    }
}
