//! Spectrum scans over families, orders and fractional orders.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{make_points, PointFamily};
use crate::error::{Error, Result};
use crate::wellposed::{spectrum_with, Classification, SpectrumReport, MAX_LEVERRIER_ORDER};

/// Default cap on the scanned order.
pub const DEFAULT_M_MAX: usize = MAX_LEVERRIER_ORDER;

/// `0.05, 0.10, ..., 0.95`.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// `n` equispaced interior points of `(0, 1)`.
pub fn alpha_sweep(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Spectra of one family and order at several `alpha`, in input order.
pub fn spectrum_sweep(
    family: PointFamily,
    m: usize,
    alphas: &[f64],
    cls: &Classification,
) -> Result<Vec<SpectrumReport>> {
    let rule = make_points(family, m)?;
    alphas.par_iter().map(|&a| spectrum_with(&rule, a, cls)).collect()
}

/// Summary of one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub family: PointFamily,
    pub m: usize,
    pub alpha: f64,
    pub has_real_negative: bool,
    pub all_real_parts_positive: bool,
    pub min_real_part: f64,
    pub real_eigenvalue_count: usize,
    /// Odd `m`: exactly one real eigenvalue, positive. Even `m`: none.
    pub parity_holds: bool,
}

impl ScanRow {
    pub fn from_report(rep: &SpectrumReport, cls: &Classification) -> Self {
        let parity_holds = if rep.m % 2 == 1 {
            let real: Vec<_> = rep.eigenvalues.iter().filter(|&&z| cls.is_real(z)).collect();
            real.len() == 1 && real[0].re > 0.0
        } else {
            rep.real_eigenvalue_count == 0
        };
        Self {
            family: rep.family,
            m: rep.m,
            alpha: rep.alpha,
            has_real_negative: rep.has_real_negative,
            all_real_parts_positive: rep.all_real_parts_positive,
            min_real_part: rep.min_real_part,
            real_eigenvalue_count: rep.real_eigenvalue_count,
            parity_holds,
        }
    }
}

/// Aggregates over all rows of one family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: PointFamily,
    pub no_real_negative: bool,
    pub all_real_parts_positive: bool,
    pub some_negative_real_parts: bool,
    pub parity: bool,
    pub min_real_part: f64,
    /// `(m, alpha)` pairs where the parity pattern fails.
    pub parity_failures: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub m_max: usize,
    pub alphas: Vec<f64>,
    pub classification: Classification,
    pub families: Vec<FamilySummary>,
    /// Sorted by family, `m`, `alpha`.
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    /// True iff no scanned spectrum contains a real negative eigenvalue.
    pub fn no_real_negative(&self) -> bool {
        self.families.iter().all(|f| f.no_real_negative)
    }

    pub fn family(&self, family: PointFamily) -> Option<&FamilySummary> {
        self.families.iter().find(|f| f.family == family)
    }
}

/// Scans every `(family, m, alpha)` with `m = 1..=m_max`, one task per tuple.
pub fn scan(
    families: &[PointFamily],
    m_max: usize,
    alphas: &[f64],
    cls: &Classification,
    cap: usize,
) -> Result<ScanReport> {
    if m_max == 0 || m_max > cap {
        return Err(Error::SizeCap {
            what: "scanned order m",
            value: m_max,
            cap,
        });
    }
    if families.is_empty() || alphas.is_empty() {
        return Err(Error::Config("scan needs at least one family and one alpha".into()));
    }
    let mut families = families.to_vec();
    families.sort();
    families.dedup();
    let tuples: Vec<(PointFamily, usize, f64)> = families
        .iter()
        .flat_map(|&f| (1..=m_max).flat_map(move |m| alphas.iter().map(move |&a| (f, m, a))))
        .collect();
    let mut rows = tuples
        .par_iter()
        .map(|&(f, m, a)| {
            let rule = make_points(f, m)?;
            Ok(ScanRow::from_report(&spectrum_with(&rule, a, cls)?, cls))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| {
        (x.family, x.m)
            .cmp(&(y.family, y.m))
            .then(x.alpha.total_cmp(&y.alpha))
    });
    let families = families
        .iter()
        .map(|&family| {
            let of: Vec<&ScanRow> = rows.iter().filter(|r| r.family == family).collect();
            FamilySummary {
                family,
                no_real_negative: of.iter().all(|r| !r.has_real_negative),
                all_real_parts_positive: of.iter().all(|r| r.all_real_parts_positive),
                some_negative_real_parts: of.iter().any(|r| r.min_real_part < 0.0),
                parity: of.iter().all(|r| r.parity_holds),
                min_real_part: of.iter().map(|r| r.min_real_part).fold(f64::INFINITY, f64::min),
                parity_failures: of.iter().filter(|r| !r.parity_holds).map(|r| (r.m, r.alpha)).collect(),
            }
        })
        .collect();
    Ok(ScanReport {
        m_max,
        alphas: alphas.to_vec(),
        classification: *cls,
        families,
        rows,
    })
}
