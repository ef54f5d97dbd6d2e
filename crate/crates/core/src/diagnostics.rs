//! Residual diagnostics: portmanteau tests and the normal Q-Q construction.
//!
//! Three portmanteau variants share the Ljung-Box statistic
//!
//! ```text
//! Q(m) = T (T + 2) sum_{k=1..m} acf_k^2 / (T - k)
//! ```
//!
//! and differ in what they are applied to and how many degrees of freedom the
//! reference chi-square loses:
//!
//! * `ljung_box` works on the series itself, df = m - fitted_df;
//! * `mcleod_li` works on the squared series, df = m, and aggregates its
//!   per-lag p-values into a single verdict: the null is rejected when the
//!   fraction of lags significant at the configured level itself exceeds
//!   that level;
//! * `li_mak` works on squared standardized residuals of a fitted GARCH(p, q),
//!   df = m - (p + q), and rejects on the p-value at the widest lag.
//!
//! Lags whose adjusted degrees of freedom would be zero or negative are not
//! evaluated, so every reported p-value is a genuine chi-square tail value.

use crate::error::{Error, Result};
use crate::series::{sample_acf, Series};
use crate::stats::{chi_square_sf, normal_pdf, normal_quantile};
use serde::{Deserialize, Serialize};

/// Which diagnostic produced a [`DiagnosticResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    LjungBox,
    McLeodLi,
    LiMak,
    QqNormal,
}

/// Outcome of one diagnostic test over a range of lags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticResult {
    pub test: TestKind,
    /// Lags at which the statistic was evaluated.
    pub lags: Vec<usize>,
    /// Q statistic per evaluated lag (empty for the Q-Q check).
    pub statistics: Vec<f64>,
    /// Chi-square tail probability per evaluated lag.
    pub p_values: Vec<f64>,
    pub reject_null: bool,
    pub significance_level: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Ljung-Box white-noise test, evaluated at every lag m in
/// `fitted_df + 1 ..= max_lag` with df = m - fitted_df. The null is rejected
/// when the p-value at the widest lag falls below `alpha`.
pub fn ljung_box(
    series: &Series,
    max_lag: usize,
    fitted_df: usize,
    alpha: f64,
) -> Result<DiagnosticResult> {
    check_alpha(alpha)?;
    if fitted_df >= max_lag {
        return Err(Error::invalid(format!(
            "max_lag ({max_lag}) must exceed the fitted degrees of freedom ({fitted_df})"
        )));
    }
    let t = series.len() as f64;
    let acf = sample_acf(series, max_lag)?;

    let mut lags = Vec::new();
    let mut statistics = Vec::new();
    let mut p_values = Vec::new();
    let mut q = 0.0;
    for point in &acf {
        let k = point.lag;
        q += point.value * point.value / (t - k as f64);
        if k <= fitted_df {
            continue;
        }
        let stat = t * (t + 2.0) * q;
        let df = (k - fitted_df) as f64;
        lags.push(k);
        statistics.push(stat);
        p_values.push(chi_square_sf(stat, df));
    }
    let reject = *p_values.last().expect("at least one lag evaluated") < alpha;
    Ok(DiagnosticResult {
        test: TestKind::LjungBox,
        lags,
        statistics,
        p_values,
        reject_null: reject,
        significance_level: alpha,
    })
}

/// McLeod-Li test for conditional heteroscedasticity: Ljung-Box applied to
/// the squared series.
///
/// The aggregate decision follows the k-out-of-n rule: with k of the n
/// evaluated lags significant at `alpha`, the null of no ARCH effect is
/// rejected when k/n > alpha. This trades a little single-lag power for
/// robustness to the strong dependence between overlapping Q statistics.
pub fn mcleod_li(residuals: &Series, max_lag: usize, alpha: f64) -> Result<DiagnosticResult> {
    check_alpha(alpha)?;
    let squared = Series::new(residuals.values().iter().map(|v| v * v).collect())?;
    let base = ljung_box(&squared, max_lag, 0, alpha)?;
    let n = base.p_values.len() as f64;
    let k = base.p_values.iter().filter(|p| **p < alpha).count() as f64;
    Ok(DiagnosticResult {
        test: TestKind::McLeodLi,
        reject_null: k / n > alpha,
        ..base
    })
}

/// Li-Mak portmanteau test on the squared standardized residuals of a fitted
/// GARCH(p, q). The p + q estimated dynamic coefficients are removed from the
/// degrees of freedom; the decision uses the widest lag.
pub fn li_mak(
    standardized_residuals: &Series,
    max_lag: usize,
    p: usize,
    q: usize,
    alpha: f64,
) -> Result<DiagnosticResult> {
    check_alpha(alpha)?;
    let fitted = p + q;
    if fitted >= max_lag {
        return Err(Error::invalid(format!(
            "max_lag ({max_lag}) must exceed p + q ({fitted})"
        )));
    }
    let squared =
        Series::new(standardized_residuals.values().iter().map(|v| v * v).collect())?;
    let base = ljung_box(&squared, max_lag, fitted, alpha)?;
    Ok(DiagnosticResult {
        test: TestKind::LiMak,
        ..base
    })
}

/// Data behind a normal Q-Q plot of a standardized sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QqData {
    /// Standard-normal quantiles at the plotting positions (i - 0.5) / T.
    pub theoretical: Vec<f64>,
    /// Sorted, standardized sample values.
    pub sample: Vec<f64>,
    /// Pointwise 95% band around the identity line.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl QqData {
    /// Fraction of points falling inside the envelope.
    pub fn envelope_coverage(&self) -> f64 {
        let inside = self
            .sample
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .filter(|(s, (lo, hi))| **s >= **lo && **s <= **hi)
            .count();
        inside as f64 / self.sample.len() as f64
    }
}

/// Normal Q-Q data with a pointwise 95% envelope.
///
/// The sample is centered on its mean and scaled so that its centered sum of
/// squares matches that of the theoretical quantile grid. Scaling against the
/// grid rather than to unit variance makes the construction exact: feeding in
/// the quantile grid itself lands every point on the identity line, and any
/// affine map of the input leaves the output unchanged. The envelope is the
/// usual order-statistic band, z_i +/- 1.96 sqrt(p_i (1 - p_i) / T) / pdf(z_i).
pub fn qq_normal(sample: &Series) -> Result<QqData> {
    let n = sample.len();
    let t = n as f64;
    let theoretical: Vec<f64> =
        (1..=n).map(|i| normal_quantile((i as f64 - 0.5) / t)).collect();

    let mean = sample.mean();
    let centered_ss: f64 = sample.values().iter().map(|v| (v - mean) * (v - mean)).sum();
    if centered_ss == 0.0 {
        return Err(Error::degenerate("constant sample has no quantile spread"));
    }
    let grid_ss: f64 = theoretical.iter().map(|z| z * z).sum();
    let scale = (centered_ss / grid_ss).sqrt();

    let mut standardized: Vec<f64> =
        sample.values().iter().map(|v| (v - mean) / scale).collect();
    standardized.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for (i, z) in theoretical.iter().enumerate() {
        let p = (i as f64 + 0.5) / t;
        let se = (p * (1.0 - p) / t).sqrt() / normal_pdf(*z);
        lower.push(z - 1.959963984540054 * se);
        upper.push(z + 1.959963984540054 * se);
    }

    Ok(QqData { theoretical, sample: standardized, lower, upper })
}

/// Summarize a Q-Q construction as a pass/fail diagnostic: flag departure
/// from normality when fewer than 90% of the points stay inside the 95%
/// envelope.
pub fn qq_diagnostic(qq: &QqData, alpha: f64) -> DiagnosticResult {
    let coverage = qq.envelope_coverage();
    DiagnosticResult {
        test: TestKind::QqNormal,
        lags: vec![],
        statistics: vec![],
        p_values: vec![],
        reject_null: coverage < 0.9,
        significance_level: alpha,
    }
}
