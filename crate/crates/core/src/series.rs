//! Series and panel containers plus the correlogram primitives.
//!
//! The autocorrelation at lag `k` is computed as
//!
//! ```text
//! rho_k = sum_{t=1..n-k} (Y_t - Ybar)(Y_{t+k} - Ybar) / sum_{t=1..n} (Y_t - Ybar)^2
//! ```
//!
//! so the denominator always runs over the full sample. Lag 0 is identically 1
//! by this convention and is not included in returned correlograms. Partial
//! autocorrelations come from the Durbin-Levinson recursion on the sample ACF.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A single observed time series. Finite values, at least two observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "series needs at least 2 observations, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "series contains a non-finite value at index {pos}"
            )));
        }
        Ok(Series { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Sample variance with denominator n - 1.
    pub fn variance(&self) -> f64 {
        sample_variance(&self.values)
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// A rectangular collection of series observed on the same time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Panel {
    series: Vec<Series>,
    labels: Vec<String>,
}

impl Panel {
    pub fn new(series: Vec<Series>, labels: Vec<String>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::invalid("panel needs at least one series"));
        }
        if series.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        let t = series[0].len();
        for (i, s) in series.iter().enumerate() {
            if s.len() != t {
                return Err(Error::invalid(format!(
                    "series '{}' has length {} but the panel length is {t}",
                    labels[i],
                    s.len()
                )));
            }
        }
        for i in 0..labels.len() {
            if labels[i + 1..].contains(&labels[i]) {
                return Err(Error::invalid(format!("duplicate series label '{}'", labels[i])));
            }
        }
        Ok(Panel { series, labels })
    }

    pub fn series(&self) -> &[Series] {
        &self.series
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of series in the panel.
    pub fn width(&self) -> usize {
        self.series.len()
    }

    /// Number of observations per series.
    pub fn time_len(&self) -> usize {
        self.series[0].len()
    }
}

/// One lag of a correlogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelogramPoint {
    pub lag: usize,
    pub value: f64,
}

/// Two-standard-error band for a correlogram of a series of length `t`.
pub fn significance_limit(t: usize) -> f64 {
    2.0 / (t as f64).sqrt()
}

/// Sample autocorrelations for lags 1..=max_lag.
pub fn sample_acf(series: &Series, max_lag: usize) -> Result<Vec<CorrelogramPoint>> {
    let y = series.values();
    let n = y.len();
    if max_lag == 0 || max_lag >= n {
        return Err(Error::invalid(format!(
            "max_lag must be in 1..{} (series length {n}), got {max_lag}",
            n - 1
        )));
    }
    let m = mean(y);
    let denom: f64 = y.iter().map(|v| (v - m) * (v - m)).sum();
    if denom == 0.0 {
        return Err(Error::degenerate("constant series has no autocorrelation"));
    }
    let mut out = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num: f64 = (0..n - k).map(|t| (y[t] - m) * (y[t + k] - m)).sum();
        out.push(CorrelogramPoint { lag: k, value: num / denom });
    }
    Ok(out)
}

/// Sample partial autocorrelations for lags 1..=max_lag via Durbin-Levinson.
///
/// The lag-1 value equals the lag-1 autocorrelation exactly; later values are
/// the last coefficient of the successively extended autoregressions,
///
/// ```text
/// phi_{k,k} = (rho_k - sum_j phi_{k-1,j} rho_{k-j}) / (1 - sum_j phi_{k-1,j} rho_j)
/// ```
pub fn sample_pacf(series: &Series, max_lag: usize) -> Result<Vec<CorrelogramPoint>> {
    let acf = sample_acf(series, max_lag)?;
    let rho: Vec<f64> = acf.iter().map(|p| p.value).collect();

    let mut out = Vec::with_capacity(max_lag);
    // phi holds the coefficients of the order-(k-1) autoregression.
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let pkk = if k == 1 {
            rho[0]
        } else {
            let mut num = rho[k - 1];
            let mut den = 1.0;
            for j in 1..k {
                num -= phi[j - 1] * rho[k - 1 - j];
                den -= phi[j - 1] * rho[j - 1];
            }
            if den.abs() < 1e-12 {
                return Err(Error::degenerate(format!(
                    "partial autocorrelation recursion became singular at lag {k}"
                )));
            }
            num / den
        };
        let prev = phi.clone();
        phi.push(0.0);
        for j in 1..k {
            phi[j - 1] = prev[j - 1] - pkk * prev[k - 1 - j];
        }
        phi[k - 1] = pkk;
        out.push(CorrelogramPoint { lag: k, value: pkk });
    }
    Ok(out)
}

/// Pearson cross-correlation matrix of the panel series at lag 0.
///
/// Entry (i, j) correlates series i with series j; the diagonal is 1.
pub fn cross_correlation_matrix(panel: &Panel) -> Result<Vec<Vec<f64>>> {
    let k = panel.width();
    if k < 2 {
        return Err(Error::invalid("cross-correlation needs at least two series"));
    }
    let t = panel.time_len();
    let means: Vec<f64> = panel.series().iter().map(|s| s.mean()).collect();
    let mut sds = Vec::with_capacity(k);
    for (i, s) in panel.series().iter().enumerate() {
        let ss: f64 = s.values().iter().map(|v| (v - means[i]) * (v - means[i])).sum();
        if ss == 0.0 {
            return Err(Error::degenerate(format!(
                "series '{}' is constant, cross-correlation undefined",
                panel.labels()[i]
            )));
        }
        sds.push(ss.sqrt());
    }
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        out[i][i] = 1.0;
        for j in i + 1..k {
            let a = panel.series()[i].values();
            let b = panel.series()[j].values();
            let cov: f64 = (0..t).map(|idx| (a[idx] - means[i]) * (b[idx] - means[j])).sum();
            let r = cov / (sds[i] * sds[j]);
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_series(n: usize, seed: u64) -> Series {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Series::new((0..n).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    #[test]
    fn series_rejects_short_and_non_finite_input() {
        assert!(Series::new(vec![1.0]).is_err());
        assert!(Series::new(vec![1.0, f64::NAN]).is_err());
        assert!(Series::new(vec![1.0, f64::INFINITY, 2.0]).is_err());
        assert!(Series::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn panel_checks_shape_and_labels() {
        let a = Series::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = Series::new(vec![1.0, 2.0]).unwrap();
        assert!(Panel::new(vec![a.clone(), b], vec!["x".into(), "y".into()]).is_err());
        assert!(Panel::new(vec![a.clone(), a.clone()], vec!["x".into(), "x".into()]).is_err());
        assert!(Panel::new(vec![], vec![]).is_err());
        let p = Panel::new(vec![a.clone(), a], vec!["x".into(), "y".into()]).unwrap();
        assert_eq!(p.width(), 2);
        assert_eq!(p.time_len(), 3);
    }

    #[test]
    fn acf_alternating_sequence() {
        // Mean is 0, numerator at lag 1 is -3, full-sample denominator is 4.
        let s = Series::new(vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let acf = sample_acf(&s, 1).unwrap();
        assert_eq!(acf[0].lag, 1);
        assert_relative_eq!(acf[0].value, -0.75, epsilon = 1e-15);
    }

    #[test]
    fn acf_starts_at_lag_one() {
        // Lag 0 is 1 by definition and is deliberately not part of the output.
        let s = gaussian_series(50, 1);
        let acf = sample_acf(&s, 5).unwrap();
        assert_eq!(acf.len(), 5);
        assert_eq!(acf[0].lag, 1);
        assert_eq!(acf[4].lag, 5);
    }

    #[test]
    fn acf_of_white_noise_is_small() {
        let s = gaussian_series(10_000, 7);
        let acf = sample_acf(&s, 1).unwrap();
        assert!(acf[0].value.abs() < 0.05, "lag-1 acf {}", acf[0].value);
    }

    #[test]
    fn acf_rejects_bad_arguments() {
        let s = gaussian_series(20, 2);
        assert!(matches!(sample_acf(&s, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(sample_acf(&s, 20), Err(Error::InvalidArgument(_))));
        let c = Series::new(vec![3.0; 10]).unwrap();
        assert!(matches!(sample_acf(&c, 3), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn pacf_lag_one_equals_acf_lag_one() {
        let s = gaussian_series(300, 3);
        let acf = sample_acf(&s, 1).unwrap();
        let pacf = sample_pacf(&s, 1).unwrap();
        assert_relative_eq!(pacf[0].value, acf[0].value, epsilon = 1e-15);
    }

    #[test]
    fn pacf_of_ar1_cuts_off_after_lag_one() {
        // Y_t = 0.8 Y_{t-1} + e_t: lag-2 partial autocorrelation should sit
        // inside the two-standard-error band.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 5000;
        let mut y = vec![0.0f64; n + 200];
        for t in 1..y.len() {
            let e: f64 = rng.sample(StandardNormal);
            y[t] = 0.8 * y[t - 1] + e;
        }
        let s = Series::new(y[200..].to_vec()).unwrap();
        let pacf = sample_pacf(&s, 2).unwrap();
        assert!(pacf[0].value > 0.7);
        assert!(pacf[1].value.abs() < significance_limit(n));
    }

    #[test]
    fn white_noise_pacf_rarely_exceeds_the_band() {
        // Under independence roughly 5% of lags breach 2/sqrt(T); check the
        // exceedance fraction stays below 0.15 in at least 95% of trials.
        let trials = 200;
        let mut ok = 0;
        for seed in 0..trials {
            let s = gaussian_series(400, 1000 + seed);
            let pacf = sample_pacf(&s, 20).unwrap();
            let limit = significance_limit(400);
            let exceed = pacf.iter().filter(|p| p.value.abs() > limit).count();
            if exceed as f64 / 20.0 <= 0.15 {
                ok += 1;
            }
        }
        assert!(ok as f64 / trials as f64 >= 0.95, "only {ok}/{trials} trials inside");
    }

    #[test]
    fn significance_limit_values() {
        assert_relative_eq!(significance_limit(400), 0.1, epsilon = 1e-15);
        assert_relative_eq!(significance_limit(100), 0.2, epsilon = 1e-15);
        assert_relative_eq!(significance_limit(261), 0.12379689211803459, epsilon = 1e-12);
    }

    #[test]
    fn cross_correlation_trivial_cases() {
        let base = gaussian_series(100, 5);
        let negated = Series::new(base.values().iter().map(|v| -v).collect()).unwrap();
        let p = Panel::new(
            vec![base.clone(), base.clone(), negated],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let m = cross_correlation_matrix(&p).unwrap();
        assert_relative_eq!(m[0][1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(m[0][2], -1.0, epsilon = 1e-12);
        assert_relative_eq!(m[1][2], -1.0, epsilon = 1e-12);
        for i in 0..3 {
            assert_eq!(m[i][i], 1.0);
        }
    }

    #[test]
    fn cross_correlation_of_independent_series_is_small() {
        let a = gaussian_series(20_000, 21);
        let b = gaussian_series(20_000, 22);
        let p = Panel::new(vec![a, b], vec!["a".into(), "b".into()]).unwrap();
        let m = cross_correlation_matrix(&p).unwrap();
        assert!(m[0][1].abs() < 0.05);
    }

    #[test]
    fn cross_correlation_names_the_constant_series() {
        let a = gaussian_series(30, 9);
        let c = Series::new(vec![2.0; 30]).unwrap();
        let p = Panel::new(vec![a, c], vec!["good".into(), "flat".into()]).unwrap();
        match cross_correlation_matrix(&p) {
            Err(Error::DegenerateInput(msg)) => assert!(msg.contains("flat")),
            other => panic!("expected degenerate input, got {other:?}"),
        }
    }

    #[test]
    fn cross_correlation_requires_two_series() {
        let a = gaussian_series(30, 13);
        let p = Panel::new(vec![a], vec!["only".into()]).unwrap();
        assert!(matches!(cross_correlation_matrix(&p), Err(Error::InvalidArgument(_))));
    }
}
