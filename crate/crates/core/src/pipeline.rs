//! The two-pass shared-volatility analysis for panels of dependent series.
//!
//! The panel model is K autoregressions driven by one common innovation
//! process with conditional heteroscedasticity. Averaging the per-series AR
//! residuals with weights inversely proportional to the AR coefficients
//! concentrates the average on the series least contaminated by their own
//! dynamics, which makes the common volatility process recoverable even
//! though no single series reveals it cleanly. The pipeline is:
//!
//! 1. identify and fit an AR model per series (first pass);
//! 2. build normalized inverse-coefficient weights (or equal weights);
//! 3. average the residuals, aligned on their trailing timestamps;
//! 4. test the average for volatility clustering (McLeod-Li); if present,
//!    select and fit one shared GARCH model on it;
//! 5. subtract the averaged residual from each series and re-identify and
//!    refit (second pass); the final coefficient estimates average the two
//!    passes;
//! 6. check the shared fit (Li-Mak, normal Q-Q) and summarize the
//!    cross-correlation of squared first-pass residuals.
//!
//! A GARCH step that fails or is vetoed by McLeod-Li downgrades the run to
//! an AR-only report with a warning instead of failing the pipeline.

use crate::ar::{fit_ar, identify_ar_order, ArFit};
use crate::diagnostics::{
    li_mak, mcleod_li, qq_diagnostic, qq_normal, DiagnosticResult, QqData,
};
use crate::error::{Error, Result};
use crate::garch::{
    identify_garch_order_seeded, GarchCandidate, GarchFit, DEFAULT_GARCH_CANDIDATES,
};
use crate::seed::derive_seed;
use crate::series::{cross_correlation_matrix, CorrelogramPoint, Panel, Series};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How residuals are combined across series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Inverse-coefficient weights w_i = 1 / max(|phi_i1|, 0.01).
    Weighted,
    /// Equal weights 1/K.
    Unweighted,
}

/// Tuning knobs for [`run_pipeline`]. The defaults reproduce the reference
/// analysis; the master seed only feeds the GARCH multi-start jitter, so two
/// runs with the same data, config and seed are bit-identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub weighting: Weighting,
    pub significance_level: f64,
    pub max_identification_lag: usize,
    pub ar_order_cap: usize,
    pub garch_candidates: Vec<(usize, usize)>,
    pub master_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            weighting: Weighting::Weighted,
            significance_level: 0.05,
            max_identification_lag: crate::ar::DEFAULT_MAX_IDENTIFICATION_LAG,
            ar_order_cap: crate::ar::DEFAULT_AR_ORDER_CAP,
            garch_candidates: DEFAULT_GARCH_CANDIDATES.to_vec(),
            master_seed: 0,
        }
    }
}

/// Coefficient magnitudes below this are clamped before inversion, capping
/// any single weight at 100 before normalization.
pub const WEIGHT_CLAMP: f64 = 0.01;

/// Normalized, non-negative series weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    values: Vec<f64>,
}

impl Weights {
    pub fn uniform(k: usize) -> Self {
        Weights { values: vec![1.0 / k as f64; k] }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Inverse-coefficient weights from the first AR coefficient of each series.
/// Signs are discarded; magnitudes below [`WEIGHT_CLAMP`] (including the
/// zero recorded for order-0 series) are clamped up to it.
pub fn compute_weights(first_coefficients: &[f64]) -> Weights {
    let raw: Vec<f64> =
        first_coefficients.iter().map(|phi| 1.0 / phi.abs().max(WEIGHT_CLAMP)).collect();
    let total: f64 = raw.iter().sum();
    Weights { values: raw.iter().map(|w| w / total).collect() }
}

/// Pointwise weighted average of equal-length residual series.
pub fn average_residuals(residuals: &[&[f64]], weights: &Weights) -> Result<Vec<f64>> {
    if residuals.is_empty() {
        return Err(Error::invalid("no residual series to average"));
    }
    if residuals.len() != weights.values().len() {
        return Err(Error::invalid(format!(
            "{} residual series but {} weights",
            residuals.len(),
            weights.values().len()
        )));
    }
    let len = residuals[0].len();
    if len == 0 {
        return Err(Error::invalid("residual series are empty"));
    }
    if residuals.iter().any(|r| r.len() != len) {
        return Err(Error::invalid("residual series must share one length"));
    }
    let mut out = vec![0.0f64; len];
    for (r, w) in residuals.iter().zip(weights.values()) {
        for (acc, v) in out.iter_mut().zip(*r) {
            *acc += w * v;
        }
    }
    Ok(out)
}

/// Identify and fit an AR model for every series in the panel.
pub fn first_pass(panel: &Panel, config: &PipelineConfig) -> Result<Vec<ArFit>> {
    let (fits, _) = fit_panel(panel.series(), panel.labels(), config, false)?;
    Ok(fits)
}

/// Fit the whole panel. In lenient mode a series whose identification or
/// estimation degenerates is refit as mean-only instead of failing the run;
/// the second pass needs this because subtracting η̄̂ can leave a series
/// with no structure at all (an order-0 first pass on a panel of identical
/// series leaves exactly the constant mean), and "nothing left to model" is
/// a conclusion there, not an error.
fn fit_panel(
    series: &[Series],
    labels: &[String],
    config: &PipelineConfig,
    lenient: bool,
) -> Result<(Vec<ArFit>, Vec<String>)> {
    let fits: Vec<(Result<ArFit>, bool)> = series
        .par_iter()
        .map(|s| {
            let max_order = config.max_identification_lag.min(s.len().saturating_sub(1));
            let attempt = identify_ar_order(s, max_order, config.ar_order_cap)
                .and_then(|order| fit_ar(s, order));
            match attempt {
                Err(Error::DegenerateInput(_)) | Err(Error::FitFailure(_)) if lenient => {
                    (fit_ar(s, 0), true)
                }
                other => (other, false),
            }
        })
        .collect();
    let mut out = Vec::with_capacity(fits.len());
    let mut fallbacks = Vec::new();
    for ((fit, fell_back), label) in fits.into_iter().zip(labels) {
        if fell_back {
            fallbacks.push(label.clone());
        }
        out.push(fit.map_err(|e| e.for_series(label))?);
    }
    Ok((out, fallbacks))
}

fn first_coefficient(fit: &ArFit) -> f64 {
    fit.spec.coefficients.first().copied().unwrap_or(0.0)
}

/// Align residual series of unequal length on their trailing timestamps.
fn aligned_residuals<'a>(fits: &'a [ArFit]) -> (usize, Vec<&'a [f64]>) {
    let common = fits.iter().map(|f| f.residuals.len()).min().unwrap_or(0);
    let slices = fits
        .iter()
        .map(|f| &f.residuals[f.residuals.len() - common..])
        .collect();
    (common, slices)
}

/// The estimated model for one series, without the bulky residual vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PassSummary {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub intercept: f64,
    pub intercept_se: f64,
}

impl From<&ArFit> for PassSummary {
    fn from(fit: &ArFit) -> Self {
        PassSummary {
            order: fit.fitted_order,
            coefficients: fit.spec.coefficients.clone(),
            standard_errors: fit.coefficient_standard_errors.clone(),
            intercept: fit.spec.intercept,
            intercept_se: fit.intercept_se,
        }
    }
}

/// Everything the pipeline concluded about a single series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesReport {
    pub label: String,
    pub weight: f64,
    pub first_pass: PassSummary,
    pub second_pass: PassSummary,
    /// Pass-averaged coefficients over the overlapping leading lags.
    pub final_coefficients: Vec<f64>,
    /// 0.5 * sqrt(se1^2 + se2^2) per averaged coefficient.
    pub final_standard_errors: Vec<f64>,
    /// Single-pass estimates, the pre-averaging baseline this method replaces.
    pub legacy_coefficients: Vec<f64>,
    pub legacy_standard_errors: Vec<f64>,
    pub order_agreement: bool,
}

/// The shared GARCH fit on the averaged residual, with its selection table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarchSection {
    pub selected: (usize, usize),
    pub candidates: Vec<GarchCandidate>,
    pub fit: GarchFit,
    pub squared_acf: Vec<CorrelogramPoint>,
    pub squared_pacf: Vec<CorrelogramPoint>,
}

/// Histogram bin over the off-diagonal cross-correlations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Summary of the K x K cross-correlation matrix of squared first-pass
/// residuals. High off-diagonal mass is what justifies pooling the panel
/// into one shared volatility model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCorrelationSummary {
    pub series_count: usize,
    pub mean_offdiagonal: f64,
    pub median_offdiagonal: f64,
    pub min_offdiagonal: f64,
    pub max_offdiagonal: f64,
    pub histogram: Vec<HistogramBin>,
}

fn summarize_cross_correlation(matrix: &[Vec<f64>]) -> CrossCorrelationSummary {
    let k = matrix.len();
    let mut offdiag = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            offdiag.push(matrix[i][j]);
        }
    }
    offdiag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = offdiag.len();
    let mean = offdiag.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        offdiag[n / 2]
    } else {
        0.5 * (offdiag[n / 2 - 1] + offdiag[n / 2])
    };

    const BINS: usize = 40;
    let mut histogram: Vec<HistogramBin> = (0..BINS)
        .map(|b| HistogramBin {
            low: -1.0 + 2.0 * b as f64 / BINS as f64,
            high: -1.0 + 2.0 * (b + 1) as f64 / BINS as f64,
            count: 0,
        })
        .collect();
    for r in &offdiag {
        let idx = (((r + 1.0) / 2.0 * BINS as f64) as usize).min(BINS - 1);
        histogram[idx].count += 1;
    }

    CrossCorrelationSummary {
        series_count: k,
        mean_offdiagonal: mean,
        median_offdiagonal: median,
        min_offdiagonal: offdiag[0],
        max_offdiagonal: offdiag[n - 1],
        histogram,
    }
}

/// Full output of [`run_pipeline`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub weighting: Weighting,
    pub significance_level: f64,
    pub series: Vec<SeriesReport>,
    pub weights: Weights,
    /// Weighted average of the aligned first-pass residuals.
    pub averaged_residuals: Vec<f64>,
    pub mcleod_li: DiagnosticResult,
    pub garch: Option<GarchSection>,
    pub li_mak: Option<DiagnosticResult>,
    pub qq: Option<QqData>,
    pub qq_check: Option<DiagnosticResult>,
    pub cross_correlation: Option<CrossCorrelationSummary>,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    /// All diagnostic verdicts the run produced, in execution order.
    pub fn diagnostics(&self) -> Vec<&DiagnosticResult> {
        let mut out = vec![&self.mcleod_li];
        if let Some(d) = &self.li_mak {
            out.push(d);
        }
        if let Some(d) = &self.qq_check {
            out.push(d);
        }
        out
    }
}

/// Run the complete two-pass analysis on a panel.
pub fn run_pipeline(panel: &Panel, config: &PipelineConfig) -> Result<PipelineReport> {
    if config.garch_candidates.is_empty() {
        return Err(Error::invalid("GARCH candidate set must not be empty"));
    }
    let mut warnings = Vec::new();
    let k = panel.width();
    let t = panel.time_len();

    // Pass one: per-series AR models on the raw data.
    let (first_fits, _) = fit_panel(panel.series(), panel.labels(), config, false)?;
    let first_coefs: Vec<f64> = first_fits.iter().map(first_coefficient).collect();

    let weights = match config.weighting {
        Weighting::Weighted => {
            let clamped = first_coefs.iter().filter(|c| c.abs() < WEIGHT_CLAMP).count();
            if clamped > 0 {
                warnings.push(format!(
                    "inverse-coefficient weights clamped for {clamped} of {k} series \
                     with |phi| below {WEIGHT_CLAMP}"
                ));
            }
            compute_weights(&first_coefs)
        }
        Weighting::Unweighted => Weights::uniform(k),
    };

    let (common_len, residual_slices) = aligned_residuals(&first_fits);
    if common_len < 8 {
        return Err(Error::degenerate(format!(
            "only {common_len} aligned residual observations; too short to analyze"
        )));
    }
    let eta_bar = average_residuals(&residual_slices, &weights)?;
    let eta_bar_series = Series::new(eta_bar.clone())?;

    // Gate the volatility model on actual evidence of clustering.
    let diag_lag = config.max_identification_lag.min(common_len / 2 - 1).max(5);
    let mcleod = mcleod_li(&eta_bar_series, diag_lag, config.significance_level)?;

    let garch = if mcleod.reject_null {
        match identify_garch_order_seeded(
            &eta_bar,
            &config.garch_candidates,
            derive_seed(config.master_seed, 0xA11C),
        ) {
            Ok(sel) => Some(GarchSection {
                selected: sel.selected,
                candidates: sel.candidates,
                fit: sel.best_fit,
                squared_acf: sel.squared_acf,
                squared_pacf: sel.squared_pacf,
            }),
            Err(e) => {
                warnings.push(format!(
                    "volatility model dropped, continuing with the AR-only report: {e}"
                ));
                None
            }
        }
    } else {
        warnings.push(
            "McLeod-Li found no volatility clustering in the averaged residuals; \
             GARCH step skipped"
                .to_string(),
        );
        None
    };

    // Pass two: remove the shared residual and refit each series over the
    // aligned trailing window.
    let offset = t - common_len;
    let second_series: Vec<Series> = panel
        .series()
        .iter()
        .map(|s| {
            let vals: Vec<f64> = s.values()[offset..]
                .iter()
                .zip(&eta_bar)
                .map(|(y, e)| y - e)
                .collect();
            Series::new(vals)
        })
        .collect::<Result<_>>()?;
    let (second_fits, fallbacks) = fit_panel(&second_series, panel.labels(), config, true)?;
    if !fallbacks.is_empty() {
        let shown: Vec<&str> = fallbacks.iter().take(3).map(|s| s.as_str()).collect();
        let suffix = if fallbacks.len() > 3 { ", ..." } else { "" };
        warnings.push(format!(
            "second pass left {} of {k} series with nothing to model beyond the mean \
             ({}{suffix}); refit as mean-only",
            fallbacks.len(),
            shown.join(", ")
        ));
    }

    let mut series_reports = Vec::with_capacity(k);
    let mut disagreements = 0usize;
    for i in 0..k {
        let f1 = &first_fits[i];
        let f2 = &second_fits[i];
        let overlap = f1.fitted_order.min(f2.fitted_order);
        let final_coefficients: Vec<f64> = (0..overlap)
            .map(|j| 0.5 * (f1.spec.coefficients[j] + f2.spec.coefficients[j]))
            .collect();
        let final_standard_errors: Vec<f64> = (0..overlap)
            .map(|j| {
                let a = f1.coefficient_standard_errors[j];
                let b = f2.coefficient_standard_errors[j];
                0.5 * (a * a + b * b).sqrt()
            })
            .collect();
        let order_agreement = f1.fitted_order == f2.fitted_order;
        if !order_agreement {
            disagreements += 1;
        }
        series_reports.push(SeriesReport {
            label: panel.labels()[i].clone(),
            weight: weights.values()[i],
            first_pass: PassSummary::from(f1),
            second_pass: PassSummary::from(f2),
            final_coefficients,
            final_standard_errors,
            legacy_coefficients: f1.spec.coefficients.clone(),
            legacy_standard_errors: f1.coefficient_standard_errors.clone(),
            order_agreement,
        });
    }
    if disagreements > 0 {
        warnings.push(format!(
            "AR order changed between passes for {disagreements} of {k} series; \
             their final coefficients average the overlapping lags only"
        ));
    }

    // Diagnostics on the shared fit.
    let (li_mak_result, qq, qq_check) = match &garch {
        Some(section) => {
            let std_resid = Series::new(section.fit.standardized_residuals.clone())?;
            let (p, q) = section.selected;
            let lm = li_mak(&std_resid, diag_lag.max(p + q + 2), p, q, config.significance_level)?;
            let qq_data = qq_normal(&std_resid)?;
            let qq_d = qq_diagnostic(&qq_data, config.significance_level);
            (Some(lm), Some(qq_data), Some(qq_d))
        }
        None => (None, None, None),
    };

    // Cross-correlation of squared residuals, the panel-pooling evidence.
    let cross_correlation = if k >= 2 {
        let squared: Result<Vec<Series>> = residual_slices
            .iter()
            .map(|r| Series::new(r.iter().map(|v| v * v).collect()))
            .collect();
        match squared.and_then(|sq| {
            let labels = panel.labels().to_vec();
            let sq_panel = Panel::new(sq, labels)?;
            cross_correlation_matrix(&sq_panel)
        }) {
            Ok(matrix) => Some(summarize_cross_correlation(&matrix)),
            Err(e) => {
                warnings.push(format!("cross-correlation summary unavailable: {e}"));
                None
            }
        }
    } else {
        None
    };

    Ok(PipelineReport {
        weighting: config.weighting,
        significance_level: config.significance_level,
        series: series_reports,
        weights,
        averaged_residuals: eta_bar,
        mcleod_li: mcleod,
        garch,
        li_mak: li_mak_result,
        qq,
        qq_check,
        cross_correlation,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar::{simulate_ar, ArSpec};
    use crate::garch::{fit_garch_seeded, simulate_garch, GarchSpec};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn study_garch() -> GarchSpec {
        GarchSpec::new(0.1, vec![0.2], vec![0.5]).unwrap()
    }

    /// Panel of AR(1) series all driven by one shared GARCH innovation path.
    fn shared_panel(phis: &[f64], t: usize, seed: u64) -> (Panel, Vec<f64>) {
        let (eta_full, _) = simulate_garch(&study_garch(), t + 200, seed).unwrap();
        let mut series = Vec::new();
        let mut labels = Vec::new();
        for (i, phi) in phis.iter().enumerate() {
            let spec = ArSpec::new(vec![*phi], 0.0).unwrap();
            let y = simulate_ar(&spec, &eta_full).unwrap();
            series.push(Series::new(y[200..].to_vec()).unwrap());
            labels.push(format!("series_{i:03}"));
        }
        (Panel::new(series, labels).unwrap(), eta_full[200..].to_vec())
    }

    #[test]
    fn weights_invert_coefficients() {
        let w = compute_weights(&[0.5, 0.25]);
        assert_relative_eq!(w.values()[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(w.values()[1], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn weights_clamp_tiny_coefficients() {
        let w = compute_weights(&[0.001, 0.5]);
        assert_relative_eq!(w.values()[0], 100.0 / 102.0, epsilon = 1e-12);
        assert_relative_eq!(w.values()[1], 2.0 / 102.0, epsilon = 1e-12);
    }

    #[test]
    fn weights_discard_signs_and_sum_to_one() {
        let w = compute_weights(&[-0.5, 0.25, -0.008, 0.9]);
        assert!(w.values().iter().all(|v| *v > 0.0));
        assert_relative_eq!(w.values().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn averaging_is_a_convex_combination() {
        let a = [1.0, 2.0, 3.0];
        let b = [3.0, 2.0, 1.0];
        let avg = average_residuals(&[&a, &b], &Weights::uniform(2)).unwrap();
        assert_eq!(avg, vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn averaging_validates_shapes() {
        let a = [1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        assert!(average_residuals(&[&a, &b], &Weights::uniform(2)).is_err());
        assert!(average_residuals(&[], &Weights::uniform(0)).is_err());
        assert!(average_residuals(&[&a], &Weights::uniform(2)).is_err());
    }

    #[test]
    fn identical_series_average_to_their_common_residual() {
        // Every series identical means every first-pass fit is identical, and
        // any convex weighting returns the common residual vector exactly.
        let (eta_full, _) = simulate_garch(&study_garch(), 500, 3).unwrap();
        let spec = ArSpec::new(vec![0.6], 0.0).unwrap();
        let y = simulate_ar(&spec, &eta_full).unwrap();
        let s = Series::new(y[200..].to_vec()).unwrap();
        let panel = Panel::new(
            vec![s.clone(), s.clone(), s.clone()],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let config = PipelineConfig::default();
        let fits = first_pass(&panel, &config).unwrap();
        assert_eq!(fits[0].spec, fits[1].spec);
        let coefs: Vec<f64> = fits.iter().map(|f| f.spec.coefficients[0]).collect();
        let w = compute_weights(&coefs);
        let slices: Vec<&[f64]> = fits.iter().map(|f| f.residuals.as_slice()).collect();
        let avg = average_residuals(&slices, &w).unwrap();
        for (a, r) in avg.iter().zip(&fits[0].residuals) {
            assert_relative_eq!(a, r, epsilon = 1e-10);
        }
    }

    #[test]
    fn pipeline_runs_end_to_end_on_a_shared_volatility_panel() {
        let phis: Vec<f64> = (0..30).map(|i| 0.3 + 0.02 * i as f64).collect();
        let (panel, _) = shared_panel(&phis, 300, 11);
        let report = run_pipeline(&panel, &PipelineConfig::default()).unwrap();
        assert_eq!(report.series.len(), 30);
        assert!(report.mcleod_li.reject_null, "volatility should be detected");
        let garch = report.garch.as_ref().expect("GARCH section present");
        assert!(DEFAULT_GARCH_CANDIDATES.contains(&garch.selected));
        assert!(report.li_mak.is_some());
        assert!(report.qq.is_some());
        assert!(report.cross_correlation.is_some());
        let weight_sum: f64 = report.weights.values().iter().sum();
        assert_relative_eq!(weight_sum, 1.0, epsilon = 1e-12);
        for s in &report.series {
            assert_eq!(s.final_coefficients.len(), s.final_standard_errors.len());
            assert_eq!(s.legacy_coefficients, s.first_pass.coefficients);
        }
    }

    #[test]
    fn pipeline_is_deterministic() {
        let phis: Vec<f64> = (0..10).map(|i| 0.4 + 0.04 * i as f64).collect();
        let (panel, _) = shared_panel(&phis, 300, 21);
        let config = PipelineConfig::default();
        let a = run_pipeline(&panel, &config).unwrap();
        let b = run_pipeline(&panel, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn pipeline_recovers_the_shared_residual_on_identical_panels() {
        let (panel, _) = shared_panel(&[0.5, 0.5, 0.5, 0.5], 400, 31);
        // All series share phi and innovations, so they are identical and the
        // averaged residual equals each series' own residual vector.
        let config = PipelineConfig::default();
        let fits = first_pass(&panel, &config).unwrap();
        let report = run_pipeline(&panel, &config).unwrap();
        let expect = &fits[0].residuals;
        let offset = expect.len() - report.averaged_residuals.len();
        for (a, r) in report.averaged_residuals.iter().zip(&expect[offset..]) {
            assert_relative_eq!(a, r, epsilon = 1e-10);
        }
    }

    #[test]
    fn pure_ar_panels_downgrade_to_ar_only() {
        // Independent Gaussian innovations per series: no shared volatility,
        // so McLeod-Li should veto the GARCH step. The veto is itself a
        // statistical test that trips on noise a little over a tenth of the
        // time, so run several panels and demand a clear majority downgrade.
        let mut downgraded = 0;
        let runs = 8;
        for base_seed in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(77 + base_seed);
            let mut series = Vec::new();
            let mut labels = Vec::new();
            for i in 0..12 {
                let e: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
                let spec = ArSpec::new(vec![0.5], 0.0).unwrap();
                let y = simulate_ar(&spec, &e).unwrap();
                series.push(Series::new(y[200..].to_vec()).unwrap());
                labels.push(format!("series_{i:03}"));
            }
            let panel = Panel::new(series, labels).unwrap();
            let report = run_pipeline(&panel, &PipelineConfig::default()).unwrap();
            assert_eq!(report.series.len(), 12);
            if !report.mcleod_li.reject_null {
                assert!(report.garch.is_none());
                assert!(report.li_mak.is_none());
                assert!(report.qq.is_none());
                assert!(report.warnings.iter().any(|w| w.contains("GARCH step skipped")));
                downgraded += 1;
            }
        }
        assert!(downgraded >= 6, "only {downgraded}/{runs} panels downgraded");
    }

    #[test]
    fn single_series_panel_matches_direct_fits() {
        let (panel, _) = shared_panel(&[0.6], 400, 41);
        let config = PipelineConfig::default();
        let report = run_pipeline(&panel, &config).unwrap();
        assert!(report.cross_correlation.is_none());

        // A one-series panel is just: fit the AR, then fit the GARCH on its
        // residuals.
        let order = report.series[0].first_pass.order;
        let fit = fit_ar(&panel.series()[0], order).unwrap();
        assert_relative_eq!(
            report.series[0].first_pass.coefficients[0],
            fit.spec.coefficients[0],
            epsilon = 1e-12
        );
        if let Some(g) = &report.garch {
            let direct = fit_garch_seeded(
                &fit.residuals,
                g.selected.0,
                g.selected.1,
                crate::seed::derive_seed(config.master_seed, 0xA11C),
            )
            .unwrap();
            assert_relative_eq!(g.fit.spec.omega, direct.spec.omega, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_order_permutation_leaves_the_average_unchanged() {
        let phis = [0.3, 0.5, 0.7, 0.2];
        let (panel, _) = shared_panel(&phis, 300, 51);
        let config = PipelineConfig::default();
        let report = run_pipeline(&panel, &config).unwrap();

        let perm = [2usize, 0, 3, 1];
        let series: Vec<Series> = perm.iter().map(|&i| panel.series()[i].clone()).collect();
        let labels: Vec<String> = perm.iter().map(|&i| panel.labels()[i].clone()).collect();
        let permuted = Panel::new(series, labels).unwrap();
        let report2 = run_pipeline(&permuted, &config).unwrap();

        for (a, b) in report.averaged_residuals.iter().zip(&report2.averaged_residuals) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        for (pos, &orig) in perm.iter().enumerate() {
            assert_relative_eq!(
                report2.weights.values()[pos],
                report.weights.values()[orig],
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn empty_candidate_set_is_rejected() {
        let (panel, _) = shared_panel(&[0.5, 0.6], 300, 61);
        let config = PipelineConfig {
            garch_candidates: vec![],
            ..PipelineConfig::default()
        };
        assert!(run_pipeline(&panel, &config).is_err());
    }
}
