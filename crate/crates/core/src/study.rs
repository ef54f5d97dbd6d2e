//! Monte-Carlo studies of the pipeline on synthetic panels.
//!
//! Each scenario fixes a panel width K, a rule for drawing the per-series AR
//! coefficients, one GARCH process for the shared innovations, and a
//! replication count. Every replication simulates a fresh panel in which all
//! K series are driven by the *same* GARCH innovation path, runs the full
//! pipeline on it, and scores the estimates against the simulation truth.
//! The three stock scenarios:
//!
//! * `study1-k20` / `study1-k100` / `study1-k400`: phi fixed at 0.05 for
//!   every series, equal weights. Probes how panel width sharpens the
//!   recovery of a weak common signal.
//! * `study2`: phi drawn from U(0.7, 0.9), K = 400, equal weights. Strongly
//!   autocorrelated series whose own dynamics mask the shared volatility.
//! * `study3`: half the panel from U(0.01, 0.05), half from U(0.7, 0.9),
//!   K = 400, inverse-coefficient weights. The mixed design where weighting
//!   by 1/|phi| earns its keep.
//!
//! Seeding is hierarchical: replication r uses `derive_seed(master, r)`, and
//! within a replication separate streams draw the coefficients and the
//! innovation path, so summaries are reproducible bit for bit.

use crate::ar::{simulate_ar, ArSpec};
use crate::error::{Error, Result};
use crate::garch::{simulate_garch, GarchSpec};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineReport, Weighting};
use crate::seed::derive_seed;
use crate::series::{Panel, Series};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Observations dropped from the front of every simulated path so the
/// process forgets its artificial starting state.
pub const SIMULATION_BURN_IN: usize = 200;

/// How a scenario assigns the AR(1) coefficient of each series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum PhiRule {
    /// Every series gets the same coefficient.
    Fixed { value: f64 },
    /// Coefficients drawn independently from U(low, high).
    Uniform { low: f64, high: f64 },
    /// First half of the panel from U(low.0, low.1), second half from
    /// U(high.0, high.1).
    Mixed { low: (f64, f64), high: (f64, f64) },
}

/// Coefficient-regime label attached to each simulated series, so summary
/// statistics can be split by which half of a mixed panel a series sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Fixed,
    Low,
    High,
}

/// One Monte-Carlo experiment: panel shape, coefficient rule, shared GARCH
/// process, weighting mode, and replication budget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyScenario {
    pub name: String,
    pub series_count: usize,
    pub series_length: usize,
    pub phi_rule: PhiRule,
    pub garch: GarchSpec,
    pub weighting: Weighting,
    pub replications: usize,
    pub master_seed: u64,
}

fn stock_garch() -> GarchSpec {
    GarchSpec::new(0.1, vec![0.2], vec![0.5]).expect("stock parameters are valid")
}

impl StudyScenario {
    /// Look up a stock scenario by name. Returns `None` for unknown names.
    pub fn preset(name: &str) -> Option<StudyScenario> {
        let (series_count, phi_rule, weighting) = match name {
            "study1-k20" => (20, PhiRule::Fixed { value: 0.05 }, Weighting::Unweighted),
            "study1-k100" => (100, PhiRule::Fixed { value: 0.05 }, Weighting::Unweighted),
            "study1-k400" => (400, PhiRule::Fixed { value: 0.05 }, Weighting::Unweighted),
            "study2" => (
                400,
                PhiRule::Uniform { low: 0.7, high: 0.9 },
                Weighting::Unweighted,
            ),
            "study3" => (
                400,
                PhiRule::Mixed { low: (0.01, 0.05), high: (0.7, 0.9) },
                Weighting::Weighted,
            ),
            _ => return None,
        };
        Some(StudyScenario {
            name: name.to_string(),
            series_count,
            series_length: 300,
            phi_rule,
            garch: stock_garch(),
            weighting,
            replications: 50,
            master_seed: 1,
        })
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["study1-k20", "study1-k100", "study1-k400", "study2", "study3"]
    }

    /// Check every field, including ranges a hand-written scenario file
    /// could violate. Construction through serde bypasses the usual
    /// constructors, so this runs again at the start of every study entry
    /// point.
    pub fn validate(&self) -> Result<()> {
        if self.series_count == 0 {
            return Err(Error::invalid("scenario needs at least one series"));
        }
        if self.series_length < 50 {
            return Err(Error::invalid("scenario series length must be at least 50"));
        }
        if self.replications == 0 {
            return Err(Error::invalid("scenario needs at least one replication"));
        }
        GarchSpec::new(
            self.garch.omega,
            self.garch.alpha.clone(),
            self.garch.beta.clone(),
        )?;
        match &self.phi_rule {
            PhiRule::Fixed { value } => check_phi_range(*value, *value)?,
            PhiRule::Uniform { low, high } => check_phi_range(*low, *high)?,
            PhiRule::Mixed { low, high } => {
                check_phi_range(low.0, low.1)?;
                check_phi_range(high.0, high.1)?;
            }
        }
        Ok(())
    }
}

fn check_phi_range(low: f64, high: f64) -> Result<()> {
    if !(low.is_finite() && high.is_finite()) || low > high {
        return Err(Error::invalid(format!(
            "coefficient range [{low}, {high}] is not an interval"
        )));
    }
    if low.abs() >= 1.0 || high.abs() >= 1.0 {
        return Err(Error::invalid(format!(
            "coefficient range [{low}, {high}] leaves the stationary region"
        )));
    }
    Ok(())
}

/// Everything the simulator knows that the pipeline is not told.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelGroundTruth {
    /// Per-series true AR coefficients (one per series, each AR(1) here).
    pub phi: Vec<f64>,
    pub regimes: Vec<Regime>,
    /// The shared innovation path eta_t, after burn-in.
    pub eta: Vec<f64>,
    /// The conditional standard deviation path sigma_t, after burn-in.
    pub sigma: Vec<f64>,
    /// The underlying iid N(0,1) shocks eta_t / sigma_t.
    pub epsilon: Vec<f64>,
}

fn draw_phis(rule: &PhiRule, k: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<Regime>) {
    match rule {
        PhiRule::Fixed { value } => (vec![*value; k], vec![Regime::Fixed; k]),
        PhiRule::Uniform { low, high } => {
            let phis: Vec<f64> = (0..k).map(|_| rng.gen_range(*low..=*high)).collect();
            let regime = if 0.5 * (low + high) < 0.5 { Regime::Low } else { Regime::High };
            (phis, vec![regime; k])
        }
        PhiRule::Mixed { low, high } => {
            let half = k / 2;
            let mut phis = Vec::with_capacity(k);
            let mut regimes = Vec::with_capacity(k);
            for _ in 0..half {
                phis.push(rng.gen_range(low.0..=low.1));
                regimes.push(Regime::Low);
            }
            for _ in half..k {
                phis.push(rng.gen_range(high.0..=high.1));
                regimes.push(Regime::High);
            }
            (phis, regimes)
        }
    }
}

/// Simulate one replication's panel together with its ground truth.
///
/// All series share the innovation path from one GARCH simulation; each is
/// an AR(1) on top of it with its own coefficient. The first
/// [`SIMULATION_BURN_IN`] observations of every path are discarded.
pub fn generate_panel(
    scenario: &StudyScenario,
    replication: usize,
) -> Result<(Panel, PanelGroundTruth)> {
    scenario.validate()?;
    let rep_seed = derive_seed(scenario.master_seed, replication as u64);
    let mut phi_rng = ChaCha8Rng::seed_from_u64(derive_seed(rep_seed, 1));
    let (phis, regimes) = draw_phis(&scenario.phi_rule, scenario.series_count, &mut phi_rng);

    let total = scenario.series_length + SIMULATION_BURN_IN;
    let (eta_full, sigma_full) =
        simulate_garch(&scenario.garch, total, derive_seed(rep_seed, 2))?;

    let mut series = Vec::with_capacity(scenario.series_count);
    let mut labels = Vec::with_capacity(scenario.series_count);
    for (i, phi) in phis.iter().enumerate() {
        let spec = ArSpec::new(vec![*phi], 0.0)?;
        let y = simulate_ar(&spec, &eta_full)?;
        series.push(Series::new(y[SIMULATION_BURN_IN..].to_vec())?);
        labels.push(format!("series_{i:03}"));
    }
    let panel = Panel::new(series, labels)?;

    let eta = eta_full[SIMULATION_BURN_IN..].to_vec();
    let sigma = sigma_full[SIMULATION_BURN_IN..].to_vec();
    let epsilon: Vec<f64> = eta.iter().zip(&sigma).map(|(e, s)| e / s).collect();
    Ok((panel, PanelGroundTruth { phi: phis, regimes, eta, sigma, epsilon }))
}

/// Squared-error summary for one coefficient regime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: Regime,
    pub series_count: usize,
    /// Mean squared error of the pass-averaged coefficient estimates.
    pub mse_final: f64,
    /// Mean squared error of the single-pass estimates, for comparison.
    pub mse_first_pass: f64,
    pub bias_final: f64,
}

/// Count of replications that selected a given GARCH order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderCount {
    pub p: usize,
    pub q: usize,
    pub count: usize,
}

/// Mean AIC of one candidate order across the replications where it fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AicSummary {
    pub p: usize,
    pub q: usize,
    pub fitted_replications: usize,
    pub mean_aic: f64,
}

/// Aggregate results of a study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudySummary {
    pub scenario: String,
    pub weighting: Weighting,
    pub replications: usize,
    pub series_count: usize,
    pub series_length: usize,
    /// MSE of the pass-averaged coefficients over all series and replications.
    pub phi_mse: f64,
    pub phi_mse_first_pass: f64,
    pub phi_bias: f64,
    pub per_regime: Vec<RegimeSummary>,
    /// Replications whose pipeline produced a shared GARCH fit.
    pub garch_fitted_replications: usize,
    pub mcleod_li_rejection_rate: f64,
    pub garch_orders_selected: Vec<OrderCount>,
    pub aic_comparison: Vec<AicSummary>,
    /// Mean over replications of corr(fitted sigma, true sigma).
    pub sigma_correlation: Option<f64>,
    /// Mean over replications of RMSE(fitted sigma, true sigma).
    pub sigma_rmse: Option<f64>,
    /// Mean over replications of the Q-Q envelope coverage of the
    /// standardized residuals.
    pub qq_envelope_coverage: Option<f64>,
}

/// One scatter-plot row: a single series' truth and estimates in one
/// replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiScatterRow {
    pub replication: usize,
    pub label: String,
    pub regime: Regime,
    pub phi_true: f64,
    pub phi_first_pass: f64,
    pub phi_final: f64,
}

/// Histogram bin of final coefficient estimates for one regime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiDensityBin {
    pub regime: Regime,
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// One time point of the volatility-overlay plot from the first replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaOverlayRow {
    pub time: usize,
    pub sigma_true: f64,
    pub sigma_fitted: f64,
}

/// Plot-ready data accompanying a [`StudySummary`].
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct StudyArtifacts {
    /// True versus fitted conditional standard deviation, first replication.
    pub sigma_overlay: Vec<SigmaOverlayRow>,
    /// Q-Q points of the standardized residuals, first replication.
    pub qq_theoretical: Vec<f64>,
    pub qq_sample: Vec<f64>,
    pub qq_lower: Vec<f64>,
    pub qq_upper: Vec<f64>,
    /// Truth/estimate pairs for every series in every replication.
    pub phi_scatter: Vec<PhiScatterRow>,
    /// Distribution of the final estimates, split by regime.
    pub phi_density: Vec<PhiDensityBin>,
}

struct ReplicationOutcome {
    replication: usize,
    per_series: Vec<(String, Regime, f64, f64, f64)>,
    selected_order: Option<(usize, usize)>,
    candidate_aics: Vec<(usize, usize, Option<f64>)>,
    mcleod_rejected: bool,
    sigma_correlation: Option<f64>,
    sigma_rmse: Option<f64>,
    qq_coverage: Option<f64>,
    sigma_overlay: Vec<SigmaOverlayRow>,
    qq_data: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)>,
}

fn final_first_coefficient(report: &PipelineReport, i: usize) -> f64 {
    report.series[i].final_coefficients.first().copied().unwrap_or(0.0)
}

fn first_pass_first_coefficient(report: &PipelineReport, i: usize) -> f64 {
    report.series[i].first_pass.coefficients.first().copied().unwrap_or(0.0)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - ma) * (y - mb);
        da += (x - ma) * (x - ma);
        db += (y - mb) * (y - mb);
    }
    num / (da * db).sqrt()
}

fn run_replication(
    scenario: &StudyScenario,
    config: &PipelineConfig,
    replication: usize,
    keep_overlay: bool,
) -> Result<ReplicationOutcome> {
    let (panel, truth) = generate_panel(scenario, replication)?;
    let report = run_pipeline(&panel, config)
        .map_err(|e| Error::fit(format!("replication {replication}: {e}")))?;

    let per_series: Vec<(String, Regime, f64, f64, f64)> = (0..scenario.series_count)
        .map(|i| {
            (
                report.series[i].label.clone(),
                truth.regimes[i],
                truth.phi[i],
                first_pass_first_coefficient(&report, i),
                final_first_coefficient(&report, i),
            )
        })
        .collect();

    let mut sigma_correlation = None;
    let mut sigma_rmse = None;
    let mut sigma_overlay = Vec::new();
    if let Some(g) = &report.garch {
        let fitted_sd: Vec<f64> =
            g.fit.conditional_variances.iter().map(|v| v.sqrt()).collect();
        let offset = truth.sigma.len() - fitted_sd.len();
        let truth_window = &truth.sigma[offset..];
        sigma_correlation = Some(pearson(&fitted_sd, truth_window));
        let mse = fitted_sd
            .iter()
            .zip(truth_window)
            .map(|(f, t)| (f - t) * (f - t))
            .sum::<f64>()
            / fitted_sd.len() as f64;
        sigma_rmse = Some(mse.sqrt());
        if keep_overlay {
            sigma_overlay = fitted_sd
                .iter()
                .zip(truth_window)
                .enumerate()
                .map(|(t, (f, s))| SigmaOverlayRow {
                    time: offset + t,
                    sigma_true: *s,
                    sigma_fitted: *f,
                })
                .collect();
        }
    }

    let qq_coverage = report.qq.as_ref().map(|q| q.envelope_coverage());
    let qq_data = if keep_overlay {
        report.qq.as_ref().map(|q| {
            (
                q.theoretical.clone(),
                q.sample.clone(),
                q.lower.clone(),
                q.upper.clone(),
            )
        })
    } else {
        None
    };

    let (selected_order, candidate_aics) = match &report.garch {
        Some(g) => (
            Some(g.selected),
            g.candidates
                .iter()
                .map(|c| (c.p, c.q, c.aic))
                .collect(),
        ),
        None => (None, Vec::new()),
    };

    Ok(ReplicationOutcome {
        replication,
        per_series,
        selected_order,
        candidate_aics,
        mcleod_rejected: report.mcleod_li.reject_null,
        sigma_correlation,
        sigma_rmse,
        qq_coverage,
        sigma_overlay,
        qq_data,
    })
}

/// Run every replication of a scenario and aggregate the results.
pub fn run_study(scenario: &StudyScenario) -> Result<(StudySummary, StudyArtifacts)> {
    run_study_with(scenario, &PipelineConfig::default())
}

/// Like [`run_study`], with explicit analysis settings. The scenario still
/// decides the weighting scheme and master seed; everything else (test
/// levels, identification caps, candidate set) comes from `base`.
pub fn run_study_with(
    scenario: &StudyScenario,
    base: &PipelineConfig,
) -> Result<(StudySummary, StudyArtifacts)> {
    scenario.validate()?;
    let config = PipelineConfig {
        weighting: scenario.weighting,
        master_seed: scenario.master_seed,
        ..base.clone()
    };

    let outcomes: Vec<Result<ReplicationOutcome>> = (0..scenario.replications)
        .into_par_iter()
        .map(|rep| run_replication(scenario, &config, rep, rep == 0))
        .collect();
    let outcomes: Vec<ReplicationOutcome> =
        outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    // Coefficient errors, overall and by regime.
    let mut sq_final = 0.0;
    let mut sq_first = 0.0;
    let mut bias = 0.0;
    let mut n_series = 0usize;
    let mut regime_acc: BTreeMap<Regime, (usize, f64, f64, f64)> = BTreeMap::new();
    for o in &outcomes {
        for (_, regime, truth, first, fin) in &o.per_series {
            let e_fin = fin - truth;
            let e_first = first - truth;
            sq_final += e_fin * e_fin;
            sq_first += e_first * e_first;
            bias += e_fin;
            n_series += 1;
            let acc = regime_acc.entry(*regime).or_insert((0, 0.0, 0.0, 0.0));
            acc.0 += 1;
            acc.1 += e_fin * e_fin;
            acc.2 += e_first * e_first;
            acc.3 += e_fin;
        }
    }
    let per_regime: Vec<RegimeSummary> = regime_acc
        .into_iter()
        .map(|(regime, (count, sf, sp, b))| RegimeSummary {
            regime,
            series_count: count,
            mse_final: sf / count as f64,
            mse_first_pass: sp / count as f64,
            bias_final: b / count as f64,
        })
        .collect();

    // GARCH order selection and AIC across replications.
    let mut order_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut aic_acc: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for o in &outcomes {
        if let Some(sel) = o.selected_order {
            *order_counts.entry(sel).or_insert(0) += 1;
        }
        for (p, q, aic) in &o.candidate_aics {
            if let Some(a) = aic {
                let acc = aic_acc.entry((*p, *q)).or_insert((0, 0.0));
                acc.0 += 1;
                acc.1 += a;
            }
        }
    }
    let garch_orders_selected: Vec<OrderCount> = order_counts
        .into_iter()
        .map(|((p, q), count)| OrderCount { p, q, count })
        .collect();
    let aic_comparison: Vec<AicSummary> = aic_acc
        .into_iter()
        .map(|((p, q), (count, total))| AicSummary {
            p,
            q,
            fitted_replications: count,
            mean_aic: total / count as f64,
        })
        .collect();

    let garch_fitted = outcomes.iter().filter(|o| o.selected_order.is_some()).count();
    let mean_opt = |values: Vec<f64>| {
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let sigma_correlation =
        mean_opt(outcomes.iter().filter_map(|o| o.sigma_correlation).collect());
    let sigma_rmse = mean_opt(outcomes.iter().filter_map(|o| o.sigma_rmse).collect());
    let qq_envelope_coverage =
        mean_opt(outcomes.iter().filter_map(|o| o.qq_coverage).collect());
    let mcleod_li_rejection_rate =
        outcomes.iter().filter(|o| o.mcleod_rejected).count() as f64
            / outcomes.len() as f64;

    let summary = StudySummary {
        scenario: scenario.name.clone(),
        weighting: scenario.weighting,
        replications: scenario.replications,
        series_count: scenario.series_count,
        series_length: scenario.series_length,
        phi_mse: sq_final / n_series as f64,
        phi_mse_first_pass: sq_first / n_series as f64,
        phi_bias: bias / n_series as f64,
        per_regime,
        garch_fitted_replications: garch_fitted,
        mcleod_li_rejection_rate,
        garch_orders_selected,
        aic_comparison,
        sigma_correlation,
        sigma_rmse,
        qq_envelope_coverage,
    };

    // Plot data: overlays from the first replication, scatter and density
    // over all of them.
    let mut artifacts = StudyArtifacts::default();
    if let Some(first) = outcomes.iter().find(|o| o.replication == 0) {
        artifacts.sigma_overlay = first.sigma_overlay.clone();
        if let Some((th, sa, lo, up)) = &first.qq_data {
            artifacts.qq_theoretical = th.clone();
            artifacts.qq_sample = sa.clone();
            artifacts.qq_lower = lo.clone();
            artifacts.qq_upper = up.clone();
        }
    }
    for o in &outcomes {
        for (label, regime, truth, first, fin) in &o.per_series {
            artifacts.phi_scatter.push(PhiScatterRow {
                replication: o.replication,
                label: label.clone(),
                regime: *regime,
                phi_true: *truth,
                phi_first_pass: *first,
                phi_final: *fin,
            });
        }
    }
    artifacts.phi_density = phi_density(&artifacts.phi_scatter);

    Ok((summary, artifacts))
}

const DENSITY_LOW: f64 = -1.0;
const DENSITY_HIGH: f64 = 1.0;
const DENSITY_BINS: usize = 50;

fn phi_density(rows: &[PhiScatterRow]) -> Vec<PhiDensityBin> {
    let mut regimes: Vec<Regime> = rows.iter().map(|r| r.regime).collect();
    regimes.sort();
    regimes.dedup();
    let width = (DENSITY_HIGH - DENSITY_LOW) / DENSITY_BINS as f64;
    let mut bins = Vec::new();
    for regime in regimes {
        let mut counts = vec![0usize; DENSITY_BINS];
        for row in rows.iter().filter(|r| r.regime == regime) {
            let idx = ((row.phi_final - DENSITY_LOW) / width)
                .floor()
                .clamp(0.0, (DENSITY_BINS - 1) as f64) as usize;
            counts[idx] += 1;
        }
        for (b, count) in counts.into_iter().enumerate() {
            if count > 0 {
                bins.push(PhiDensityBin {
                    regime,
                    low: DENSITY_LOW + b as f64 * width,
                    high: DENSITY_LOW + (b + 1) as f64 * width,
                    count,
                });
            }
        }
    }
    bins
}
