//! `study`: run a Monte-Carlo scenario end to end and emit the aggregate
//! summary plus plot data from its first replication.

use std::path::PathBuf;

use serde::Serialize;
use sharedvol_core::pipeline::PipelineConfig;
use sharedvol_core::{run_study_with, StudyArtifacts, StudySummary, Weighting};

use crate::error::{CliError, Result};
use crate::output::{fmt_f64, OutputDir};
use crate::simulate::{command_line, regime_name, resolve_scenario};

pub struct StudyArgs {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub weighting: Option<Weighting>,
    pub alpha: Option<f64>,
    pub out: PathBuf,
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    schema_version: u32,
    tool_version: &'static str,
    summary: &'a StudySummary,
}

pub fn run(args: StudyArgs) -> Result<()> {
    let (mut scenario, _) = resolve_scenario(&args.preset, &args.config)?;
    if let Some(r) = args.replications {
        if r == 0 {
            return Err(CliError::Input("--replications must be at least 1".into()));
        }
        scenario.replications = r;
    }
    if let Some(seed) = args.seed {
        scenario.master_seed = seed;
    }
    if let Some(w) = args.weighting {
        scenario.weighting = w;
    }
    let mut base = PipelineConfig::default();
    if let Some(alpha) = args.alpha {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(CliError::Input(format!(
                "--alpha must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        base.significance_level = alpha;
    }
    let config_bytes = toml::to_string_pretty(&scenario)
        .map(String::into_bytes)
        .map_err(|e| CliError::Io(format!("cannot serialize scenario: {e}")))?;

    let (summary, artifacts) = run_study_with(&scenario, &base)?;

    let mut dir = OutputDir::create(&args.out)?;
    write_summary_files(&mut dir, &summary, &artifacts)?;
    print_summary(&summary);
    println!("wrote study outputs to {}", dir.path().display());

    dir.finish(&command_line(), scenario.master_seed, &config_bytes, None)
}

fn write_summary_files(
    dir: &mut OutputDir,
    summary: &StudySummary,
    artifacts: &StudyArtifacts,
) -> Result<()> {
    dir.write_json(
        "summary.json",
        &SummaryDocument {
            schema_version: 1,
            tool_version: env!("CARGO_PKG_VERSION"),
            summary,
        },
    )?;

    // Flat key/value view of the same summary for spreadsheet use.
    let mut rows = vec![
        format!("scenario,,{}", summary.scenario),
        format!("weighting,,{:?}", summary.weighting).to_lowercase(),
        format!("replications,,{}", summary.replications),
        format!("series_count,,{}", summary.series_count),
        format!("series_length,,{}", summary.series_length),
        format!("phi_mse,,{}", fmt_f64(summary.phi_mse)),
        format!("phi_mse_first_pass,,{}", fmt_f64(summary.phi_mse_first_pass)),
        format!("phi_bias,,{}", fmt_f64(summary.phi_bias)),
        format!("garch_fitted_replications,,{}", summary.garch_fitted_replications),
        format!("mcleod_li_rejection_rate,,{}", fmt_f64(summary.mcleod_li_rejection_rate)),
    ];
    for r in &summary.per_regime {
        let name = regime_name(r.regime);
        rows.push(format!("phi_mse,{name},{}", fmt_f64(r.mse_final)));
        rows.push(format!("phi_mse_first_pass,{name},{}", fmt_f64(r.mse_first_pass)));
        rows.push(format!("phi_bias,{name},{}", fmt_f64(r.bias_final)));
    }
    if let Some(c) = summary.sigma_correlation {
        rows.push(format!("sigma_correlation,,{}", fmt_f64(c)));
    }
    if let Some(r) = summary.sigma_rmse {
        rows.push(format!("sigma_rmse,,{}", fmt_f64(r)));
    }
    if let Some(c) = summary.qq_envelope_coverage {
        rows.push(format!("qq_envelope_coverage,,{}", fmt_f64(c)));
    }
    dir.write_csv("summary.csv", "metric,regime,value", &rows)?;

    let overlay_rows: Vec<String> = artifacts
        .sigma_overlay
        .iter()
        .map(|r| {
            format!(
                "{},{},{}",
                r.time,
                fmt_f64(r.sigma_true),
                fmt_f64(r.sigma_fitted)
            )
        })
        .collect();
    dir.write_csv("sigma_overlay.csv", "time,sigma_true,sigma_fitted", &overlay_rows)?;

    let qq_rows: Vec<String> = (0..artifacts.qq_theoretical.len())
        .map(|i| {
            format!(
                "{},{},{},{}",
                fmt_f64(artifacts.qq_theoretical[i]),
                fmt_f64(artifacts.qq_sample[i]),
                fmt_f64(artifacts.qq_lower[i]),
                fmt_f64(artifacts.qq_upper[i])
            )
        })
        .collect();
    dir.write_csv("qq_band.csv", "theoretical,sample,lower,upper", &qq_rows)?;

    let scatter_rows: Vec<String> = artifacts
        .phi_scatter
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}",
                r.replication,
                r.label,
                regime_name(r.regime),
                fmt_f64(r.phi_true),
                fmt_f64(r.phi_first_pass),
                fmt_f64(r.phi_final)
            )
        })
        .collect();
    dir.write_csv(
        "phi_scatter.csv",
        "replication,series,regime,phi_true,phi_first_pass,phi_final",
        &scatter_rows,
    )?;

    let density_rows: Vec<String> = artifacts
        .phi_density
        .iter()
        .map(|b| {
            format!(
                "{},{},{},{}",
                regime_name(b.regime),
                fmt_f64(b.low),
                fmt_f64(b.high),
                b.count
            )
        })
        .collect();
    dir.write_csv("phi_density.csv", "regime,low,high,count", &density_rows)?;

    let order_rows: Vec<String> = summary
        .garch_orders_selected
        .iter()
        .map(|o| format!("{},{},{}", o.p, o.q, o.count))
        .collect();
    dir.write_csv("garch_orders.csv", "p,q,count", &order_rows)?;

    let aic_rows: Vec<String> = summary
        .aic_comparison
        .iter()
        .map(|a| {
            format!(
                "{},{},{},{}",
                a.p,
                a.q,
                a.fitted_replications,
                fmt_f64(a.mean_aic)
            )
        })
        .collect();
    dir.write_csv("aic_comparison.csv", "p,q,fitted_replications,mean_aic", &aic_rows)
}

fn print_summary(summary: &StudySummary) {
    println!(
        "study '{}': {} replications of {} series x {} time points",
        summary.scenario, summary.replications, summary.series_count, summary.series_length
    );
    println!(
        "  final phi MSE {:.6} (first pass {:.6}), bias {:+.4}",
        summary.phi_mse, summary.phi_mse_first_pass, summary.phi_bias
    );
    for r in &summary.per_regime {
        println!(
            "  regime {:<5} ({} series): MSE {:.6}, first pass {:.6}",
            regime_name(r.regime),
            r.series_count,
            r.mse_final,
            r.mse_first_pass
        );
    }
    println!(
        "  volatility detected in {}/{} replications; GARCH fitted in {}",
        (summary.mcleod_li_rejection_rate * summary.replications as f64).round() as usize,
        summary.replications,
        summary.garch_fitted_replications
    );
    for o in &summary.garch_orders_selected {
        println!("  selected GARCH({},{}) in {} replications", o.p, o.q, o.count);
    }
    if let Some(c) = summary.sigma_correlation {
        println!("  mean correlation of fitted vs true sigma: {c:.4}");
    }
    if let Some(c) = summary.qq_envelope_coverage {
        println!("  mean Q-Q envelope coverage: {:.1}%", 100.0 * c);
    }
}
