//! `analyze`: run the shared-volatility pipeline on a panel CSV and emit
//! the report plus plot-ready data files.

use std::path::PathBuf;

use serde::Serialize;
use sharedvol_core::pipeline::PipelineConfig;
use sharedvol_core::stats::normal_sf;
use sharedvol_core::{
    sample_acf, sample_pacf, significance_limit, PipelineReport, Series, Weighting,
};

use crate::config;
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, sha256_hex, OutputDir};
use crate::simulate::command_line;
use crate::table;

pub struct AnalyzeArgs {
    pub input: PathBuf,
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub weighting: Option<Weighting>,
    pub alpha: Option<f64>,
}

#[derive(Serialize)]
struct CoefficientRow {
    name: String,
    estimate: f64,
    std_error: Option<f64>,
    t_value: Option<f64>,
    p_value: Option<f64>,
}

/// Top-level shape of report.json. `schema_version` gates downstream
/// consumers; bump it on any breaking field change.
#[derive(Serialize)]
struct ReportDocument<'a> {
    schema_version: u32,
    tool_version: &'static str,
    source: String,
    time_points: usize,
    series_count: usize,
    garch_coefficients: Vec<CoefficientRow>,
    report: &'a PipelineReport,
}

fn coefficient_row(name: String, estimate: f64, se: Option<f64>) -> CoefficientRow {
    let t_value = se.map(|s| estimate / s);
    CoefficientRow {
        name,
        estimate,
        std_error: se,
        t_value,
        p_value: t_value.map(|t| 2.0 * normal_sf(t.abs())),
    }
}

fn garch_coefficient_table(report: &PipelineReport) -> Vec<CoefficientRow> {
    let Some(garch) = &report.garch else {
        return Vec::new();
    };
    let spec = &garch.fit.spec;
    let ses = &garch.fit.coefficient_standard_errors;
    let mut rows = vec![coefficient_row("omega".into(), spec.omega, ses.omega)];
    for (i, (a, se)) in spec.alpha.iter().zip(&ses.alpha).enumerate() {
        rows.push(coefficient_row(format!("alpha{}", i + 1), *a, *se));
    }
    for (j, (b, se)) in spec.beta.iter().zip(&ses.beta).enumerate() {
        rows.push(coefficient_row(format!("beta{}", j + 1), *b, *se));
    }
    rows
}

fn build_config(args: &AnalyzeArgs) -> Result<(PipelineConfig, Vec<u8>)> {
    let mut config_bytes = Vec::new();
    let mut config = match &args.config {
        Some(path) => {
            config_bytes = config::read_config_bytes(path)?;
            config::overrides_from_toml(&config_bytes)?.apply(PipelineConfig::default())?
        }
        None => PipelineConfig::default(),
    };
    if let Some(w) = args.weighting {
        config.weighting = w;
    }
    if let Some(alpha) = args.alpha {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(CliError::Input(format!(
                "--alpha must lie strictly between 0 and 1, got {alpha}"
            )));
        }
        config.significance_level = alpha;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    Ok((config, config_bytes))
}

pub fn run(args: AnalyzeArgs) -> Result<()> {
    let input_bytes = std::fs::read(&args.input)
        .map_err(|e| CliError::io(&format!("cannot read {}", args.input.display()), e))?;
    let input_checksum = sha256_hex(&input_bytes);
    let text = String::from_utf8(input_bytes)
        .map_err(|_| CliError::Input("input file is not valid UTF-8".into()))?;
    let input = table::parse_table(&text)?;
    let rows = input.rows();
    if rows < 50 {
        return Err(CliError::Input(format!(
            "pipeline needs at least 50 time points per series, found {rows}"
        )));
    }

    let (config, config_bytes) = build_config(&args)?;
    let panel = input.into_panel()?;
    let report = sharedvol_core::run_pipeline(&panel, &config)?;

    let mut dir = OutputDir::create(&args.out)?;
    write_report_files(&mut dir, &args, &report, rows)?;
    print_summary(&report, rows);
    println!("wrote report and plot data to {}", dir.path().display());

    dir.finish(
        &command_line(),
        config.master_seed,
        &config_bytes,
        Some(input_checksum),
    )
}

fn write_report_files(
    dir: &mut OutputDir,
    args: &AnalyzeArgs,
    report: &PipelineReport,
    rows: usize,
) -> Result<()> {
    let document = ReportDocument {
        schema_version: 1,
        tool_version: env!("CARGO_PKG_VERSION"),
        source: args.input.display().to_string(),
        time_points: rows,
        series_count: report.series.len(),
        garch_coefficients: garch_coefficient_table(report),
        report,
    };
    dir.write_json("report.json", &document)?;

    // Aligned series outputs: the averaged residual occupies the trailing
    // window of the input, so time stamps start at rows - L + 1.
    let length = report.averaged_residuals.len();
    let offset = rows - length;
    let time = |i: usize| offset + i + 1;

    let eta_rows: Vec<String> = report
        .averaged_residuals
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{}", time(i), fmt_f64(*v)))
        .collect();
    dir.write_csv("averaged_residuals.csv", "time,averaged_residual", &eta_rows)?;

    if let Some(garch) = &report.garch {
        let sd_rows: Vec<String> = garch
            .fit
            .conditional_variances
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", time(i), fmt_f64(v.sqrt())))
            .collect();
        dir.write_csv("conditional_sd.csv", "time,conditional_sd", &sd_rows)?;

        let eps_rows: Vec<String> = garch
            .fit
            .standardized_residuals
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{},{}", time(i), fmt_f64(*v)))
            .collect();
        dir.write_csv(
            "standardized_residuals.csv",
            "time,standardized_residual",
            &eps_rows,
        )?;
    }

    let ml = &report.mcleod_li;
    let ml_rows: Vec<String> = ml
        .lags
        .iter()
        .zip(ml.statistics.iter().zip(&ml.p_values))
        .map(|(lag, (stat, p))| {
            format!(
                "{lag},{},{},{}",
                fmt_f64(*stat),
                fmt_f64(*p),
                *p < ml.significance_level
            )
        })
        .collect();
    dir.write_csv(
        "mcleod_li_pvalues.csv",
        "lag,statistic,p_value,significant",
        &ml_rows,
    )?;

    if let Some(qq) = &report.qq {
        let qq_rows: Vec<String> = (0..qq.theoretical.len())
            .map(|i| {
                format!(
                    "{},{},{},{}",
                    fmt_f64(qq.theoretical[i]),
                    fmt_f64(qq.sample[i]),
                    fmt_f64(qq.lower[i]),
                    fmt_f64(qq.upper[i])
                )
            })
            .collect();
        dir.write_csv("qq_plot.csv", "theoretical,sample,lower,upper", &qq_rows)?;
    }

    // Correlogram of the squared averaged residual, for the volatility
    // clustering plot regardless of whether a GARCH model was fitted.
    let squared = Series::new(
        report
            .averaged_residuals
            .iter()
            .map(|v| v * v)
            .collect::<Vec<_>>(),
    )?;
    let max_lag = 20.min(length / 2 - 1).max(1);
    let acf = sample_acf(&squared, max_lag)?;
    let pacf = sample_pacf(&squared, max_lag)?;
    let limit = significance_limit(length);
    let acf_rows: Vec<String> = acf
        .iter()
        .zip(&pacf)
        .map(|(a, p)| {
            format!(
                "{},{},{},{}",
                a.lag,
                fmt_f64(a.value),
                fmt_f64(p.value),
                fmt_f64(limit)
            )
        })
        .collect();
    dir.write_csv(
        "acf_squared_residuals.csv",
        "lag,acf,pacf,significance_limit",
        &acf_rows,
    )?;

    let scatter_rows: Vec<String> = report
        .series
        .iter()
        .map(|s| {
            let first = s.first_pass.coefficients.first().map(|v| fmt_f64(*v));
            let second = s.second_pass.coefficients.first().map(|v| fmt_f64(*v));
            let fin = s.final_coefficients.first().map(|v| fmt_f64(*v));
            let se = s.final_standard_errors.first().map(|v| fmt_f64(*v));
            format!(
                "{},{},{},{},{},{},{},{}",
                s.label,
                fmt_f64(s.weight),
                s.first_pass.order,
                s.second_pass.order,
                first.unwrap_or_default(),
                second.unwrap_or_default(),
                fin.unwrap_or_default(),
                se.unwrap_or_default()
            )
        })
        .collect();
    dir.write_csv(
        "phi_scatter.csv",
        "series,weight,order_first,order_second,phi1_first,phi1_second,phi1_final,se1_final",
        &scatter_rows,
    )?;

    if let Some(cc) = &report.cross_correlation {
        let cc_rows: Vec<String> = cc
            .histogram
            .iter()
            .map(|b| format!("{},{},{}", fmt_f64(b.low), fmt_f64(b.high), b.count))
            .collect();
        dir.write_csv("cross_correlation_histogram.csv", "low,high,count", &cc_rows)?;
    }
    Ok(())
}

fn print_summary(report: &PipelineReport, rows: usize) {
    println!(
        "analyzed {} series over {} time points (weighting: {:?}, alpha: {})",
        report.series.len(),
        rows,
        report.weighting,
        report.significance_level
    );

    let shown = report.series.len().min(10);
    println!("  series            weight  order1 order2  phi1_final");
    for s in report.series.iter().take(shown) {
        let phi1 = s
            .final_coefficients
            .first()
            .map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "  {:<16} {:>7.4}  {:>6} {:>6}  {:>10}",
            s.label, s.weight, s.first_pass.order, s.second_pass.order, phi1
        );
    }
    if report.series.len() > shown {
        println!("  ... and {} more series", report.series.len() - shown);
    }

    let ml = &report.mcleod_li;
    let significant = ml
        .p_values
        .iter()
        .filter(|p| **p < ml.significance_level)
        .count();
    println!(
        "McLeod-Li on averaged residuals: {}/{} lags significant -> {}",
        significant,
        ml.p_values.len(),
        if ml.reject_null {
            "volatility clustering detected"
        } else {
            "no evidence of ARCH behaviour"
        }
    );

    match &report.garch {
        Some(garch) => {
            let (p, q) = garch.selected;
            println!(
                "shared GARCH({p},{q}): log-likelihood {:.3}, AIC {:.3}",
                garch.fit.log_likelihood, garch.fit.aic
            );
            for row in garch_coefficient_table(report) {
                match (row.std_error, row.t_value, row.p_value) {
                    (Some(se), Some(t), Some(pv)) => println!(
                        "  {:<7} {:>9.5}  se {:>8.5}  t {:>7.3}  p {:.4}",
                        row.name, row.estimate, se, t, pv
                    ),
                    _ => println!(
                        "  {:<7} {:>9.5}  (standard error unavailable)",
                        row.name, row.estimate
                    ),
                }
            }
        }
        None => println!("no shared GARCH model fitted; report is AR-only"),
    }

    if let Some(lm) = &report.li_mak {
        let stat = lm.statistics.last().copied().unwrap_or(f64::NAN);
        let p = lm.p_values.last().copied().unwrap_or(f64::NAN);
        println!(
            "Li-Mak at lag {}: statistic {stat:.3}, p {p:.4} -> {}",
            lm.lags.last().copied().unwrap_or(0),
            if lm.reject_null {
                "residual ARCH structure remains"
            } else {
                "ARCH behaviour modelled out"
            }
        );
    }
    if let Some(qq) = &report.qq {
        println!(
            "Q-Q envelope coverage: {:.1}%",
            100.0 * qq.envelope_coverage()
        );
    }
    for warning in &report.warnings {
        println!("warning: {warning}");
    }
}
