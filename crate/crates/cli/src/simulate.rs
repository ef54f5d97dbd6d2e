//! `simulate`: generate one synthetic panel plus its ground truth.

use std::path::PathBuf;

use sharedvol_core::{generate_panel, Regime, StudyScenario};

use crate::config;
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, OutputDir};

pub struct SimulateArgs {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replication: usize,
    pub out: PathBuf,
}

pub fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::Fixed => "fixed",
        Regime::Low => "low",
        Regime::High => "high",
    }
}

/// Resolve a scenario from `--preset` or `--config`, exactly one of which
/// must be present. Shared with the study command.
pub fn resolve_scenario(
    preset: &Option<String>,
    config_path: &Option<PathBuf>,
) -> Result<(StudyScenario, Vec<u8>)> {
    match (preset, config_path) {
        (Some(_), Some(_)) => Err(CliError::Input(
            "pass either --preset or --config, not both".into(),
        )),
        (None, None) => Err(CliError::Input(format!(
            "pass --preset <name> or --config <file>; presets: {}",
            StudyScenario::preset_names().join(", ")
        ))),
        (Some(name), None) => {
            let scenario = StudyScenario::preset(name).ok_or_else(|| {
                CliError::Input(format!(
                    "unknown preset '{name}'; presets: {}",
                    StudyScenario::preset_names().join(", ")
                ))
            })?;
            let canonical = scenario_toml(&scenario)?;
            Ok((scenario, canonical))
        }
        (None, Some(path)) => {
            let bytes = config::read_config_bytes(path)?;
            let scenario = config::scenario_from_toml(&bytes)?;
            Ok((scenario, bytes))
        }
    }
}

fn scenario_toml(scenario: &StudyScenario) -> Result<Vec<u8>> {
    toml::to_string_pretty(scenario)
        .map(String::into_bytes)
        .map_err(|e| CliError::Io(format!("cannot serialize scenario: {e}")))
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let (mut scenario, _) = resolve_scenario(&args.preset, &args.config)?;
    if let Some(seed) = args.seed {
        scenario.master_seed = seed;
    }
    if args.replication >= scenario.replications {
        return Err(CliError::Input(format!(
            "replication {} out of range; the scenario declares {}",
            args.replication, scenario.replications
        )));
    }
    let config_bytes = scenario_toml(&scenario)?;

    let (panel, truth) = generate_panel(&scenario, args.replication)?;
    let mut dir = OutputDir::create(&args.out)?;

    write_panel_csv(&mut dir, &panel)?;

    let truth_rows: Vec<String> = panel
        .labels()
        .iter()
        .zip(truth.phi.iter().zip(&truth.regimes))
        .map(|(label, (phi, regime))| format!("{label},{},{}", regime_name(*regime), fmt_f64(*phi)))
        .collect();
    dir.write_csv("ground_truth_series.csv", "series,regime,phi_1", &truth_rows)?;

    let path_rows: Vec<String> = (0..truth.eta.len())
        .map(|t| {
            format!(
                "{},{},{},{}",
                t + 1,
                fmt_f64(truth.eta[t]),
                fmt_f64(truth.sigma[t]),
                fmt_f64(truth.epsilon[t])
            )
        })
        .collect();
    dir.write_csv("ground_truth_path.csv", "time,eta,sigma,epsilon", &path_rows)?;

    println!(
        "simulated panel '{}': {} series x {} time points -> {}",
        scenario.name,
        panel.width(),
        panel.time_len(),
        dir.path().join("panel.csv").display()
    );
    let mut counts = std::collections::BTreeMap::new();
    for regime in &truth.regimes {
        *counts.entry(regime_name(*regime)).or_insert(0usize) += 1;
    }
    for (name, count) in counts {
        println!("  regime {name}: {count} series");
    }

    dir.finish(
        &command_line(),
        scenario.master_seed,
        &config_bytes,
        None,
    )
}

pub fn write_panel_csv(dir: &mut OutputDir, panel: &sharedvol_core::Panel) -> Result<()> {
    let header = format!("time,{}", panel.labels().join(","));
    let t_len = panel.time_len();
    let mut rows = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut row = String::with_capacity(panel.width() * 12);
        row.push_str(&(t + 1).to_string());
        for s in panel.series() {
            row.push(',');
            row.push_str(&fmt_f64(s.values()[t]));
        }
        rows.push(row);
    }
    dir.write_csv("panel.csv", &header, &rows)
}

pub fn command_line() -> String {
    std::env::args().skip(1).collect::<Vec<_>>().join(" ")
}
