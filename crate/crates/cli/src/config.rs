//! Optional TOML configuration files. Two shapes are understood: a full
//! scenario definition (for `simulate` and `study` without a preset) and
//! a partial set of analysis overrides (for `analyze`).

use std::path::Path;

use serde::Deserialize;
use sharedvol_core::pipeline::PipelineConfig;
use sharedvol_core::{StudyScenario, Weighting};

use crate::error::{CliError, Result};

pub fn read_config_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(&format!("cannot read {}", path.display()), e))
}

/// Parse a complete scenario file, e.g.
///
/// ```toml
/// name = "custom"
/// series_count = 20
/// series_length = 300
/// weighting = "weighted"
/// replications = 10
/// master_seed = 42
///
/// [phi_rule]
/// rule = "uniform"
/// low = 0.7
/// high = 0.9
///
/// [garch]
/// omega = 0.1
/// alpha = [0.2]
/// beta = [0.5]
/// ```
pub fn scenario_from_toml(bytes: &[u8]) -> Result<StudyScenario> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| CliError::Input("config file is not valid UTF-8".into()))?;
    let scenario: StudyScenario =
        toml::from_str(text).map_err(|e| CliError::Input(format!("config file: {e}")))?;
    scenario
        .validate()
        .map_err(|e| CliError::Input(format!("config file: {e}")))?;
    Ok(scenario)
}

/// Partial analysis settings; anything absent keeps its default, and
/// command-line flags override the file.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOverrides {
    pub weighting: Option<Weighting>,
    pub significance_level: Option<f64>,
    pub max_identification_lag: Option<usize>,
    pub ar_order_cap: Option<usize>,
    pub garch_candidates: Option<Vec<(usize, usize)>>,
    pub master_seed: Option<u64>,
}

pub fn overrides_from_toml(bytes: &[u8]) -> Result<AnalysisOverrides> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| CliError::Input("config file is not valid UTF-8".into()))?;
    toml::from_str(text).map_err(|e| CliError::Input(format!("config file: {e}")))
}

impl AnalysisOverrides {
    pub fn apply(self, mut config: PipelineConfig) -> Result<PipelineConfig> {
        if let Some(w) = self.weighting {
            config.weighting = w;
        }
        if let Some(a) = self.significance_level {
            config.significance_level = a;
        }
        if let Some(m) = self.max_identification_lag {
            config.max_identification_lag = m;
        }
        if let Some(c) = self.ar_order_cap {
            config.ar_order_cap = c;
        }
        if let Some(g) = self.garch_candidates {
            if g.is_empty() {
                return Err(CliError::Input(
                    "config file: garch_candidates must not be empty".into(),
                ));
            }
            config.garch_candidates = g;
        }
        if let Some(s) = self.master_seed {
            config.master_seed = s;
        }
        Ok(config)
    }
}
