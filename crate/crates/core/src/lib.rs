//! Estimation toolkit for panels of autoregressive series that share one
//! conditionally heteroscedastic innovation process.
//!
//! The model: K observed series each follow their own AR recursion, but the
//! innovations eta_t are common to the panel and follow a GARCH process.
//! Because every series carries the same volatility signal, pooling the
//! per-series AR residuals (weighted toward the series with the smallest AR
//! coefficients) recovers that signal far better than any single series
//! could, and a single GARCH fit on the pooled residual estimates the shared
//! variance dynamics. Subtracting the pooled residual and refitting then
//! sharpens the per-series AR estimates.
//!
//! The crate provides the building blocks ([`ar`], [`garch`], [`series`],
//! [`diagnostics`]), the panel procedure itself ([`pipeline`]), and
//! Monte-Carlo machinery for validating it on synthetic panels ([`study`]).
//! Everything is deterministic given its seeds; parallel sections preserve
//! ordering.

pub mod ar;
pub mod diagnostics;
pub mod error;
pub mod garch;
pub mod optim;
pub mod pipeline;
pub mod seed;
pub mod series;
pub mod stats;
pub mod study;

pub use ar::{fit_ar, identify_ar_order, simulate_ar, ArFit, ArSpec};
pub use diagnostics::{
    li_mak, ljung_box, mcleod_li, qq_diagnostic, qq_normal, DiagnosticResult, QqData, TestKind,
};
pub use error::{Error, Result};
pub use garch::{
    fit_garch, fit_garch_seeded, identify_garch_order, identify_garch_order_seeded,
    simulate_garch, GarchCandidate, GarchFit, GarchOrderSelection, GarchSpec,
    GarchStandardErrors,
};
pub use pipeline::{
    average_residuals, compute_weights, first_pass, run_pipeline, CrossCorrelationSummary,
    GarchSection, PipelineConfig, PipelineReport, SeriesReport, Weighting, Weights,
};
pub use seed::derive_seed;
pub use series::{
    cross_correlation_matrix, sample_acf, sample_pacf, significance_limit, CorrelogramPoint,
    Panel, Series,
};
pub use study::{
    generate_panel, run_study, run_study_with, PanelGroundTruth, PhiRule, Regime, StudyArtifacts,
    StudyScenario, StudySummary,
};
