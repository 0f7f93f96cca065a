//! Scenario configuration files.
//!
//! Lengths are in units of the Rayleigh length `d_R`, momenta in units of `k_max`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Signal,
    FisherScan,
    RateRatio,
    NoonDemo,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Signal => "signal",
            ScenarioKind::FisherScan => "fisher-scan",
            ScenarioKind::RateRatio => "rate-ratio",
            ScenarioKind::NoonDemo => "noon-demo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Checked against the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    pub system: SystemBlock,
    #[serde(default)]
    pub object: ObjectBlock,
    pub plan: PlanBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanBlock>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noon: Option<NoonBlock>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsfNorm {
    #[default]
    Exact,
    Doubled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub k_max: f64,
    #[serde(default)]
    pub psf_norm: PsfNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    A,
    C,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectBlock {
    /// Benchmark amplitudes; mutually exclusive with `amplitudes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    /// Needed by `signal`; scans vary the width themselves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slit_width: Option<f64>,
    /// Left edge of the first slit; centred on the axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyName {
    #[serde(rename = "gn")]
    Gn,
    #[serde(rename = "gn1")]
    GnMinus1,
    #[serde(rename = "hybrid")]
    Hybrid,
}

fn all_strategies() -> Vec<StrategyName> {
    vec![
        StrategyName::Gn,
        StrategyName::GnMinus1,
        StrategyName::Hybrid,
    ]
}

fn default_k_lo() -> f64 {
    1.0
}

fn default_k_hi() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanBlock {
    pub n: u32,
    #[serde(default = "all_strategies")]
    pub strategies: Vec<StrategyName>,
    #[serde(default = "default_k_lo")]
    pub k_lo: f64,
    #[serde(default = "default_k_hi")]
    pub k_hi: f64,
    #[serde(default)]
    pub grid_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub d_min: f64,
    pub d_max: f64,
    pub points: usize,
}

fn default_n_max() -> f64 {
    1e5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(default = "default_n_max")]
    pub n_max: f64,
    /// Logarithmic y axis; defaults on for scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_y: Option<bool>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            csv: None,
            svg: None,
            n_max: default_n_max(),
            log_y: None,
        }
    }
}

fn default_r_min() -> f64 {
    -2.0
}

fn default_r_max() -> f64 {
    2.0
}

fn default_noon_points() -> usize {
    401
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoonBlock {
    pub half_separation: f64,
    #[serde(default = "default_r_min")]
    pub r_min: f64,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_noon_points")]
    pub points: usize,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| line_column(text, span.start))
                .unwrap_or((1, 1));
            CliError::Parse {
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
