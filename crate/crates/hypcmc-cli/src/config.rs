//! JSON run configuration: a run is its config file.

use std::path::PathBuf;

use serde::Deserialize;

use hypcmc_core::boundary::PhiPreset;
use hypcmc_core::solver::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Verify,
    Barriers,
    Oracle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub solver: SolverConfigFile,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
    #[serde(default)]
    pub barriers: Option<BarriersConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub case: CaseName,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Target mean curvature, |H| < 1.
    pub h_curv: f64,
    pub boundary: BoundarySpec,
}

fn default_n() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    Preset(PhiPreset),
    TableCsv(PathBuf),
}

/// Mirrors [`SolverConfig`] with every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfigFile {
    #[serde(default)]
    pub newton: Option<hypcmc_core::solver::NewtonConfig>,
    #[serde(default)]
    pub continuation_step: Option<f64>,
    #[serde(default)]
    pub truncation: Option<hypcmc_core::solver::TruncationConfig>,
    #[serde(default)]
    pub artificial_bc: Option<hypcmc_core::solver::ArtificialBc>,
    #[serde(default)]
    pub sensitivity_check: Option<bool>,
}

impl SolverConfigFile {
    pub fn build(&self) -> SolverConfig {
        let mut cfg = SolverConfig::default();
        if let Some(n) = &self.newton {
            cfg.newton = n.clone();
        }
        if let Some(s) = self.continuation_step {
            cfg.continuation_step = s;
        }
        if let Some(t) = &self.truncation {
            cfg.truncation = t.clone();
        }
        if let Some(a) = self.artificial_bc {
            cfg.artificial_bc = a;
        }
        if let Some(s) = self.sensitivity_check {
            cfg.sensitivity_check = s;
        }
        cfg
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub mesh_ply: Option<PathBuf>,
    #[serde(default)]
    pub mesh_obj: Option<PathBuf>,
    #[serde(default)]
    pub report_csv: Option<PathBuf>,
    #[serde(default)]
    pub summary_json: Option<PathBuf>,
    #[serde(default)]
    pub solution_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub solution_json: PathBuf,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    #[serde(default = "default_sandwich_tol")]
    pub sandwich_tol: f64,
}

fn default_residual_tol() -> f64 {
    1e-8
}
fn default_oracle_tol() -> f64 {
    0.05
}
fn default_sandwich_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarriersConfig {
    /// Ideal probe coordinates (transverse position or angle).
    pub probes: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Also solve the problem and check the grid sandwich.
    #[serde(default)]
    pub check_sandwich: bool,
}

fn default_k_max() -> usize {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_oracle_h")]
    pub h: f64,
    #[serde(default = "default_mesh_oracle_tol")]
    pub tol: f64,
}

fn default_oracle_h() -> f64 {
    1.0 / 64.0
}
fn default_mesh_oracle_tol() -> f64 {
    0.01
}
