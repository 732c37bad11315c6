//! Run configuration: defaults reproduce the standard loop bound (five
//! rounds), path cap (256), recursion depth (3), and the
//! branching-and-dependent focal selection rule. The pipeline has no
//! randomness knobs; runs are deterministic given a config.

use crate::genloop::domains::ValueDomains;
use crate::genloop::external::DEFAULT_TIMEOUT_SECS;
use crate::genloop::session::DEFAULT_MAX_ROUNDS;
use crate::knowledge::paths::DEFAULT_PATH_CAP;
use crate::lang::interp::DEFAULT_STEP_BUDGET;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FocalFilter {
    All,
    BranchingAndDependent,
    Explicit { methods: Vec<String> },
}

impl Default for FocalFilter {
    fn default() -> Self {
        FocalFilter::BranchingAndDependent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackendChoice {
    BruteForce,
    Scripted { file: PathBuf },
    External { command: String, timeout_secs: u64 },
}

impl Default for BackendChoice {
    fn default() -> Self {
        BackendChoice::BruteForce
    }
}

impl BackendChoice {
    pub fn default_timeout() -> u64 {
        DEFAULT_TIMEOUT_SECS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub project_dir: PathBuf,
    pub output_dir: PathBuf,
    pub focal_filter: FocalFilter,
    pub backend: BackendChoice,
    pub max_rounds: u32,
    pub path_cap: usize,
    pub recursion_depth: u32,
    /// Domain overrides; defaults derive from the project's constants.
    pub domains: Option<ValueDomains>,
    /// Worker threads for session fan-out; 0 uses the global default.
    pub parallelism: usize,
    pub step_budget: u64,
    /// Widen coverage scope from the selected focal methods to every method
    /// in the project.
    pub coverage_scope_all: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            project_dir: PathBuf::from("."),
            output_dir: PathBuf::from("pathgen-out"),
            focal_filter: FocalFilter::default(),
            backend: BackendChoice::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            path_cap: DEFAULT_PATH_CAP,
            recursion_depth: crate::distill::resolve::DEFAULT_RECURSION_DEPTH,
            domains: None,
            parallelism: 1,
            step_budget: DEFAULT_STEP_BUDGET,
            coverage_scope_all: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, serde_json::Error> {
        serde_json::from_str(text)
    }
}
