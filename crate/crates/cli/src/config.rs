//! Run configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use mehler::inequalities::{CheckSettings, Checker};
use mehler::models::ModelParams;
use mehler::sampling::{InvariantMethod, JumpScheme};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MEHLER_OUT_DIR";

/// What `sample` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleOptions {
    pub method: InvariantMethod,
    /// Draw `μ_t` at this time instead of the invariant measure.
    pub time: Option<f64>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { method: InvariantMethod::Direct, time: None }
    }
}

/// The JSON schema of `--config`. Every key is optional; unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Model name and parameter overrides, e.g. `{"name": "koponen", "beta": 2}`.
    pub model: Option<ModelParams>,
    /// Checker names, or `"theorems"` / `"all"`.
    pub suite: Option<Vec<String>>,
    /// Draws of `σ` per estimator.
    pub samples: Option<usize>,
    /// Mandatory for `verify`.
    pub seed: Option<u64>,
    pub settings: CheckSettings,
    pub scheme: Option<JumpScheme>,
    /// Split radius of the inner form integrals.
    pub delta: Option<f64>,
    pub out: Option<PathBuf>,
    /// Worker threads.
    pub chains: Option<usize>,
    pub sample: SampleOptions,
}

/// Flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub suite: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub chains: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), String> {
        if let Some(name) = &o.model {
            // Keep the file's parameters when it names the same model.
            if self.model.as_ref().map(|m| m.name()) != Some(name.as_str()) {
                self.model = Some(ModelParams::named(name).map_err(|e| e.to_string())?);
            }
        }
        if let Some(list) = &o.suite {
            self.suite = Some(list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
        }
        self.seed = o.seed.or(self.seed);
        self.samples = o.samples.or(self.samples);
        self.out = o.out.clone().or(self.out.take());
        self.chains = o.chains.or(self.chains);
        Ok(())
    }

    pub fn model(&self) -> ModelParams {
        self.model.clone().unwrap_or_else(|| ModelParams::named("koponen").expect("built-in model"))
    }

    /// The selected checkers, in the order given; all of them by default.
    pub fn checkers(&self) -> Result<Vec<Checker>, String> {
        let Some(names) = &self.suite else {
            return Ok(Checker::ALL.to_vec());
        };
        let mut out = Vec::new();
        for name in names {
            let add: Vec<Checker> = match name.as_str() {
                "all" => Checker::ALL.to_vec(),
                "theorems" => Checker::THEOREMS.to_vec(),
                other => vec![Checker::from_name(other).map_err(|e| e.to_string())?],
            };
            for c in add {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        if out.is_empty() {
            return Err("the suite selection is empty".into());
        }
        Ok(out)
    }

    /// `--out`, then the file, then the environment, then the working directory.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
