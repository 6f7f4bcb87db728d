//! Flat TOML experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::ChainParams;
use crate::error::{Error, Result};
use crate::pauli::{decompose_xx_chain, Hamiltonian, ShiftMode};
use crate::weight::{median_repetitions, EstimatorBudget, WeightMethod};

pub const PRESETS: [&str; 3] = ["n3", "n4", "n5"];
pub const DEFAULT_SEED: u64 = 20_190_601;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// `xx_chain` or `file`.
    pub model: String,
    pub n_sites: usize,
    pub coupling: f64,
    pub periodic: bool,
    /// Hamiltonian document, read when `model = "file"`.
    pub hamiltonian: String,
    /// `commuting` or `general`.
    pub shift_mode: String,
    /// Shift factor for the general mode; `0` means `2 * cutoff`.
    pub shift_factor: f64,
    pub beta: f64,
    pub cutoff: usize,
    pub adaptive_cutoff: bool,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// `exact`, `bernoulli` or `ae`.
    pub weight_mode: String,
    pub shots: usize,
    pub ae_t: usize,
    /// Median repetitions; `0` derives it from `ae_delta`.
    pub ae_m: usize,
    pub ae_delta: f64,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: "xx_chain".into(),
            n_sites: 3,
            coupling: 1.0,
            periodic: true,
            hamiltonian: String::new(),
            shift_mode: "commuting".into(),
            shift_factor: 0.0,
            beta: 5.0,
            cutoff: 64,
            adaptive_cutoff: true,
            iterations: 200_000,
            burn_in: 10_000,
            seed: DEFAULT_SEED,
            weight_mode: "exact".into(),
            shots: 1000,
            ae_t: 16,
            ae_m: 0,
            ae_delta: 0.1,
            out: PathBuf::from("runs/default"),
        }
    }
}

impl ExperimentConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let n_sites = match name {
            "n3" => 3,
            "n4" => 4,
            "n5" => 5,
            _ => {
                return Err(Error::Config(format!(
                    "unknown preset '{name}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(ExperimentConfig {
            n_sites,
            out: PathBuf::from(format!("runs/{name}")),
            ..Default::default()
        })
    }

    /// Parses a config document; errors name the offending line and key.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        if cfg.model == "file" && Path::new(&cfg.hamiltonian).is_relative() {
            if let Some(dir) = path.parent() {
                cfg.hamiltonian = dir.join(&cfg.hamiltonian).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    /// Fills derived defaults so the manifest records concrete values.
    pub fn resolved(mut self) -> Self {
        if self.ae_m == 0 && self.ae_delta > 0.0 && self.ae_delta < 1.0 {
            self.ae_m = median_repetitions(self.ae_delta);
        }
        if self.shift_mode == "general" && self.shift_factor == 0.0 {
            self.shift_factor = 2.0 * self.cutoff as f64;
        }
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config fields are plain values")
    }

    pub fn shift(&self) -> Result<ShiftMode> {
        match self.shift_mode.as_str() {
            "commuting" => Ok(ShiftMode::Commuting),
            "general"
                if self.shift_factor == 0.0 || self.shift_factor == 2.0 * self.cutoff as f64 =>
            {
                Ok(ShiftMode::general(self.cutoff))
            }
            "general" => Ok(ShiftMode::general_with_factor(
                self.cutoff,
                self.shift_factor,
            )),
            other => Err(Error::Config(format!(
                "shift_mode: unknown value '{other}'"
            ))),
        }
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        let h = match self.model.as_str() {
            "xx_chain" => decompose_xx_chain(self.n_sites, self.coupling, self.periodic)?,
            "file" => {
                if self.hamiltonian.is_empty() {
                    return Err(Error::Config(
                        "hamiltonian: required when model = \"file\"".into(),
                    ));
                }
                Hamiltonian::from_document(&std::fs::read_to_string(&self.hamiltonian)?)?
            }
            other => return Err(Error::Config(format!("model: unknown family '{other}'"))),
        };
        h.with_shift_mode(self.shift()?)
    }

    pub fn weight_method(&self) -> Result<WeightMethod> {
        match self.weight_mode.as_str() {
            "exact" => Ok(WeightMethod::Exact),
            "bernoulli" => {
                if self.shots == 0 {
                    return Err(Error::Config("shots: must be at least 1".into()));
                }
                Ok(WeightMethod::Bernoulli { shots: self.shots })
            }
            "ae" => {
                let m = if self.ae_m == 0 {
                    median_repetitions(self.ae_delta)
                } else {
                    self.ae_m
                };
                Ok(WeightMethod::AmplitudeEstimation(EstimatorBudget::new(
                    self.ae_t,
                    m,
                    self.ae_delta,
                )?))
            }
            other => Err(Error::Config(format!(
                "weight_mode: unknown value '{other}'"
            ))),
        }
    }

    pub fn chain_params(&self) -> Result<ChainParams> {
        let params = ChainParams {
            beta: self.beta,
            iterations: self.iterations,
            burn_in: self.burn_in,
            seed: self.seed,
            weight_method: self.weight_method()?,
            cutoff: self.cutoff,
            adaptive_cutoff: self.adaptive_cutoff,
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks every field against the modules it feeds.
    pub fn validate(&self) -> Result<()> {
        self.hamiltonian()?;
        self.chain_params()?;
        Ok(())
    }
}
