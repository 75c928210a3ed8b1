// SPDX-License-Identifier: Apache-2.0

//! Run configuration shared by the CLI and the acceptance runner.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard ceiling on the qubit count for dense computations.
pub const MAX_N_CAP: usize = 4;

/// Environment variable overriding [`RunConfig::n_cap`].
pub const N_CAP_ENV: &str = "SUGEO_N_CAP";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n_cap: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_cap: 3,
            seed: 20_071_001,
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Apply the `SUGEO_N_CAP` override, if set.
    pub fn with_env(mut self) -> Result<Self> {
        if let Ok(raw) = std::env::var(N_CAP_ENV) {
            self.n_cap = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{N_CAP_ENV}={raw:?} is not an integer")))?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cap == 0 || self.n_cap > MAX_N_CAP {
            return Err(Error::InvalidArgument(format!(
                "n_cap must be in 1..={MAX_N_CAP}, got {}",
                self.n_cap
            )));
        }
        if let Some((name, value)) = self.tolerances.iter().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "tolerance {name} must be positive, got {value}"
            )));
        }
        Ok(())
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        if n > self.n_cap {
            return Err(Error::DimensionLimit { n, cap: self.n_cap });
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_cap, 3);
        assert!(cfg.check_n(4).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RunConfig {
            n_cap: 5,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.n_cap = 2;
        cfg.tolerances.insert("speed".into(), 0.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 9}"#).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n_cap, 3);
    }
}
