//! Run configuration: a single JSON document drives the CLI and the
//! reproducibility manifest. Schema is versioned; unknown schemas are
//! rejected rather than guessed at.

use crate::error::{HblError, Result};
use crate::geometry::background::Background;
use crate::solver::SolveConfig;
use crate::verify::VerifyOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA: &str = "hbl-config/1";

fn default_schema() -> String {
    SCHEMA.to_string()
}
fn default_n() -> usize {
    2
}
fn default_grid() -> usize {
    16
}
fn default_rank() -> usize {
    2
}
fn default_level() -> i64 {
    1
}
fn default_k() -> usize {
    2
}
fn default_seed() -> u64 {
    7
}
fn default_quad_order() -> usize {
    12
}
fn default_tol_residual_sup() -> f64 {
    1e-6
}
fn default_max_iters() -> usize {
    5000
}
fn default_pairs() -> usize {
    20
}
fn default_nakano_samples() -> usize {
    1000
}
fn default_local_min_trials() -> usize {
    100
}
fn default_band() -> usize {
    2
}
fn default_amplitude() -> f64 {
    0.12
}
fn default_tol_scale() -> f64 {
    1.0
}
fn default_cone_check_interval() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_level")]
    pub level: i64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_tol_residual_sup")]
    pub tol_residual_sup: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_cone_check_interval")]
    pub cone_check_interval: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_nakano_samples")]
    pub nakano_samples: usize,
    #[serde(default = "default_local_min_trials")]
    pub local_min_trials: usize,
    #[serde(default = "default_band")]
    pub band: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_tol_scale")]
    pub tol_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults are total")
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| HblError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(HblError::Config(format!(
                "unsupported schema {:?}, expected {SCHEMA:?}",
                self.schema
            )));
        }
        if self.n < 1 || self.n > 3 {
            return Err(HblError::Config(format!("n={} outside 1..=3", self.n)));
        }
        if self.k < 1 || self.k > self.n {
            return Err(HblError::Config(format!("k={} outside 1..={}", self.k, self.n)));
        }
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(HblError::Config(format!(
                "grid={} must be a power of two, at least 8",
                self.grid
            )));
        }
        if self.rank < 1 {
            return Err(HblError::Config("rank must be at least 1".into()));
        }
        if self.level == 0 {
            return Err(HblError::Config("level must be nonzero".into()));
        }
        for (name, v) in [
            ("tol_residual_sup", self.tol_residual_sup),
            ("amplitude", self.amplitude),
            ("tol_scale", self.tol_scale),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(HblError::Config(format!("{name}={v} must be positive and finite")));
            }
        }
        if self.quad_order < 2 {
            return Err(HblError::Config("quad_order must be at least 2".into()));
        }
        Ok(())
    }

    /// Hash of the canonical serialization, recorded in manifests so outputs
    /// can be traced back to the exact configuration.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(&bytes);
        let d = h.finalize();
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn background(&self) -> Result<Background> {
        Background::new(self.n, self.grid, self.rank, self.level)
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            k: self.k,
            max_iters: self.max_iters,
            tol_residual_sup: self.tol_residual_sup,
            cone_check_interval: self.cone_check_interval,
            ..SolveConfig::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            n: self.n,
            grid: self.grid,
            rank: self.rank,
            level: self.level,
            seed: self.seed,
            pairs: self.pairs,
            nakano_samples: self.nakano_samples,
            local_min_trials: self.local_min_trials,
            quad_order: self.quad_order,
            band: self.band,
            amplitude: self.amplitude,
            tol_scale: self.tol_scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_schema_rejected() {
        let mut c = RunConfig::default();
        c.schema = "hbl-config/999".into();
        assert!(matches!(c.validate(), Err(HblError::Config(_))));
    }

    #[test]
    fn bad_grid_rejected() {
        let mut c = RunConfig::default();
        c.grid = 12;
        assert!(c.validate().is_err());
        c.grid = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.digest(), b.digest());
        b.seed = 8;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn unknown_field_rejected() {
        let r: std::result::Result<RunConfig, _> =
            serde_json::from_str(r#"{"grdi": 16}"#);
        assert!(r.is_err());
    }
}
