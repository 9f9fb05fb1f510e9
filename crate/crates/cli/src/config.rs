//! Run configuration: flat `key = value` TOML with bracketed lists.

use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pipe,
    Disc,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Monomial coefficients of `v(r)`, constant term first.
    pub coeffs: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "order_cap")]
    pub order_cap: usize,
    #[serde(default = "pipe")]
    pub mode: Mode,
    pub nu_list: Vec<f64>,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default)]
    pub ell: i32,
    #[serde(default = "grid_size")]
    pub grid_size: usize,
    #[serde(default = "lambda_samples")]
    pub lambda_samples: usize,
    pub refine_tol: Option<f64>,
    #[serde(default = "fit_upper")]
    pub fit_upper: f64,
    #[serde(default = "fit_lower")]
    pub fit_lower: f64,
    #[serde(default = "trials")]
    pub trials: usize,
    #[serde(default = "out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "delta_list")]
    pub delta_list: Vec<f64>,
    #[serde(default = "lambda_count")]
    pub lambda_count: usize,
    pub c1: Option<f64>,
    #[serde(default = "t_min")]
    pub t_min: f64,
    /// Dispersion times end at `t_max_scale / ν`.
    #[serde(default = "t_max_scale")]
    pub t_max_scale: f64,
    #[serde(default = "t_count")]
    pub t_count: usize,
}

fn one() -> f64 {
    1.0
}
fn order_cap() -> usize {
    mixlab::profiles::DEFAULT_ORDER_CAP
}
fn pipe() -> Mode {
    Mode::Pipe
}
fn grid_size() -> usize {
    192
}
fn lambda_samples() -> usize {
    mixlab::pseudospectral::DEFAULT_LAMBDA_SAMPLES
}
fn fit_upper() -> f64 {
    1e-2
}
fn fit_lower() -> f64 {
    1e-6
}
fn trials() -> usize {
    20
}
fn out() -> PathBuf {
    PathBuf::from("mixlab-out")
}
fn delta_list() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}
fn lambda_count() -> usize {
    101
}
fn t_min() -> f64 {
    0.1
}
fn t_max_scale() -> f64 {
    10.0
}
fn t_count() -> usize {
    60
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {x}"))
            }
        };
        if self.coeffs.is_empty() {
            return Err("coeffs must be nonempty".into());
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err("coeffs must be finite".into());
        }
        if self.nu_list.is_empty() {
            return Err("nu_list must be nonempty".into());
        }
        if self.delta_list.is_empty() {
            return Err("delta_list must be nonempty".into());
        }
        positive("radius", self.radius)?;
        for &nu in &self.nu_list {
            positive("nu", nu)?;
        }
        for &d in &self.delta_list {
            positive("delta", d)?;
        }
        if !self.k.is_finite() {
            return Err("k must be finite".into());
        }
        if self.mode == Mode::Disc && (self.k == 0.0 || self.k.fract() != 0.0) {
            return Err(format!("disc mode needs a nonzero integer k, got {}", self.k));
        }
        if self.grid_size < mixlab::operator::MIN_GRID_SIZE {
            return Err(format!("grid_size must be at least {}", mixlab::operator::MIN_GRID_SIZE));
        }
        if self.lambda_samples < mixlab::pseudospectral::MIN_LAMBDA_SAMPLES {
            return Err(format!("lambda_samples must be at least {}", mixlab::pseudospectral::MIN_LAMBDA_SAMPLES));
        }
        if let Some(tol) = self.refine_tol {
            positive("refine_tol", tol)?;
        }
        positive("fit_lower", self.fit_lower)?;
        if !(self.fit_upper > self.fit_lower && self.fit_upper <= 1.0) {
            return Err("fit window needs fit_lower < fit_upper <= 1".into());
        }
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.lambda_count < 2 {
            return Err("lambda_count must be at least 2".into());
        }
        if let Some(c1) = self.c1 {
            positive("c1", c1)?;
        }
        positive("t_min", self.t_min)?;
        positive("t_max_scale", self.t_max_scale)?;
        if self.t_count < 2 {
            return Err("t_count must be at least 2".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let cfg = RunConfig::parse(DEFAULT_CONFIG).unwrap();
        assert_eq!(cfg.coeffs, vec![1.0, 0.0, -1.0]);
        assert_eq!(cfg.mode, Mode::Pipe);
    }

    #[test]
    fn rejects_unknown_keys_and_empty_lists() {
        assert!(RunConfig::parse("coeffs = [1.0]\nnu_list = [1e-3]\nbogus = 1").is_err());
        assert!(RunConfig::parse("coeffs = [1.0]\nnu_list = []").is_err());
        assert!(RunConfig::parse("coeffs = [1.0, -1.0]\nnu_list = [1e-3]\nmode = \"torus\"").is_err());
    }
}
