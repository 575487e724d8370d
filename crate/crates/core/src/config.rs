use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    /// Branch points and fiber values closer than this are identified.
    pub cluster_eps: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank_tol: f64,
    /// Newton corrector stopping tolerance.
    pub newton_tol: f64,
    /// Minimal distance kept between tracking paths and branch points.
    pub safety_eps: f64,
    /// Initial arc-length step of the path tracker.
    pub initial_step: f64,
    /// Roots of a polynomial closer than this (relative) form one multiple root.
    pub multiplicity_tol: f64,
    pub mean_circle_radius: f64,
    pub mean_samples: usize,
    pub seed: u64,
    /// Fixes the angle of the labeling base point instead of scanning for one.
    pub base_angle: Option<f64>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            cluster_eps: 1e-8,
            rank_tol: 1e-7,
            newton_tol: 1e-12,
            safety_eps: 1e-3,
            initial_step: 1e-2,
            multiplicity_tol: 1e-5,
            mean_circle_radius: 1e-2,
            mean_samples: 64,
            seed: 20_170_605,
            base_angle: None,
        }
    }
}

impl ToolConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cluster_eps", self.cluster_eps),
            ("rank_tol", self.rank_tol),
            ("newton_tol", self.newton_tol),
            ("safety_eps", self.safety_eps),
            ("initial_step", self.initial_step),
            ("multiplicity_tol", self.multiplicity_tol),
            ("mean_circle_radius", self.mean_circle_radius),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if self.mean_circle_radius >= 1.0 {
            return Err(Error::InvalidConfig("mean_circle_radius must be below 1".into()));
        }
        if self.mean_samples < 32 || !self.mean_samples.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "mean_samples must be a power of two >= 32, got {}",
                self.mean_samples
            )));
        }
        if let Some(theta) = self.base_angle {
            if !theta.is_finite() {
                return Err(Error::InvalidConfig("base_angle must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ToolConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_sample_counts() {
        for samples in [16, 48, 100] {
            let config = ToolConfig { mean_samples: samples, ..Default::default() };
            assert!(config.validate().is_err());
        }
    }

    #[test]
    fn rejects_nonpositive_tolerances() {
        let config = ToolConfig { rank_tol: 0.0, ..Default::default() };
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn partial_document_fills_defaults() {
        let config = ToolConfig::from_json(r#"{"rank_tol": 1e-6, "seed": 7}"#).unwrap();
        assert_eq!(config.rank_tol, 1e-6);
        assert_eq!(config.seed, 7);
        assert_eq!(config.mean_samples, 64);
    }
}
