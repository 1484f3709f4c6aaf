//! Run configuration.
//!
//! Every tunable lives in one TOML file. The shipped default,
//! `data/default.toml`, is embedded in the crate and documents each key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{PidGains, ValvePolicy};
use crate::error::{Error, Result};
use crate::graspsim::GraspParams;
use crate::kinematics::{shape_template_to_lengths, PalmConfiguration, ShapeTemplate, TemplateKind};
use crate::plant::{CalibrationCurve, PneumaticParams, PALM_MAX_MM, PALM_REST_MM};
use crate::policy::PolicyParams;
use crate::sensing::DetectionParams;

/// The shipped default configuration.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../data/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub palm: PidGains,
    pub finger: PidGains,
    pub valve: ValvePolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeConfig {
    /// Pressure samples from 0 to supply, inclusive.
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub min_mm: f64,
    pub max_mm: f64,
    pub grid_n: usize,
}

/// A named fixed palm configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    pub name: String,
    pub template: TemplateKind,
    pub x: f64,
    pub y: f64,
}

impl Baseline {
    pub fn shape(&self) -> ShapeTemplate {
        ShapeTemplate::new(self.template, self.x, self.y)
    }

    /// The palm this configuration locks in, embedded with the template's
    /// own diagonal.
    pub fn palm(&self) -> Result<PalmConfiguration> {
        PalmConfiguration::from_template(&self.shape())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub plant: PneumaticParams,
    pub control: ControlConfig,
    pub sensing: DetectionParams,
    pub policy: PolicyParams,
    pub grasp: GraspParams,
    pub characterize: CharacterizeConfig,
    pub manifold: ManifoldConfig,
    pub baseline: Vec<Baseline>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_CONFIG_TOML).expect("shipped default config is valid")
    }
}

impl RunConfig {
    /// Parses and validates a configuration.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.control.palm.validate()?;
        self.control.finger.validate()?;
        self.control.valve.validate()?;
        self.sensing.validate()?;
        self.policy.validate()?;
        self.grasp.validate()?;
        if self.characterize.points < 2 {
            return Err(Error::param("characterize.points", "need at least 2 samples"));
        }
        let m = &self.manifold;
        if !(PALM_REST_MM <= m.min_mm && m.min_mm < m.max_mm && m.max_mm <= PALM_MAX_MM) {
            return Err(Error::param(
                "manifold",
                format!("range must satisfy {PALM_REST_MM} <= min_mm < max_mm <= {PALM_MAX_MM}"),
            ));
        }
        if m.grid_n < 2 {
            return Err(Error::param("manifold.grid_n", "need at least 2 points per axis"));
        }
        for (i, b) in self.baseline.iter().enumerate() {
            if self.baseline[..i].iter().any(|o| o.name.eq_ignore_ascii_case(&b.name)) {
                return Err(Error::Config(format!("duplicate baseline `{}`", b.name)));
            }
            shape_template_to_lengths(&b.shape()).map_err(|e| Error::Config(format!("baseline `{}`: {e}", b.name)))?;
        }
        Ok(())
    }

    pub fn palm_curve(&self) -> CalibrationCurve {
        CalibrationCurve::linear(
            crate::plant::CurveKind::PalmLength,
            self.plant.supply,
            PALM_REST_MM,
            PALM_MAX_MM,
        )
        .expect("validated supply")
    }

    pub fn finger_curve(&self) -> CalibrationCurve {
        CalibrationCurve::linear(
            crate::plant::CurveKind::FingerAngle,
            self.plant.supply,
            0.0,
            self.grasp.finger.max_angle_deg,
        )
        .expect("validated supply and angle")
    }

    /// Looks a baseline up by name, ignoring case and an optional
    /// `Gripper-` prefix.
    pub fn baseline(&self, name: &str) -> Result<&Baseline> {
        let strip = |s: &str| {
            let l = s.to_ascii_lowercase();
            l.strip_prefix("gripper-").map(str::to_string).unwrap_or(l)
        };
        let want = strip(name);
        self.baseline
            .iter()
            .find(|b| strip(&b.name) == want)
            .ok_or_else(|| Error::UnknownConfiguration(name.to_string()))
    }

    /// All baselines as named palms, in file order.
    pub fn baseline_palms(&self) -> Result<Vec<(String, PalmConfiguration)>> {
        self.baseline.iter().map(|b| Ok((b.name.clone(), b.palm()?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parses_and_validates() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.baseline.len(), 6);
        assert_eq!(cfg.control.valve.deadband, 1.5);
        assert_eq!(cfg.sensing.threshold, 5.0);
        assert_eq!(cfg.sensing.kernel, 5);
        assert_eq!(cfg.policy.clearance_mm, 10.0);
        assert_eq!(cfg.palm_curve().max(), 135.0);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn serialized_config_round_trips() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{DEFAULT_CONFIG_TOML}\nbogus = 1\n");
        assert!(matches!(RunConfig::from_toml_str(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn seed_is_mandatory() {
        let no_seed: String = DEFAULT_CONFIG_TOML
            .lines()
            .filter(|l| !l.starts_with("seed"))
            .collect::<Vec<_>>()
            .join("\n");
        assert!(RunConfig::from_toml_str(&no_seed).is_err());
    }

    #[test]
    fn out_of_range_values_fail_validation() {
        let mut cfg = RunConfig::default();
        cfg.control.valve.deadband = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.baseline[0].x = 150.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.manifold.min_mm = 60.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn baseline_lookup_is_lenient() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.baseline("rec-s").unwrap().name, "Gripper-Rec-S");
        assert_eq!(cfg.baseline("GRIPPER-KITE-L").unwrap().template, TemplateKind::Kite);
        assert!(matches!(cfg.baseline("Rec-XL"), Err(Error::UnknownConfiguration(_))));
    }
}
