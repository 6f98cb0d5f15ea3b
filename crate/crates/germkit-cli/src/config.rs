//! Experiment configuration: one JSON document per experiment, complex
//! numbers as [re, im] pairs.

use std::path::PathBuf;

use germkit_core::{Complex64, EvalBudget, GermError, MapSpec, PolarGrid};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classify,
    Koenig,
    Boettcher,
    Omega,
    Motion,
    Verify,
    All,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub rings: usize,
    pub angles: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            r_min: 1e-7,
            r_max: 0.1,
            rings: 40,
            angles: 16,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> germkit_core::Result<PolarGrid> {
        PolarGrid::log_spaced(self.r_min, self.r_max, self.rings, self.angles)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MotionConfig {
    /// Radius r of the outer motion circle S_r.
    pub r: f64,
    /// Points per circle.
    pub samples: usize,
    /// |c| rings of the parameter grid.
    pub c_radii: Vec<f64>,
    /// Angles per |c| ring.
    pub c_angles: usize,
    /// Interior rings of the annulus extension.
    pub extension_rings: usize,
}

impl Default for MotionConfig {
    fn default() -> Self {
        MotionConfig {
            r: 0.01,
            samples: 64,
            c_radii: vec![0.05, 0.1, 0.2, 0.4],
            c_angles: 8,
            extension_rings: 12,
        }
    }
}

impl MotionConfig {
    pub fn c_samples(&self) -> Vec<Complex64> {
        let mut cs = vec![Complex64::ZERO];
        for &rho in &self.c_radii {
            for k in 0..self.c_angles {
                cs.push(Complex64::from_polar(
                    rho,
                    std::f64::consts::TAU * k as f64 / self.c_angles as f64,
                ));
            }
        }
        cs
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    pub n_max: usize,
    pub samples: usize,
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            n_max: 60,
            samples: 64,
        }
    }
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    pub task: Task,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub budget: EvalBudget,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_svg: bool,
    /// Disk radius for the control condition and the Koenig motion.
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub motion: MotionConfig,
    #[serde(default)]
    pub control: ControlConfig,
}

impl ExperimentConfig {
    pub fn new(map: MapSpec, task: Task) -> Self {
        ExperimentConfig {
            map,
            task,
            grid: GridConfig::default(),
            budget: EvalBudget::default(),
            output_dir: None,
            emit_svg: false,
            delta: default_delta(),
            motion: MotionConfig::default(),
            control: ControlConfig::default(),
        }
    }

    pub fn validate(&self) -> germkit_core::Result<()> {
        self.map.validate()?;
        self.budget.validate()?;
        self.grid.build()?;
        let radius = self.map.validity_radius();
        if self.grid.r_max > radius {
            return Err(GermError::InvalidConfig {
                what: format!(
                    "grid r_max {} exceeds the map validity radius {}",
                    self.grid.r_max, radius
                ),
            });
        }
        if !(self.delta > 0.0) {
            return Err(GermError::InvalidConfig {
                what: "delta must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical bytes for hashing: the serde_json rendering (maps are
    /// sorted, so this is stable).
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&serde_json::to_value(self).unwrap()).unwrap()
    }
}
