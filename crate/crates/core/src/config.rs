use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::check_grid;

/// Numerical floors that make the open-domain conditions checkable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guards {
    /// Minimum admissible modulus of a loop in the punctured plane.
    pub eps_collision: f64,
    /// Minimum admissible slope of a diffeomorphism lift.
    pub delta_mono: f64,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            eps_collision: 1e-8,
            delta_mono: 1e-6,
        }
    }
}

/// Pass/fail thresholds for the verification harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Accepted range of fitted slopes for central-difference order checks.
    pub fd_slope_min: f64,
    pub fd_slope_max: f64,
    /// Best relative error over the step sweep for first differentials.
    pub fd_rel_tol: f64,
    /// Best relative error over the step sweep for second differentials.
    pub fd2_rel_tol: f64,
    /// Remainder slope must reach `1 + sc1_margin`.
    pub sc1_margin: f64,
    /// Denominator floor for relative errors.
    pub norm_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            fd_slope_min: 1.8,
            fd_slope_max: 2.2,
            fd_rel_tol: 1e-6,
            fd2_rel_tol: 1e-4,
            sc1_margin: 0.5,
            norm_floor: 1e-14,
        }
    }
}

impl Thresholds {
    pub const NAMES: [&'static str; 6] = [
        "fd_slope_min",
        "fd_slope_max",
        "fd_rel_tol",
        "fd2_rel_tol",
        "sc1_margin",
        "norm_floor",
    ];

    pub fn with_overrides(mut self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        for (name, &value) in overrides {
            let slot = match name.as_str() {
                "fd_slope_min" => &mut self.fd_slope_min,
                "fd_slope_max" => &mut self.fd_slope_max,
                "fd_rel_tol" => &mut self.fd_rel_tol,
                "fd2_rel_tol" => &mut self.fd2_rel_tol,
                "sc1_margin" => &mut self.sc1_margin,
                "norm_floor" => &mut self.norm_floor,
                // guard floors are handled by Config
                "eps_collision" | "delta_mono" => continue,
                other => return Err(Error::Config(format!("unknown tolerance `{other}`"))),
            };
            *slot = value;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub n: usize,
    pub eps_collision: f64,
    pub delta_mono: f64,
    pub seed: u64,
    pub k_max: u32,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for Config {
    fn default() -> Self {
        let guards = Guards::default();
        Config {
            n: 64,
            eps_collision: guards.eps_collision,
            delta_mono: guards.delta_mono,
            seed: 42,
            k_max: 4,
            tolerances: BTreeMap::new(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        check_grid(self.n)
            .map_err(|_| Error::Config(format!("n = {} is not a power of two >= 8", self.n)))?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("eps_collision", self.eps_collision)?;
        positive("delta_mono", self.delta_mono)?;
        for (name, &v) in &self.tolerances {
            positive(name, v)?;
        }
        self.thresholds().map(|_| ())
    }

    pub fn guards(&self) -> Guards {
        Guards {
            eps_collision: self
                .tolerances
                .get("eps_collision")
                .copied()
                .unwrap_or(self.eps_collision),
            delta_mono: self
                .tolerances
                .get("delta_mono")
                .copied()
                .unwrap_or(self.delta_mono),
        }
    }

    pub fn thresholds(&self) -> Result<Thresholds> {
        Thresholds::default().with_overrides(&self.tolerances)
    }
}
