//! Flat TOML run configuration.
//!
//! Every key is optional and falls back to the value in [`RunConfig::default`].
//! Lengths for the spectral window and probe are in units of the surface
//! radius.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Solve3d,
    Verify3d,
    Parseval,
    Decay,
    Solve1d,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SideName {
    Interior,
    Exterior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    None,
    /// `source_value` on the ball (3D) or on `source_support` (1D).
    Constant,
    /// `source_value * exp(-|x - c|^2 / (2 w^2))`, `w = source_radius`, cut at `4 w`.
    Gaussian,
    /// Piecewise-constant values read from `source_file`.
    Voxel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Constant,
    /// Eigenmode `boundary_mode` of the boundary operator, scaled by `boundary_value`.
    Mode,
    /// One value per panel from `boundary_file`.
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    Full,
    Fraction,
    Floor,
    Modes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem1d {
    Halfline,
    Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub mode: Mode,
    pub alpha: f64,
    pub output: PathBuf,

    /// `"sphere"` or the path of an OFF mesh.
    pub mesh: String,
    pub radius: f64,
    pub level: u32,
    pub side: SideName,

    pub source: SourceKind,
    pub source_value: f64,
    pub source_center: [f64; 3],
    pub source_radius: f64,
    pub source_file: String,
    pub volume_resolution: usize,

    pub boundary: BoundaryKind,
    pub boundary_value: f64,
    pub boundary_mode: usize,
    pub boundary_file: String,

    pub cutoff: CutoffKind,
    pub cutoff_value: f64,

    /// Solution samples per axis on the cube of half-edge `eval_extent`.
    pub eval_n: usize,
    pub eval_extent: f64,

    pub grid_n: usize,
    pub padding: f64,
    pub window_inner: f64,
    pub window_outer: f64,
    pub probe_radius: f64,
    pub mollifier: f64,
    pub residual_tolerance: f64,

    pub parseval_radii: Vec<f64>,
    pub parseval_samples: usize,
    pub seed: u64,

    pub decay_r_min: f64,
    pub decay_r_max: f64,
    pub decay_samples: usize,

    pub problem: Problem1d,
    pub l0: f64,
    pub c0: f64,
    pub l: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub source_support: [f64; 2],
    pub x_min: f64,
    pub x_max: f64,
    pub spectral: bool,
    pub probe_interval: [f64; 2],
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Solve3d,
            alpha: 1.5,
            output: PathBuf::from("out"),
            mesh: "sphere".into(),
            radius: 1.0,
            level: 2,
            side: SideName::Interior,
            source: SourceKind::None,
            source_value: 1.0,
            source_center: [0.0; 3],
            source_radius: 1.0,
            source_file: String::new(),
            volume_resolution: 16,
            boundary: BoundaryKind::Constant,
            boundary_value: 1.0,
            boundary_mode: 0,
            boundary_file: String::new(),
            cutoff: CutoffKind::Full,
            cutoff_value: 1.0,
            eval_n: 9,
            eval_extent: 2.0,
            grid_n: 64,
            padding: 8.0,
            window_inner: 2.5,
            window_outer: 3.5,
            probe_radius: 0.5,
            mollifier: 1.2,
            residual_tolerance: 0.1,
            parseval_radii: vec![5.0, 10.0, 20.0, 40.0],
            parseval_samples: 10,
            seed: 1,
            decay_r_min: 5.0,
            decay_r_max: 50.0,
            decay_samples: 10,
            problem: Problem1d::Halfline,
            l0: 0.0,
            c0: 1.0,
            l: 1.0,
            c_minus: 1.0,
            c_plus: 1.0,
            source_support: [1.0, 2.0],
            x_min: 0.05,
            x_max: 4.0,
            spectral: true,
            probe_interval: [1.2, 1.8],
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // Relative paths in the config resolve against its directory.
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        for p in [&mut cfg.source_file, &mut cfg.boundary_file] {
            if !p.is_empty() && Path::new(p.as_str()).is_relative() {
                *p = base.join(&*p).to_string_lossy().into_owned();
            }
        }
        if cfg.mesh != "sphere" && Path::new(&cfg.mesh).is_relative() {
            cfg.mesh = base.join(&cfg.mesh).to_string_lossy().into_owned();
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("config does not parse: {e}")))?;
        let known = known_keys();
        let unknown: Vec<&str> = table.keys().map(String::as_str).filter(|k| !known.contains(*k)).collect();
        if !unknown.is_empty() {
            return Err(CliError::Validation(format!("unknown config keys: {}", unknown.join(", "))));
        }
        let cfg: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("invalid config value: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        let three_d = self.mode != Mode::Solve1d;
        if three_d && !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return bad(format!("alpha = {} is outside the admissible interval (1, 2]", self.alpha));
        }
        if !three_d && !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!(
                "alpha = {} is outside the admissible interval (0, 1) for solve1d",
                self.alpha
            ));
        }
        if three_d {
            if !(self.radius > 0.0) {
                return bad("radius must be positive".into());
            }
            if self.level > 5 {
                return bad(format!("level = {} exceeds the supported maximum 5", self.level));
            }
            if self.source == SourceKind::Voxel && self.source_file.is_empty() {
                return bad("source = \"voxel\" needs source_file".into());
            }
            if self.boundary == BoundaryKind::File && self.boundary_file.is_empty() {
                return bad("boundary = \"file\" needs boundary_file".into());
            }
            if matches!(self.source, SourceKind::Constant | SourceKind::Gaussian) && !(self.source_radius > 0.0) {
                return bad("source_radius must be positive".into());
            }
            if self.volume_resolution == 0 || self.eval_n == 0 || !(self.eval_extent > 0.0) {
                return bad("volume_resolution, eval_n and eval_extent must be positive".into());
            }
        }
        match self.cutoff {
            CutoffKind::Fraction if !(self.cutoff_value > 0.0 && self.cutoff_value <= 1.0) => {
                return bad("cutoff_value must lie in (0, 1] for a fraction cutoff".into());
            }
            CutoffKind::Floor if !(self.cutoff_value >= 0.0) => {
                return bad("cutoff_value must be non-negative for a floor cutoff".into());
            }
            CutoffKind::Modes if !(self.cutoff_value >= 1.0) => {
                return bad("cutoff_value must be at least 1 for a modes cutoff".into());
            }
            _ => {}
        }
        match self.mode {
            Mode::Verify3d => {
                if !self.grid_n.is_power_of_two() || self.grid_n < 64 {
                    return bad(format!("grid_n = {} must be a power of two >= 64", self.grid_n));
                }
                if !(self.padding > 0.0 && self.window_inner > self.probe_radius && self.window_outer > self.window_inner) {
                    return bad("need padding > 0 and probe_radius < window_inner < window_outer".into());
                }
            }
            Mode::Parseval => {
                if self.parseval_radii.is_empty()
                    || self.parseval_radii[0] <= 0.0
                    || self.parseval_radii.windows(2).any(|w| w[1] <= w[0])
                {
                    return bad("parseval_radii must be positive and strictly increasing".into());
                }
            }
            Mode::Decay => {
                if self.side != SideName::Exterior {
                    return bad("decay mode needs side = \"exterior\"".into());
                }
                if !(self.decay_r_min > 0.0 && self.decay_r_max > self.decay_r_min) || self.decay_samples < 2 {
                    return bad("need 0 < decay_r_min < decay_r_max and decay_samples >= 2".into());
                }
            }
            Mode::Solve1d => {
                if self.eval_n < 1 || !(self.x_max >= self.x_min) {
                    return bad("need eval_n >= 1 and x_min <= x_max".into());
                }
                if self.source == SourceKind::Voxel {
                    return bad("solve1d supports source = none, constant or gaussian".into());
                }
            }
            Mode::Solve3d => {}
        }
        Ok(())
    }
}

fn known_keys() -> BTreeSet<String> {
    match toml::Table::try_from(RunConfig::default()) {
        Ok(t) => t.keys().cloned().collect(),
        Err(e) => panic!("default config serializes: {e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn lists_every_unknown_key() {
        let err = RunConfig::parse("alpha = 1.5\nfoo = 1\nbar = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bar") && msg.contains("foo"), "{msg}");
    }

    #[test]
    fn rejects_alpha_outside_the_interval() {
        let msg = RunConfig::parse("alpha = 3.0").unwrap_err().to_string();
        assert!(msg.contains("(1, 2]"), "{msg}");
        assert!(RunConfig::parse("mode = \"solve1d\"\nalpha = 1.5").is_err());
        assert!(RunConfig::parse("mode = \"solve1d\"\nalpha = 0.5").is_ok());
    }

    #[test]
    fn cross_field_checks() {
        assert!(RunConfig::parse("mode = \"verify3d\"\ngrid_n = 100").is_err());
        assert!(RunConfig::parse("mode = \"decay\"").is_err());
        assert!(RunConfig::parse("mode = \"decay\"\nside = \"exterior\"").is_ok());
        assert!(RunConfig::parse("source = \"voxel\"").is_err());
        assert!(RunConfig::parse("mode = \"parseval\"\nparseval_radii = [5.0, 4.0]").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig {
            alpha: 1.75,
            side: SideName::Exterior,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&toml::to_string(&cfg).unwrap()).unwrap(), cfg);
    }
}
