//! TOML experiment configuration.
//!
//! Angles are written in degrees and powers in dB; loading converts to the
//! radians and linear units the core crate works in. Pattern files are
//! resolved relative to the config file's directory.

use acn_core::{
    design_rates, load_pattern_csv, AntennaArray, FarFieldPattern, LinkBudget, PepModel,
    PhaseSchedule,
};
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Degrees to radians.
pub(crate) fn deg(value: f64) -> f64 {
    value * PI / 180.0
}

/// Top-level experiment description, one per config file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Base RNG seed; the `--seed` flag overrides it, and 0 is used when
    /// neither is given.
    pub seed: Option<u64>,
    pub array: ArrayConfig,
    pub budget: BudgetConfig,
    #[serde(default)]
    pub pep: PepConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub montecarlo: MonteCarloConfig,
}

/// Antenna array geometry and per-element patterns.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub elements: Vec<ElementConfig>,
}

/// One array element: a position in meters and a pattern.
#[derive(Debug, Deserialize)]
pub struct ElementConfig {
    pub position: [f64; 2],
    #[serde(flatten)]
    pub pattern: PatternConfig,
}

/// Far-field pattern selector, tagged by `kind`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatternConfig {
    Isotropic,
    DipoleCosine {
        pointing_deg: f64,
    },
    Cardioid {
        pointing_deg: f64,
        depth: f64,
    },
    PatchLobe {
        pointing_deg: f64,
        beamwidth_deg: f64,
        back_lobe: f64,
    },
    /// Tabulated pattern CSV, resolved relative to the config file.
    File {
        path: PathBuf,
    },
}

/// Link budget of the periodic burst.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    /// Per-branch signal-to-noise ratio in dB.
    pub snr_db: f64,
    /// Per-branch noise power, linear.
    #[serde(default = "default_noise")]
    pub noise_power: f64,
    /// Packets per burst `K`.
    pub packets: u32,
    /// Packet period `T` in seconds.
    pub period_s: f64,
}

fn default_noise() -> f64 {
    1.0
}

/// Packet error probability model, tagged by `kind`.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PepConfig {
    Exponential {
        #[serde(default = "default_unit")]
        a: f64,
        #[serde(default = "default_unit")]
        b: f64,
    },
    QpskAwgn {
        bits: u32,
    },
    QpskRayleigh {
        bits: u32,
    },
}

fn default_unit() -> f64 {
    1.0
}

impl Default for PepConfig {
    fn default() -> Self {
        Self::Exponential { a: 1.0, b: 1.0 }
    }
}

/// Phase-shifter schedule: the designed optimal rates, or explicit values.
#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleConfig {
    /// Smallest optimal rates for the configured `L`, `K`, `T`, zero offsets.
    Optimal,
    Explicit {
        rates_deg_per_s: Vec<f64>,
        #[serde(default)]
        offsets_deg: Option<Vec<f64>>,
    },
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self::Optimal
    }
}

/// Sweep axes shared by the sweep and comparison commands.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Azimuth grid points over `[0, 360)` degrees.
    pub phi_points: usize,
    /// Fixed azimuth in degrees; when absent, commands that need a single
    /// azimuth use the worst-case angle of arrival.
    pub phi_deg: Option<f64>,
    /// Rate-period product grid for `sweep-alpha`, in degrees.
    pub alpha_t_min_deg: f64,
    pub alpha_t_max_deg: f64,
    pub alpha_t_points: usize,
    /// Beacon-period multiples checked by the design report.
    pub period_multiples: Vec<u32>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            phi_points: 3600,
            phi_deg: None,
            alpha_t_min_deg: 0.0,
            alpha_t_max_deg: 936.0,
            alpha_t_points: 651,
            period_multiples: (1..=10).collect(),
        }
    }
}

/// Monte Carlo sizes.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    /// Burst trials.
    pub trials: u64,
    /// Rich-scattering SNR samples.
    pub scenario2_samples: usize,
    /// Scatterer paths per branch.
    pub paths: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            trials: 100_000,
            scenario2_samples: 100_000,
            paths: 64,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file and returns it with the raw bytes (hashed into
    /// output headers) and the directory pattern paths resolve against.
    pub fn load(path: &Path) -> Result<(Self, Vec<u8>, PathBuf), CliError> {
        let raw = std::fs::read(path).map_err(|e| {
            CliError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        let text = std::str::from_utf8(&raw)
            .map_err(|e| CliError::Usage(format!("config {} is not UTF-8: {e}", path.display())))?;
        let cfg: Self = toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((cfg, raw, dir))
    }

    /// Builds the antenna array, loading any pattern files.
    pub fn array(&self, dir: &Path) -> Result<AntennaArray, CliError> {
        let mut elements = Vec::with_capacity(self.array.elements.len());
        let mut positions = Vec::with_capacity(self.array.elements.len());
        for element in &self.array.elements {
            let pattern = match &element.pattern {
                PatternConfig::Isotropic => FarFieldPattern::Isotropic,
                PatternConfig::DipoleCosine { pointing_deg } => FarFieldPattern::DipoleCosine {
                    pointing: deg(*pointing_deg),
                },
                PatternConfig::Cardioid { pointing_deg, depth } => {
                    FarFieldPattern::cardioid(deg(*pointing_deg), *depth)?
                }
                PatternConfig::PatchLobe {
                    pointing_deg,
                    beamwidth_deg,
                    back_lobe,
                } => FarFieldPattern::patch_lobe(deg(*pointing_deg), deg(*beamwidth_deg), *back_lobe)?,
                PatternConfig::File { path } => load_pattern_csv(dir.join(path))?,
            };
            elements.push(pattern);
            positions.push((element.position[0], element.position[1]));
        }
        Ok(AntennaArray::new(
            elements,
            positions,
            self.array.wavelength,
        )?)
    }

    /// Builds the link budget from the dB figures.
    pub fn budget(&self) -> Result<LinkBudget, CliError> {
        let b = &self.budget;
        let received = b.noise_power * 10f64.powf(b.snr_db / 10.0);
        Ok(LinkBudget::new(
            received,
            b.noise_power,
            b.packets,
            b.period_s,
        )?)
    }

    /// Builds the packet error model.
    pub fn pep(&self) -> PepModel {
        match self.pep {
            PepConfig::Exponential { a, b } => PepModel::Exponential { a, b },
            PepConfig::QpskAwgn { bits } => PepModel::QpskAwgn { bits },
            PepConfig::QpskRayleigh { bits } => PepModel::QpskRayleigh { bits },
        }
    }

    /// Resolves the schedule for an `L`-element array and the given budget.
    pub fn schedule(&self, l: usize, budget: &LinkBudget) -> Result<PhaseSchedule, CliError> {
        match &self.schedule {
            ScheduleConfig::Optimal => Ok(PhaseSchedule::from_rates(design_rates(
                l,
                budget.packets(),
                budget.period(),
            )?)?),
            ScheduleConfig::Explicit {
                rates_deg_per_s,
                offsets_deg,
            } => {
                let rates: Vec<f64> = rates_deg_per_s.iter().map(|&r| deg(r)).collect();
                let offsets = match offsets_deg {
                    Some(o) => o.iter().map(|&b| deg(b)).collect(),
                    None => vec![0.0; rates.len()],
                };
                let schedule = PhaseSchedule::new(rates, offsets)?;
                if schedule.len() != l {
                    return Err(CliError::Usage(format!(
                        "schedule has {} branches but the array has {l} elements",
                        schedule.len()
                    )));
                }
                Ok(schedule)
            }
        }
    }

    /// Fixed azimuth in radians, when one is configured.
    pub fn phi(&self) -> Option<f64> {
        self.sweep.phi_deg.map(deg)
    }
}
