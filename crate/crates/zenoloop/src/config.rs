//! Run configuration: a TOML file mirroring the physical parameter structs,
//! with strict key checking and full revalidation at load time.
//!
//! Unknown keys are rejected with the offending name, parse failures carry
//! line/column positions, and every physical constraint of the nested types
//! is re-checked, so a config that loads is a config that runs. The
//! resolved ("effective") configuration can be serialized back out; loading
//! that echo reproduces the same run bit for bit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::SweepGrid;
use crate::error::{Error, Result};
use crate::loop_sim::{ImagerConfig, LoopConfig, NoiseConfig};
use crate::zeno::ZenoParams;

/// Default photon budget for ensemble commands.
pub const DEFAULT_N_PHOTONS: usize = 10_000;
/// Default grid resolution for the exact-evolution density output.
pub const DEFAULT_PDF_POINTS: usize = 512;

/// Noisy working point with every optical imperfection switched on at a
/// sub-percent level: 1% beam-splitter cross-talk and per-pass loss, 2 mrad
/// wave-plate and polarizer angle jitter, 2% relative displacement jitter.
/// Pockels cells are left reliable; their failure mode is configured
/// explicitly when wanted.
pub const NOISE_PRESET_SEC4: &str = "paper-sec4";

fn sec4_noise() -> NoiseConfig {
    NoiseConfig {
        pbs_crosstalk: 0.01,
        per_pass_loss: 0.01,
        hwp_angle_jitter_sd: 0.002,
        polarizer_angle_jitter_sd: 0.002,
        displacement_jitter_sd: 0.02,
        pockels_failure: 0.0,
    }
}

// --- raw (serde) layer ----------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: u64,
    threads: Option<usize>,
    n_photons: Option<usize>,
    out_dir: Option<String>,
    protocol: RawProtocol,
    #[serde(rename = "loop")]
    loop_section: Option<RawLoop>,
    imager: Option<RawImager>,
    noise: Option<RawNoise>,
    sweep: Option<RawSweep>,
    ifm: Option<RawIfm>,
    exact: Option<RawExact>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProtocol {
    theta: f64,
    xi: f64,
    n_steps: usize,
    sigma: Option<f64>,
    x0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoop {
    loop_period: Option<f64>,
    gate_halfwidth: Option<f64>,
    time_gating: Option<bool>,
    max_cycles: Option<usize>,
    reinforcement_polarizer: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawImager {
    pixel_count: Option<u32>,
    pixel_pitch: Option<f64>,
    center_offset: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    preset: Option<String>,
    pbs_crosstalk: Option<f64>,
    per_pass_loss: Option<f64>,
    hwp_angle_jitter_sd: Option<f64>,
    polarizer_angle_jitter_sd: Option<f64>,
    displacement_jitter_sd: Option<f64>,
    pockels_failure: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_list: Vec<usize>,
    xi_list: Vec<f64>,
    theta_list: Vec<f64>,
    photons_per_cell: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIfm {
    n_list: Option<Vec<usize>>,
    object_present: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExact {
    pdf_points: Option<usize>,
}

// --- resolved layer ---------------------------------------------------------

/// Interaction-free-measurement table settings.
#[derive(Debug, Clone, PartialEq)]
pub struct IfmSettings {
    pub n_list: Vec<usize>,
    pub object_present: bool,
}

impl Default for IfmSettings {
    fn default() -> Self {
        Self {
            n_list: (1..=64).collect(),
            object_present: true,
        }
    }
}

/// Fully resolved, validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Rayon worker count; 0 = library default.
    pub threads: usize,
    pub n_photons: usize,
    pub out_dir: PathBuf,
    pub loop_config: LoopConfig,
    pub sweep: Option<SweepGrid>,
    pub ifm: IfmSettings,
    pub pdf_points: usize,
}

impl RunConfig {
    /// Parse and validate a TOML string. Error messages carry line/column
    /// positions (from the parser) or the offending key/parameter name.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let zeno = ZenoParams::with_geometry(
            raw.protocol.theta,
            raw.protocol.xi,
            raw.protocol.n_steps,
            raw.protocol.sigma.unwrap_or(1.0),
            raw.protocol.x0.unwrap_or(0.0),
        )
        .map_err(config_err)?;

        let mut loop_config = LoopConfig::new(zeno);
        if let Some(l) = raw.loop_section {
            if let Some(v) = l.loop_period {
                loop_config.loop_period = v;
            }
            if let Some(v) = l.gate_halfwidth {
                loop_config.gate_halfwidth = v;
            }
            if let Some(v) = l.time_gating {
                loop_config.time_gating = v;
            }
            if let Some(v) = l.max_cycles {
                loop_config.max_cycles = v;
            }
            if let Some(v) = l.reinforcement_polarizer {
                loop_config.reinforcement_polarizer = v;
            }
        }
        if let Some(im) = raw.imager {
            let d = ImagerConfig::default();
            loop_config.imager = ImagerConfig {
                pixel_count: im.pixel_count.unwrap_or(d.pixel_count),
                pixel_pitch: im.pixel_pitch.unwrap_or(d.pixel_pitch),
                center_offset: im.center_offset.unwrap_or(d.center_offset),
            };
        }
        if let Some(n) = raw.noise {
            let base = match n.preset.as_deref() {
                None => NoiseConfig::default(),
                Some(NOISE_PRESET_SEC4) => sec4_noise(),
                Some(other) => {
                    return Err(Error::Config(format!(
                        "unknown noise preset `{other}` (expected `{NOISE_PRESET_SEC4}`)"
                    )))
                }
            };
            loop_config.noise = NoiseConfig {
                pbs_crosstalk: n.pbs_crosstalk.unwrap_or(base.pbs_crosstalk),
                per_pass_loss: n.per_pass_loss.unwrap_or(base.per_pass_loss),
                hwp_angle_jitter_sd: n.hwp_angle_jitter_sd.unwrap_or(base.hwp_angle_jitter_sd),
                polarizer_angle_jitter_sd: n
                    .polarizer_angle_jitter_sd
                    .unwrap_or(base.polarizer_angle_jitter_sd),
                displacement_jitter_sd: n
                    .displacement_jitter_sd
                    .unwrap_or(base.displacement_jitter_sd),
                pockels_failure: n.pockels_failure.unwrap_or(base.pockels_failure),
            };
        }
        loop_config.validate().map_err(config_err)?;

        let sweep = match raw.sweep {
            None => None,
            Some(s) => {
                let grid = SweepGrid {
                    n_list: s.n_list,
                    xi_list: s.xi_list,
                    theta_list: s.theta_list,
                    photons_per_cell: s.photons_per_cell,
                };
                if grid.n_list.is_empty() || grid.xi_list.is_empty() || grid.theta_list.is_empty()
                {
                    return Err(Error::Config(
                        "sweep lists must all be nonempty".to_string(),
                    ));
                }
                if grid.photons_per_cell < 1 {
                    return Err(Error::Config(
                        "sweep.photons_per_cell must be >= 1".to_string(),
                    ));
                }
                Some(grid)
            }
        };

        let ifm = match raw.ifm {
            None => IfmSettings::default(),
            Some(i) => {
                let d = IfmSettings::default();
                let settings = IfmSettings {
                    n_list: i.n_list.unwrap_or(d.n_list),
                    object_present: i.object_present.unwrap_or(d.object_present),
                };
                if settings.n_list.is_empty() || settings.n_list.contains(&0) {
                    return Err(Error::Config(
                        "ifm.n_list must be nonempty with entries >= 1".to_string(),
                    ));
                }
                settings
            }
        };

        let n_photons = raw.n_photons.unwrap_or(DEFAULT_N_PHOTONS);
        if n_photons < 1 {
            return Err(Error::Config("n_photons must be >= 1".to_string()));
        }
        let pdf_points = raw.exact.and_then(|e| e.pdf_points).unwrap_or(DEFAULT_PDF_POINTS);
        if pdf_points < 2 {
            return Err(Error::Config("exact.pdf_points must be >= 2".to_string()));
        }

        Ok(Self {
            seed: raw.seed,
            threads: raw.threads.unwrap_or(0),
            n_photons,
            out_dir: PathBuf::from(raw.out_dir.unwrap_or_else(|| "out".to_string())),
            loop_config,
            sweep,
            ifm,
            pdf_points,
        })
    }

    /// Serialize the fully resolved configuration (presets expanded, every
    /// default written out) as TOML. Loading the result reproduces `self`.
    pub fn to_effective_toml(&self) -> String {
        let lc = &self.loop_config;
        let eff = EffectiveConfig {
            seed: self.seed,
            threads: self.threads,
            n_photons: self.n_photons,
            out_dir: self.out_dir.display().to_string(),
            protocol: EffProtocol {
                theta: lc.zeno.theta,
                xi: lc.zeno.xi,
                n_steps: lc.zeno.n_steps,
                sigma: lc.zeno.sigma,
                x0: lc.zeno.x0,
            },
            loop_section: EffLoop {
                loop_period: lc.loop_period,
                gate_halfwidth: lc.gate_halfwidth,
                time_gating: lc.time_gating,
                max_cycles: lc.max_cycles,
                reinforcement_polarizer: lc.reinforcement_polarizer,
            },
            imager: EffImager {
                pixel_count: lc.imager.pixel_count,
                pixel_pitch: lc.imager.pixel_pitch,
                center_offset: lc.imager.center_offset,
            },
            noise: EffNoise {
                pbs_crosstalk: lc.noise.pbs_crosstalk,
                per_pass_loss: lc.noise.per_pass_loss,
                hwp_angle_jitter_sd: lc.noise.hwp_angle_jitter_sd,
                polarizer_angle_jitter_sd: lc.noise.polarizer_angle_jitter_sd,
                displacement_jitter_sd: lc.noise.displacement_jitter_sd,
                pockels_failure: lc.noise.pockels_failure,
            },
            sweep: self.sweep.as_ref().map(|s| EffSweep {
                n_list: s.n_list.clone(),
                xi_list: s.xi_list.clone(),
                theta_list: s.theta_list.clone(),
                photons_per_cell: s.photons_per_cell,
            }),
            ifm: EffIfm {
                n_list: self.ifm.n_list.clone(),
                object_present: self.ifm.object_present,
            },
            exact: EffExact {
                pdf_points: self.pdf_points,
            },
        };
        toml::to_string_pretty(&eff).expect("effective config serializes")
    }
}

fn config_err(e: Error) -> Error {
    Error::Config(e.to_string())
}

// Serialization mirror of the raw schema, with every field mandatory so the
// echo is fully explicit.
#[derive(Serialize)]
struct EffectiveConfig {
    seed: u64,
    threads: usize,
    n_photons: usize,
    out_dir: String,
    protocol: EffProtocol,
    #[serde(rename = "loop")]
    loop_section: EffLoop,
    imager: EffImager,
    noise: EffNoise,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<EffSweep>,
    ifm: EffIfm,
    exact: EffExact,
}

#[derive(Serialize)]
struct EffProtocol {
    theta: f64,
    xi: f64,
    n_steps: usize,
    sigma: f64,
    x0: f64,
}

#[derive(Serialize)]
struct EffLoop {
    loop_period: f64,
    gate_halfwidth: f64,
    time_gating: bool,
    max_cycles: usize,
    reinforcement_polarizer: bool,
}

#[derive(Serialize)]
struct EffImager {
    pixel_count: u32,
    pixel_pitch: f64,
    center_offset: f64,
}

#[derive(Serialize)]
struct EffNoise {
    pbs_crosstalk: f64,
    per_pass_loss: f64,
    hwp_angle_jitter_sd: f64,
    polarizer_angle_jitter_sd: f64,
    displacement_jitter_sd: f64,
    pockels_failure: f64,
}

#[derive(Serialize)]
struct EffSweep {
    n_list: Vec<usize>,
    xi_list: Vec<f64>,
    theta_list: Vec<f64>,
    photons_per_cell: usize,
}

#[derive(Serialize)]
struct EffIfm {
    n_list: Vec<usize>,
    object_present: bool,
}

#[derive(Serialize)]
struct EffExact {
    pdf_points: usize,
}
