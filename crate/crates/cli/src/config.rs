use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qoc_core::net::{DelayModel, LinkBudget, McsTable, TddFrame};
use qoc_core::sim::SimConfig;
use qoc_core::table::TableMode;

use crate::CliError;

/// Embedded default profiles.
pub const DESK_PROFILE: &str = include_str!("../configs/desk.toml");
pub const PAPER_PROFILE: &str = include_str!("../configs/paper.toml");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n_robots: usize,
    pub gain_per_s: f64,
    pub period_ms: f64,
    pub horizon_ms: f64,
    pub step_ms: f64,
    /// "grid" (deterministic layout on [-1, 1]), "uniform" (seeded random on
    /// `initial_range`) or "explicit" (`initial_positions`).
    #[serde(default = "default_initial")]
    pub initial: String,
    #[serde(default)]
    pub initial_positions: Option<Vec<f64>>,
    #[serde(default)]
    pub initial_range: Option<[f64; 2]>,
    pub seed: u64,
}

fn default_initial() -> String {
    "grid".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelaySection {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub p_ul: f64,
    pub p_dl: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    pub pattern: String,
    pub repetitions: u32,
    pub numerology: u8,
    pub capacity_prbs: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDirectionSection {
    pub packet_bytes: u32,
    pub mcs_index: u8,
    pub overhead: f64,
    #[serde(default = "default_one_u8")]
    pub n_layers: u8,
    #[serde(default = "default_one_f64")]
    pub scaling: f64,
    #[serde(default = "default_one_u8")]
    pub n_carriers: u8,
    pub max_prbs: u32,
}

fn default_one_u8() -> u8 {
    1
}
fn default_one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    /// Optional path to an MCS table file; the bundled table otherwise.
    #[serde(default)]
    pub mcs_table: Option<PathBuf>,
    pub uplink: LinkDirectionSection,
    pub downlink: LinkDirectionSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_runs: u32,
    pub schemes: Vec<String>,
    #[serde(default = "default_table_mode")]
    pub table_mode: String,
    pub output_dir: PathBuf,
}

fn default_table_mode() -> String {
    "paired".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub delay_start_ms: f64,
    pub delay_stop_ms: f64,
    pub delay_step_ms: f64,
    pub reliability_start: f64,
    pub reliability_stop: f64,
    pub reliability_step: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TddSection {
    pub patterns: Vec<String>,
}

/// The full experiment configuration, one TOML file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sim: SimSection,
    pub delay_model: DelaySection,
    pub frame: FrameSection,
    pub link: LinkSection,
    pub experiment: ExperimentSection,
    pub sweeps: SweepSection,
    #[serde(default)]
    pub tdd: Option<TddSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical serialization of the resolved config (hashed into sidecars).
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        let s = &self.sim;
        let initial_positions = match s.initial.as_str() {
            "grid" => SimConfig::grid_positions(s.n_robots),
            "uniform" => {
                let [lo, hi] = s.initial_range.unwrap_or([-1.0, 1.0]);
                SimConfig::uniform_positions(s.n_robots, lo, hi, s.seed)
            }
            "explicit" => s.initial_positions.clone().ok_or_else(|| {
                CliError::Config("initial = \"explicit\" requires initial_positions".into())
            })?,
            other => {
                return Err(CliError::Config(format!(
                    "unknown initial mode \"{other}\" (grid, uniform or explicit)"
                )))
            }
        };
        let config = SimConfig {
            n_robots: s.n_robots,
            gain_per_s: s.gain_per_s,
            period_ms: s.period_ms,
            horizon_ms: s.horizon_ms,
            step_ms: s.step_ms,
            initial_positions,
            seed: s.seed,
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn delay_model(&self) -> Result<DelayModel, CliError> {
        let d = &self.delay_model;
        DelayModel::new(d.mean_ms, d.std_ms, self.sim.period_ms, d.p_ul, d.p_dl)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn frame(&self) -> Result<TddFrame, CliError> {
        self.frame_for(&self.frame.pattern)
    }

    pub fn frame_for(&self, pattern: &str) -> Result<TddFrame, CliError> {
        TddFrame::from_pattern_str(
            pattern,
            self.frame.repetitions,
            self.frame.numerology,
            self.frame.capacity_prbs,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn mcs_table(&self) -> Result<McsTable, CliError> {
        match &self.link.mcs_table {
            Some(path) => McsTable::load(path).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(McsTable::bundled().clone()),
        }
    }

    pub fn link_budget(&self, direction: &LinkDirectionSection) -> Result<LinkBudget, CliError> {
        let table = self.mcs_table()?;
        LinkBudget::from_mcs(
            &table,
            direction.mcs_index,
            direction.packet_bytes * 8,
            self.sim.period_ms,
            direction.overhead,
            direction.n_layers,
            direction.scaling,
            direction.n_carriers,
            direction.max_prbs,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn schemes(&self) -> Result<Vec<qoc_core::allocator::Scheme>, CliError> {
        if self.experiment.schemes.is_empty() {
            return Err(CliError::Config("experiment.schemes must not be empty".into()));
        }
        self.experiment
            .schemes
            .iter()
            .map(|s| {
                qoc_core::allocator::Scheme::from_label(s)
                    .ok_or_else(|| CliError::Config(format!("unknown scheme \"{s}\"")))
            })
            .collect()
    }

    pub fn table_mode(&self) -> Result<TableMode, CliError> {
        TableMode::from_label(&self.experiment.table_mode).ok_or_else(|| {
            CliError::Config(format!(
                "unknown table_mode \"{}\" (paired or single-index)",
                self.experiment.table_mode
            ))
        })
    }

    pub fn delay_axis(&self) -> Result<Vec<f64>, CliError> {
        grid(self.sweeps.delay_start_ms, self.sweeps.delay_stop_ms, self.sweeps.delay_step_ms)
            .ok_or_else(|| CliError::Config("malformed delay sweep grid".into()))
    }

    pub fn reliability_axis(&self) -> Result<Vec<f64>, CliError> {
        grid(
            self.sweeps.reliability_start,
            self.sweeps.reliability_stop,
            self.sweeps.reliability_step,
        )
        .ok_or_else(|| CliError::Config("malformed reliability sweep grid".into()))
    }

    pub fn tdd_patterns(&self) -> Vec<String> {
        self.tdd
            .as_ref()
            .map(|t| t.patterns.clone())
            .unwrap_or_else(|| vec!["UDUUD".into(), "UUDUD".into(), "UUUDD".into()])
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Option<Vec<f64>> {
    if !(step > 0.0 && stop >= start) {
        return None;
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Some((0..count).map(|k| start + k as f64 * step).collect())
}
