//! Experiment conditions and the scenario file format.
//!
//! Scenario files are TOML with one `[[scenario]]` table per experiment.
//! Units are spelled out in the key names:
//!
//! ```toml
//! [[scenario]]
//! id = "S1"
//! load = "resistive"     # resistive | open | inductive | rectifier
//! r_ohm = 10.0
//! ts_us = 25.0
//! l_mh = 2.5
//! c_uf = 50.0
//! vdc_v = 550.0
//! vref_v = 250.0
//! freq_hz = 50.0         # optional, default 50
//! cycles = 8.0           # optional, simulated fundamental cycles
//! ```
//!
//! Inductive loads take `l_load_mh`, rectifiers `r_nl_ohm` and `c_nl_uf`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::AlphaBeta;
use crate::plant::{FilterParams, LoadModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "load", rename_all = "snake_case")]
pub enum LoadSpec {
    Resistive { r_ohm: f64 },
    Open,
    Inductive { l_load_mh: f64 },
    Rectifier { r_nl_ohm: f64, c_nl_uf: f64 },
}

impl LoadSpec {
    pub fn to_model(&self) -> LoadModel {
        match *self {
            LoadSpec::Resistive { r_ohm } => LoadModel::Resistive { r: r_ohm },
            LoadSpec::Open => LoadModel::OpenCircuit,
            LoadSpec::Inductive { l_load_mh } => LoadModel::Inductive {
                l_load: l_load_mh * 1e-3,
            },
            LoadSpec::Rectifier { r_nl_ohm, c_nl_uf } => LoadModel::DiodeBridgeRectifier {
                r_nl: r_nl_ohm,
                c_nl: c_nl_uf * 1e-6,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LoadSpec::Resistive { .. } => "resistive",
            LoadSpec::Open => "open",
            LoadSpec::Inductive { .. } => "inductive",
            LoadSpec::Rectifier { .. } => "rectifier",
        }
    }

    /// Compact parameter string for tables, e.g. `r_ohm=10`.
    pub fn params_label(&self) -> String {
        match *self {
            LoadSpec::Resistive { r_ohm } => format!("r_ohm={r_ohm}"),
            LoadSpec::Open => String::new(),
            LoadSpec::Inductive { l_load_mh } => format!("l_load_mh={l_load_mh}"),
            LoadSpec::Rectifier { r_nl_ohm, c_nl_uf } => {
                format!("r_nl_ohm={r_nl_ohm};c_nl_uf={c_nl_uf}")
            }
        }
    }
}

fn default_freq() -> f64 {
    50.0
}

/// One operating condition: load, filter, sampling, dc link and reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(flatten)]
    pub load: LoadSpec,
    pub ts_us: f64,
    pub l_mh: f64,
    pub c_uf: f64,
    pub vdc_v: f64,
    pub vref_v: f64,
    #[serde(default = "default_freq")]
    pub freq_hz: f64,
    /// Simulated duration in fundamental cycles; the caller's default
    /// applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<f64>,
}

impl ScenarioConfig {
    pub fn filter_params(&self) -> Result<FilterParams> {
        FilterParams::new(self.l_mh * 1e-3, self.c_uf * 1e-6, self.ts_us * 1e-6, self.vdc_v)
    }

    pub fn load_model(&self) -> LoadModel {
        self.load.to_model()
    }

    pub fn validate(&self) -> Result<()> {
        self.filter_params()?;
        self.load_model().validate()?;
        if !(self.vref_v.is_finite() && self.vref_v >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference amplitude must be non-negative, got {}",
                self.vref_v
            )));
        }
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference frequency must be positive, got {}",
                self.freq_hz
            )));
        }
        if let Some(c) = self.cycles {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "cycle count must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }

    pub fn ts(&self) -> f64 {
        self.ts_us * 1e-6
    }

    /// Sinusoidal capacitor-voltage reference at sampling instant `step`.
    pub fn reference(&self, step: usize) -> AlphaBeta {
        let angle = 2.0 * std::f64::consts::PI * self.freq_hz * step as f64 * self.ts();
        AlphaBeta::from_polar(self.vref_v, angle)
    }

    /// Number of sampling steps covering `cycles` fundamental periods.
    pub fn steps_for_cycles(&self, cycles: f64) -> usize {
        (cycles / (self.freq_hz * self.ts())).round() as usize
    }

    pub fn steps(&self, default_cycles: f64) -> usize {
        self.steps_for_cycles(self.cycles.unwrap_or(default_cycles))
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{} {}] Ts={}us L={}mH C={}uF Vdc={}V v*={}V",
            self.id,
            self.load.kind(),
            self.load.params_label(),
            self.ts_us,
            self.l_mh,
            self.c_uf,
            self.vdc_v,
            self.vref_v
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub scenario: Vec<ScenarioConfig>,
}

pub fn parse_scenarios(text: &str, origin: &Path) -> Result<Vec<ScenarioConfig>> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
    for s in &file.scenario {
        s.validate().map_err(|e| Error::Scenario {
            scenario: s.id.clone(),
            source: Box::new(e),
        })?;
    }
    Ok(file.scenario)
}

pub fn load_scenarios(path: &Path) -> Result<Vec<ScenarioConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenarios(&text, path)
}

pub fn scenarios_to_toml(scenarios: &[ScenarioConfig]) -> String {
    let file = ScenarioFile {
        scenario: scenarios.to_vec(),
    };
    toml::to_string(&file).expect("scenario tables serialize")
}
