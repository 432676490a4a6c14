//! Side-by-side closed-loop runs of the expert and the network.

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{
    cycles_for_analysis, relative_rms_error, settling_time, steady_state_thd, steady_state_window,
    Settling, WaveformRecord, DEFAULT_SETTLING_BAND, STEADY_STATE_MIN_CYCLES, STEADY_STATE_SKIP_CYCLES,
};
use crate::error::{Error, Result};
use crate::imitation::{AnnController, CurrentSource};
use crate::nn::AnnModel;
use crate::scenario::ScenarioConfig;
use crate::sim::{simulate, Controller, MpcController, SimOptions, Trajectory};

/// THD above which a run is flagged as distorted [fraction].
pub const DISTORTION_FLAG: f64 = 0.10;
/// A run whose |v_c| reaches this multiple of Vdc is flagged unsafe.
pub const SAFETY_FACTOR: f64 = 2.0;

/// Steady-state and transient figures of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub thd: f64,
    pub rms_error: f64,
    pub settling: Settling,
    /// Largest αβ capacitor-voltage magnitude [V].
    pub max_voltage: f64,
}

pub fn run_metrics(t: &Trajectory) -> Result<RunMetrics> {
    let rec = WaveformRecord::from_trajectory(t);
    let thd = steady_state_thd(&rec, STEADY_STATE_SKIP_CYCLES)?.thd;
    let (start, len) = steady_state_window(t.ts, t.freq_hz, STEADY_STATE_SKIP_CYCLES, STEADY_STATE_MIN_CYCLES)
        .ok_or_else(|| Error::Analysis("no whole-sample window of whole cycles exists".into()))?;
    Ok(RunMetrics {
        thd,
        rms_error: relative_rms_error(&rec, start, len)?,
        settling: settling_time(&rec, DEFAULT_SETTLING_BAND)?,
        max_voltage: t.max_voltage(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub sim: SimOptions,
    /// Output-current input of the network.
    pub current_source: CurrentSource,
    /// Directory for per-step waveform CSVs; none when absent.
    pub waveform_dir: Option<PathBuf>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            sim: SimOptions::default(),
            current_source: CurrentSource::Measured,
            waveform_dir: None,
        }
    }
}

/// One scenario's results. THD in percent, settling in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub sample: String,
    pub load_kind: String,
    pub load_params: String,
    pub ts_us: f64,
    pub l_mh: f64,
    pub c_uf: f64,
    pub vdc: f64,
    pub vref: f64,
    pub thd_ann: Option<f64>,
    pub thd_mpc: Option<f64>,
    pub tss_mpc_ms: Option<Settling>,
    pub tss_ann_ms: Option<Settling>,
    pub status: String,
}

impl ComparisonRow {
    /// True when both THDs exist and the network's is strictly lower.
    pub fn ann_wins(&self) -> Option<bool> {
        Some(self.thd_ann? < self.thd_mpc?)
    }
}

pub const COMPARISON_HEADER: [&str; 13] = [
    "sample", "load_kind", "load_params", "ts_us", "l_mh", "c_uf", "vdc", "vref", "thd_ann", "thd_mpc",
    "tss_mpc_ms", "tss_ann_ms", "status",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub rows: usize,
    /// Rows where both controllers produced a THD.
    pub compared: usize,
    pub ann_wins: usize,
    pub median_thd_ann: Option<f64>,
    pub median_thd_mpc: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

impl ComparisonTable {
    pub fn summary(&self) -> ComparisonSummary {
        ComparisonSummary {
            rows: self.rows.len(),
            compared: self.rows.iter().filter(|r| r.ann_wins().is_some()).count(),
            ann_wins: self.rows.iter().filter(|r| r.ann_wins() == Some(true)).count(),
            median_thd_ann: median(self.rows.iter().filter_map(|r| r.thd_ann).collect()),
            median_thd_mpc: median(self.rows.iter().filter_map(|r| r.thd_mpc).collect()),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let err = |e: csv::Error| Error::Format(format!("writing comparison table: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COMPARISON_HEADER).map_err(err)?;
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let tss = |s: Option<Settling>| match s {
            Some(Settling::At(t)) => (t * 1e3).to_string(),
            Some(Settling::Never) => "never".to_string(),
            None => String::new(),
        };
        for r in &self.rows {
            w.write_record([
                r.sample.clone(),
                r.load_kind.clone(),
                r.load_params.clone(),
                r.ts_us.to_string(),
                r.l_mh.to_string(),
                r.c_uf.to_string(),
                r.vdc.to_string(),
                r.vref.to_string(),
                num(r.thd_ann),
                num(r.thd_mpc),
                tss(r.tss_mpc_ms),
                tss(r.tss_ann_ms),
                r.status.clone(),
            ])
            .map_err(err)?;
        }
        w.flush()
            .map_err(|e| Error::Format(format!("writing comparison table: {e}")))
    }
}

/// Steps simulated per scenario: its own cycle count, or enough cycles for
/// the steady-state window.
pub fn comparison_steps(s: &ScenarioConfig) -> usize {
    let needed = cycles_for_analysis(s.ts(), s.freq_hz).unwrap_or(8.0);
    s.steps(needed)
}

struct Outcome {
    metrics: Option<RunMetrics>,
    flags: Vec<String>,
}

fn run_one(
    s: &ScenarioConfig,
    controller: &mut dyn Controller,
    opts: &CompareOptions,
) -> Result<Outcome> {
    let name = controller.name();
    let mut flags = Vec::new();
    let traj = match simulate(s, controller, comparison_steps(s), &opts.sim) {
        Ok(t) => t,
        Err(e) => {
            flags.push(format!("{name}_failed: {e}"));
            return Ok(Outcome { metrics: None, flags });
        }
    };
    if let Some(dir) = &opts.waveform_dir {
        let path = dir.join(format!("{}_{name}.csv", s.id));
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        WaveformRecord::from_trajectory(&traj)
            .write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(&path, e))?;
    }
    let metrics = match run_metrics(&traj) {
        Ok(m) => m,
        Err(e) => {
            flags.push(format!("{name}_failed: {e}"));
            return Ok(Outcome { metrics: None, flags });
        }
    };
    if metrics.max_voltage >= SAFETY_FACTOR * s.vdc_v {
        flags.push(format!("{name}_unsafe"));
    }
    if metrics.thd > DISTORTION_FLAG {
        flags.push(format!("{name}_distorted"));
    }
    Ok(Outcome {
        metrics: Some(metrics),
        flags,
    })
}

/// Runs the expert and the network on every scenario from rest. Scenario
/// failures are recorded in the row's status; only I/O errors abort.
pub fn compare_controllers(
    scenarios: &[ScenarioConfig],
    model: &AnnModel,
    opts: &CompareOptions,
) -> Result<ComparisonTable> {
    let mut table = ComparisonTable::default();
    for s in scenarios {
        let mpc = match MpcController::new(s) {
            Ok(mut c) => run_one(s, &mut c, opts)?,
            Err(e) => Outcome {
                metrics: None,
                flags: vec![format!("mpc_failed: {e}")],
            },
        };
        let ann = match AnnController::new(model.clone(), s, opts.current_source) {
            Ok(mut c) => run_one(s, &mut c, opts)?,
            Err(e) => Outcome {
                metrics: None,
                flags: vec![format!("ann_failed: {e}")],
            },
        };
        let flags: Vec<String> = mpc.flags.into_iter().chain(ann.flags).collect();
        let pct = |m: &Option<RunMetrics>| m.as_ref().map(|m| m.thd * 100.0);
        let tss = |m: &Option<RunMetrics>| m.as_ref().map(|m| m.settling);
        table.rows.push(ComparisonRow {
            sample: s.id.clone(),
            load_kind: s.load.kind().to_string(),
            load_params: s.load.params_label(),
            ts_us: s.ts_us,
            l_mh: s.l_mh,
            c_uf: s.c_uf,
            vdc: s.vdc_v,
            vref: s.vref_v,
            thd_ann: pct(&ann.metrics),
            thd_mpc: pct(&mpc.metrics),
            tss_mpc_ms: tss(&mpc.metrics),
            tss_ann_ms: tss(&ann.metrics),
            status: if flags.is_empty() {
                "ok".to_string()
            } else {
                flags.join("; ")
            },
        });
    }
    Ok(table)
}
