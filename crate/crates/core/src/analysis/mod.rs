//! Waveform metrics: harmonic distortion, tracking error and settling time.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{clarke, inverse_clarke, Abc};
use crate::sim::Trajectory;

mod compare;

pub use compare::{
    compare_controllers, comparison_steps, run_metrics, CompareOptions, ComparisonRow, ComparisonSummary,
    ComparisonTable, RunMetrics, COMPARISON_HEADER, DISTORTION_FLAG, SAFETY_FACTOR,
};

/// Harmonic order cap used for closed-loop distortion figures.
pub const DEFAULT_MAX_HARMONIC: usize = 50;
/// Tracking-error band for settling time, as a fraction of the amplitude.
pub const DEFAULT_SETTLING_BAND: f64 = 0.05;
/// Cycles skipped before the steady-state analysis window.
pub const STEADY_STATE_SKIP_CYCLES: f64 = 2.0;
/// Minimum number of whole cycles in the steady-state window.
pub const STEADY_STATE_MIN_CYCLES: usize = 4;

/// Per-phase recording of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    /// Sample period [s].
    pub period: f64,
    pub fundamental_hz: f64,
    pub v_c: Vec<Abc>,
    pub i_o: Vec<Abc>,
    pub i_f: Vec<Abc>,
    pub reference: Vec<Abc>,
}

impl WaveformRecord {
    pub fn from_trajectory(t: &Trajectory) -> Self {
        let map = |f: fn(&crate::sim::StepRecord) -> crate::frames::AlphaBeta| {
            t.records.iter().map(|r| inverse_clarke(f(r))).collect::<Vec<_>>()
        };
        Self {
            period: t.ts,
            fundamental_hz: t.freq_hz,
            v_c: map(|r| r.v_c),
            i_o: map(|r| r.i_o),
            i_f: map(|r| r.i_f),
            reference: map(|r| r.v_ref),
        }
    }

    pub fn len(&self) -> usize {
        self.v_c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v_c.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v_c.len();
        if self.i_o.len() != n || self.i_f.len() != n || self.reference.len() != n {
            return Err(Error::Analysis("waveform series have unequal lengths".into()));
        }
        if !(self.period > 0.0 && self.fundamental_hz > 0.0) {
            return Err(Error::Analysis("sample period and frequency must be positive".into()));
        }
        Ok(())
    }

    pub fn phase_a_voltage(&self) -> Vec<f64> {
        self.v_c.iter().map(|v| v.a).collect()
    }

    /// Amplitude of the reference (largest αβ magnitude over the record).
    pub fn reference_amplitude(&self) -> f64 {
        self.reference
            .iter()
            .map(|r| clarke(*r).norm())
            .fold(0.0, f64::max)
    }

    /// αβ tracking-error magnitude per sample.
    pub fn tracking_error(&self) -> Vec<f64> {
        self.v_c
            .iter()
            .zip(&self.reference)
            .map(|(v, r)| (clarke(*v) - clarke(*r)).norm())
            .collect()
    }

    pub fn samples_per_cycle(&self) -> f64 {
        1.0 / (self.fundamental_hz * self.period)
    }

    /// Plot-ready CSV: time and per-phase series.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "t,vc_a,vc_b,vc_c,ref_a,ref_b,ref_c,io_a,io_b,io_c,if_a,if_b,if_c"
        )?;
        for k in 0..self.len() {
            let (v, r, o, f) = (self.v_c[k], self.reference[k], self.i_o[k], self.i_f[k]);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                k as f64 * self.period,
                v.a,
                v.b,
                v.c,
                r.a,
                r.b,
                r.c,
                o.a,
                o.b,
                o.c,
                f.a,
                f.b,
                f.c
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThdReport {
    pub fundamental_hz: f64,
    pub fundamental_amplitude: f64,
    pub dc: f64,
    /// Total harmonic distortion as a fraction of the fundamental.
    pub thd: f64,
    /// Amplitudes of orders 2..=max_harmonic (`harmonics[0]` is order 2).
    pub harmonics: Vec<f64>,
}

/// Harmonic distortion of `signal` by discrete Fourier analysis at exact
/// harmonic bins. The record must span a whole number (≥ 2) of fundamental
/// cycles so that a rectangular window is leakage-free.
pub fn thd(signal: &[f64], period: f64, fundamental: f64, max_harmonic: usize) -> Result<ThdReport> {
    if !(period > 0.0 && fundamental > 0.0) {
        return Err(Error::Analysis("period and fundamental must be positive".into()));
    }
    if max_harmonic < 2 {
        return Err(Error::Analysis("max_harmonic must be at least 2".into()));
    }
    let n = signal.len();
    let cycles = n as f64 * period * fundamental;
    let whole = cycles.round();
    if whole < 2.0 || (cycles - whole).abs() > 1e-6 * cycles.max(1.0) {
        return Err(Error::Analysis(format!(
            "window of {n} samples spans {cycles:.6} cycles; need a whole number >= 2"
        )));
    }
    if max_harmonic as f64 * fundamental >= 0.5 / period {
        return Err(Error::Analysis(format!(
            "harmonic {max_harmonic} at {:.1} Hz is beyond Nyquist ({:.1} Hz)",
            max_harmonic as f64 * fundamental,
            0.5 / period
        )));
    }
    let m = whole as usize;

    let bin = |h: usize| -> (f64, f64) {
        let k = h * m;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &x) in signal.iter().enumerate() {
            // reduce k·i mod n in integers to keep the phase exact
            let phase = 2.0 * std::f64::consts::PI * ((k * i) % n) as f64 / n as f64;
            let (s, c) = phase.sin_cos();
            re += x * c;
            im -= x * s;
        }
        (re, im)
    };

    let dc = signal.iter().sum::<f64>() / n as f64;
    let amplitude = |h: usize| {
        let (re, im) = bin(h);
        2.0 * re.hypot(im) / n as f64
    };
    let a1 = amplitude(1);
    let rms = (signal.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    if !(a1 > 1e-9 * rms) || a1 <= f64::MIN_POSITIVE {
        return Err(Error::Analysis(format!(
            "fundamental amplitude {a1:.3e} too small for a distortion ratio"
        )));
    }
    let harmonics: Vec<f64> = (2..=max_harmonic).map(amplitude).collect();
    let thd = harmonics.iter().map(|a| a * a).sum::<f64>().sqrt() / a1;
    Ok(ThdReport {
        fundamental_hz: fundamental,
        fundamental_amplitude: a1,
        dc,
        thd,
        harmonics,
    })
}

/// Finds a window of whole cycles that also holds a whole number of samples,
/// starting `skip_cycles` into the record. Returns `(start, len)` in samples.
pub fn steady_state_window(
    period: f64,
    fundamental: f64,
    skip_cycles: f64,
    min_cycles: usize,
) -> Option<(usize, usize)> {
    let per_cycle = 1.0 / (fundamental * period);
    (min_cycles.max(2)..=200).find_map(|m| {
        let len = m as f64 * per_cycle;
        let rounded = len.round();
        ((len - rounded).abs() <= 1e-6 * len).then(|| {
            let start = (skip_cycles * per_cycle).round() as usize;
            (start, rounded as usize)
        })
    })
}

/// Whole cycles needed to cover the skip plus the steady-state window.
pub fn cycles_for_analysis(period: f64, fundamental: f64) -> Option<f64> {
    steady_state_window(period, fundamental, STEADY_STATE_SKIP_CYCLES, STEADY_STATE_MIN_CYCLES)
        .map(|(start, len)| ((start + len) as f64 * period * fundamental - 1e-9).ceil())
}

/// Phase-a capacitor-voltage distortion over the window starting after
/// `skip_cycles`.
pub fn steady_state_thd(record: &WaveformRecord, skip_cycles: f64) -> Result<ThdReport> {
    record.validate()?;
    let (start, len) = steady_state_window(
        record.period,
        record.fundamental_hz,
        skip_cycles,
        STEADY_STATE_MIN_CYCLES,
    )
    .ok_or_else(|| Error::Analysis("no whole-sample window of whole cycles exists".into()))?;
    if start + len > record.len() {
        return Err(Error::Analysis(format!(
            "record of {} samples is shorter than the analysis window end {}",
            record.len(),
            start + len
        )));
    }
    let va = record.phase_a_voltage();
    thd(&va[start..start + len], record.period, record.fundamental_hz, DEFAULT_MAX_HARMONIC)
}

/// RMS of the αβ tracking error over `[start, start+len)`, relative to the
/// reference amplitude.
pub fn relative_rms_error(record: &WaveformRecord, start: usize, len: usize) -> Result<f64> {
    record.validate()?;
    if len == 0 || start + len > record.len() {
        return Err(Error::Analysis("rms window outside the record".into()));
    }
    let amp = record.reference_amplitude();
    if amp <= 0.0 {
        return Err(Error::Analysis("reference amplitude is zero".into()));
    }
    let err = record.tracking_error();
    let ms = err[start..start + len].iter().map(|e| e * e).sum::<f64>() / len as f64;
    Ok(ms.sqrt() / amp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Settling {
    /// Time [s] from the start of the record.
    At(f64),
    Never,
}

impl Settling {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Settling::At(t) => Some(t),
            Settling::Never => None,
        }
    }
}

/// First instant after which the tracking error stays within
/// `band·amplitude` for one full fundamental cycle.
pub fn settling_time(record: &WaveformRecord, band: f64) -> Result<Settling> {
    record.validate()?;
    if !(band > 0.0) {
        return Err(Error::Analysis("tolerance band must be positive".into()));
    }
    let amp = record.reference_amplitude();
    if amp <= 0.0 {
        return Err(Error::Analysis("reference amplitude is zero".into()));
    }
    let window = record.samples_per_cycle().ceil() as usize;
    let err = record.tracking_error();
    let limit = band * amp;
    // run[k]: consecutive in-band samples starting at k
    let mut run = 0usize;
    let mut first = None;
    for k in (0..err.len()).rev() {
        run = if err[k] <= limit { run + 1 } else { 0 };
        if run >= window {
            first = Some(k);
        }
    }
    Ok(match first {
        Some(k) => Settling::At(k as f64 * record.period),
        None => Settling::Never,
    })
}
