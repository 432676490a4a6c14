use std::path::Path;

use serde::Serialize;

use invsim::analysis::{
    compare_controllers, comparison_steps, run_metrics, steady_state_window, thd, CompareOptions,
    ComparisonSummary, RunMetrics, Settling, WaveformRecord, STEADY_STATE_MIN_CYCLES,
};
use invsim::imitation::{collect as collect_grid, default_training_grid, AnnController, CollectionGrid, CurrentSource, Dataset};
use invsim::nn::{load_model, save_model, train_scg_with_progress, TrainConfig};
use invsim::scenario::{load_scenarios, ScenarioConfig};
use invsim::sim::{simulate as run_closed_loop, Controller, MpcController, SimOptions};

use crate::manifest::{sidecar, write_json, Manifest};
use crate::{CollectArgs, CompareArgs, ControllerKind, Failure, SimulateArgs, ThdArgs, TrainArgs};

fn current_source(estimate: bool) -> CurrentSource {
    if estimate {
        CurrentSource::Estimated
    } else {
        CurrentSource::Measured
    }
}

#[derive(Serialize)]
struct CollectParams {
    scenarios: String,
    cycles: f64,
    sim: SimOptions,
    keep_going: bool,
}

#[derive(Serialize)]
struct Skipped {
    id: String,
    error: String,
}

#[derive(Serialize)]
struct CollectSummary {
    scenarios: usize,
    rows: usize,
    class_histogram: [usize; 7],
    skipped: Vec<Skipped>,
}

pub fn collect(a: &CollectArgs) -> Result<(), Failure> {
    let scenarios = match &a.scenarios {
        Some(p) => load_scenarios(p)?,
        None => default_training_grid(a.cycles),
    };
    if scenarios.is_empty() {
        eprintln!("warning: no scenarios; writing an empty dataset");
    }
    let opts = a.sim.options();
    let mut data = Dataset::default();
    let mut skipped = Vec::new();
    for s in &scenarios {
        let grid = CollectionGrid::new(vec![s.clone()], a.cycles)?;
        match collect_grid(&grid, &opts) {
            Ok(d) => data.append(d),
            Err(e) if a.keep_going => {
                eprintln!("warning: skipping {}: {e}", s.id);
                skipped.push(Skipped {
                    id: s.id.clone(),
                    error: e.to_string(),
                });
            }
            Err(e) => return Err(e.into()),
        }
    }
    data.save(&a.output)?;
    let summary = CollectSummary {
        scenarios: data.scenario_ids.len(),
        rows: data.len(),
        class_histogram: data.class_histogram(),
        skipped,
    };
    eprintln!(
        "collected {} rows from {} scenarios into {}",
        summary.rows,
        summary.scenarios,
        a.output.display()
    );
    let params = CollectParams {
        scenarios: a
            .scenarios
            .as_ref()
            .map_or_else(|| "built-in training grid".to_string(), |p| p.display().to_string()),
        cycles: a.cycles,
        sim: opts,
        keep_going: a.keep_going,
    };
    let mut m = Manifest::new("collect", params, summary);
    if let Some(p) = &a.scenarios {
        m = m.input(p)?;
    }
    m.output(&a.output)?.write_beside(&a.output)?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary {
    shape: String,
    final_epoch: usize,
    best_epoch: usize,
    stop_reason: invsim::nn::StopReason,
    train_accuracy: Option<f64>,
    validation_accuracy: Option<f64>,
    test_accuracy: Option<f64>,
}

pub fn train(a: &TrainArgs) -> Result<(), Failure> {
    let cfg = TrainConfig {
        max_epochs: a.max_epochs,
        patience: a.patience,
        seed: a.seed,
        hidden: a.hidden,
        activation: a.activation.into(),
        layout: a.layout(),
        ..TrainConfig::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = Dataset::load(&a.dataset)?;
    if data.is_empty() {
        return Err(Failure::Input(format!("{}: dataset has no rows", a.dataset.display())));
    }
    eprintln!("training on {} rows", data.len());
    let samples = data.to_samples(cfg.layout);
    let (model, report) = train_scg_with_progress(&samples, &cfg, |log| {
        if log.epoch % 100 == 0 {
            eprintln!(
                "epoch {:5}  train {:.5}  monitor {:.5}",
                log.epoch, log.train_loss, log.monitor_loss
            );
        }
    })?;
    save_model(&a.output, &model)?;
    let report_path = a.report.clone().unwrap_or_else(|| sidecar(&a.output, "report.json"));
    write_json(&report_path, &report)?;
    let summary = TrainSummary {
        shape: report.shape.clone(),
        final_epoch: report.final_epoch,
        best_epoch: report.best_epoch,
        stop_reason: report.stop_reason,
        train_accuracy: report.train.accuracy,
        validation_accuracy: report.validation.accuracy,
        test_accuracy: report.test.accuracy,
    };
    let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}%", 100.0 * x));
    eprintln!(
        "{} stopped at epoch {} ({:?}), best epoch {}; accuracy train {} validation {} test {}",
        summary.shape,
        summary.final_epoch,
        summary.stop_reason,
        summary.best_epoch,
        pct(summary.train_accuracy),
        pct(summary.validation_accuracy),
        pct(summary.test_accuracy)
    );
    Manifest::new("train", cfg, summary)
        .input(&a.dataset)?
        .output(&a.output)?
        .output(&report_path)?
        .write_beside(&a.output)?;
    Ok(())
}

fn pick_scenario(path: &Path, id: Option<&str>) -> Result<ScenarioConfig, Failure> {
    let mut all = load_scenarios(path)?;
    match id {
        Some(id) => all.into_iter().find(|s| s.id == id).ok_or_else(|| {
            Failure::Input(format!("{}: no scenario with id {id:?}", path.display()))
        }),
        None if all.len() == 1 => Ok(all.remove(0)),
        None => Err(Failure::Usage(format!(
            "{} holds {} scenarios; choose one with --id",
            path.display(),
            all.len()
        ))),
    }
}

#[derive(Serialize)]
struct MetricsReport {
    scenario: String,
    controller: &'static str,
    steps: usize,
    thd_percent: Option<f64>,
    rms_error_percent: Option<f64>,
    settling_ms: Option<f64>,
    settled: Option<bool>,
    max_voltage: Option<f64>,
}

impl MetricsReport {
    fn new(scenario: &str, controller: &'static str, steps: usize, m: Option<&RunMetrics>) -> Self {
        Self {
            scenario: scenario.to_string(),
            controller,
            steps,
            thd_percent: m.map(|m| 100.0 * m.thd),
            rms_error_percent: m.map(|m| 100.0 * m.rms_error),
            settling_ms: m.and_then(|m| m.settling.seconds()).map(|t| 1e3 * t),
            settled: m.map(|m| m.settling != Settling::Never),
            max_voltage: m.map(|m| m.max_voltage),
        }
    }
}

#[derive(Serialize)]
struct SimulateParams {
    scenario: ScenarioConfig,
    controller: &'static str,
    current_source: Option<CurrentSource>,
    steps: usize,
    sim: SimOptions,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let s = pick_scenario(&a.scenarios, a.id.as_deref())?;
    let steps = match a.cycles {
        Some(c) if c.is_finite() && c > 0.0 => s.steps_for_cycles(c),
        Some(c) => return Err(Failure::Usage(format!("--cycles must be positive, got {c}"))),
        None => comparison_steps(&s),
    };
    let mut controller: Box<dyn Controller> = match a.controller {
        ControllerKind::Mpc => Box::new(MpcController::new(&s)?),
        ControllerKind::Ann => {
            let path = a
                .model
                .as_ref()
                .ok_or_else(|| Failure::Usage("--controller ann needs --model".into()))?;
            Box::new(AnnController::new(load_model(path)?, &s, current_source(a.io_estimate))?)
        }
    };
    let opts = a.sim.options();
    let name = controller.name();
    let traj = run_closed_loop(&s, controller.as_mut(), steps, &opts)?;
    let record = WaveformRecord::from_trajectory(&traj);
    let file = std::fs::File::create(&a.output).map_err(|e| Failure::io(&a.output, e))?;
    record
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Failure::io(&a.output, e))?;
    let metrics = match run_metrics(&traj) {
        Ok(m) => Some(m),
        Err(e) => {
            eprintln!("warning: no metrics for {}: {e}", s.id);
            None
        }
    };
    let report = MetricsReport::new(&s.id, name, steps, metrics.as_ref());
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("metrics serialize")
    );
    let params = SimulateParams {
        scenario: s,
        controller: name,
        current_source: (a.controller == ControllerKind::Ann).then(|| current_source(a.io_estimate)),
        steps,
        sim: opts,
    };
    let mut m = Manifest::new("simulate", params, report).input(&a.scenarios)?;
    if let (ControllerKind::Ann, Some(p)) = (a.controller, &a.model) {
        m = m.input(p)?;
    }
    m.output(&a.output)?.write_beside(&a.output)?;
    Ok(())
}

#[derive(Serialize)]
struct CompareParams {
    current_source: CurrentSource,
    sim: SimOptions,
}

pub fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let scenarios = load_scenarios(&a.scenarios)?;
    let model = load_model(&a.model)?;
    if let Some(dir) = &a.waveforms {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    let opts = CompareOptions {
        sim: a.sim.options(),
        current_source: current_source(a.io_estimate),
        waveform_dir: a.waveforms.clone(),
    };
    let table = compare_controllers(&scenarios, &model, &opts)?;
    let file = std::fs::File::create(&a.output).map_err(|e| Failure::io(&a.output, e))?;
    table.write_csv(std::io::BufWriter::new(file))?;
    for r in table.rows.iter().filter(|r| r.status != "ok") {
        eprintln!("{}: {}", r.sample, r.status);
    }
    let summary: ComparisonSummary = table.summary();
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}%"));
    println!(
        "{} scenarios, {} compared, network lower THD in {}; median THD network {} expert {}",
        summary.rows,
        summary.compared,
        summary.ann_wins,
        fmt(summary.median_thd_ann),
        fmt(summary.median_thd_mpc)
    );
    let total_failure = !table.rows.is_empty()
        && table.rows.iter().all(|r| r.thd_ann.is_none() && r.thd_mpc.is_none());
    let params = CompareParams {
        current_source: opts.current_source,
        sim: opts.sim,
    };
    Manifest::new("compare", params, &summary)
        .input(&a.scenarios)?
        .input(&a.model)?
        .output(&a.output)?
        .write_beside(&a.output)?;
    if total_failure {
        return Err(Failure::Numerical("every run failed; see the status column".into()));
    }
    Ok(())
}

/// Reads the `t` column and one named column of a waveform CSV.
fn read_column(path: &Path, column: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let bad = |msg: String| Failure::Input(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Failure::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("no column {name:?}")))
    };
    let (ti, ci) = (find("t")?, find(column)?);
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, Failure> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| bad(format!("line {}: bad number in column {i}", line + 2)))
        };
        t.push(num(ti)?);
        v.push(num(ci)?);
    }
    Ok((t, v))
}

#[derive(Serialize)]
struct ThdOutput {
    input: String,
    column: String,
    window_start: usize,
    window_len: usize,
    thd_percent: f64,
    #[serde(flatten)]
    report: invsim::analysis::ThdReport,
}

pub fn thd_cmd(a: &ThdArgs) -> Result<(), Failure> {
    let (t, v) = read_column(&a.input, &a.column)?;
    if t.len() < 2 {
        return Err(Failure::Input(format!("{}: need at least two samples", a.input.display())));
    }
    let period = t[1] - t[0];
    if !(period > 0.0) {
        return Err(Failure::Input(format!("{}: time column is not increasing", a.input.display())));
    }
    if !(a.fundamental > 0.0 && a.skip_cycles >= 0.0) {
        return Err(Failure::Usage("fundamental must be positive and skip-cycles non-negative".into()));
    }
    let (start, len) = steady_state_window(period, a.fundamental, a.skip_cycles, STEADY_STATE_MIN_CYCLES)
        .ok_or_else(|| Failure::Input("no window of whole cycles holds a whole number of samples".into()))?;
    if start + len > v.len() {
        return Err(Failure::Input(format!(
            "{}: {} samples, the analysis window needs {}",
            a.input.display(),
            v.len(),
            start + len
        )));
    }
    let report = thd(&v[start..start + len], period, a.fundamental, a.max_harmonic)?;
    let out = ThdOutput {
        input: a.input.display().to_string(),
        column: a.column.clone(),
        window_start: start,
        window_len: len,
        thd_percent: 100.0 * report.thd,
        report,
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("report serializes"));
    Ok(())
}
