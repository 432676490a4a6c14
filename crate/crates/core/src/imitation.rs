//! Expert data collection and the network controller that replaces the
//! expert online.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{AlphaBeta, SwitchingState, CANONICAL_STATES};
use crate::nn::{AnnModel, FeatureLayout, Samples, BASE_FEATURES};
use crate::plant::{estimate_output_current, FilterParams};
use crate::scenario::{LoadSpec, ScenarioConfig};
use crate::sim::{simulate, ControlAction, Controller, MpcController, Observation, SimOptions};

/// Dataset CSV header.
pub const DATASET_HEADER: [&str; 11] = [
    "scenario_id", "step", "if_a", "if_b", "vc_a", "vc_b", "io_a", "io_b", "vref_a", "vref_b", "target",
];

/// Load resistances of the default training grid [Ω].
pub const TRAINING_RESISTANCES: [f64; 10] = [1.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];

/// Operating conditions of the default grid: (Ts µs, L mH, C µF, Vdc V, v* V).
pub const TRAINING_CONDITIONS: [(f64, f64, f64, f64, f64); 6] = [
    (25.0, 2.5, 50.0, 520.0, 220.0),
    (30.0, 2.0, 40.0, 500.0, 200.0),
    (30.0, 3.0, 45.0, 550.0, 250.0),
    (35.0, 3.5, 50.0, 480.0, 180.0),
    (40.0, 2.5, 45.0, 500.0, 150.0),
    (25.0, 4.0, 35.0, 450.0, 160.0),
];

/// Scenarios to run under the expert, each for its own `cycles` or
/// `default_cycles`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionGrid {
    pub scenarios: Vec<ScenarioConfig>,
    pub default_cycles: f64,
}

impl CollectionGrid {
    pub fn new(scenarios: Vec<ScenarioConfig>, default_cycles: f64) -> Result<Self> {
        for s in &scenarios {
            s.validate().map_err(|e| Error::Scenario {
                scenario: s.id.clone(),
                source: Box::new(e),
            })?;
        }
        if !(default_cycles.is_finite() && default_cycles > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "default cycle count must be positive, got {default_cycles}"
            )));
        }
        Ok(Self {
            scenarios,
            default_cycles,
        })
    }

    pub fn total_steps(&self) -> usize {
        self.scenarios.iter().map(|s| s.steps(self.default_cycles)).sum()
    }
}

/// The 60-scenario resistive grid: every training resistance under every
/// training condition, `cycles` fundamental periods each.
pub fn default_training_grid(cycles: f64) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(60);
    for (c, &(ts, l, cap, vdc, vref)) in TRAINING_CONDITIONS.iter().enumerate() {
        for &r in &TRAINING_RESISTANCES {
            out.push(ScenarioConfig {
                id: format!("T{}-R{}", c + 1, r),
                load: LoadSpec::Resistive { r_ohm: r },
                ts_us: ts,
                l_mh: l,
                c_uf: cap,
                vdc_v: vdc,
                vref_v: vref,
                freq_hz: 50.0,
                cycles: Some(cycles),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    /// Index into [`Dataset::scenario_ids`].
    pub scenario: usize,
    pub step: usize,
    pub features: [f64; BASE_FEATURES],
    pub target: u8,
}

/// Expert trajectories flattened to labelled rows, ordered by scenario then
/// step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub scenario_ids: Vec<String>,
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Moves `other`'s scenarios and rows to the end of `self`.
    pub fn append(&mut self, other: Dataset) {
        let offset = self.scenario_ids.len();
        self.scenario_ids.extend(other.scenario_ids);
        self.rows.extend(other.rows.into_iter().map(|r| DatasetRow {
            scenario: r.scenario + offset,
            ..r
        }));
    }

    pub fn class_histogram(&self) -> [usize; 7] {
        let mut h = [0; 7];
        for r in &self.rows {
            h[r.target as usize] += 1;
        }
        h
    }

    /// Network inputs in `layout`. The delayed layout pairs each row with the
    /// row one step earlier in the same scenario, zeros when there is none.
    pub fn to_samples(&self, layout: FeatureLayout) -> Samples {
        let mut s = Samples::new(layout.inputs());
        s.x.reserve(self.rows.len() * layout.inputs());
        let mut buf = Vec::with_capacity(layout.inputs());
        for (i, r) in self.rows.iter().enumerate() {
            let prev = i
                .checked_sub(1)
                .map(|j| &self.rows[j])
                .filter(|p| p.scenario == r.scenario && p.step + 1 == r.step)
                .map(|p| &p.features);
            buf.clear();
            layout.assemble(&r.features, prev, &mut buf);
            s.push(&buf, r.target);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Format(format!("writing dataset: {e}"));
        w.write_record(DATASET_HEADER).map_err(csv_err)?;
        let mut rec: Vec<String> = Vec::with_capacity(DATASET_HEADER.len());
        for r in &self.rows {
            rec.clear();
            rec.push(self.scenario_ids[r.scenario].clone());
            rec.push(r.step.to_string());
            // Display for f64 is the shortest string that parses back exactly
            rec.extend(r.features.iter().map(|v| v.to_string()));
            rec.push(r.target.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(format!("writing dataset: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(|e| match e {
            Error::Format(m) => Error::parse(path, m),
            other => other,
        })
    }

    pub fn read_csv<R: Read>(input: R, origin: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let header = rd.headers().map_err(|e| Error::parse(origin, e.to_string()))?;
        if header.iter().ne(DATASET_HEADER.iter().copied()) {
            return Err(Error::parse(
                origin,
                format!("expected header `{}`", DATASET_HEADER.join(",")),
            ));
        }
        let mut ds = Dataset::default();
        for (i, rec) in rd.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::parse(origin, format!("line {line}: {e}")))?;
            let field = |k: usize| rec.get(k).unwrap_or("");
            let bad = |what: &str, v: &str| Error::parse(origin, format!("line {line}: bad {what} `{v}`"));
            let id = field(0);
            if ds.scenario_ids.last().map(String::as_str) != Some(id) {
                ds.scenario_ids.push(id.to_string());
            }
            let step = field(1).parse().map_err(|_| bad("step", field(1)))?;
            let mut features = [0.0; BASE_FEATURES];
            for (j, f) in features.iter_mut().enumerate() {
                let v = field(2 + j);
                *f = v.parse::<f64>().map_err(|_| bad(DATASET_HEADER[2 + j], v))?;
                if !f.is_finite() {
                    return Err(bad(DATASET_HEADER[2 + j], v));
                }
            }
            let target: u8 = field(10).parse().map_err(|_| bad("target", field(10)))?;
            if target > 6 {
                return Err(bad("target", field(10)));
            }
            ds.rows.push(DatasetRow {
                scenario: ds.scenario_ids.len() - 1,
                step,
                features,
                target,
            });
        }
        Ok(ds)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), path)
    }
}

fn features(i_f: AlphaBeta, v_c: AlphaBeta, i_o: AlphaBeta, v_ref: AlphaBeta) -> [f64; BASE_FEATURES] {
    [
        i_f.alpha, i_f.beta, v_c.alpha, v_c.beta, i_o.alpha, i_o.beta, v_ref.alpha, v_ref.beta,
    ]
}

/// Runs the expert on every scenario and records features with the true
/// output current and the expert's choice as label.
pub fn collect(grid: &CollectionGrid, opts: &SimOptions) -> Result<Dataset> {
    let mut ds = Dataset::default();
    ds.rows.reserve(grid.total_steps());
    for s in &grid.scenarios {
        let wrap = |e| Error::Scenario {
            scenario: s.id.clone(),
            source: Box::new(e),
        };
        let mut mpc = MpcController::new(s).map_err(wrap)?;
        let traj = simulate(s, &mut mpc, s.steps(grid.default_cycles), opts).map_err(wrap)?;
        let idx = ds.scenario_ids.len();
        ds.scenario_ids.push(s.id.clone());
        ds.rows.extend(traj.records.iter().map(|r| DatasetRow {
            scenario: idx,
            step: r.step,
            features: features(r.i_f, r.v_c, r.i_o, r.v_cmd),
            target: r.action as u8,
        }));
    }
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnDecision {
    pub optimal_index: usize,
    pub switching: SwitchingState,
    /// Probability the network assigns to the chosen vector.
    pub confidence: f64,
}

/// One network decision from present measurements (base feature layout).
pub fn ann_control_step(
    model: &AnnModel,
    i_f: AlphaBeta,
    v_c: AlphaBeta,
    i_o: AlphaBeta,
    v_ref: AlphaBeta,
) -> AnnDecision {
    let mut x = Vec::with_capacity(model.layout.inputs());
    model.layout.assemble(&features(i_f, v_c, i_o, v_ref), None, &mut x);
    decide(model, &x)
}

fn decide(model: &AnnModel, x: &[f64]) -> AnnDecision {
    let p = model.probabilities(x);
    let k = crate::nn::argmax(&p);
    AnnDecision {
        optimal_index: k,
        switching: CANONICAL_STATES[k],
        confidence: p[k],
    }
}

/// Where the network's output-current input comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentSource {
    /// Taken from the simulated plant.
    #[default]
    Measured,
    /// Reconstructed from filter current and capacitor-voltage differences,
    /// as the expert does.
    Estimated,
}

/// The trained network as a closed-loop controller.
#[derive(Debug, Clone)]
pub struct AnnController {
    model: AnnModel,
    source: CurrentSource,
    params: FilterParams,
    prev_features: Option<[f64; BASE_FEATURES]>,
    prev_if: AlphaBeta,
    prev_vc: AlphaBeta,
    buf: Vec<f64>,
}

impl AnnController {
    pub fn new(model: AnnModel, scenario: &ScenarioConfig, source: CurrentSource) -> Result<Self> {
        Ok(Self {
            buf: Vec::with_capacity(model.layout.inputs()),
            model,
            source,
            params: scenario.filter_params()?,
            prev_features: None,
            prev_if: AlphaBeta::ZERO,
            prev_vc: AlphaBeta::ZERO,
        })
    }

    pub fn model(&self) -> &AnnModel {
        &self.model
    }
}

impl Controller for AnnController {
    fn act(&mut self, obs: &Observation) -> ControlAction {
        let i_o = match self.source {
            CurrentSource::Measured => obs.i_o,
            CurrentSource::Estimated => {
                estimate_output_current(self.prev_if, obs.v_c, self.prev_vc, &self.params)
            }
        };
        let now = features(obs.i_f, obs.v_c, i_o, obs.v_ref);
        self.buf.clear();
        self.model.layout.assemble(&now, self.prev_features.as_ref(), &mut self.buf);
        let d = decide(&self.model, &self.buf);
        self.prev_features = Some(now);
        self.prev_if = obs.i_f;
        self.prev_vc = obs.v_c;
        ControlAction {
            index: d.optimal_index,
            switching: d.switching,
        }
    }

    fn name(&self) -> &'static str {
        "ann"
    }
}
