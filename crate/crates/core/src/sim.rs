//! Closed-loop simulation of a controller driving the inverter, filter and
//! load.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{AlphaBeta, SwitchingState};
use crate::mpc::{Mpc, MpcDecision, MpcState};
use crate::plant::{step_truth, PlantState, DEFAULT_SUBSTEPS};
use crate::scenario::ScenarioConfig;

/// What a controller sees at one sampling instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub step: usize,
    pub i_f: AlphaBeta,
    pub v_c: AlphaBeta,
    /// Output current measured on the simulated plant.
    pub i_o: AlphaBeta,
    pub v_ref: AlphaBeta,
}

/// Vector chosen for the next sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlAction {
    /// Position in the canonical seven-vector enumeration.
    pub index: usize,
    pub switching: SwitchingState,
}

pub trait Controller {
    fn act(&mut self, obs: &Observation) -> ControlAction;

    fn name(&self) -> &'static str;
}

/// The predictive controller with its one-step memory.
#[derive(Debug, Clone)]
pub struct MpcController {
    mpc: Mpc,
    state: MpcState,
    last: Option<MpcDecision>,
}

impl MpcController {
    pub fn new(scenario: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            mpc: Mpc::new(scenario.filter_params()?)?,
            state: MpcState::new(),
            last: None,
        })
    }

    pub fn last_decision(&self) -> Option<&MpcDecision> {
        self.last.as_ref()
    }
}

impl Controller for MpcController {
    fn act(&mut self, obs: &Observation) -> ControlAction {
        let d = self.mpc.control_step(&mut self.state, obs.i_f, obs.v_c, obs.v_ref);
        self.last = Some(d);
        ControlAction {
            index: d.optimal_index,
            switching: d.switching,
        }
    }

    fn name(&self) -> &'static str {
        "mpc"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub substeps: usize,
    /// Hand the controller the reference one sample ahead, matching the
    /// instant its prediction refers to.
    pub reference_advance: bool,
    /// Abort when |v_c| exceeds this multiple of the dc-link voltage.
    pub blowup_factor: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            substeps: DEFAULT_SUBSTEPS,
            reference_advance: false,
            blowup_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub i_f: AlphaBeta,
    pub v_c: AlphaBeta,
    pub i_o: AlphaBeta,
    /// Reference at this instant.
    pub v_ref: AlphaBeta,
    /// Reference handed to the controller.
    pub v_cmd: AlphaBeta,
    pub action: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub ts: f64,
    pub freq_hz: f64,
    pub vref_amplitude: f64,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn max_voltage(&self) -> f64 {
        self.records.iter().map(|r| r.v_c.norm()).fold(0.0, f64::max)
    }
}

/// Runs `controller` on `scenario` from a de-energized plant for `steps`
/// sampling periods.
pub fn simulate(
    scenario: &ScenarioConfig,
    controller: &mut dyn Controller,
    steps: usize,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let p = scenario.filter_params()?;
    let load = scenario.load_model();
    load.validate()?;
    let mut state = PlantState::zero(&load);
    let mut records = Vec::with_capacity(steps);
    let limit = opts.blowup_factor * p.vdc;

    for k in 0..steps {
        let i_o = state.output_current(&p, &load);
        let v_ref = scenario.reference(k);
        let v_cmd = if opts.reference_advance {
            scenario.reference(k + 1)
        } else {
            v_ref
        };
        let obs = Observation {
            step: k,
            i_f: state.i_f,
            v_c: state.v_c,
            i_o,
            v_ref: v_cmd,
        };
        let action = controller.act(&obs);
        records.push(StepRecord {
            step: k,
            i_f: state.i_f,
            v_c: state.v_c,
            i_o,
            v_ref,
            v_cmd,
            action: action.index,
        });
        state = step_truth(&state, action.switching, &p, &load, opts.substeps)?;
        if !state.is_finite() || state.v_c.norm() > limit {
            return Err(Error::Divergence {
                step: k + 1,
                last_good: Some(k),
                reason: format!(
                    "|v_c| = {:.3e} V exceeds {:.0} V under {} control",
                    state.v_c.norm(),
                    limit,
                    controller.name()
                ),
            });
        }
    }

    Ok(Trajectory {
        ts: p.ts,
        freq_hz: scenario.freq_hz,
        vref_amplitude: scenario.vref_v,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::LoadSpec;

    fn nominal(load: LoadSpec) -> ScenarioConfig {
        ScenarioConfig {
            id: "t".into(),
            load,
            ts_us: 30.0,
            l_mh: 2.0,
            c_uf: 40.0,
            vdc_v: 500.0,
            vref_v: 200.0,
            freq_hz: 50.0,
            cycles: None,
        }
    }

    struct Fixed(usize);

    impl Controller for Fixed {
        fn act(&mut self, _: &Observation) -> ControlAction {
            ControlAction {
                index: self.0,
                switching: crate::frames::CANONICAL_STATES[self.0],
            }
        }
        fn name(&self) -> &'static str {
            "fixed"
        }
    }

    #[test]
    fn records_every_step() {
        let s = nominal(LoadSpec::Resistive { r_ohm: 5000.0 });
        let mut c = MpcController::new(&s).unwrap();
        let t = simulate(&s, &mut c, 50, &SimOptions::default()).unwrap();
        assert_eq!(t.records.len(), 50);
        assert_eq!(t.records[0].v_c, AlphaBeta::ZERO);
        assert_eq!(t.records[7].step, 7);
    }

    #[test]
    fn reference_advance_shifts_command() {
        let s = nominal(LoadSpec::Open);
        let mut c = MpcController::new(&s).unwrap();
        let opts = SimOptions {
            reference_advance: true,
            ..SimOptions::default()
        };
        let t = simulate(&s, &mut c, 3, &opts).unwrap();
        assert_eq!(t.records[1].v_cmd, s.reference(2));
        assert_eq!(t.records[1].v_ref, s.reference(1));
    }

    #[test]
    fn blow_up_is_reported_with_last_good_step() {
        // Holding one active vector on an undamped filter rings up to
        // 2·(2/3)·Vdc; a tight limit makes that a divergence.
        let s = nominal(LoadSpec::Open);
        let opts = SimOptions {
            blowup_factor: 0.5,
            ..SimOptions::default()
        };
        let err = simulate(&s, &mut Fixed(1), 2000, &opts).unwrap_err();
        match err {
            Error::Divergence { step, last_good, .. } => {
                assert_eq!(last_good, Some(step - 1));
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
