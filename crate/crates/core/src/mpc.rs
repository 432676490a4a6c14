//! Single-step finite-control-set predictive voltage controller.
//!
//! Each sampling instant the controller estimates the load current from the
//! previous and present measurements, predicts the capacitor voltage one
//! step ahead for each of the seven inverter vectors, and applies the vector
//! whose prediction lands closest to the reference.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::frames::{enumerate_distinct_vectors, AlphaBeta, SwitchingState, VoltageVector, NUM_VECTORS};
use crate::plant::{discretize, estimate_output_current, predict, DiscreteModel, FilterParams};

/// Squared αβ distance between reference and predicted capacitor voltage [V²].
pub fn cost(v_ref: AlphaBeta, v_pred: AlphaBeta) -> f64 {
    let da = v_ref.alpha - v_pred.alpha;
    let db = v_ref.beta - v_pred.beta;
    da * da + db * db
}

/// Measurements remembered from the previous sampling instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MpcState {
    pub i_f_prev: AlphaBeta,
    pub v_c_prev: AlphaBeta,
    /// True until the first control cycle has run.
    pub first_step: bool,
}

impl MpcState {
    pub fn new() -> Self {
        Self {
            i_f_prev: AlphaBeta::ZERO,
            v_c_prev: AlphaBeta::ZERO,
            first_step: true,
        }
    }

    /// State as it would be after a cycle that measured `i_f_prev`, `v_c_prev`.
    pub fn with_previous(i_f_prev: AlphaBeta, v_c_prev: AlphaBeta) -> Self {
        Self {
            i_f_prev,
            v_c_prev,
            first_step: false,
        }
    }
}

/// Outcome of one control cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcDecision {
    /// Position in the canonical seven-vector enumeration.
    pub optimal_index: usize,
    pub switching: SwitchingState,
    pub cost: f64,
    pub predicted_v_c: AlphaBeta,
    pub estimated_i_o: AlphaBeta,
}

/// Controller configuration: plant parameters with the precomputed
/// prediction model and control set.
#[derive(Debug, Clone)]
pub struct Mpc {
    params: FilterParams,
    model: DiscreteModel,
    vectors: [VoltageVector; NUM_VECTORS],
}

impl Mpc {
    pub fn new(params: FilterParams) -> Result<Self> {
        Ok(Self {
            model: discretize(&params)?,
            vectors: enumerate_distinct_vectors(params.vdc)?,
            params,
        })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn model(&self) -> &DiscreteModel {
        &self.model
    }

    pub fn vectors(&self) -> &[VoltageVector; NUM_VECTORS] {
        &self.vectors
    }

    /// Predicted capacitor voltage for each candidate vector.
    pub fn predictions(&self, i_f: AlphaBeta, v_c: AlphaBeta, i_o: AlphaBeta) -> [AlphaBeta; NUM_VECTORS] {
        self.vectors
            .map(|v| predict(&self.model, i_f, v_c, v.voltage, i_o).1)
    }

    /// Runs one control cycle and updates `state` with the present
    /// measurements.
    pub fn control_step(
        &self,
        state: &mut MpcState,
        i_f: AlphaBeta,
        v_c: AlphaBeta,
        v_ref: AlphaBeta,
    ) -> MpcDecision {
        if state.first_step {
            state.i_f_prev = AlphaBeta::ZERO;
            state.v_c_prev = AlphaBeta::ZERO;
        }
        let i_o = estimate_output_current(state.i_f_prev, v_c, state.v_c_prev, &self.params);

        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        let mut best_pred = v_c;
        for (l, candidate) in self.vectors.iter().enumerate() {
            let (_, v_next) = predict(&self.model, i_f, v_c, candidate.voltage, i_o);
            let j = cost(v_ref, v_next);
            // strict: the earliest minimizer in canonical order wins ties
            if j < best_cost {
                best_cost = j;
                best = l;
                best_pred = v_next;
            }
        }

        state.i_f_prev = i_f;
        state.v_c_prev = v_c;
        state.first_step = false;

        MpcDecision {
            optimal_index: best,
            switching: self.vectors[best].state,
            cost: best_cost,
            predicted_v_c: best_pred,
            estimated_i_o: i_o,
        }
    }
}

/// Free-function form of [`Mpc::control_step`] that derives the control set
/// from `p` on every call.
pub fn control_step(
    mpc: &mut MpcState,
    i_f: AlphaBeta,
    v_c: AlphaBeta,
    v_ref: AlphaBeta,
    model: &DiscreteModel,
    p: &FilterParams,
) -> Result<MpcDecision> {
    let controller = Mpc {
        params: *p,
        model: *model,
        vectors: enumerate_distinct_vectors(p.vdc)?,
    };
    Ok(controller.control_step(mpc, i_f, v_c, v_ref))
}
