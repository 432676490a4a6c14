//! LC output filter and load models.
//!
//! Per αβ channel the filter obeys
//!
//! ```text
//! d/dt [i_f]   [ 0    -1/L] [i_f]   [1/L]       [  0 ]
//!      [v_c] = [1/C    0  ] [v_c] + [ 0 ] v_i + [-1/C] i_o
//! ```
//!
//! [`discretize`] gives the exact zero-order-hold model used for prediction,
//! [`step_truth`] integrates the coupled filter and load with fixed-step RK4
//! and serves as the simulated plant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{clarke, inverse_clarke, voltage_vector, Abc, AlphaBeta, SwitchingState};

/// Default number of RK4 substeps per sampling interval.
pub const DEFAULT_SUBSTEPS: usize = 32;

/// Filter components, sampling period and dc-link voltage (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Filter inductance [H].
    pub l: f64,
    /// Filter capacitance [F].
    pub c: f64,
    /// Sampling period [s].
    pub ts: f64,
    /// DC-link voltage [V].
    pub vdc: f64,
}

impl FilterParams {
    pub fn new(l: f64, c: f64, ts: f64, vdc: f64) -> Result<Self> {
        let p = Self { l, c, ts, vdc };
        p.validate()?;
        Ok(p)
    }

    /// Nominal converter parameters: 2 mH, 40 µF, 30 µs, 500 V.
    pub fn nominal() -> Self {
        Self {
            l: 2e-3,
            c: 40e-6,
            ts: 30e-6,
            vdc: 500.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("l", self.l), ("c", self.c), ("ts", self.ts), ("vdc", self.vdc)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "filter parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        let wts = self.resonance() * self.ts;
        if wts >= std::f64::consts::PI {
            return Err(Error::InvalidParameter(format!(
                "sampling too slow for the filter resonance: w0*Ts = {wts:.4} >= pi"
            )));
        }
        Ok(())
    }

    /// Undamped resonance ω₀ = 1/√(LC) [rad/s].
    pub fn resonance(&self) -> f64 {
        1.0 / (self.l * self.c).sqrt()
    }
}

/// Exact discretization of the filter, applied independently per αβ channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModel {
    /// State transition, row-major over (i_f, v_c).
    pub aq: [[f64; 2]; 2],
    /// Input gain for the inverter voltage.
    pub bq: [f64; 2],
    /// Input gain for the output (disturbance) current.
    pub bdq: [f64; 2],
}

/// Zero-order-hold discretization using `exp(At) = cos(ω₀t)·I + sin(ω₀t)/ω₀·A`
/// (A² = -ω₀²I for the lossless filter).
pub fn discretize(p: &FilterParams) -> Result<DiscreteModel> {
    p.validate()?;
    let w0 = p.resonance();
    let theta = w0 * p.ts;
    let (s, c) = theta.sin_cos();
    let a = [[0.0, -1.0 / p.l], [1.0 / p.c, 0.0]];

    let aq = [[c, s / w0 * a[0][1]], [s / w0 * a[1][0], c]];

    // ∫₀^Ts exp(Aτ) dτ = sin(θ)/ω₀·I + (1 - cos θ)/ω₀²·A. The second
    // coefficient is written via sin² to avoid cancellation for small θ.
    let half = 0.5 * theta;
    let one_minus_cos = 2.0 * half.sin() * half.sin();
    let k_i = s / w0;
    let k_a = one_minus_cos / (w0 * w0);
    let integral = [
        [k_i, k_a * a[0][1]],
        [k_a * a[1][0], k_i],
    ];
    let b = [1.0 / p.l, 0.0];
    let bd = [0.0, -1.0 / p.c];
    let apply = |m: [[f64; 2]; 2], v: [f64; 2]| {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    };
    Ok(DiscreteModel {
        aq,
        bq: apply(integral, b),
        bdq: apply(integral, bd),
    })
}

impl DiscreteModel {
    pub fn det(&self) -> f64 {
        self.aq[0][0] * self.aq[1][1] - self.aq[0][1] * self.aq[1][0]
    }
}

/// One-step filter prediction `x(k+1) = Aq·x(k) + Bq·v_i(k) + Bdq·i_o(k)`.
/// Returns `(i_f(k+1), v_c(k+1))`.
pub fn predict(
    m: &DiscreteModel,
    i_f: AlphaBeta,
    v_c: AlphaBeta,
    v_i: AlphaBeta,
    i_o: AlphaBeta,
) -> (AlphaBeta, AlphaBeta) {
    let channel = |x0: f64, x1: f64, u: f64, d: f64| {
        (
            m.aq[0][0] * x0 + m.aq[0][1] * x1 + m.bq[0] * u + m.bdq[0] * d,
            m.aq[1][0] * x0 + m.aq[1][1] * x1 + m.bq[1] * u + m.bdq[1] * d,
        )
    };
    let (ifa, vca) = channel(i_f.alpha, v_c.alpha, v_i.alpha, i_o.alpha);
    let (ifb, vcb) = channel(i_f.beta, v_c.beta, v_i.beta, i_o.beta);
    (AlphaBeta::new(ifa, ifb), AlphaBeta::new(vca, vcb))
}

/// Backward-difference output-current estimate
/// `i_o(k) ≈ i_f(k-1) - C/Ts·(v_c(k) - v_c(k-1))`.
pub fn estimate_output_current(
    i_f_prev: AlphaBeta,
    v_c_now: AlphaBeta,
    v_c_prev: AlphaBeta,
    p: &FilterParams,
) -> AlphaBeta {
    i_f_prev - (v_c_now - v_c_prev) * (p.c / p.ts)
}

/// Load connected across the filter capacitors (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LoadModel {
    /// Star-connected resistors, `r` ohms per phase.
    Resistive { r: f64 },
    OpenCircuit,
    /// Star-connected inductors without series resistance.
    Inductive { l_load: f64 },
    /// Six-pulse bridge of ideal diodes feeding `r_nl ∥ c_nl`.
    DiodeBridgeRectifier { r_nl: f64, c_nl: f64 },
    /// Fixed output current, independent of voltage. Used to compare the
    /// integrator against the discrete model under identical disturbance.
    ConstantCurrent { i_o: AlphaBeta },
}

impl LoadModel {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "load parameter {name} must be positive and finite, got {v}"
                )))
            }
        };
        match *self {
            LoadModel::Resistive { r } => check("r", r),
            LoadModel::OpenCircuit => Ok(()),
            LoadModel::Inductive { l_load } => check("l_load", l_load),
            LoadModel::DiodeBridgeRectifier { r_nl, c_nl } => {
                check("r_nl", r_nl)?;
                check("c_nl", c_nl)
            }
            LoadModel::ConstantCurrent { i_o } => {
                if i_o.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("constant load current must be finite".into()))
                }
            }
        }
    }

    /// Internal state of this load when de-energized.
    pub fn initial_state(&self) -> LoadState {
        match self {
            LoadModel::Inductive { .. } => LoadState::Inductor {
                i_l: AlphaBeta::ZERO,
            },
            LoadModel::DiodeBridgeRectifier { .. } => LoadState::Rectifier { v_dc: 0.0 },
            _ => LoadState::Stateless,
        }
    }
}

/// Dynamic state carried by the load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LoadState {
    Stateless,
    Inductor { i_l: AlphaBeta },
    Rectifier { v_dc: f64 },
}

/// Filter state plus load state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub i_f: AlphaBeta,
    pub v_c: AlphaBeta,
    pub load: LoadState,
}

impl PlantState {
    /// De-energized filter and load.
    pub fn zero(load: &LoadModel) -> Self {
        Self {
            i_f: AlphaBeta::ZERO,
            v_c: AlphaBeta::ZERO,
            load: load.initial_state(),
        }
    }

    pub fn is_finite(&self) -> bool {
        let load_ok = match self.load {
            LoadState::Stateless => true,
            LoadState::Inductor { i_l } => i_l.is_finite(),
            LoadState::Rectifier { v_dc } => v_dc.is_finite(),
        };
        self.i_f.is_finite() && self.v_c.is_finite() && load_ok
    }

    /// Filter energy `½L|i_f|² + ½C|v_c|²` in αβ units.
    pub fn filter_energy(&self, p: &FilterParams) -> f64 {
        0.5 * p.l * self.i_f.norm_sq() + 0.5 * p.c * self.v_c.norm_sq()
    }

    /// Instantaneous output current drawn by `load` in this state.
    pub fn output_current(&self, p: &FilterParams, load: &LoadModel) -> AlphaBeta {
        let x = pack(self);
        let mode = rectifier_mode(&x, p, load);
        output_current(&x, load, mode)
    }

    /// DC-bus voltage of a rectifier load, if any.
    pub fn dc_bus_voltage(&self) -> Option<f64> {
        match self.load {
            LoadState::Rectifier { v_dc } => Some(v_dc),
            _ => None,
        }
    }
}

// Integration state: [i_fα, i_fβ, v_cα, v_cβ, x0, x1] where (x0, x1) is the
// inductor current for inductive loads and (v_dc, unused) for rectifiers.
type Vec6 = [f64; 6];

fn pack(s: &PlantState) -> Vec6 {
    let (x0, x1) = match s.load {
        LoadState::Stateless => (0.0, 0.0),
        LoadState::Inductor { i_l } => (i_l.alpha, i_l.beta),
        LoadState::Rectifier { v_dc } => (v_dc, 0.0),
    };
    [s.i_f.alpha, s.i_f.beta, s.v_c.alpha, s.v_c.beta, x0, x1]
}

fn unpack(x: &Vec6, template: &LoadState) -> PlantState {
    let load = match template {
        LoadState::Stateless => LoadState::Stateless,
        LoadState::Inductor { .. } => LoadState::Inductor {
            i_l: AlphaBeta::new(x[4], x[5]),
        },
        LoadState::Rectifier { .. } => LoadState::Rectifier { v_dc: x[4] },
    };
    PlantState {
        i_f: AlphaBeta::new(x[0], x[1]),
        v_c: AlphaBeta::new(x[2], x[3]),
        load,
    }
}

/// Conduction state of the diode bridge over one substep.
#[derive(Debug, Clone, Copy, PartialEq)]
enum BridgeMode {
    Blocking,
    /// Phase `pos` feeds the positive rail, phase `neg` the negative one.
    Conducting { pos: usize, neg: usize, gain: BridgeGain },
}

/// Coefficients of the dc current while a diode pair conducts:
/// `i_dc = k_if·(i_fp - i_fn) + k_vdc·v_dc`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BridgeGain {
    k_if: f64,
    k_vdc: f64,
}

fn extreme_phases(v: [f64; 3]) -> (usize, usize) {
    let mut pos = 0;
    let mut neg = 0;
    for k in 1..3 {
        if v[k] > v[pos] {
            pos = k;
        }
        if v[k] < v[neg] {
            neg = k;
        }
    }
    (pos, neg)
}

fn rectifier_mode(x: &Vec6, p: &FilterParams, load: &LoadModel) -> BridgeMode {
    let LoadModel::DiodeBridgeRectifier { r_nl, c_nl } = *load else {
        return BridgeMode::Blocking;
    };
    let v = inverse_clarke(AlphaBeta::new(x[2], x[3])).as_array();
    let (pos, neg) = extreme_phases(v);
    let v_line = v[pos] - v[neg];
    let v_dc = x[4];
    let tol = 1e-9 * (v_dc.abs() + 1.0);
    if pos == neg || v_line < v_dc - tol {
        return BridgeMode::Blocking;
    }
    // Holding v_p - v_n = v_dc: (i_fp - i_fn - 2 i_dc)/C = (i_dc - v_dc/R)/C_nl.
    let denom = 2.0 / p.c + 1.0 / c_nl;
    let gain = BridgeGain {
        k_if: 1.0 / (p.c * denom),
        k_vdc: 1.0 / (r_nl * c_nl * denom),
    };
    let i_f = inverse_clarke(AlphaBeta::new(x[0], x[1])).as_array();
    let i_dc = gain.k_if * (i_f[pos] - i_f[neg]) + gain.k_vdc * v_dc;
    if i_dc > 0.0 {
        BridgeMode::Conducting { pos, neg, gain }
    } else {
        BridgeMode::Blocking
    }
}

fn bridge_current(x: &Vec6, pos: usize, neg: usize, gain: BridgeGain) -> f64 {
    let i_f = inverse_clarke(AlphaBeta::new(x[0], x[1])).as_array();
    gain.k_if * (i_f[pos] - i_f[neg]) + gain.k_vdc * x[4]
}

fn output_current(x: &Vec6, load: &LoadModel, mode: BridgeMode) -> AlphaBeta {
    match *load {
        LoadModel::Resistive { r } => AlphaBeta::new(x[2] / r, x[3] / r),
        LoadModel::OpenCircuit => AlphaBeta::ZERO,
        LoadModel::Inductive { .. } => AlphaBeta::new(x[4], x[5]),
        LoadModel::ConstantCurrent { i_o } => i_o,
        LoadModel::DiodeBridgeRectifier { .. } => match mode {
            BridgeMode::Blocking => AlphaBeta::ZERO,
            BridgeMode::Conducting { pos, neg, gain } => {
                let i_dc = bridge_current(x, pos, neg, gain);
                let mut abc = [0.0; 3];
                abc[pos] = i_dc;
                abc[neg] = -i_dc;
                clarke(Abc::from_array(abc))
            }
        },
    }
}

fn derivative(
    x: &Vec6,
    v_i: AlphaBeta,
    p: &FilterParams,
    load: &LoadModel,
    mode: BridgeMode,
) -> Vec6 {
    let i_o = output_current(x, load, mode);
    let mut dx = [
        (v_i.alpha - x[2]) / p.l,
        (v_i.beta - x[3]) / p.l,
        (x[0] - i_o.alpha) / p.c,
        (x[1] - i_o.beta) / p.c,
        0.0,
        0.0,
    ];
    match *load {
        LoadModel::Inductive { l_load } => {
            dx[4] = x[2] / l_load;
            dx[5] = x[3] / l_load;
        }
        LoadModel::DiodeBridgeRectifier { r_nl, c_nl } => {
            let i_dc = match mode {
                BridgeMode::Blocking => 0.0,
                BridgeMode::Conducting { pos, neg, gain } => bridge_current(x, pos, neg, gain),
            };
            dx[4] = (i_dc - x[4] / r_nl) / c_nl;
        }
        _ => {}
    }
    dx
}

fn axpy(x: &Vec6, h: f64, k: &Vec6) -> Vec6 {
    let mut out = *x;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

fn rk4(x: &Vec6, h: f64, f: impl Fn(&Vec6) -> Vec6) -> Vec6 {
    let k1 = f(x);
    let k2 = f(&axpy(x, 0.5 * h, &k1));
    let k3 = f(&axpy(x, 0.5 * h, &k2));
    let k4 = f(&axpy(x, h, &k3));
    let mut out = *x;
    for i in 0..6 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Instantaneous charge sharing when the filter line voltage has overtaken
/// the dc bus: ideal diodes equalize the two capacitor groups at once.
fn equalize_bridge(x: &mut Vec6, p: &FilterParams, load: &LoadModel) {
    let LoadModel::DiodeBridgeRectifier { c_nl, .. } = *load else {
        return;
    };
    let v = inverse_clarke(AlphaBeta::new(x[2], x[3])).as_array();
    let (pos, neg) = extreme_phases(v);
    let excess = v[pos] - v[neg] - x[4];
    if pos == neg || excess <= 0.0 {
        return;
    }
    let q = excess / (2.0 / p.c + 1.0 / c_nl);
    let mut dv = [0.0; 3];
    dv[pos] = -q / p.c;
    dv[neg] = q / p.c;
    let d = clarke(Abc::from_array(dv));
    x[2] += d.alpha;
    x[3] += d.beta;
    x[4] += q / c_nl;
}

/// Advances filter and load by one sampling period with the inverter voltage
/// of `applied` held constant, using `substeps` RK4 steps.
pub fn step_truth(
    state: &PlantState,
    applied: SwitchingState,
    p: &FilterParams,
    load: &LoadModel,
    substeps: usize,
) -> Result<PlantState> {
    if substeps < 1 {
        return Err(Error::InvalidParameter("substeps must be at least 1".into()));
    }
    let v_i = voltage_vector(applied, p.vdc)?;
    let h = p.ts / substeps as f64;
    let mut x = pack(state);
    let is_rectifier = matches!(load, LoadModel::DiodeBridgeRectifier { .. });
    for _ in 0..substeps {
        let mode = if is_rectifier {
            equalize_bridge(&mut x, p, load);
            rectifier_mode(&x, p, load)
        } else {
            BridgeMode::Blocking
        };
        x = rk4(&x, h, |y| derivative(y, v_i, p, load, mode));
        if is_rectifier && x[4] < 0.0 {
            x[4] = 0.0;
        }
    }
    Ok(unpack(&x, &state.load))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type M2 = [[f64; 2]; 2];

    fn matmul(a: M2, b: M2) -> M2 {
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    /// Truncated Taylor series for exp(A·Ts) and ∫exp(Aτ)dτ.
    fn series_oracle(p: &FilterParams, terms: usize) -> (M2, M2) {
        let a = [[0.0, -1.0 / p.l], [1.0 / p.c, 0.0]];
        let mut exp = [[1.0, 0.0], [0.0, 1.0]];
        let mut integral = [[p.ts, 0.0], [0.0, p.ts]];
        let mut power = [[1.0, 0.0], [0.0, 1.0]];
        let mut fact = 1.0;
        for k in 1..terms {
            power = matmul(power, a);
            fact *= k as f64;
            let t_exp = p.ts.powi(k as i32) / fact;
            let t_int = p.ts.powi(k as i32 + 1) / (fact * (k as f64 + 1.0));
            for i in 0..2 {
                for j in 0..2 {
                    exp[i][j] += power[i][j] * t_exp;
                    integral[i][j] += power[i][j] * t_int;
                }
            }
        }
        (exp, integral)
    }

    #[test]
    fn nominal_discretization_matches_series() {
        let p = FilterParams::nominal();
        let m = discretize(&p).unwrap();
        let (exp, integral) = series_oracle(&p, 25);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m.aq[i][j], exp[i][j], epsilon = 1e-12);
            }
            assert_abs_diff_eq!(m.bq[i], integral[i][0] / p.l, epsilon = 1e-12);
            assert_abs_diff_eq!(m.bdq[i], -integral[i][1] / p.c, epsilon = 1e-12);
        }
        // Frozen from the series oracle.
        assert_abs_diff_eq!(m.aq[0][0], 0.994_380_271_460_358, epsilon = 1e-12);
        assert_abs_diff_eq!(m.aq[0][1], -0.014_971_890_816_076, epsilon = 1e-12);
        assert_abs_diff_eq!(m.aq[1][0], 0.748_594_540_803_779, epsilon = 1e-12);
        assert_abs_diff_eq!(m.bq[1], 0.005_619_728_539_642, epsilon = 1e-12);
        assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_sampling_time_is_identity() {
        let p = FilterParams::new(2e-3, 40e-6, 1e-15, 500.0).unwrap();
        let m = discretize(&p).unwrap();
        assert_abs_diff_eq!(m.aq[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.aq[1][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.aq[0][1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.aq[1][0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.bq[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.bdq[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn small_ts_first_order_limits() {
        let p = FilterParams::new(2e-3, 40e-6, 1e-9, 500.0).unwrap();
        let m = discretize(&p).unwrap();
        assert!((m.bq[0] / (p.ts / p.l) - 1.0).abs() < 1e-6);
        assert!((m.bdq[1] / (-p.ts / p.c) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(FilterParams::new(0.0, 40e-6, 30e-6, 500.0).is_err());
        assert!(FilterParams::new(2e-3, -1.0, 30e-6, 500.0).is_err());
        assert!(FilterParams::new(2e-3, 40e-6, 0.0, 500.0).is_err());
        assert!(FilterParams::new(2e-3, 40e-6, 30e-6, f64::INFINITY).is_err());
        // ω₀·Ts beyond π
        assert!(FilterParams::new(1e-6, 1e-6, 1e-5, 500.0).is_err());
        let bad = FilterParams {
            l: -1.0,
            ..FilterParams::nominal()
        };
        assert!(discretize(&bad).is_err());
    }

    #[test]
    fn predict_examples() {
        let p = FilterParams::nominal();
        let m = discretize(&p).unwrap();
        let z = AlphaBeta::ZERO;
        assert_eq!(predict(&m, z, z, z, z), (z, z));

        let v_i = AlphaBeta::new(1000.0 / 3.0, 0.0);
        let (i_f, v_c) = predict(&m, z, z, v_i, z);
        assert_eq!(i_f.alpha, m.bq[0] * v_i.alpha);
        assert_eq!(v_c.alpha, m.bq[1] * v_i.alpha);
        assert_eq!(i_f.beta, 0.0);

        // Cross-check against a fine-step integration of the same input.
        let load = LoadModel::OpenCircuit;
        let next = step_truth(
            &PlantState::zero(&load),
            SwitchingState::new(true, false, false),
            &p,
            &load,
            256,
        )
        .unwrap();
        assert!((next.i_f.alpha - i_f.alpha).abs() < 1e-10 * i_f.alpha.abs());
        assert!((next.v_c.alpha - v_c.alpha).abs() < 1e-10 * v_c.alpha.abs());
    }

    #[test]
    fn estimator_examples() {
        let p = FilterParams::nominal();
        let v = AlphaBeta::new(100.0, -20.0);
        assert_eq!(
            estimate_output_current(AlphaBeta::new(1.0, 0.0), v, v, &p),
            AlphaBeta::new(1.0, 0.0)
        );
        let i = estimate_output_current(
            AlphaBeta::ZERO,
            AlphaBeta::new(p.ts / p.c, 0.0),
            AlphaBeta::ZERO,
            &p,
        );
        assert_abs_diff_eq!(i.alpha, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(i.beta, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn open_circuit_zero_vector_stays_at_rest() {
        let p = FilterParams::nominal();
        let load = LoadModel::OpenCircuit;
        let mut s = PlantState::zero(&load);
        for _ in 0..100 {
            s = step_truth(&s, SwitchingState::default(), &p, &load, 8).unwrap();
        }
        assert_eq!(s, PlantState::zero(&load));
    }

    #[test]
    fn rejects_zero_substeps() {
        let p = FilterParams::nominal();
        let load = LoadModel::OpenCircuit;
        assert!(step_truth(&PlantState::zero(&load), SwitchingState::default(), &p, &load, 0).is_err());
    }

    #[test]
    fn constant_current_step_matches_discrete_model() {
        let p = FilterParams::nominal();
        let m = discretize(&p).unwrap();
        let i_o = AlphaBeta::new(3.0, -1.5);
        let load = LoadModel::ConstantCurrent { i_o };
        let s = PlantState {
            i_f: AlphaBeta::new(5.0, 2.0),
            v_c: AlphaBeta::new(150.0, -80.0),
            load: LoadState::Stateless,
        };
        for index in 0..8 {
            let sw = SwitchingState::from_index(index).unwrap();
            let truth = step_truth(&s, sw, &p, &load, DEFAULT_SUBSTEPS).unwrap();
            let v_i = voltage_vector(sw, p.vdc).unwrap();
            let (i_f, v_c) = predict(&m, s.i_f, s.v_c, v_i, i_o);
            assert!((truth.i_f - i_f).norm() <= 1e-9 * i_f.norm().max(1.0));
            assert!((truth.v_c - v_c).norm() <= 1e-9 * v_c.norm().max(1.0));
        }
    }

    #[test]
    fn inductive_load_integrates_current() {
        let p = FilterParams::nominal();
        let load = LoadModel::Inductive { l_load: 0.01 };
        let s = PlantState {
            i_f: AlphaBeta::ZERO,
            v_c: AlphaBeta::new(100.0, 0.0),
            load: LoadState::Inductor { i_l: AlphaBeta::ZERO },
        };
        let next = step_truth(&s, SwitchingState::default(), &p, &load, 32).unwrap();
        let LoadState::Inductor { i_l } = next.load else {
            panic!("load state kind changed");
        };
        // di/dt ≈ 100 V / 10 mH over 30 µs, to first order.
        assert!((i_l.alpha - 0.3).abs() < 0.01);
    }

    #[test]
    fn rectifier_charges_and_holds_bus_below_line_peak() {
        let p = FilterParams::nominal();
        let load = LoadModel::DiodeBridgeRectifier {
            r_nl: 60.0,
            c_nl: 300e-6,
        };
        let mut s = PlantState::zero(&load);
        let mut peak_line: f64 = 0.0;
        // Drive with a rotating six-step pattern for a few cycles.
        for k in 0..4000usize {
            let sector = (k / 111) % 6 + 1;
            let sw = crate::frames::CANONICAL_STATES[sector];
            s = step_truth(&s, sw, &p, &load, DEFAULT_SUBSTEPS).unwrap();
            let v = inverse_clarke(s.v_c).as_array();
            let (hi, lo) = extreme_phases(v);
            peak_line = peak_line.max(v[hi] - v[lo]);
            let v_dc = s.dc_bus_voltage().unwrap();
            assert!(v_dc >= 0.0);
            assert!(v_dc <= peak_line * 1.01 + 1e-9, "step {k}: {v_dc} > {peak_line}");
        }
        assert!(s.dc_bus_voltage().unwrap() > 10.0);
    }

    proptest! {
        #[test]
        fn transition_determinant_is_one(
            l in 0.5e-3..10e-3f64, c in 10e-6..200e-6f64, ts in 5e-6..100e-6f64, vdc in 100.0..1000.0f64
        ) {
            let p = FilterParams { l, c, ts, vdc };
            prop_assume!(p.validate().is_ok());
            let m = discretize(&p).unwrap();
            prop_assert!((m.det() - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn predict_is_affine(
            a in -100.0..100.0f64, b in -100.0..100.0f64, c in -300.0..300.0f64, d in -300.0..300.0f64,
            e in -300.0..300.0f64, f in -10.0..10.0f64, lambda in -3.0..3.0f64
        ) {
            let m = discretize(&FilterParams::nominal()).unwrap();
            let z = AlphaBeta::ZERO;
            let x = (AlphaBeta::new(a, b), AlphaBeta::new(c, d));
            let u = AlphaBeta::new(e, -e);
            let w = AlphaBeta::new(f, 2.0 * f);
            let (i1, v1) = predict(&m, x.0 * lambda, x.1 * lambda, u * lambda, w * lambda);
            let (i2, v2) = predict(&m, x.0, x.1, u, w);
            prop_assert!((i1 - i2 * lambda).norm() <= 1e-9 * (1.0 + i2.norm() * lambda.abs()));
            prop_assert!((v1 - v2 * lambda).norm() <= 1e-9 * (1.0 + v2.norm() * lambda.abs()));
            let (i3, v3) = predict(&m, x.0, x.1, z, z);
            let (i4, v4) = predict(&m, z, z, u, w);
            prop_assert!((i3 + i4 - i2).norm() <= 1e-9 * (1.0 + i2.norm()));
            prop_assert!((v3 + v4 - v2).norm() <= 1e-9 * (1.0 + v2.norm()));
        }
    }
}
