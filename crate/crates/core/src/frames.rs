//! Stationary-frame algebra for the two-level inverter.
//!
//! Three-phase quantities are mapped to the αβ plane with the
//! amplitude-invariant Clarke transform
//!
//! ```text
//! [α]         [1  -1/2   -1/2 ] [a]
//! [β] = 2/3 · [0  √3/2  -√3/2 ] [b]
//!                               [c]
//! ```
//!
//! so a balanced sinusoid of amplitude `A` becomes a rotating vector of
//! magnitude `A`. The zero-sequence component is discarded.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// A quantity in the stationary αβ frame (volts or amperes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBeta {
    pub const ZERO: AlphaBeta = AlphaBeta {
        alpha: 0.0,
        beta: 0.0,
    };

    pub const fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Unit-amplitude-scaled rotating vector `amplitude·(cos θ, sin θ)`.
    pub fn from_polar(amplitude: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(amplitude * c, amplitude * s)
    }

    pub fn dot(self, other: AlphaBeta) -> f64 {
        self.alpha * other.alpha + self.beta * other.beta
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.alpha.hypot(self.beta)
    }

    /// Rotates the vector counter-clockwise by `angle` radians.
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(
            c * self.alpha - s * self.beta,
            s * self.alpha + c * self.beta,
        )
    }

    pub fn is_finite(self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite()
    }
}

impl Add for AlphaBeta {
    type Output = AlphaBeta;
    fn add(self, rhs: AlphaBeta) -> AlphaBeta {
        AlphaBeta::new(self.alpha + rhs.alpha, self.beta + rhs.beta)
    }
}

impl AddAssign for AlphaBeta {
    fn add_assign(&mut self, rhs: AlphaBeta) {
        self.alpha += rhs.alpha;
        self.beta += rhs.beta;
    }
}

impl Sub for AlphaBeta {
    type Output = AlphaBeta;
    fn sub(self, rhs: AlphaBeta) -> AlphaBeta {
        AlphaBeta::new(self.alpha - rhs.alpha, self.beta - rhs.beta)
    }
}

impl Neg for AlphaBeta {
    type Output = AlphaBeta;
    fn neg(self) -> AlphaBeta {
        AlphaBeta::new(-self.alpha, -self.beta)
    }
}

impl Mul<f64> for AlphaBeta {
    type Output = AlphaBeta;
    fn mul(self, rhs: f64) -> AlphaBeta {
        AlphaBeta::new(self.alpha * rhs, self.beta * rhs)
    }
}

impl Mul<AlphaBeta> for f64 {
    type Output = AlphaBeta;
    fn mul(self, rhs: AlphaBeta) -> AlphaBeta {
        rhs * self
    }
}

/// A per-phase quantity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Abc {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Abc {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Balanced set `amplitude·cos(θ - k·2π/3)`, k = 0, 1, 2.
    pub fn balanced(amplitude: f64, angle: f64) -> Self {
        let shift = 2.0 * std::f64::consts::PI / 3.0;
        Self::new(
            amplitude * angle.cos(),
            amplitude * (angle - shift).cos(),
            amplitude * (angle + shift).cos(),
        )
    }
}

impl Add for Abc {
    type Output = Abc;
    fn add(self, rhs: Abc) -> Abc {
        Abc::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c)
    }
}

impl Mul<f64> for Abc {
    type Output = Abc;
    fn mul(self, rhs: f64) -> Abc {
        Abc::new(self.a * rhs, self.b * rhs, self.c * rhs)
    }
}

pub fn clarke(abc: Abc) -> AlphaBeta {
    AlphaBeta {
        alpha: (2.0 / 3.0) * (abc.a - 0.5 * abc.b - 0.5 * abc.c),
        beta: (2.0 / 3.0) * (SQRT_3 / 2.0) * (abc.b - abc.c),
    }
}

/// Zero-sequence-free preimage of an αβ vector (three-wire system).
pub fn inverse_clarke(v: AlphaBeta) -> Abc {
    Abc {
        a: v.alpha,
        b: 0.5 * (-v.alpha + SQRT_3 * v.beta),
        c: 0.5 * (-v.alpha - SQRT_3 * v.beta),
    }
}

/// Leg configuration of the two-level inverter. Each flag is true when the
/// upper switch of that leg conducts (the lower one is complementary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SwitchingState {
    pub sa: bool,
    pub sb: bool,
    pub sc: bool,
}

impl SwitchingState {
    pub const fn new(sa: bool, sb: bool, sc: bool) -> Self {
        Self { sa, sb, sc }
    }

    /// Binary encoding `sa·4 + sb·2 + sc`.
    pub fn index(self) -> u8 {
        (self.sa as u8) << 2 | (self.sb as u8) << 1 | self.sc as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        (index < 8).then(|| Self::new(index & 4 != 0, index & 2 != 0, index & 1 != 0))
    }

    pub fn as_abc(self) -> Abc {
        Abc::new(
            f64::from(self.sa as u8),
            f64::from(self.sb as u8),
            f64::from(self.sc as u8),
        )
    }
}

impl std::fmt::Display for SwitchingState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{},{})",
            self.sa as u8, self.sb as u8, self.sc as u8
        )
    }
}

/// Number of distinct inverter output vectors.
pub const NUM_VECTORS: usize = 7;

/// Switching states of the distinct vectors in canonical order v0..v6.
/// v0 is the zero vector represented by (0,0,0); v1..v6 step through the
/// hexagon counter-clockwise in 60° increments starting on the α axis.
pub const CANONICAL_STATES: [SwitchingState; NUM_VECTORS] = [
    SwitchingState::new(false, false, false),
    SwitchingState::new(true, false, false),
    SwitchingState::new(true, true, false),
    SwitchingState::new(false, true, false),
    SwitchingState::new(false, true, true),
    SwitchingState::new(false, false, true),
    SwitchingState::new(true, false, true),
];

fn check_vdc(vdc: f64) -> Result<()> {
    if vdc.is_finite() && vdc > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dc-link voltage must be positive and finite, got {vdc}"
        )))
    }
}

/// Inverter output voltage `Vdc · clarke(S)` for a switching state.
pub fn voltage_vector(state: SwitchingState, vdc: f64) -> Result<AlphaBeta> {
    check_vdc(vdc)?;
    Ok(clarke(state.as_abc()) * vdc)
}

/// One entry of the control set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageVector {
    pub state: SwitchingState,
    pub voltage: AlphaBeta,
}

/// The seven distinct inverter voltages in canonical order.
pub fn enumerate_distinct_vectors(vdc: f64) -> Result<[VoltageVector; NUM_VECTORS]> {
    check_vdc(vdc)?;
    Ok(CANONICAL_STATES.map(|state| VoltageVector {
        state,
        voltage: clarke(state.as_abc()) * vdc,
    }))
}
