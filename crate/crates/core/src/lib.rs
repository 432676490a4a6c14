//! Three-phase inverter with output LC filter: finite-control-set predictive
//! control, a neural-network student trained to imitate it, and the
//! simulation and analysis harness used to compare the two.

pub mod analysis;
pub mod error;
pub mod frames;
pub mod imitation;
pub mod mpc;
pub mod nn;
pub mod plant;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
