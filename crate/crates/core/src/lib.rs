//! Design and simulation toolkit for a linear-RF-trap ion quantum computer.
//!
//! The crate is split along the physical subsystems:
//!
//! * [`trap`]: Mathieu parameter and secular frequencies of the linear trap.
//! * [`chain`]: equilibrium positions, axial modes and Lamb-Dicke factors of an ion string.
//! * [`dynamics`]: state-vector engine for carrier (V) and sideband (U) pulses and the
//!   controlled-phase / CNOT gates compiled from them.
//! * [`optics`]: addressing-beam crosstalk, deflector steering and pulse-area budgets.
//! * [`cooling`]: Doppler / sideband cooling estimates, Monte Carlo fluorescence
//!   readout and the imaging chain.
//! * [`config`], [`script`], [`report`], [`harness`]: configuration, gate scripts and
//!   deterministic report emission used by the `ionforge` binary.
//!
//! Everything is SI internally. Data-parallel loops (readout trials, pulse sweeps)
//! run on rayon when the `parallel` feature is enabled and fall back to plain
//! iterators otherwise; results do not depend on the execution mode.

// `!(x > 0.0)` guards are deliberate: they reject NaN along with the range error.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod config;
pub mod constants;
pub mod cooling;
pub mod dynamics;
mod error;
pub mod exec;
pub mod harness;
pub mod optics;
pub mod report;
pub mod script;
pub mod species;
pub mod trap;

pub use error::{Error, ErrorKind, Result};
