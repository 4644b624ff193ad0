//! Simulator for a phase-encoded spin-wave majority gate.
//!
//! Three microwave channels excite backward volume spin waves in a garnet
//! film; the waves merge in a combiner and the phase of the sum encodes the
//! majority of the three input phases. The crate is layered bottom-up:
//!
//! * [`physics`]: magnetostatic dispersion, group velocity, damping.
//! * [`signal`]: complex baseband envelopes, spectral filtering, diode
//!   detection and 1/3–2/3 rise-time metrology.
//! * [`circuit`]: two-port netlist of the microwave chain and the magnonic
//!   trident.
//! * [`logic`]: phase encoding, truth table, cascade check, full adder.
//! * [`experiment`]: calibration, switching experiment, scaling study.
//! * [`cli`]: configuration and the `swgate` subcommands.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the command-line front end uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod logic;
pub mod physics;
pub mod scalar;
pub mod signal;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub type Film = physics::FilmParams<f64>;
pub type Field = physics::BiasField<f64>;
pub type Context = physics::ModeContext<f64>;
pub type Envelope = signal::ComplexEnvelope<f64>;
pub type Trace = signal::DetectedTrace<f64>;
pub type Geometry = circuit::DeviceGeometry<f64>;
pub type Settings = circuit::MicrowaveSettings<f64>;
pub type Netlist = circuit::GateNetlist<f64>;
pub type Encoding = logic::PhaseEncoding<f64>;

pub type Context32 = physics::ModeContext<f32>;
pub type Envelope32 = signal::ComplexEnvelope<f32>;
pub type Netlist32 = circuit::GateNetlist<f32>;
