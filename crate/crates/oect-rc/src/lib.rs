//! Numerical simulator and experiment harness for reservoir computing on
//! networks of organic electrochemical transistors (OECTs).
//!
//! The crate models the transient response of a single OECT, couples many
//! of them through a resistor network, trains a linear readout by ridge
//! regression, and evaluates closed-loop prediction of the Lorenz system
//! via the forecast horizon. A discrete-time tanh echo state network is
//! included as the comparison baseline, and a sweep harness aggregates
//! forecast-horizon statistics over seeded trials.

pub mod baseline;
pub mod device;
pub mod dynamics;
pub mod harness;
pub mod network;
pub mod readout;
pub mod tasks;

pub use device::{CoeffPair, OectParams, RegimeTag};
pub use dynamics::{OectReservoir, Reservoir, ReservoirState, StateHistory};
pub use harness::{ExperimentConfig, ReservoirKind, SweepAxis, SweepTable};
pub use network::{CouplingMatrix, InputMatrix, ParamDistributions, ResistorNetwork};
pub use readout::{ReadoutMatrix, TrainingWindow};
pub use tasks::{ForecastResult, LorenzParams, TaskSeries};
