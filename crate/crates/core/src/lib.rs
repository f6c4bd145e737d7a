#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Deep convolutional feature extractors built from semi-discrete frames,
//! cartoon-function synthesis, deformation operators, and an experiment
//! harness that measures how feature distances decay with the size of a
//! deformation.

pub mod cartoon;
pub mod deform;
pub mod error;
pub mod exec;
pub mod frames;
pub mod harness;
pub mod network;
mod quad;
pub mod signal;

pub use error::{Error, Result};
pub use exec::Execution;
pub use signal::{Complex64, Grid, Signal};
