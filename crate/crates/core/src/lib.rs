//! Vibration-motor fish propulsion toolkit: ERM forcing, reduced-order
//! modal analysis of the fin assembly, streaming-thrust prediction,
//! calibration against reference data, design optimization and planar
//! locomotion simulation.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod config;
pub mod error;
pub mod io;
pub mod locomotion;
pub mod modal;
pub mod motor;
pub mod optimizer;
pub mod par;
pub mod thrust;

pub use config::ToolkitConfig;
pub use error::{Error, Result};
pub use par::Exec;
