//! Reference datasets and derivative-free fitting.

pub mod dataset;
pub mod fit;
pub mod linear;
pub mod nelder_mead;

pub use dataset::{bundled, bundled_names, Record, ReferenceDataset};
pub use fit::{
    calibrate, default_stages, evaluate_records, fit_model_coefficients, Aggregation, Calibration, FitOptions,
    FitResult, ParamSpec, RecordError, Stage, StageReport,
};
pub use linear::fit_linear;
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
