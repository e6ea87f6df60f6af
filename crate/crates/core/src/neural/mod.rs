//! Minimal reverse-mode differentiable arrays, parameters and optimizer.

mod gradcheck;
mod graph;
mod model_file;
mod params;
mod schedule;
mod tensor;

use thiserror::Error;

pub use gradcheck::{grad_check, GradCheck, GradCheckReport};
pub use graph::{Gradients, Graph, Mode, Var};
pub use model_file::{ModelFile, FORMAT_VERSION, MAGIC};
pub use params::{AdamConfig, ParamId, ParameterStore};
pub use schedule::TrainSchedule;
pub use tensor::Tensor;

pub(crate) use tensor::matmul;


#[derive(Clone, Debug, Error, PartialEq)]
pub enum NeuralError {
    #[error("{op}: incompatible shapes {detail}")]
    Shape { op: &'static str, detail: String },
    #[error("index {index} out of range for {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
    #[error("parameter {0:?} registered twice")]
    DuplicateParameter(String),
    #[error("parameter {0:?} has no gradient")]
    MissingGradient(String),
    #[error("backward needs a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("step {step} outside 0..={total}")]
    StepOutOfRange { step: usize, total: usize },
    #[error("graph applies dropout in training mode; disable it for gradient checks")]
    Stochastic,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl NeuralError {
    pub(crate) fn shape(op: &'static str, detail: String) -> Self {
        NeuralError::Shape { op, detail }
    }
}

impl From<std::io::Error> for NeuralError {
    fn from(err: std::io::Error) -> Self {
        NeuralError::Io(err.to_string())
    }
}
