//! Epidemic source estimation from contact-tracing data.

pub mod epidemic;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod likelihood;
pub mod metrics;
pub mod rng;
pub mod scalar;
pub mod support;
pub mod trace;

pub use error::{Error, ErrorClass, Result};
pub use graph::{Graph, NodeId, RootedTree, Subgraph};
pub use scalar::Scalar;
pub use support::Support;

pub type GnnModel64 = gnn::GnnModel<f64>;
pub type GnnModel32 = gnn::GnnModel<f32>;
pub type SourceScores64 = likelihood::SourceScores<f64>;
pub type SourceScores32 = likelihood::SourceScores<f32>;
