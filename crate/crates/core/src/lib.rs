//! Symbolic/numeric Finsler geometry engine.

pub mod error;
pub mod expr;
pub mod finsler;
pub mod flow;
pub mod lift;
pub mod metrics;
pub mod sample;
pub mod soliton;
pub mod verify;

pub use error::{Error, Result};
pub use expr::{Expr, Var};
pub use finsler::{CurvatureAtSample, FinslerStructure, MetricAtSample};
pub use flow::{construct_flow, extract_soliton, integrate_conformal_flow, FlowFamily};
pub use lift::{CompleteLift, NumericFlowMap, SymbolicDiffeo, TimeDependentField, VectorField};
pub use sample::{Sample, SampleGrid};
pub use soliton::SolitonTriple;
