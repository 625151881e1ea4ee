//! Measurement patterns with adaptive bases, branch enumeration, and the
//! byproduct-frame algebra.

mod basis;
mod frame;
mod pattern;

pub use basis::MeasurementBasis;
pub use frame::{ByproductOperator, FrameError, LocalWord, NonlocalFactor};
pub use pattern::{
    enumerate_branches, run_branch, BranchResult, Correction, MeasurementStep, OutcomeBits, Pattern,
    PatternError, MAX_MEASURED,
};
