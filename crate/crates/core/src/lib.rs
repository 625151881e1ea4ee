//! Measurement-based Toffoli gates on small weighted graph states.

pub mod acceptance;
pub mod cli;
pub mod graphstate;
pub mod mbqc;
pub mod optics;
pub mod phase;
pub mod qstate;
pub mod report;
pub mod toffoli;
pub mod verify;
