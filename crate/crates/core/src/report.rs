//! Versioned JSON reports written by the command-line tool.
//!
//! Every report has the same envelope: a format version, the command line that
//! produced it, the resolved inputs and the results. Field order is fixed by
//! the struct definitions and maps are ordered, so equal runs give equal bytes.

use std::io;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::qstate::{QStateError, StateVector};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report<I: Serialize, R: Serialize> {
    pub format_version: u32,
    pub command: Vec<String>,
    pub inputs: I,
    pub results: R,
}

impl<I: Serialize, R: Serialize> Report<I, R> {
    pub fn new(command: Vec<String>, inputs: I, results: R) -> Self {
        Self { format_version: FORMAT_VERSION, command, inputs, results }
    }

    /// Pretty-printed, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}

/// `[re, im]` pairs, index `i` holding the amplitude of basis state `i`.
pub fn amplitudes(s: &StateVector) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

/// A state file: either `{"amplitudes": [[re, im], ...]}` or the bare list.
#[derive(Deserialize)]
#[serde(untagged)]
enum StateDoc {
    Wrapped { amplitudes: Vec<[f64; 2]> },
    Bare(Vec<[f64; 2]>),
}

#[derive(Debug, thiserror::Error)]
pub enum StateFileError {
    #[error("malformed state document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    State(#[from] QStateError),
    #[error("state has zero norm")]
    Zero,
}

/// Parse and normalize a state document.
pub fn parse_state(text: &str) -> Result<StateVector, StateFileError> {
    let pairs = match serde_json::from_str(text)? {
        StateDoc::Wrapped { amplitudes } | StateDoc::Bare(amplitudes) => amplitudes,
    };
    let s = StateVector::from_amplitudes(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())?;
    if s.norm_sq() == 0.0 {
        return Err(StateFileError::Zero);
    }
    Ok(s.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_and_round_trip() {
        let r = Report::new(vec!["verify".into()], (), vec![1, 2]);
        let j = r.to_json();
        assert!(j.starts_with("{\n  \"format_version\": 1,"));
        assert!(j.ends_with("]\n}\n"));
        assert_eq!(j, r.to_json());

        let s = parse_state("{\"amplitudes\": [[3, 0], [0, 4]]}").unwrap();
        assert_eq!(amplitudes(&s), vec![[0.6, 0.0], [0.0, 0.8]]);
        assert_eq!(parse_state("[[1, 0], [0, 0]]").unwrap().num_qubits(), 1);
        assert!(matches!(parse_state("[[0, 0], [0, 0]]"), Err(StateFileError::Zero)));
        assert!(parse_state("[[1, 0], [0, 0], [0, 0]]").is_err());
    }
}
