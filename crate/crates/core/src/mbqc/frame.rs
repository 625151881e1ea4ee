//! Byproduct frames: per-wire words `X^x · R_z^φ` plus an optional
//! non-local factor and an exactly tracked global phase.
//!
//! `R_z^φ = diag(1, e^{iφ})`, so `σ_z = R_z^π` exactly and a frame word needs
//! no separate `Z` exponent. Commuting `X` past a rotation costs a phase:
//! `R_z^φ · X = e^{iφ} X · R_z^{-φ}`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::phase::Phase;
use crate::qstate::{MultiQubitOperator, SingleQubitUnitary};

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("frames act on {0} and {1} wires")]
    WireMismatch(usize, usize),
    #[error("cannot move a local frame through a non-local factor")]
    NonlocalOrder,
}

/// `X^x · R_z^phase`.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct LocalWord {
    pub x: bool,
    pub phase: Phase,
}

impl LocalWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn x() -> Self {
        Self { x: true, phase: Phase::zero() }
    }

    pub fn z() -> Self {
        Self::rz(Phase::pi())
    }

    pub fn rz(phase: Phase) -> Self {
        Self { x: false, phase }
    }

    /// `X^x Z^z`, as written in byproduct exponents.
    pub fn pauli(x: u8, z: u8) -> Self {
        Self { x: x & 1 == 1, phase: Phase::pi() * i64::from(z & 1) }
    }

    pub fn pow(self, e: u8) -> Self {
        if e & 1 == 1 {
            self
        } else {
            Self::identity()
        }
    }

    pub fn is_identity(&self) -> bool {
        !self.x && self.phase.is_zero()
    }

    pub fn is_pauli(&self) -> bool {
        matches!(self.phase.exact(), Some(r) if r.is_integer())
    }

    /// `self · rhs` as `(word, global phase)`.
    pub fn compose(self, rhs: Self) -> (Self, Phase) {
        if rhs.x {
            (Self { x: !self.x, phase: rhs.phase - self.phase }, self.phase)
        } else {
            (Self { x: self.x, phase: self.phase + rhs.phase }, Phase::zero())
        }
    }

    pub fn unitary(&self) -> SingleQubitUnitary {
        let r = SingleQubitUnitary::rz(self.phase);
        if self.x {
            SingleQubitUnitary::pauli_x().then_after(&r)
        } else {
            r
        }
    }
}

impl fmt::Display for LocalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rot = if self.phase.is_zero() {
            None
        } else if self.phase == Phase::pi() {
            Some("Z".to_string())
        } else {
            Some(format!("R_z^{{{}}}", self.phase))
        };
        match (self.x, rot) {
            (false, None) => write!(f, "I"),
            (true, None) => write!(f, "X"),
            (false, Some(r)) => write!(f, "{r}"),
            (true, Some(r)) => write!(f, "X·{r}"),
        }
    }
}

/// Non-local residual appearing in failed branches.
#[derive(Clone, Debug, PartialEq)]
pub enum NonlocalFactor {
    /// On wires `(c1, c2, t) = (0, 1, 2)`:
    /// `H_t · diag(e^{iθ(c2·t + c1·c2 − 2·c1·c2·t)}) · H_t`, which is exactly
    /// `CNOT_{c2t} · CZ_{c1c2}` at `θ = π`.
    FlippedPhase { theta: Phase },
    Operator { op: MultiQubitOperator, label: String },
}

impl NonlocalFactor {
    pub fn arity(&self) -> usize {
        match self {
            Self::FlippedPhase { .. } => 3,
            Self::Operator { op, .. } => op.arity(),
        }
    }

    pub fn operator(&self) -> MultiQubitOperator {
        match self {
            Self::FlippedPhase { theta } => {
                let mut d = DMatrix::<C64>::zeros(8, 8);
                for i in 0..8usize {
                    let (c1, c2, t) = ((i & 1) as i64, ((i >> 1) & 1) as i64, ((i >> 2) & 1) as i64);
                    d[(i, i)] = (*theta * (c2 * t + c1 * c2 - 2 * c1 * c2 * t)).unit();
                }
                let h = MultiQubitOperator::single(2, &SingleQubitUnitary::hadamard()).embed(3).unwrap();
                MultiQubitOperator::on_wires(&h * d * &h).unwrap()
            }
            Self::Operator { op, .. } => op.clone(),
        }
    }
}

impl fmt::Display for NonlocalFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FlippedPhase { theta } if *theta == Phase::pi() => write!(f, "CNOT_{{c2t}}·CZ_{{c1c2}}"),
            Self::FlippedPhase { theta } => write!(f, "H_t·D({theta})·H_t"),
            Self::Operator { label, .. } => write!(f, "{label}"),
        }
    }
}

/// `e^{iγ} · (⊗_w word_w) · nonlocal`, wire 0 least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ByproductOperator {
    pub wires: Vec<LocalWord>,
    pub nonlocal: Option<NonlocalFactor>,
    pub global_phase: Phase,
}

impl ByproductOperator {
    pub fn identity(n: usize) -> Self {
        Self { wires: vec![LocalWord::identity(); n], nonlocal: None, global_phase: Phase::zero() }
    }

    pub fn from_words(wires: Vec<LocalWord>) -> Self {
        Self { wires, nonlocal: None, global_phase: Phase::zero() }
    }

    pub fn on_wire(n: usize, w: usize, word: LocalWord) -> Self {
        let mut f = Self::identity(n);
        f.wires[w] = word;
        f
    }

    pub fn with_nonlocal(mut self, factor: NonlocalFactor) -> Self {
        self.nonlocal = Some(factor);
        self
    }

    pub fn is_local(&self) -> bool {
        self.nonlocal.is_none()
    }

    fn is_trivial_local(&self) -> bool {
        self.nonlocal.is_none() && self.wires.iter().all(LocalWord::is_identity)
    }

    /// `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self, FrameError> {
        if self.wires.len() != rhs.wires.len() {
            return Err(FrameError::WireMismatch(self.wires.len(), rhs.wires.len()));
        }
        if self.nonlocal.is_some() && !rhs.is_trivial_local() {
            return Err(FrameError::NonlocalOrder);
        }
        let mut global_phase = self.global_phase + rhs.global_phase;
        let wires = self
            .wires
            .iter()
            .zip(&rhs.wires)
            .map(|(a, b)| {
                let (w, ph) = a.compose(*b);
                global_phase = global_phase + ph;
                w
            })
            .collect();
        let nonlocal = rhs.nonlocal.clone().or_else(|| self.nonlocal.clone());
        Ok(Self { wires, nonlocal, global_phase })
    }

    pub fn to_operator(&self) -> MultiQubitOperator {
        let n = self.wires.len();
        let words: Vec<_> = self.wires.iter().map(LocalWord::unitary).collect();
        let mut m = MultiQubitOperator::local(&words).into_matrix();
        if let Some(nl) = &self.nonlocal {
            m *= nl.operator().embed(n).expect("non-local factor fits the frame");
        }
        m *= self.global_phase.unit();
        MultiQubitOperator::on_wires(m).unwrap()
    }

    /// Readable form using the given wire labels, identities omitted.
    pub fn describe(&self, labels: &[&str]) -> String {
        let mut parts: Vec<String> = self
            .wires
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_identity())
            .map(|(i, w)| format!("({w})_{}", labels.get(i).copied().unwrap_or("?")))
            .collect();
        if parts.is_empty() {
            parts.push("I".into());
        }
        let mut s = parts.join(" ⊗ ");
        if let Some(nl) = &self.nonlocal {
            s = format!("[{s}]·[{nl}]");
        }
        s
    }
}
