//! Postselected linear-optics generation of weighted graph states.
//!
//! A photon in mode `i` carries one qubit, `|H⟩ = |0⟩` and `|V⟩ = |1⟩`.
//! Fusion is the projector `|HH⟩⟨HH| + |VV⟩⟨VV|` on two modes followed by a
//! Hadamard on one of them; its norm is folded into the running
//! postselection probability. Recipes are JSON lists of steps.
//!
//! Hadamard placement in the built-in six-qubit recipe:
//!
//! | step   | fused modes | H on |
//! |--------|-------------|------|
//! | (i)    | 1, 6        | 6    |
//! | (ii)   | 6, 4        | 4    |
//! | (iv)   | 6, 2        | 6    |
//! | (v)    | 4, 3        | 3    |
//! | (vi)   | 3, 6        | 6    |
//! | (vii)  | 6, 7        | 7    |
//! | (viii) | 5, 7        | 7    |

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mbqc::MeasurementBasis;
use crate::phase::Phase;
use crate::qstate::{c, ket_equatorial, ket_plus, Ket, QStateError, SingleQubitUnitary, StateVector};

pub const SIX_QUBIT_RECIPE: &str = include_str!("../fixtures/six_qubit_recipe.json");

#[derive(Debug, Error)]
pub enum OpticsError {
    #[error("mode {0} is not in the register")]
    UnknownMode(usize),
    #[error("mode {0} is already in the register")]
    DuplicateMode(usize),
    #[error("fuse needs two distinct modes, got {0} twice")]
    SameMode(usize),
    #[error("H target {h} is not one of the fused modes {a}, {b}")]
    HTarget { a: usize, b: usize, h: usize },
    #[error("source {kind} expects {expected} modes, got {got}")]
    SourceModes { kind: &'static str, expected: usize, got: usize },
    #[error("step {step} ({what}) has zero probability")]
    ZeroProbability { step: usize, what: String },
    #[error("rz rotation needs an angle")]
    MissingAngle,
    #[error("outcome must be 0 or 1, got {0}")]
    Outcome(u8),
    #[error("recipe: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// `γ_± = (1 ± e^{−iγ/2})/2`, evaluated at `gamma.radians()`; the period in
/// `γ` is 4π, while exact phases are stored reduced into `[0, 2π)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SourceAmplitudes {
    pub gamma: Phase,
    pub gamma_plus: C64,
    pub gamma_minus: C64,
}

impl SourceAmplitudes {
    pub fn new(gamma: Phase) -> Self {
        let e = C64::from_polar(1.0, -gamma.radians() / 2.0);
        let one = c(1.0, 0.0);
        Self { gamma, gamma_plus: (one + e) / 2.0, gamma_minus: (one - e) / 2.0 }
    }
}

/// `γ_+|HH⟩ + γ_−|VV⟩`.
pub fn pdc_pair(gamma: Phase) -> StateVector {
    let a = SourceAmplitudes::new(gamma);
    StateVector::from_amplitudes(vec![a.gamma_plus, c(0.0, 0.0), c(0.0, 0.0), a.gamma_minus]).expect("two qubits")
}

/// `R_z^{γ/2} H` on both photons.
pub fn to_weighted_pair(s: &StateVector, gamma: Phase) -> Result<StateVector, OpticsError> {
    let u = SingleQubitUnitary::rz(Phase::Radians(gamma.radians() / 2.0)).then_after(&SingleQubitUnitary::hadamard());
    let mut out = s.clone();
    out.apply_single(0, &u)?;
    out.apply_single(1, &u)?;
    Ok(out)
}

/// Live photons, in qubit order, with the postselection probability so far.
#[derive(Clone, Debug)]
pub struct PhotonRegister {
    modes: Vec<usize>,
    state: StateVector,
    cumulative_prob: f64,
}

impl Default for PhotonRegister {
    fn default() -> Self {
        Self::new()
    }
}

impl PhotonRegister {
    pub fn new() -> Self {
        Self { modes: Vec::new(), state: StateVector::scalar(c(1.0, 0.0)), cumulative_prob: 1.0 }
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn cumulative_prob(&self) -> f64 {
        self.cumulative_prob
    }

    fn index(&self, mode: usize) -> Result<usize, OpticsError> {
        self.modes.iter().position(|&m| m == mode).ok_or(OpticsError::UnknownMode(mode))
    }

    /// Append photons in `modes` carrying `s` (qubit `i` on `modes[i]`).
    pub fn add(&mut self, modes: &[usize], s: &StateVector) -> Result<(), OpticsError> {
        for (i, &m) in modes.iter().enumerate() {
            if self.modes.contains(&m) || modes[..i].contains(&m) {
                return Err(OpticsError::DuplicateMode(m));
            }
        }
        if s.num_qubits() != modes.len() {
            return Err(QStateError::Dimension { expected: modes.len(), got: s.num_qubits() }.into());
        }
        self.state = self.state.tensor(s)?;
        self.modes.extend_from_slice(modes);
        Ok(())
    }

    pub fn rotate(&mut self, mode: usize, u: &SingleQubitUnitary) -> Result<(), OpticsError> {
        let q = self.index(mode)?;
        self.state.apply_single(q, u)?;
        Ok(())
    }

    /// Renormalize after a projection; returns the probability factor.
    fn settle(&mut self, before: f64) -> f64 {
        let after = self.state.norm_sq();
        let factor = if before == 0.0 { 0.0 } else { after / before };
        if factor > 0.0 {
            self.state = self.state.normalized();
        }
        self.cumulative_prob *= factor;
        factor
    }

    /// Parity projector on `(a, b)`, then `H` on `h_target`. Returns the
    /// probability factor (zero leaves the register unusable).
    pub fn fuse(&mut self, a: usize, b: usize, h_target: usize) -> Result<f64, OpticsError> {
        if a == b {
            return Err(OpticsError::SameMode(a));
        }
        if h_target != a && h_target != b {
            return Err(OpticsError::HTarget { a, b, h: h_target });
        }
        let (qa, qb) = (self.index(a)?, self.index(b)?);
        let before = self.state.norm_sq();
        let amps: Vec<C64> = self
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, &x)| if (i >> qa) & 1 == (i >> qb) & 1 { x } else { c(0.0, 0.0) })
            .collect();
        self.state = StateVector::from_amplitudes(amps)?;
        let factor = self.settle(before);
        if factor > 0.0 {
            self.rotate(h_target, &SingleQubitUnitary::hadamard())?;
        }
        Ok(factor)
    }

    /// Project `mode` onto `ket` and drop the photon.
    pub fn measure(&mut self, mode: usize, ket: &Ket) -> Result<f64, OpticsError> {
        let q = self.index(mode)?;
        let before = self.state.norm_sq();
        self.state = self.state.project(q, ket)?;
        self.modes.remove(q);
        Ok(self.settle(before))
    }

    /// A fresh `|+⟩` photon in a mode that was measured out.
    pub fn reset(&mut self, mode: usize) -> Result<(), OpticsError> {
        self.add(&[mode], &StateVector::product(&[ket_plus()])?)
    }

    /// The state with qubit `i` on `order[i]`; `order` must list every live mode.
    pub fn state_in_order(&self, order: &[usize]) -> Result<StateVector, OpticsError> {
        let idx = order.iter().map(|&m| self.index(m)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.state.reorder(&idx)?)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// `γ_+|HH⟩ + γ_−|VV⟩` on two modes.
    Pdc,
    /// `|+⟩` on one mode.
    Plus,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    H,
    Rz,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedBasis {
    Computational,
}

/// `"computational"` or `{"alpha": …, "tilde": bool}`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Named(NamedBasis),
    Angle {
        alpha: Phase,
        #[serde(default)]
        tilde: bool,
    },
}

impl BasisSpec {
    pub fn basis(&self) -> MeasurementBasis {
        match *self {
            Self::Named(NamedBasis::Computational) => MeasurementBasis::computational(),
            Self::Angle { alpha, tilde: false } => MeasurementBasis::plain(alpha),
            Self::Angle { alpha, tilde: true } => MeasurementBasis::tilde(alpha),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RecipeOp {
    Source {
        kind: SourceKind,
        modes: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<Phase>,
    },
    Fuse {
        modes: [usize; 2],
        h_target: usize,
    },
    Rotate {
        mode: usize,
        gate: Gate,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        angle: Option<Phase>,
    },
    Measure {
        mode: usize,
        basis: BasisSpec,
        #[serde(default)]
        outcome: u8,
    },
    Reset {
        mode: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeStep {
    #[serde(flatten)]
    pub op: RecipeOp,
    /// Snapshot name recorded after this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub fn parse_recipe(text: &str) -> Result<Vec<RecipeStep>, OpticsError> {
    Ok(serde_json::from_str(text)?)
}

pub fn six_qubit_recipe() -> Vec<RecipeStep> {
    parse_recipe(SIX_QUBIT_RECIPE).expect("built-in recipe parses")
}

impl RecipeOp {
    fn source_state(kind: SourceKind, modes: &[usize], gamma: Option<Phase>) -> Result<StateVector, OpticsError> {
        let expected = match kind {
            SourceKind::Pdc => 2,
            SourceKind::Plus => 1,
        };
        if modes.len() != expected {
            let kind = if expected == 2 { "pdc" } else { "plus" };
            return Err(OpticsError::SourceModes { kind, expected, got: modes.len() });
        }
        Ok(match kind {
            SourceKind::Pdc => pdc_pair(gamma.unwrap_or_else(Phase::zero)),
            SourceKind::Plus => StateVector::product(&[ket_plus()])?,
        })
    }

    fn unitary(gate: Gate, angle: Option<Phase>) -> Result<SingleQubitUnitary, OpticsError> {
        match gate {
            Gate::H => Ok(SingleQubitUnitary::hadamard()),
            Gate::Rz => Ok(SingleQubitUnitary::rz(angle.ok_or(OpticsError::MissingAngle)?)),
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Source { modes, .. } => format!("source {modes:?}"),
            Self::Fuse { modes, .. } => format!("fuse {modes:?}"),
            Self::Rotate { mode, .. } => format!("rotate {mode}"),
            Self::Measure { mode, outcome, .. } => format!("measure {mode} -> {outcome}"),
            Self::Reset { mode } => format!("reset {mode}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub label: String,
    pub modes: Vec<usize>,
    pub state: StateVector,
    pub cumulative_prob: f64,
}

#[derive(Clone, Debug)]
pub struct RecipeRun {
    pub register: PhotonRegister,
    pub snapshots: Vec<Snapshot>,
}

impl RecipeRun {
    pub fn snapshot(&self, label: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.label == label)
    }
}

pub fn run_recipe(steps: &[RecipeStep]) -> Result<RecipeRun, OpticsError> {
    let mut r = PhotonRegister::new();
    let mut snapshots = Vec::new();
    for (n, step) in steps.iter().enumerate() {
        let factor = match &step.op {
            RecipeOp::Source { kind, modes, gamma } => {
                r.add(modes, &RecipeOp::source_state(*kind, modes, *gamma)?)?;
                1.0
            }
            RecipeOp::Fuse { modes: [a, b], h_target } => r.fuse(*a, *b, *h_target)?,
            RecipeOp::Rotate { mode, gate, angle } => {
                r.rotate(*mode, &RecipeOp::unitary(*gate, *angle)?)?;
                1.0
            }
            RecipeOp::Measure { mode, basis, outcome } => {
                if *outcome > 1 {
                    return Err(OpticsError::Outcome(*outcome));
                }
                r.measure(*mode, &basis.basis().ket(*outcome))?
            }
            RecipeOp::Reset { mode } => {
                r.reset(*mode)?;
                1.0
            }
        };
        if factor == 0.0 {
            return Err(OpticsError::ZeroProbability { step: n, what: step.op.describe() });
        }
        if let Some(label) = &step.label {
            snapshots.push(Snapshot {
                label: label.clone(),
                modes: r.modes.clone(),
                state: r.state.clone(),
                cumulative_prob: r.cumulative_prob,
            });
        }
    }
    Ok(RecipeRun { register: r, snapshots })
}

/// Same recipe with every measurement outcome replaced, in step order.
pub fn with_outcomes(steps: &[RecipeStep], outcomes: &[u8]) -> Vec<RecipeStep> {
    let mut it = outcomes.iter();
    steps
        .iter()
        .map(|s| match &s.op {
            RecipeOp::Measure { mode, basis, .. } => RecipeStep {
                op: RecipeOp::Measure { mode: *mode, basis: *basis, outcome: *it.next().unwrap_or(&0) },
                label: s.label.clone(),
            },
            _ => s.clone(),
        })
        .collect()
}

pub fn measurement_count(steps: &[RecipeStep]) -> usize {
    steps.iter().filter(|s| matches!(s.op, RecipeOp::Measure { .. })).count()
}

pub fn coincidence_probability(steps: &[RecipeStep]) -> Result<f64, OpticsError> {
    Ok(run_recipe(steps)?.register.cumulative_prob)
}

fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    // factors[k] acts on slot k, slot 0 least significant
    factors.iter().rev().fold(DMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

fn outer(a: &Ket, b: &Ket) -> DMatrix<C64> {
    DMatrix::from_fn(2, 2, |i, j| a[i] * b[j].conj())
}

/// One-shot postselection probability: every photon gets a fixed slot, all
/// sources are prepared up front, each step is a full-space operator, and a
/// reset maps the measured photon with `|+⟩⟨k|`. Nothing is renormalized.
pub fn global_projector_probability(steps: &[RecipeStep]) -> Result<f64, OpticsError> {
    let sources: Vec<StateVector> = steps
        .iter()
        .filter_map(|s| match &s.op {
            RecipeOp::Source { kind, modes, gamma } => Some(RecipeOp::source_state(*kind, modes, *gamma)),
            _ => None,
        })
        .collect::<Result<_, _>>()?;
    let slots: usize = sources.iter().map(StateVector::num_qubits).sum();
    if slots == 0 {
        return Ok(1.0);
    }
    let mut psi = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for s in &sources {
        psi = DMatrix::from_column_slice(s.amplitudes().len(), 1, s.amplitudes()).kronecker(&psi);
    }
    let initial = psi.norm_squared();

    let id = DMatrix::<C64>::identity(2, 2);
    let on = |slot: usize, op: DMatrix<C64>| {
        let mut f = vec![id.clone(); slots];
        f[slot] = op;
        kron_all(&f)
    };
    let dense = |u: &SingleQubitUnitary| DMatrix::from_fn(2, 2, |i, j| u.matrix()[(i, j)]);
    let basis = [Ket::new(c(1.0, 0.0), c(0.0, 0.0)), Ket::new(c(0.0, 0.0), c(1.0, 0.0))];

    // live mode -> slot, and the ket each measured slot was left in
    let mut live: Vec<(usize, usize)> = Vec::new();
    let mut measured: Vec<(usize, usize, Ket)> = Vec::new();
    let mut next_slot = 0usize;
    let find = |live: &[(usize, usize)], mode: usize| live.iter().find(|(m, _)| *m == mode).map(|p| p.1).ok_or(OpticsError::UnknownMode(mode));
    for step in steps {
        match &step.op {
            RecipeOp::Source { modes, .. } => {
                for &m in modes {
                    if find(&live, m).is_ok() {
                        return Err(OpticsError::DuplicateMode(m));
                    }
                    live.push((m, next_slot));
                    next_slot += 1;
                }
            }
            RecipeOp::Rotate { mode, gate, angle } => {
                psi = on(find(&live, *mode)?, dense(&RecipeOp::unitary(*gate, *angle)?)) * psi;
            }
            RecipeOp::Fuse { modes: [a, b], h_target } => {
                let (sa, sb) = (find(&live, *a)?, find(&live, *b)?);
                if sa == sb {
                    return Err(OpticsError::SameMode(*a));
                }
                let mut proj = DMatrix::<C64>::zeros(1 << slots, 1 << slots);
                for k in &basis {
                    let mut f = vec![id.clone(); slots];
                    f[sa] = outer(k, k);
                    f[sb] = outer(k, k);
                    proj += kron_all(&f);
                }
                psi = proj * psi;
                psi = on(find(&live, *h_target)?, dense(&SingleQubitUnitary::hadamard())) * psi;
            }
            RecipeOp::Measure { mode, basis, outcome } => {
                if *outcome > 1 {
                    return Err(OpticsError::Outcome(*outcome));
                }
                let k = basis.basis().ket(*outcome);
                let s = find(&live, *mode)?;
                psi = on(s, outer(&k, &k)) * psi;
                live.retain(|(m, _)| m != mode);
                measured.push((*mode, s, k));
            }
            RecipeOp::Reset { mode } => {
                if find(&live, *mode).is_ok() {
                    return Err(OpticsError::DuplicateMode(*mode));
                }
                let i = measured.iter().rposition(|(m, _, _)| m == mode).ok_or(OpticsError::UnknownMode(*mode))?;
                let (_, s, k) = measured.remove(i);
                psi = on(s, outer(&ket_plus(), &k)) * psi;
                live.push((*mode, s));
            }
        }
    }
    Ok(psi.norm_squared() / initial)
}

/// Narrated intermediate states of the six-qubit recipe, unnormalized, with
/// qubit `i` on the `i`-th listed mode.
pub fn narrated_state(label: &str) -> Option<(Vec<usize>, StateVector)> {
    let plus = ket_equatorial(Phase::zero(), false);
    let minus = ket_equatorial(Phase::zero(), true);
    let half = ket_equatorial(Phase::pi_frac(1, 2), false);
    let neg_half = ket_equatorial(Phase::pi_frac(-1, 2), false);
    let h = Ket::new(c(1.0, 0.0), c(0.0, 0.0));
    let v = Ket::new(c(0.0, 0.0), c(1.0, 0.0));
    let prod = |ks: &[Ket]| StateVector::product(ks).expect("small product");
    let add = |a: StateVector, b: StateVector, sign: f64| {
        let amps = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y * sign).collect();
        StateVector::from_amplitudes(amps).expect("same size")
    };
    match label {
        "(i)" => Some((vec![2, 1, 6, 7], add(prod(&[plus, h, plus, plus]), prod(&[half, v, minus, half]), 1.0))),
        "(ii)" => {
            let a = add(prod(&[plus, h, h, plus, plus]), prod(&[plus, h, v, minus, plus]), 1.0);
            let b = add(prod(&[half, v, h, plus, half]), prod(&[half, v, v, minus, half]), -1.0);
            Some((vec![2, 1, 6, 4, 7], add(a, b, 1.0)))
        }
        "(iii)" => Some((vec![2, 1, 4, 7], add(prod(&[plus, h, plus, plus]), prod(&[half, v, neg_half, half]), 1.0))),
        _ => None,
    }
}
