use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::basis::MeasurementBasis;
use crate::qstate::{QStateError, SingleQubitUnitary, StateVector};

/// Largest number of measured qubits [`enumerate_branches`] accepts.
pub const MAX_MEASURED: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("vertex {0} measured twice")]
    Repeated(usize),
    #[error("vertex {vertex} not in a {num_qubits}-qubit state")]
    Vertex { vertex: usize, num_qubits: usize },
    #[error("correction on vertex {vertex} depends on vertex {depends_on}, which is not measured earlier")]
    Causality { vertex: usize, depends_on: usize },
    #[error("outcome bits do not match the pattern: {0}")]
    Outcomes(String),
    #[error("{0} measured qubits exceeds the enumeration limit {MAX_MEASURED}")]
    TooMany(usize),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// A correction absorbed into a measurement basis. With an empty
/// `condition` it always applies; otherwise it applies when the XOR of the
/// listed earlier outcomes is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction {
    pub condition: Vec<usize>,
    pub unitary: SingleQubitUnitary,
}

impl Correction {
    pub fn always(unitary: SingleQubitUnitary) -> Self {
        Self { condition: Vec::new(), unitary }
    }

    pub fn when(condition: Vec<usize>, unitary: SingleQubitUnitary) -> Self {
        Self { condition, unitary }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementStep {
    pub vertex: usize,
    pub basis: MeasurementBasis,
    /// In time order: later entries act on the qubit after earlier ones.
    pub corrections: Vec<Correction>,
}

impl MeasurementStep {
    pub fn new(vertex: usize, basis: MeasurementBasis) -> Self {
        Self { vertex, basis, corrections: Vec::new() }
    }

    pub fn with(mut self, c: Correction) -> Self {
        self.corrections.push(c);
        self
    }

    /// The basis actually measured once earlier outcomes are known.
    pub fn effective_basis(&self, outcomes: &OutcomeBits) -> MeasurementBasis {
        self.corrections
            .iter()
            .filter(|c| c.condition.is_empty() || c.condition.iter().fold(0, |acc, &v| acc ^ outcomes.bit(v)) == 1)
            .fold(self.basis.clone(), |b, c| b.absorb(&c.unitary))
    }
}

/// Ordered measurement program; order is significant.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pattern {
    pub steps: Vec<MeasurementStep>,
}

impl Pattern {
    pub fn new(steps: Vec<MeasurementStep>) -> Self {
        Self { steps }
    }

    pub fn measured(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.vertex).collect()
    }

    pub fn validate(&self, num_qubits: usize) -> Result<(), PatternError> {
        let mut seen = Vec::new();
        for step in &self.steps {
            if step.vertex >= num_qubits {
                return Err(PatternError::Vertex { vertex: step.vertex, num_qubits });
            }
            if seen.contains(&step.vertex) {
                return Err(PatternError::Repeated(step.vertex));
            }
            for c in &step.corrections {
                if let Some(&d) = c.condition.iter().find(|d| !seen.contains(*d)) {
                    return Err(PatternError::Causality { vertex: step.vertex, depends_on: d });
                }
            }
            seen.push(step.vertex);
        }
        Ok(())
    }
}

/// Measurement outcome per vertex, `s ∈ {0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutcomeBits(BTreeMap<usize, u8>);

impl OutcomeBits {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, u8)>) -> Self {
        Self(pairs.into_iter().map(|(v, s)| (v, s & 1)).collect())
    }

    /// Bit `i` of `bits` is the outcome of `vertices[i]`.
    pub fn from_index(vertices: &[usize], bits: usize) -> Self {
        Self::from_pairs(vertices.iter().enumerate().map(|(i, &v)| (v, ((bits >> i) & 1) as u8)))
    }

    pub fn get(&self, v: usize) -> Option<u8> {
        self.0.get(&v).copied()
    }

    /// Outcome of `v`, 0 if absent.
    pub fn bit(&self, v: usize) -> u8 {
        self.get(v).unwrap_or(0)
    }

    pub fn insert(&mut self, v: usize, s: u8) {
        self.0.insert(v, s & 1);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.0.iter().map(|(&v, &s)| (v, s))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn matches(&self, pattern: &Pattern) -> bool {
        let mut keys = pattern.measured();
        keys.sort_unstable();
        keys.len() == self.0.len() && keys.iter().all(|k| self.0.contains_key(k))
    }
}

#[derive(Clone, Debug)]
pub struct BranchResult {
    pub outcomes: OutcomeBits,
    /// Final `norm_sq` over initial `norm_sq`; zero-probability branches are kept.
    pub probability: f64,
    /// Unnormalized post-measurement state on the unmeasured qubits.
    pub state: StateVector,
    /// `remaining[i]` is the original qubit now at index `i`.
    pub remaining: Vec<usize>,
}

impl BranchResult {
    pub fn is_zero(&self) -> bool {
        self.probability == 0.0
    }
}

/// Project each measured qubit onto the ket for its outcome, in pattern order.
/// Unmeasured qubits keep their relative order.
pub fn run_branch(s: &StateVector, p: &Pattern, o: &OutcomeBits) -> Result<BranchResult, PatternError> {
    p.validate(s.num_qubits())?;
    if !o.matches(p) {
        return Err(PatternError::Outcomes(format!("pattern measures {:?}", p.measured())));
    }
    let initial = s.norm_sq();
    let mut state = s.clone();
    let mut remaining: Vec<usize> = (0..s.num_qubits()).collect();
    for step in &p.steps {
        let basis = step.effective_basis(o);
        let idx = remaining.iter().position(|&q| q == step.vertex).expect("validated");
        state = state.project(idx, &basis.ket(o.bit(step.vertex)))?;
        remaining.remove(idx);
    }
    let probability = if initial == 0.0 { 0.0 } else { state.norm_sq() / initial };
    Ok(BranchResult { outcomes: o.clone(), probability, state, remaining })
}

/// All `2^m` branches, in increasing outcome index (bit `i` = outcome of the
/// `i`-th pattern step).
pub fn enumerate_branches(s: &StateVector, p: &Pattern) -> Result<Vec<BranchResult>, PatternError> {
    let m = p.steps.len();
    if m > MAX_MEASURED {
        return Err(PatternError::TooMany(m));
    }
    let vertices = p.measured();
    (0..1usize << m).map(|bits| run_branch(s, p, &OutcomeBits::from_index(&vertices, bits))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphstate::WeightedGraph;
    use crate::phase::Phase;
    use crate::qstate::{c, ket_plus, MultiQubitOperator};

    fn chain(n: usize) -> WeightedGraph {
        let mut g = WeightedGraph::new(n);
        for i in 0..n - 1 {
            g.add_edge(i, i + 1, Phase::pi()).unwrap();
        }
        g
    }

    #[test]
    fn teleport_step_applies_hadamard() {
        let phi = StateVector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let s = chain(2).build_state_with(&phi, &[0]).unwrap();
        let p = Pattern::new(vec![MeasurementStep::new(0, MeasurementBasis::plain(Phase::zero()))]);
        let mut h_phi = phi.clone();
        h_phi.apply_single(0, &SingleQubitUnitary::hadamard()).unwrap();

        let b0 = run_branch(&s, &p, &OutcomeBits::from_pairs([(0, 0)])).unwrap();
        assert!((b0.probability - 0.5).abs() < 1e-12);
        assert_eq!(b0.remaining, vec![1]);
        assert!(b0.state.fidelity(&h_phi).unwrap() > 1.0 - 1e-12);

        let b1 = run_branch(&s, &p, &OutcomeBits::from_pairs([(0, 1)])).unwrap();
        assert!((b1.probability - 0.5).abs() < 1e-12);
        let mut x_h_phi = h_phi.clone();
        x_h_phi.apply_single(0, &SingleQubitUnitary::pauli_x()).unwrap();
        // amplitude-level equality, not only up to phase
        let scaled: Vec<_> = b1.state.amplitudes().iter().map(|a| a * std::f64::consts::SQRT_2).collect();
        for (a, b) in scaled.iter().zip(x_h_phi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn enumeration_of_plus_in_x_basis() {
        let s = StateVector::product(&[ket_plus()]).unwrap();
        let p = Pattern::new(vec![MeasurementStep::new(0, MeasurementBasis::plain(Phase::zero()))]);
        let br = enumerate_branches(&s, &p).unwrap();
        assert_eq!(br.len(), 2);
        assert!((br[0].probability - 1.0).abs() < 1e-12);
        assert!(br[1].probability.abs() < 1e-12);
        assert!(br[1].is_zero() || br[1].probability < 1e-30);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut g = chain(4);
        g.add_edge(0, 3, Phase::pi_frac(1, 3)).unwrap();
        let s = g.build_state().unwrap();
        let p = Pattern::new(vec![
            MeasurementStep::new(1, MeasurementBasis::plain(Phase::pi_frac(1, 4))),
            MeasurementStep::new(2, MeasurementBasis::tilde(Phase::Radians(0.4)))
                .with(Correction::when(vec![1], SingleQubitUnitary::pauli_x())),
        ]);
        let total: f64 = enumerate_branches(&s, &p).unwrap().iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn computational_order_invariance() {
        let mut g = chain(4);
        g.add_edge(0, 2, Phase::pi_frac(1, 2)).unwrap();
        let s = g.build_state().unwrap();
        let z = MeasurementBasis::computational();
        let p1 = Pattern::new(vec![MeasurementStep::new(1, z.clone()), MeasurementStep::new(3, z.clone())]);
        let p2 = Pattern::new(vec![MeasurementStep::new(3, z.clone()), MeasurementStep::new(1, z)]);
        for bits in 0..4 {
            let o = OutcomeBits::from_index(&[1, 3], bits);
            let a = run_branch(&s, &p1, &o).unwrap();
            let b = run_branch(&s, &p2, &o).unwrap();
            assert!((a.probability - b.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn absorption_equals_explicit_rotation() {
        let mut g = chain(3);
        g.add_edge(0, 2, Phase::pi_frac(1, 2)).unwrap();
        let s = g.build_state().unwrap();
        let r = SingleQubitUnitary::rz(Phase::pi_frac(-1, 2)).then_after(&SingleQubitUnitary::pauli_x());
        let base = MeasurementBasis::tilde(Phase::pi_frac(1, 4));
        let absorbed = Pattern::new(vec![MeasurementStep::new(1, base.absorb(&r))]);
        let plain = Pattern::new(vec![MeasurementStep::new(1, base)]);
        let mut rotated = s.clone();
        rotated.apply_single(1, &r).unwrap();
        for bit in 0..2 {
            let o = OutcomeBits::from_pairs([(1, bit)]);
            let a = run_branch(&s, &absorbed, &o).unwrap();
            let b = run_branch(&rotated, &plain, &o).unwrap();
            for (x, y) in a.state.amplitudes().iter().zip(b.state.amplitudes()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gadget_performs_weighted_cz() {
        // Q1 on 0, Q2 on 2, centre 1 measured in B̃(θ/2)
        let theta = Phase::Radians(1.1);
        let input = StateVector::from_amplitudes(vec![c(0.5, 0.1), c(0.2, -0.4), c(-0.3, 0.3), c(0.1, 0.58)]).unwrap().normalized();
        let s = chain(3).build_state_with(&input, &[0, 2]).unwrap();
        let p = Pattern::new(vec![MeasurementStep::new(1, MeasurementBasis::tilde(theta / 2))]);
        for bit in 0..2u8 {
            let b = run_branch(&s, &p, &OutcomeBits::from_pairs([(1, bit)])).unwrap();
            let mut want = input.clone();
            want.apply_operator(&MultiQubitOperator::cz_theta(0, 1, theta)).unwrap();
            for q in 0..2 {
                want.apply_single(q, &SingleQubitUnitary::rz(-(theta / 2))).unwrap();
                if bit == 1 {
                    want.apply_single(q, &SingleQubitUnitary::pauli_z()).unwrap();
                }
            }
            assert!(b.state.fidelity(&want).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn validation_errors() {
        let s = StateVector::plus_state(2).unwrap();
        let z = MeasurementBasis::computational();
        let twice = Pattern::new(vec![MeasurementStep::new(0, z.clone()), MeasurementStep::new(0, z.clone())]);
        assert_eq!(twice.validate(2), Err(PatternError::Repeated(0)));
        let acausal = Pattern::new(vec![MeasurementStep::new(0, z.clone()).with(Correction::when(vec![1], SingleQubitUnitary::pauli_x()))]);
        assert!(matches!(acausal.validate(2), Err(PatternError::Causality { .. })));
        let out = Pattern::new(vec![MeasurementStep::new(5, z.clone())]);
        assert!(matches!(run_branch(&s, &out, &OutcomeBits::from_pairs([(5, 0)])), Err(PatternError::Vertex { .. })));
        let p = Pattern::new(vec![MeasurementStep::new(0, z)]);
        assert!(matches!(run_branch(&s, &p, &OutcomeBits::from_pairs([(1, 0)])), Err(PatternError::Outcomes(_))));
    }
}
