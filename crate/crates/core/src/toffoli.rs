//! Six-, seven- and eight-qubit weighted graph resources for a Toffoli gate
//! (and its `CCZ^θ` generalization): builders, adaptive measurement programs,
//! predicted byproduct frames, and success-probability analysis.
//!
//! Vertices are addressed by their conventional labels `1..=8`; internally a
//! label `k` is vertex `k - 1`. Logical wires are ordered `(c1, c2, t)`, with
//! `c1` as qubit 0 of every 3-qubit operator.
//!
//! | label | role                   |
//! |-------|------------------------|
//! | 1     | `c2` in/out            |
//! | 2     | `t` in                 |
//! | 3, 4  | target path            |
//! | 5     | `t` out                |
//! | 6     | `c1` in/out            |
//! | 7, 8  | `CZ^θ` gadget centres  |
//!
//! | edge  | weight | variants           |
//! |-------|--------|--------------------|
//! | 2–3   | π      | all                |
//! | 3–4   | π      | all                |
//! | 4–5   | π      | all                |
//! | 3–6   | π      | all                |
//! | 5–6   | π      | all                |
//! | 1–2   | +θ/2   | all                |
//! | 1–4   | −θ/2   | six                |
//! | 1–7   | π      | seven, eight       |
//! | 4–7   | π      | seven, eight       |
//! | 1–6   | +θ/2   | six, seven         |
//! | 1–8   | π      | eight              |
//! | 6–8   | π      | eight              |

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstate::{GraphError, InputAssignment, Role, WeightedGraph};
use crate::mbqc::{
    run_branch, ByproductOperator, Correction, FrameError, LocalWord, MeasurementBasis, MeasurementStep,
    NonlocalFactor, OutcomeBits, Pattern, PatternError,
};
use crate::phase::Phase;
use crate::qstate::{MultiQubitOperator, QStateError, SingleQubitUnitary, StateVector};
use crate::verify::{self, LocalityVerdict, VerifyError};

/// Branch-operator comparisons.
pub const TOLERANCE: f64 = 1e-10;

pub const fn vertex(label: usize) -> usize {
    label - 1
}

pub const C1: usize = vertex(6);
pub const C2: usize = vertex(1);
pub const T_IN: usize = vertex(2);
pub const T_OUT: usize = vertex(5);
/// Qubit `i` of a logical 3-qubit state sits on `INPUT_VERTICES[i]`.
pub const INPUT_VERTICES: [usize; 3] = [C1, C2, T_IN];
pub const OUTPUT_VERTICES: [usize; 3] = [C1, C2, T_OUT];
pub const WIRE_LABELS: [&str; 3] = ["c1", "c2", "t"];

#[derive(Debug, Error)]
pub enum ToffoliError {
    #[error("s^x = {0} cannot be passed through this resource")]
    Unrecoverable(String),
    #[error("linking byproducts with s^x != 000 are only supported at theta = pi")]
    LinkingNeedsPi,
    #[error("theta must be an exact rational multiple of pi")]
    InexactTheta,
    #[error("branch {0} has zero probability")]
    ZeroProbability(String),
    #[error("bad outcome string {0:?}: expected {1} bits")]
    Outcomes(String, usize),
    #[error("bad linking bits {0:?}: expected three bits c1 c2 t")]
    LinkingBits(String),
    #[error("input must be a 3-qubit normalized state")]
    Input,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    State(#[from] QStateError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantKind {
    Six,
    Seven,
    Eight,
}

impl VariantKind {
    pub const ALL: [VariantKind; 3] = [Self::Six, Self::Seven, Self::Eight];

    pub fn vertex_count(self) -> usize {
        match self {
            Self::Six => 6,
            Self::Seven => 7,
            Self::Eight => 8,
        }
    }

    /// Measured labels in ascending order; outcome strings follow this order.
    pub fn measured_labels(self) -> &'static [usize] {
        match self {
            Self::Six => &[2, 3, 4],
            Self::Seven => &[2, 3, 4, 7],
            Self::Eight => &[2, 3, 4, 7, 8],
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Six => "six",
            Self::Seven => "seven",
            Self::Eight => "eight",
        })
    }
}

impl FromStr for VariantKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "six" | "6" => Ok(Self::Six),
            "seven" | "7" => Ok(Self::Seven),
            "eight" | "8" => Ok(Self::Eight),
            _ => Err(format!("unknown variant {s:?} (six, seven, eight)")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ResourceVariant {
    pub kind: VariantKind,
    pub theta: Phase,
}

impl ResourceVariant {
    pub fn new(kind: VariantKind) -> Self {
        Self { kind, theta: Phase::pi() }
    }

    pub fn with_theta(kind: VariantKind, theta: Phase) -> Result<Self, ToffoliError> {
        if !theta.is_exact() {
            return Err(ToffoliError::InexactTheta);
        }
        Ok(Self { kind, theta })
    }

    fn is_pi(&self) -> bool {
        self.theta == Phase::pi()
    }

    /// Parse `"010"`-style outcomes in ascending measured-label order.
    pub fn outcomes_from_bits(&self, bits: &str) -> Result<OutcomeBits, ToffoliError> {
        let labels = self.kind.measured_labels();
        let parsed = parse_bits(bits, labels.len()).ok_or_else(|| ToffoliError::Outcomes(bits.into(), labels.len()))?;
        Ok(OutcomeBits::from_pairs(labels.iter().zip(parsed).map(|(&l, s)| (vertex(l), s))))
    }

    /// Outcome bits in ascending measured-label order.
    pub fn outcome_string(&self, o: &OutcomeBits) -> String {
        self.kind.measured_labels().iter().map(|&l| if o.bit(vertex(l)) == 1 { '1' } else { '0' }).collect()
    }

    pub fn all_outcomes(&self) -> Vec<OutcomeBits> {
        let labels = self.kind.measured_labels();
        (0..1usize << labels.len())
            .map(|idx| {
                // leftmost character is the most significant bit
                let m = labels.len();
                OutcomeBits::from_pairs(labels.iter().enumerate().map(|(i, &l)| (vertex(l), ((idx >> (m - 1 - i)) & 1) as u8)))
            })
            .collect()
    }
}

fn parse_bits(s: &str, n: usize) -> Option<Vec<u8>> {
    if s.len() != n {
        return None;
    }
    s.chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

/// Pauli corruption `X^{sx} Z^{sz}` on each logical input, ordered `(c1, c2, t)`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct LinkingByproducts {
    pub sx: [u8; 3],
    pub sz: [u8; 3],
}

impl LinkingByproducts {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(sx: [u8; 3], sz: [u8; 3]) -> Self {
        Self { sx: sx.map(|b| b & 1), sz: sz.map(|b| b & 1) }
    }

    pub fn from_bits(sx: &str, sz: &str) -> Result<Self, ToffoliError> {
        let p = |s: &str| -> Result<[u8; 3], ToffoliError> {
            let v = parse_bits(s, 3).ok_or_else(|| ToffoliError::LinkingBits(s.into()))?;
            Ok([v[0], v[1], v[2]])
        };
        Ok(Self::new(p(sx)?, p(sz)?))
    }

    /// All 64 combinations, `sx` outer.
    pub fn all() -> impl Iterator<Item = Self> {
        (0..64u8).map(|k| {
            let bits = |b: u8| [(b >> 2) & 1, (b >> 1) & 1, b & 1];
            Self { sx: bits(k >> 3), sz: bits(k & 7) }
        })
    }

    pub fn sx_string(&self) -> String {
        self.sx.iter().map(|b| b.to_string()).collect()
    }

    pub fn sz_string(&self) -> String {
        self.sz.iter().map(|b| b.to_string()).collect()
    }

    /// `s^x ∈ {000, 010, 101, 111}`, the cases passable on six and seven.
    pub fn sx_recoverable(&self) -> bool {
        self.sx[0] == self.sx[2]
    }

    pub fn operator(&self) -> MultiQubitOperator {
        let ops: Vec<_> = (0..3).map(|w| LocalWord::pauli(self.sx[w], 0).unitary().then_after(&LocalWord::pauli(0, self.sz[w]).unitary())).collect();
        MultiQubitOperator::local(&ops)
    }

    /// `σ_z` on the inputs leaves the gate as `σ_z` on the controls and
    /// `σ_x` on the target.
    pub fn passthrough(&self) -> ByproductOperator {
        ByproductOperator::from_words(vec![
            LocalWord::pauli(0, self.sz[0]),
            LocalWord::pauli(0, self.sz[1]),
            LocalWord::pauli(self.sz[2], 0),
        ])
    }
}

impl fmt::Display for LinkingByproducts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sx={} sz={}", self.sx_string(), self.sz_string())
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetEncoding {
    /// Physical target input is `H|t⟩`; the net gate is Toffoli at `θ = π`.
    #[default]
    Hadamard,
    /// Logical input placed as is; the net gate is `H_t · CCZ^θ`.
    Raw,
}

pub fn build_resource(v: ResourceVariant) -> WeightedGraph {
    let half = v.theta / 2;
    let mut g = WeightedGraph::new(v.kind.vertex_count());
    let mut edge = |a: usize, b: usize, w: Phase| g.add_edge(vertex(a), vertex(b), w).expect("static wiring is valid");
    for (a, b) in [(2, 3), (3, 4), (4, 5), (3, 6), (5, 6)] {
        edge(a, b, Phase::pi());
    }
    edge(1, 2, half);
    match v.kind {
        VariantKind::Six => edge(1, 4, -half),
        _ => {
            edge(1, 7, Phase::pi());
            edge(4, 7, Phase::pi());
        }
    }
    match v.kind {
        VariantKind::Eight => {
            edge(1, 8, Phase::pi());
            edge(6, 8, Phase::pi());
        }
        _ => edge(1, 6, half),
    }
    for (vx, role) in [(C1, Role::C1), (C2, Role::C2), (T_IN, Role::T)] {
        g.set_input(vx, InputAssignment::new(role)).expect("input vertex exists");
    }
    g
}

fn h_on_t() -> MultiQubitOperator {
    MultiQubitOperator::local(&[SingleQubitUnitary::identity(), SingleQubitUnitary::identity(), SingleQubitUnitary::hadamard()])
}

/// Time-ordered `CZ^{θ/2}_{c2t}, H_t, CZ_{c1t}, H_t, CZ^{−θ/2}_{c2t}, H_t,
/// CZ_{c1t}, CZ^{θ/2}_{c1c2}`; equals `H_t · CCZ^θ`.
pub fn target_unitary(theta: Phase) -> MultiQubitOperator {
    let half = theta / 2;
    let h = h_on_t();
    let seq = [
        MultiQubitOperator::cz_theta(1, 2, half),
        h.clone(),
        MultiQubitOperator::cz_theta(0, 2, Phase::pi()),
        h.clone(),
        MultiQubitOperator::cz_theta(1, 2, -half),
        h,
        MultiQubitOperator::cz_theta(0, 2, Phase::pi()),
        MultiQubitOperator::cz_theta(0, 1, half),
    ];
    let mut u = MultiQubitOperator::identity(3);
    for g in &seq {
        u = g.compose(&u, 3).expect("3-wire gates");
    }
    u
}

/// The logical gate realized on clean inputs under an encoding.
pub fn logical_gate(theta: Phase, encoding: TargetEncoding) -> MultiQubitOperator {
    let u = target_unitary(theta);
    match encoding {
        TargetEncoding::Hadamard => u.compose(&h_on_t(), 3).expect("3-wire gates"),
        TargetEncoding::Raw => u,
    }
}

fn rz(num: i64, den: i64) -> SingleQubitUnitary {
    SingleQubitUnitary::rz(Phase::pi_frac(num, den))
}

/// Append corrections to the step for `label`.
fn correct(steps: &mut [MeasurementStep], label: usize, c: Correction) {
    let s = steps.iter_mut().find(|s| s.vertex == vertex(label)).expect("measured vertex");
    s.corrections.push(c);
}

/// Adaptive measurement program with `Σ_L` passed through by basis absorption.
pub fn measurement_program(v: ResourceVariant, l: LinkingByproducts) -> Result<Pattern, ToffoliError> {
    if v.kind != VariantKind::Eight && !l.sx_recoverable() {
        return Err(ToffoliError::Unrecoverable(l.sx_string()));
    }
    if l.sx != [0; 3] && !v.is_pi() {
        return Err(ToffoliError::LinkingNeedsPi);
    }
    let [i, j, k] = l.sx.map(|b| b == 1);
    let quarter = v.theta / 4;
    let x = SingleQubitUnitary::pauli_x;
    let z = SingleQubitUnitary::pauli_z;
    let always = Correction::always;
    let on_s3 = |u: SingleQubitUnitary| Correction::when(vec![vertex(3)], u);
    let step = |label: usize, b: MeasurementBasis| MeasurementStep::new(vertex(label), b);

    let mut steps;
    match v.kind {
        VariantKind::Six => {
            steps = vec![
                step(2, MeasurementBasis::plain(Phase::zero())),
                step(3, MeasurementBasis::plain(Phase::zero())),
                step(4, MeasurementBasis::plain(Phase::zero())),
            ];
            if j {
                correct(&mut steps, 2, always(rz(-1, 2)));
                correct(&mut steps, 4, always(rz(1, 2)));
            }
            if i {
                correct(&mut steps, 3, always(z()));
            }
        }
        VariantKind::Seven | VariantKind::Eight => {
            steps = vec![
                step(3, MeasurementBasis::plain(Phase::zero())),
                step(2, MeasurementBasis::plain(Phase::zero())),
                step(4, MeasurementBasis::plain(quarter)),
                step(7, MeasurementBasis::tilde(-quarter)),
            ];
            if v.kind == VariantKind::Eight {
                steps.push(step(8, MeasurementBasis::tilde(quarter)));
            }
            let r_s3 = |steps: &mut Vec<MeasurementStep>| {
                correct(steps, 4, on_s3(x()));
                correct(steps, 7, on_s3(z()));
            };
            if v.kind == VariantKind::Seven {
                r_s3(&mut steps);
                if j {
                    correct(&mut steps, 2, always(rz(-1, 2)));
                    correct(&mut steps, 4, always(x()));
                }
                if i {
                    correct(&mut steps, 4, always(x()));
                    correct(&mut steps, 7, always(z()));
                }
            } else {
                // R_ijk = [(σ_z)_3 ⊗ (σ_z)_8]^i [(R_z^{−π/2})_2 ⊗ (σ_x)_4]^j [(σ_z)_8]^k, then R
                if k {
                    correct(&mut steps, 8, always(z()));
                }
                if j {
                    correct(&mut steps, 2, always(rz(-1, 2)));
                    correct(&mut steps, 4, always(x()));
                }
                if i {
                    correct(&mut steps, 3, always(z()));
                    correct(&mut steps, 8, always(z()));
                }
                r_s3(&mut steps);
            }
        }
    }
    Ok(Pattern::new(steps))
}

/// The program with no linking adaptation.
pub fn base_program(v: ResourceVariant) -> Pattern {
    measurement_program(v, LinkingByproducts::none()).expect("no linking is always valid")
}

/// Product of words in left-to-right order, per wire, with the commutation
/// phases collected into the frame's global phase.
fn frame(c1: &[LocalWord], c2: &[LocalWord], t: &[LocalWord]) -> ByproductOperator {
    let mut f = ByproductOperator::identity(3);
    for (w, words) in [c1, c2, t].into_iter().enumerate() {
        for &word in words {
            f = f.compose(&ByproductOperator::on_wire(3, w, word)).expect("local frames compose");
        }
    }
    f
}

fn pow(w: LocalWord, e: u8) -> LocalWord {
    w.pow(e)
}

/// The byproduct frame `Σ` with `output = Σ · gate · (clean input)`.
pub fn predicted_sigma(v: ResourceVariant, o: &OutcomeBits, l: LinkingByproducts) -> Result<ByproductOperator, ToffoliError> {
    // validates the combination
    measurement_program(v, l)?;
    let s = |label: usize| o.bit(vertex(label));
    let (x, z) = (LocalWord::x(), LocalWord::z());
    let r = |p: Phase| LocalWord::rz(p);
    let [i, j, k] = l.sx;
    let quarter = v.theta / 4;
    let half_pi = Phase::pi_frac(1, 2);

    let sigma = match v.kind {
        VariantKind::Six => {
            let (s2, s3, s4) = (s(2), s(3), s(4));
            let t = [pow(x, s2 ^ s4)];
            let mut f = match (i, j) {
                (0, 0) => frame(&[pow(z, s4)], &[], &t),
                (0, 1) => frame(&[r(half_pi), pow(z, s4)], &[x], &t),
                (1, 0) => frame(&[x, pow(z, s4)], &[r(half_pi)], &t),
                _ => frame(&[x, r(-half_pi), pow(z, s4)], &[x, r(-half_pi)], &t),
            };
            if s3 == 1 {
                let sign = if i ^ j == 1 { -1 } else { 1 };
                let extra = ByproductOperator::from_words(vec![LocalWord::identity(), r(-(v.theta / 2) * sign), LocalWord::identity()]);
                f = f.compose(&extra)?.compose(&ByproductOperator::on_wire(3, 2, z))?;
            }
            f = f.compose(&l.passthrough())?;
            if s3 == 1 {
                f = f.with_nonlocal(NonlocalFactor::FlippedPhase { theta: v.theta });
            }
            f
        }
        VariantKind::Seven => {
            let (s2, s3, s4, s7) = (s(2), s(3), s(4), s(7));
            let m = frame(&[pow(z, s4 ^ s7)], &[pow(z, s7), r(quarter)], &[pow(z, s3), pow(x, s2 ^ s4 ^ s7)]);
            let f = match (i, j) {
                (0, 0) => frame(&[], &[], &[]),
                (0, 1) => frame(&[r(half_pi)], &[x, r(-half_pi)], &[]),
                (1, 0) => frame(&[x], &[r(half_pi)], &[z]),
                _ => frame(&[x, r(-half_pi)], &[x, z], &[z]),
            };
            f.compose(&m)?.compose(&l.passthrough())?
        }
        VariantKind::Eight => {
            let (s2, s3, s4, s7, s8) = (s(2), s(3), s(4), s(7), s(8));
            let m = frame(&[pow(z, s4 ^ s7 ^ s8), r(-quarter)], &[pow(z, s7 ^ s8)], &[pow(z, s3), pow(x, s2 ^ s4 ^ s7)]);
            let terms = [
                (i, frame(&[x], &[], &[z])),
                (j, frame(&[r(half_pi)], &[x], &[])),
                (k, frame(&[r(half_pi)], &[r(half_pi)], &[z])),
                (j & k, frame(&[z], &[z], &[])),
            ];
            let mut f = ByproductOperator::identity(3);
            for (e, g) in terms {
                if e == 1 {
                    f = f.compose(&g)?;
                }
            }
            f.compose(&m)?.compose(&l.passthrough())?
        }
    };
    Ok(sigma)
}

fn check_input(input: &StateVector) -> Result<(), ToffoliError> {
    if input.num_qubits() != 3 || (input.norm_sq() - 1.0).abs() > 1e-9 {
        return Err(ToffoliError::Input);
    }
    Ok(())
}

/// Physical input after encoding and linking corruption.
fn physical_input(input: &StateVector, l: LinkingByproducts, encoding: TargetEncoding) -> Result<StateVector, ToffoliError> {
    let mut phys = input.clone();
    if encoding == TargetEncoding::Hadamard {
        phys.apply_single(2, &SingleQubitUnitary::hadamard())?;
    }
    phys.apply_operator(&l.operator())?;
    Ok(phys)
}

/// Unnormalized 3-qubit output on `(c1, c2, t_out)`.
fn output_state(resource: &StateVector, p: &Pattern, o: &OutcomeBits) -> Result<(StateVector, f64), ToffoliError> {
    let br = run_branch(resource, p, o)?;
    let order: Vec<usize> = OUTPUT_VERTICES
        .iter()
        .map(|v| br.remaining.iter().position(|r| r == v).expect("outputs are never measured"))
        .collect();
    Ok((br.state.reorder(&order)?, br.probability))
}

#[derive(Clone, Debug)]
pub struct GateRun {
    pub variant: ResourceVariant,
    pub linking: LinkingByproducts,
    pub outcomes: OutcomeBits,
    pub sigma: ByproductOperator,
    pub success: bool,
    pub probability: f64,
    /// Normalized output on `(c1, c2, t)`.
    pub output: StateVector,
    /// `Σ · gate · input`.
    pub expected: StateVector,
    pub fidelity: f64,
}

pub fn run_gate(
    v: ResourceVariant,
    input: &StateVector,
    l: LinkingByproducts,
    o: &OutcomeBits,
    encoding: TargetEncoding,
) -> Result<GateRun, ToffoliError> {
    check_input(input)?;
    let p = measurement_program(v, l)?;
    let g = build_resource(v);
    let resource = g.build_state_with(&physical_input(input, l, encoding)?, &INPUT_VERTICES)?;
    let (out, probability) = output_state(&resource, &p, o)?;
    if probability < 1e-14 {
        return Err(ToffoliError::ZeroProbability(v.outcome_string(o)));
    }
    let sigma = predicted_sigma(v, o, l)?;
    let mut expected = input.clone();
    expected.apply_operator(&logical_gate(v.theta, encoding))?;
    expected.apply_operator(&sigma.to_operator())?;
    let output = out.normalized();
    let fidelity = output.fidelity(&expected)?;
    Ok(GateRun { variant: v, linking: l, outcomes: o.clone(), success: sigma.is_local(), sigma, probability, output, expected, fidelity })
}

/// Branch operator on clean logical inputs (unnormalized), one per outcome.
pub fn branch_operators(
    v: ResourceVariant,
    p: &Pattern,
    l: LinkingByproducts,
    encoding: TargetEncoding,
) -> Result<Vec<(OutcomeBits, MultiQubitOperator)>, ToffoliError> {
    let g = build_resource(v);
    let outcomes = v.all_outcomes();
    let mut cols = vec![DMatrix::<C64>::zeros(8, 8); outcomes.len()];
    for j in 0..8 {
        let basis = StateVector::basis_state(3, j)?;
        let resource = g.build_state_with(&physical_input(&basis, l, encoding)?, &INPUT_VERTICES)?;
        for (m, o) in cols.iter_mut().zip(&outcomes) {
            let (out, _) = output_state(&resource, p, o)?;
            for (r, a) in out.amplitudes().iter().enumerate() {
                m[(r, j)] = *a;
            }
        }
    }
    outcomes
        .into_iter()
        .zip(cols)
        .map(|(o, m)| Ok((o, MultiQubitOperator::on_wires(m)?)))
        .collect()
}

/// `tr(B†B)/d`: the branch probability for a maximally mixed input.
pub fn branch_probability(b: &MultiQubitOperator) -> f64 {
    b.matrix().norm_squared() / b.matrix().nrows() as f64
}

/// `B/√p · gate†`; `None` for a zero-probability branch.
pub fn residual(b: &MultiQubitOperator, gate: &MultiQubitOperator) -> Option<MultiQubitOperator> {
    let p = branch_probability(b);
    if p < 1e-14 {
        return None;
    }
    let m = b.matrix() * gate.matrix().adjoint() / C64::new(p.sqrt(), 0.0);
    Some(MultiQubitOperator::on_wires(m).expect("8x8"))
}

/// Whether `B†B ∝ I`, i.e. the branch probability is input-independent.
pub fn is_uniform(b: &MultiQubitOperator) -> bool {
    let p = branch_probability(b);
    let g = b.matrix().adjoint() * b.matrix() - DMatrix::<C64>::identity(8, 8) * C64::new(p, 0.0);
    g.iter().all(|z| z.norm() < 1e-12)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkingModel {
    None,
    Uniform,
}

impl FromStr for LinkingModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "uniform" => Ok(Self::Uniform),
            _ => Err(format!("unknown linking model {s:?} (none, uniform)")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchRecord {
    pub sx: String,
    pub sz: String,
    pub outcomes: String,
    /// Weight of this linking case times the branch probability.
    pub weight: f64,
    pub probability: f64,
    pub uniform: bool,
    /// Measured with the linking-adapted program (else the base program).
    pub adapted: bool,
    pub local: bool,
    pub schmidt_second: [f64; 3],
    pub predicted: Option<String>,
    pub predicted_local: Option<bool>,
    pub sigma_distance: Option<f64>,
    pub sigma_fidelity: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactProbability {
    pub num: i64,
    pub den: i64,
}

impl ExactProbability {
    pub fn ratio(&self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuccessReport {
    pub variant: VariantKind,
    pub theta: Phase,
    pub linking_model: LinkingModel,
    pub success_probability: f64,
    /// Present when every branch probability is verified to be `2^{-m}`.
    pub exact: Option<ExactProbability>,
    /// Every adapted branch matches its predicted frame to tolerance.
    pub predictions_match: bool,
    pub min_sigma_fidelity: f64,
    pub branches: Vec<BranchRecord>,
}

fn second_values(v: &LocalityVerdict) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, sv) in out.iter_mut().zip(&v.schmidt_singular_values) {
        *o = if sv[0] > 0.0 { sv[1] / sv[0] } else { 0.0 };
    }
    out
}

pub fn success_probability(v: ResourceVariant, model: LinkingModel) -> Result<SuccessReport, ToffoliError> {
    let cases: Vec<LinkingByproducts> = match model {
        LinkingModel::None => vec![LinkingByproducts::none()],
        LinkingModel::Uniform => LinkingByproducts::all().collect(),
    };
    let n_cases = cases.len();
    let m = v.kind.measured_labels().len();
    let branch_ratio = Ratio::new(1i64, (n_cases as i64) << m);

    let mut branches = Vec::new();
    let mut total = 0.0;
    let mut exact = Ratio::<i64>::zero();
    let mut all_exact = true;
    let mut predictions_match = true;
    let mut min_fid: f64 = 1.0;

    for l in cases {
        for mut b in enumerate_branches(v, l)? {
            b.weight /= n_cases as f64;
            all_exact &= b.uniform && (b.probability - 1.0 / (1u64 << m) as f64).abs() < 1e-12;
            if b.local {
                total += b.weight;
                exact += branch_ratio;
            }
            if let (Some(d), Some(pl), Some(f)) = (b.sigma_distance, b.predicted_local, b.sigma_fidelity) {
                predictions_match &= d <= TOLERANCE && pl == b.local;
                min_fid = min_fid.min(f);
            }
            branches.push(b);
        }
    }
    Ok(SuccessReport {
        variant: v.kind,
        theta: v.theta,
        linking_model: model,
        success_probability: total,
        exact: all_exact.then(|| ExactProbability { num: *exact.numer(), den: *exact.denom() }),
        predictions_match,
        min_sigma_fidelity: min_fid,
        branches,
    })
}

/// Every outcome branch for one linking case, with `weight` equal to the
/// branch probability. Unrecoverable cases run the base program and carry no
/// prediction.
pub fn enumerate_branches(v: ResourceVariant, l: LinkingByproducts) -> Result<Vec<BranchRecord>, ToffoliError> {
    let gate = logical_gate(v.theta, TargetEncoding::Hadamard);
    let (p, adapted) = match measurement_program(v, l) {
        Ok(p) => (p, true),
        Err(ToffoliError::Unrecoverable(_) | ToffoliError::LinkingNeedsPi) => (base_program(v), false),
        Err(e) => return Err(e),
    };
    let mut out = Vec::new();
    for (o, b) in branch_operators(v, &p, l, TargetEncoding::Hadamard)? {
        let prob = branch_probability(&b);
        let mut rec = BranchRecord {
            sx: l.sx_string(),
            sz: l.sz_string(),
            outcomes: v.outcome_string(&o),
            weight: 0.0,
            probability: prob,
            uniform: is_uniform(&b),
            adapted,
            local: false,
            schmidt_second: [0.0; 3],
            predicted: None,
            predicted_local: None,
            sigma_distance: None,
            sigma_fidelity: None,
        };
        let Some(res) = residual(&b, &gate) else {
            rec.probability = 0.0;
            out.push(rec);
            continue;
        };
        let verdict = verify::is_local(&res, 3)?;
        rec.weight = prob;
        rec.local = verdict.is_local;
        rec.schmidt_second = second_values(&verdict);
        if adapted {
            let sigma = predicted_sigma(v, &o, l)?;
            let op = sigma.to_operator();
            rec.sigma_distance = Some(verify::phase_distance(&res, &op)?);
            rec.sigma_fidelity = Some(verify::process_fidelity(&op, &res)?);
            rec.predicted = Some(sigma.describe(&WIRE_LABELS));
            rec.predicted_local = Some(sigma.is_local());
        }
        out.push(rec);
    }
    Ok(out)
}

/// Signs of the three weighted gates of the six-qubit circuit, in time
/// order `(c2t, c2t, c1c2)`, after `X` byproducts `sx` are pushed through it.
/// A gate is flipped when exactly one of its wires carries `X`; a `σ_z`
/// absorbed on vertex 3 inserts an `X_t` just before the second gate.
pub fn induced_weighted_signs(sx: [u8; 3], z_on_3: bool) -> [i8; 3] {
    let [x1, x2, xt] = sx.map(|b| b & 1);
    let base = [1i8, -1, 1];
    let f1 = x2 ^ xt;
    // H, CZ_{c1t}, H: X_t returns as X_t, X_{c1} adds another X_t
    let xt2 = xt ^ x1 ^ u8::from(z_on_3);
    let f2 = x2 ^ xt2;
    let f3 = x1 ^ x2;
    let flip = |s: i8, f: u8| if f == 1 { -s } else { s };
    [flip(base[0], f1), flip(base[1], f2), flip(base[2], f3)]
}

/// Signs the six-qubit program actually induces for `sx`.
pub fn program_weighted_signs(l: LinkingByproducts) -> [i8; 3] {
    let z = SingleQubitUnitary::pauli_z();
    let z_on_3 = measurement_program(ResourceVariant::new(VariantKind::Six), l)
        .map(|p| {
            p.steps
                .iter()
                .filter(|s| s.vertex == vertex(3))
                .flat_map(|s| &s.corrections)
                .any(|c| c.condition.is_empty() && c.unitary == z)
        })
        .unwrap_or(false);
    induced_weighted_signs(l.sx, z_on_3)
}

pub fn signs_alternate(s: [i8; 3]) -> bool {
    s[1] == -s[0] && s[1] == -s[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::equal_up_to_phase;
    use num_traits::Signed;

    fn six() -> ResourceVariant {
        ResourceVariant::new(VariantKind::Six)
    }

    #[test]
    fn resource_shapes() {
        let g = build_resource(six());
        assert_eq!(g.vertex_count(), 6);
        let weighted: Vec<_> = g.edges().iter().filter(|e| !e.is_maximal()).collect();
        assert_eq!(weighted.len(), 3);
        assert!(weighted.iter().all(|e| e.weight.signed_pi_ratio().unwrap().abs() == Ratio::new(1, 2)));
        assert_eq!(g.weight(vertex(1), vertex(2)), Some(Phase::pi_frac(1, 2)));

        let g7 = build_resource(ResourceVariant::new(VariantKind::Seven));
        assert_eq!(g7.vertex_count(), 7);
        assert_eq!(g7.weight(vertex(1), vertex(4)), None);
        assert_eq!(g7.weight(vertex(4), vertex(7)), Some(Phase::pi()));
        assert_eq!(g7.edges().len(), g.edges().len() + 1);

        let g8 = build_resource(ResourceVariant::new(VariantKind::Eight));
        assert_eq!(g8.weight(vertex(1), vertex(6)), None);
        assert_eq!(g8.weight(vertex(6), vertex(8)), Some(Phase::pi()));
        assert!(g8.edges().iter().all(|e| e.is_maximal() || (e.a, e.b) == (vertex(1), vertex(2))));
    }

    #[test]
    fn target_is_toffoli_up_to_h() {
        let t = MultiQubitOperator::toffoli(0, 1, 2);
        assert!(equal_up_to_phase(&logical_gate(Phase::pi(), TargetEncoding::Hadamard), &t, 1e-12).unwrap());
        let h_ccz = h_on_t().compose(&MultiQubitOperator::ccz_theta(0, 1, 2, Phase::pi()), 3).unwrap();
        assert!(equal_up_to_phase(&target_unitary(Phase::pi()), &h_ccz, 1e-12).unwrap());
    }

    #[test]
    fn six_program_examples() {
        let p = base_program(six());
        assert_eq!(p.measured(), vec![vertex(2), vertex(3), vertex(4)]);
        assert!(p.steps.iter().all(|s| s.corrections.is_empty() && s.basis == MeasurementBasis::plain(Phase::zero())));
        let p = measurement_program(six(), LinkingByproducts::new([0, 1, 0], [0; 3])).unwrap();
        assert_eq!(p.steps[0].corrections[0].unitary, rz(-1, 2));
        assert_eq!(p.steps[2].corrections[0].unitary, rz(1, 2));
        assert!(matches!(
            measurement_program(six(), LinkingByproducts::new([1, 0, 0], [0; 3])),
            Err(ToffoliError::Unrecoverable(_))
        ));
        let seven = measurement_program(ResourceVariant::new(VariantKind::Seven), LinkingByproducts::none()).unwrap();
        assert_eq!(seven.steps[0].vertex, vertex(3));
    }

    #[test]
    fn six_sigma_examples() {
        let v = six();
        let id = predicted_sigma(v, &v.outcomes_from_bits("000").unwrap(), LinkingByproducts::none()).unwrap();
        assert!(id.wires.iter().all(LocalWord::is_identity) && id.is_local());
        let nl = predicted_sigma(v, &v.outcomes_from_bits("010").unwrap(), LinkingByproducts::none()).unwrap();
        assert_eq!(nl.nonlocal, Some(NonlocalFactor::FlippedPhase { theta: Phase::pi() }));
        let seven = ResourceVariant::new(VariantKind::Seven);
        for o in seven.all_outcomes() {
            let s = predicted_sigma(seven, &o, LinkingByproducts::none()).unwrap();
            assert!(s.is_local());
            let c2 = s.wires[1].phase.signed_pi_ratio().unwrap();
            assert!(c2 == Ratio::new(1, 4) || c2 == Ratio::new(-3, 4));
        }
    }

    #[test]
    fn truth_table_example() {
        let v = six();
        let input = StateVector::basis_state(3, 0b011).unwrap();
        let run = run_gate(v, &input, LinkingByproducts::none(), &v.outcomes_from_bits("000").unwrap(), TargetEncoding::Hadamard).unwrap();
        assert!(run.success);
        assert!((run.probability - 0.125).abs() < 1e-12);
        let want = StateVector::basis_state(3, 0b111).unwrap();
        assert!(run.output.fidelity(&want).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn weighted_signs_alternate_exactly_when_recoverable() {
        for l in LinkingByproducts::all().filter(|l| l.sz == [0; 3]) {
            let s = program_weighted_signs(l);
            assert_eq!(signs_alternate(s), l.sx_recoverable(), "{l}: {s:?}");
        }
        assert_eq!(induced_weighted_signs([0, 0, 0], false), [1, -1, 1]);
        assert_eq!(induced_weighted_signs([0, 1, 0], false), [-1, 1, -1]);
    }

    #[test]
    fn bit_parsing() {
        let v = ResourceVariant::new(VariantKind::Eight);
        let o = v.outcomes_from_bits("10011").unwrap();
        assert_eq!(o.bit(vertex(2)), 1);
        assert_eq!(o.bit(vertex(8)), 1);
        assert_eq!(o.bit(vertex(3)), 0);
        assert_eq!(v.outcome_string(&o), "10011");
        assert!(v.outcomes_from_bits("101").is_err());
        assert_eq!(v.all_outcomes().len(), 32);
        assert_eq!(v.outcome_string(&v.all_outcomes()[1]), "00001");
        assert!(LinkingByproducts::from_bits("012", "000").is_err());
        assert_eq!(LinkingByproducts::all().count(), 64);
    }
}
