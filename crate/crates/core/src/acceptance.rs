//! The acceptance suite: ten numbered criteria, each reduced to a pass flag
//! and a one-line detail. All randomness comes from one seeded generator per
//! criterion, so two runs with the same seed serialize identically.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::graphstate::WeightedGraph;
use crate::mbqc::{run_branch, MeasurementBasis, MeasurementStep, OutcomeBits, Pattern};
use crate::optics::{self, OpticsError};
use crate::phase::Phase;
use crate::qstate::{reconstruct_operator, MultiQubitOperator, SingleQubitUnitary, StateVector};
use crate::toffoli::{
    self, branch_operators, branch_probability, build_resource, measurement_program, predicted_sigma, residual,
    run_gate, target_unitary, LinkingByproducts, LinkingModel, ResourceVariant, SuccessReport, TargetEncoding,
    ToffoliError, VariantKind, TOLERANCE,
};
use crate::verify::{self, factorizes_by_slicing, is_local, process_fidelity, LOCALITY_TOL};

pub const DEFAULT_SEED: u64 = 7;
pub const CCZ_ANGLES: [(i64, i64); 4] = [(1, 4), (1, 3), (1, 2), (2, 3)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }

    fn error(id: u8, name: &'static str, e: impl std::fmt::Display) -> Self {
        Self::new(id, name, false, format!("error: {e}"))
    }

    /// `PASS [3] name: detail`
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Toffoli(#[from] ToffoliError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
    #[error(transparent)]
    State(#[from] crate::qstate::QStateError),
    #[error(transparent)]
    Pattern(#[from] crate::mbqc::PatternError),
    #[error(transparent)]
    Graph(#[from] crate::graphstate::GraphError),
}

type Outcome = Result<(bool, String), SuiteError>;

fn seeded(seed: u64, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (u64::from(id) << 32))
}

fn random_input(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps: Vec<C64> = (0..1usize << n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::from_amplitudes(amps).expect("power of two").normalized()
}

fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.0..TAU)
}

/// Success reports shared by several criteria, indexed like `VariantKind::ALL`.
pub struct Reports {
    pub none: Vec<SuccessReport>,
    pub uniform: Vec<SuccessReport>,
}

impl Reports {
    pub fn compute() -> Result<Self, SuiteError> {
        let mut none = Vec::new();
        let mut uniform = Vec::new();
        for kind in VariantKind::ALL {
            let v = ResourceVariant::new(kind);
            none.push(toffoli::success_probability(v, LinkingModel::None)?);
            uniform.push(toffoli::success_probability(v, LinkingModel::Uniform)?);
        }
        Ok(Self { none, uniform })
    }
}

fn exact_is(r: &SuccessReport, num: i64, den: i64) -> bool {
    r.exact.is_some_and(|e| e.num == num && e.den == den)
}

fn exact_str(r: &SuccessReport) -> String {
    r.exact.map_or_else(|| format!("{:.12}", r.success_probability), |e| e.to_string())
}

fn c1_six(r: &Reports) -> Outcome {
    let (a, b) = (&r.none[0], &r.uniform[0]);
    let ok = exact_is(a, 1, 2) && exact_is(b, 1, 4);
    Ok((ok, format!("six: no linking {}, uniform linking {}", exact_str(a), exact_str(b))))
}

fn c2_seven_eight(r: &Reports) -> Outcome {
    let ok = exact_is(&r.none[1], 1, 1)
        && exact_is(&r.uniform[1], 1, 2)
        && exact_is(&r.none[2], 1, 1)
        && exact_is(&r.uniform[2], 1, 1);
    Ok((
        ok,
        format!(
            "seven: {} / {}, eight: {} / {}",
            exact_str(&r.none[1]),
            exact_str(&r.uniform[1]),
            exact_str(&r.none[2]),
            exact_str(&r.uniform[2])
        ),
    ))
}

fn c3_gate(seed: u64) -> Outcome {
    let mut rng = seeded(seed, 3);
    let toffoli = MultiQubitOperator::toffoli(0, 1, 2);
    let mut min_op: f64 = 1.0;
    let mut min_state: f64 = 1.0;
    let mut count = 0usize;
    for kind in VariantKind::ALL {
        let v = ResourceVariant::new(kind);
        for l in LinkingByproducts::all() {
            let Ok(p) = measurement_program(v, l) else { continue };
            for (o, b) in branch_operators(v, &p, l, TargetEncoding::Hadamard)? {
                let sigma = predicted_sigma(v, &o, l)?;
                if !sigma.is_local() {
                    continue;
                }
                let prob = branch_probability(&b);
                let m = sigma.to_operator().adjoint().matrix() * b.matrix() / C64::new(prob.sqrt(), 0.0);
                let corrected = MultiQubitOperator::on_wires(m)?;
                min_op = min_op.min(process_fidelity(&corrected, &toffoli)?);
                for _ in 0..5 {
                    let input = random_input(&mut rng, 3);
                    let run = run_gate(v, &input, l, &o, TargetEncoding::Hadamard)?;
                    let mut undone = run.output.clone();
                    undone.apply_operator(&run.sigma.to_operator().adjoint())?;
                    let mut want = input.clone();
                    want.apply_operator(&toffoli)?;
                    min_state = min_state.min(undone.fidelity(&want)?);
                }
                count += 1;
            }
        }
    }
    let ok = min_op >= 1.0 - TOLERANCE && min_state >= 1.0 - TOLERANCE;
    Ok((ok, format!("{count} successful branches, min process fidelity {min_op:.12}, min state fidelity {min_state:.12}")))
}

fn c4_sigma(r: &Reports) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    let mut mismatched = 0usize;
    for rep in &r.uniform {
        for b in &rep.branches {
            if let (Some(d), Some(pl)) = (b.sigma_distance, b.predicted_local) {
                worst = worst.max(d);
                count += 1;
                if pl != b.local {
                    mismatched += 1;
                }
            }
        }
    }
    let ok = worst <= TOLERANCE && mismatched == 0 && r.uniform.iter().all(|x| x.predictions_match);
    Ok((ok, format!("{count} predicted branches, max distance {worst:.3e}, locality mismatches {mismatched}")))
}

fn c5_gadget(seed: u64) -> Outcome {
    let mut rng = seeded(seed, 5);
    let mut g = WeightedGraph::new(3);
    g.add_edge(0, 1, Phase::pi())?;
    g.add_edge(1, 2, Phase::pi())?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = Phase::Radians(random_angle(&mut rng));
        let p = Pattern::new(vec![MeasurementStep::new(1, MeasurementBasis::tilde(theta / 2))]);
        for bit in 0..2u8 {
            let o = OutcomeBits::from_pairs([(1, bit)]);
            let got = reconstruct_operator(2, |input| -> Result<StateVector, SuiteError> {
                let s = g.build_state_with(&input, &[0, 2])?;
                let mut out = run_branch(&s, &p, &o)?.state;
                out.scale(C64::new(std::f64::consts::SQRT_2, 0.0));
                Ok(out)
            })?;
            let rz = SingleQubitUnitary::rz(-(theta / 2));
            let mut want = MultiQubitOperator::local(&[rz.clone(), rz]).compose(&MultiQubitOperator::cz_theta(0, 1, theta), 2)?;
            if bit == 1 {
                let z = SingleQubitUnitary::pauli_z();
                want = MultiQubitOperator::local(&[z.clone(), z]).compose(&want, 2)?;
            }
            worst = worst.max(verify::phase_distance(&got, &want)?);
        }
    }
    Ok((worst <= TOLERANCE, format!("20 angles x 2 outcomes, max distance {worst:.3e}")))
}

fn c6_propagation(seed: u64) -> Outcome {
    let mut rng = seeded(seed, 6);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let theta = Phase::Radians(random_angle(&mut rng));
        let x = SingleQubitUnitary::pauli_x();
        let id = SingleQubitUnitary::identity();
        let lhs = MultiQubitOperator::cz_theta(0, 1, theta).compose(&MultiQubitOperator::local(&[x.clone(), id]), 2)?;
        let rhs = MultiQubitOperator::local(&[x, SingleQubitUnitary::rz(theta)])
            .compose(&MultiQubitOperator::cz_theta(0, 1, -theta), 2)?;
        let d = (lhs.matrix() - rhs.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok((worst <= 1e-12, format!("20 angles, max entry difference {worst:.3e}")))
}

fn c7_ccz() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut branches = 0usize;
    let mut mismatched = 0usize;
    for (n, d) in CCZ_ANGLES {
        let theta = Phase::pi_frac(n, d);
        let gate = target_unitary(theta);
        for kind in VariantKind::ALL {
            let v = ResourceVariant::with_theta(kind, theta)?;
            let l = LinkingByproducts::none();
            let p = measurement_program(v, l)?;
            for (o, b) in branch_operators(v, &p, l, TargetEncoding::Raw)? {
                let Some(res) = residual(&b, &gate) else {
                    mismatched += 1;
                    continue;
                };
                let sigma = predicted_sigma(v, &o, l)?;
                worst = worst.max(verify::phase_distance(&res, &sigma.to_operator())?);
                if is_local(&res, 3)?.is_local != sigma.is_local() {
                    mismatched += 1;
                }
                branches += 1;
            }
        }
    }
    let ok = worst <= TOLERANCE && mismatched == 0;
    Ok((ok, format!("4 angles, {branches} branches, max distance {worst:.3e}, mismatches {mismatched}")))
}

fn c8_optics() -> Outcome {
    let steps = optics::six_qubit_recipe();
    let run = optics::run_recipe(&steps)?;
    let mut min_fixture: f64 = 1.0;
    for label in ["(i)", "(ii)", "(iii)"] {
        let (Some(snap), Some((modes, want))) = (run.snapshot(label), optics::narrated_state(label)) else {
            return Ok((false, format!("missing snapshot {label}")));
        };
        let mut reg = optics::PhotonRegister::new();
        reg.add(&snap.modes, &snap.state)?;
        min_fixture = min_fixture.min(reg.state_in_order(&modes)?.fidelity(&want)?);
    }
    let graph = build_resource(ResourceVariant::new(VariantKind::Six)).build_state()?;
    let final_fid = run.register.state_in_order(&[1, 2, 3, 4, 5, 6])?.fidelity(&graph)?;
    let p = run.register.cumulative_prob();
    let oracle = optics::global_projector_probability(&steps)?;
    let ok = min_fixture >= 1.0 - TOLERANCE && final_fid >= 1.0 - TOLERANCE && (p - oracle).abs() <= 1e-12;
    Ok((
        ok,
        format!("fixtures {min_fixture:.12}, final fidelity {final_fid:.12}, probability {p:.6e} vs oracle {oracle:.6e}"),
    ))
}

fn c9_locality(seed: u64) -> Outcome {
    let mut six_nonlocal = 0usize;
    let mut six_wrong = 0usize;
    let mut frames_local = 0usize;
    let mut frames_wrong = 0usize;
    for kind in VariantKind::ALL {
        let v = ResourceVariant::new(kind);
        for l in LinkingByproducts::all() {
            if measurement_program(v, l).is_err() {
                continue;
            }
            for o in v.all_outcomes() {
                let op = predicted_sigma(v, &o, l)?.to_operator();
                let svd = is_local(&op, 3)?.is_local;
                let slicing = factorizes_by_slicing(&op, 3, LOCALITY_TOL)?;
                match kind {
                    VariantKind::Six if o.bit(toffoli::vertex(3)) == 1 => {
                        six_nonlocal += 1;
                        six_wrong += usize::from(svd || slicing);
                    }
                    VariantKind::Six => {}
                    _ => {
                        frames_local += 1;
                        frames_wrong += usize::from(!svd || !slicing);
                    }
                }
            }
        }
    }
    let mut rng = seeded(seed, 9);
    let mut random_wrong = 0usize;
    for i in 0..200 {
        let local = i % 2 == 0;
        let op = if local { verify::random_local_operator(&mut rng, 3) } else { verify::random_nonlocal_operator(&mut rng, 3) };
        let svd = is_local(&op, 3)?.is_local;
        let slicing = factorizes_by_slicing(&op, 3, LOCALITY_TOL)?;
        random_wrong += usize::from(svd != local || slicing != local);
    }
    let ok = six_wrong == 0 && frames_wrong == 0 && random_wrong == 0 && six_nonlocal > 0 && frames_local > 0;
    Ok((
        ok,
        format!(
            "six non-local frames {six_nonlocal} (misclassified {six_wrong}), seven/eight local frames {frames_local} (misclassified {frames_wrong}), 200 random operators misclassified {random_wrong}"
        ),
    ))
}

fn settle(id: u8, name: &'static str, r: Outcome) -> CriterionResult {
    match r {
        Ok((passed, detail)) => CriterionResult::new(id, name, passed, detail),
        Err(e) => CriterionResult::error(id, name, e),
    }
}

/// Criteria 1 to 9.
pub fn run_criteria(seed: u64) -> Vec<CriterionResult> {
    let reports = Reports::compute();
    let shared = |id, name, f: fn(&Reports) -> Outcome| match &reports {
        Ok(r) => settle(id, name, f(r)),
        Err(e) => CriterionResult::error(id, name, e),
    };
    vec![
        shared(1, "six-qubit success probability", c1_six),
        shared(2, "seven- and eight-qubit success probability", c2_seven_eight),
        settle(3, "Toffoli after byproduct removal", c3_gate(seed)),
        shared(4, "byproduct prediction", c4_sigma),
        settle(5, "weighted-CZ gadget", c5_gadget(seed)),
        settle(6, "X propagation through CZ^θ", c6_propagation(seed)),
        settle(7, "CCZ^θ generalization", c7_ccz()),
        settle(8, "optical construction", c8_optics()),
        settle(9, "locality classification", c9_locality(seed)),
    ]
}

fn to_json(criteria: &[CriterionResult]) -> String {
    serde_json::to_string(criteria).expect("plain data")
}

/// All ten criteria. The last one reruns 1 to 9 and compares the serialized
/// results byte for byte.
pub fn run_all(seed: u64) -> AcceptanceReport {
    let mut criteria = run_criteria(seed);
    let again = run_criteria(seed);
    let (a, b) = (to_json(&criteria), to_json(&again));
    criteria.push(CriterionResult::new(
        10,
        "determinism",
        a == b,
        format!("two runs with seed {seed}: {} bytes, identical: {}", a.len(), a == b),
    ));
    let all_passed = criteria.iter().all(|c| c.passed);
    AcceptanceReport { seed, criteria, all_passed }
}
