use mbqc_toffoli::mbqc::OutcomeBits;
use mbqc_toffoli::phase::Phase;
use mbqc_toffoli::qstate::{MultiQubitOperator, StateVector};
use mbqc_toffoli::toffoli::*;
use mbqc_toffoli::verify::{equal_up_to_phase, is_local, process_fidelity};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_input(rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<C64> = (0..8).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::from_amplitudes(amps).unwrap().normalized()
}

fn ratio(r: &SuccessReport) -> (i64, i64) {
    let e = r.exact.expect("uniform branches");
    (e.num, e.den)
}

#[test]
fn success_probabilities_are_exact() {
    let want = [
        (VariantKind::Six, (1, 2), (1, 4)),
        (VariantKind::Seven, (1, 1), (1, 2)),
        (VariantKind::Eight, (1, 1), (1, 1)),
    ];
    for (kind, none, uniform) in want {
        let v = ResourceVariant::new(kind);
        let a = success_probability(v, LinkingModel::None).unwrap();
        let b = success_probability(v, LinkingModel::Uniform).unwrap();
        assert_eq!(ratio(&a), none, "{kind} none");
        assert_eq!(ratio(&b), uniform, "{kind} uniform");
        assert!(a.predictions_match && b.predictions_match, "{kind}");
        assert!(b.min_sigma_fidelity > 1.0 - 1e-10);
    }
}

#[test]
fn success_partition_matches_recoverable_sets() {
    for kind in VariantKind::ALL {
        let r = success_probability(ResourceVariant::new(kind), LinkingModel::Uniform).unwrap();
        for b in &r.branches {
            let l = LinkingByproducts::from_bits(&b.sx, &b.sz).unwrap();
            let s3 = b.outcomes.as_bytes()[1] == b'1';
            let want = match kind {
                VariantKind::Six => l.sx_recoverable() && !s3,
                VariantKind::Seven => l.sx_recoverable(),
                VariantKind::Eight => true,
            };
            assert_eq!(b.local, want, "{kind} {} {} {}", b.sx, b.sz, b.outcomes);
        }
    }
}

#[test]
fn every_branch_matches_prediction_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in VariantKind::ALL {
        let v = ResourceVariant::new(kind);
        for l in LinkingByproducts::all().filter(|l| kind == VariantKind::Eight || l.sx_recoverable()) {
            for o in v.all_outcomes() {
                for _ in 0..2 {
                    let input = random_input(&mut rng);
                    let run = run_gate(v, &input, l, &o, TargetEncoding::Hadamard).unwrap();
                    assert!(run.fidelity > 1.0 - 1e-10, "{kind} {l} {}", v.outcome_string(&o));
                }
            }
        }
    }
}

#[test]
fn ccz_theta_generalization() {
    for (n, d) in [(1, 4), (1, 3), (1, 2), (2, 3)] {
        let theta = Phase::pi_frac(n, d);
        let gate = MultiQubitOperator::local(&[
            mbqc_toffoli::qstate::SingleQubitUnitary::identity(),
            mbqc_toffoli::qstate::SingleQubitUnitary::identity(),
            mbqc_toffoli::qstate::SingleQubitUnitary::hadamard(),
        ])
        .compose(&MultiQubitOperator::ccz_theta(0, 1, 2, theta), 3)
        .unwrap();
        assert!(equal_up_to_phase(&target_unitary(theta), &gate, 1e-12).unwrap());
        for kind in VariantKind::ALL {
            let v = ResourceVariant::with_theta(kind, theta).unwrap();
            let p = base_program(v);
            for (o, b) in branch_operators(v, &p, LinkingByproducts::none(), TargetEncoding::Raw).unwrap() {
                let res = residual(&b, &target_unitary(theta)).unwrap();
                let sigma = predicted_sigma(v, &o, LinkingByproducts::none()).unwrap();
                assert!(equal_up_to_phase(&res, &sigma.to_operator(), 1e-10).unwrap(), "{kind} θ={theta} {}", v.outcome_string(&o));
                assert_eq!(is_local(&res, 3).unwrap().is_local, sigma.is_local());
            }
        }
    }
}

#[test]
fn sz_passes_without_changing_success() {
    let v = ResourceVariant::new(VariantKind::Six);
    let o = v.outcomes_from_bits("000").unwrap();
    for sz in 0..8u8 {
        let l = LinkingByproducts::new([0, 1, 0], [(sz >> 2) & 1, (sz >> 1) & 1, sz & 1]);
        let s = predicted_sigma(v, &o, l).unwrap();
        assert!(s.is_local());
    }
}

#[test]
fn zero_input_is_fixed_in_recoverable_branches() {
    let v = ResourceVariant::new(VariantKind::Six);
    let zero = StateVector::basis_state(3, 0).unwrap();
    for o in v.all_outcomes() {
        let run = run_gate(v, &zero, LinkingByproducts::none(), &o, TargetEncoding::Hadamard).unwrap();
        if run.success {
            let mut undone = run.output.clone();
            undone.apply_operator(&run.sigma.to_operator().adjoint()).unwrap();
            assert!(undone.fidelity(&zero).unwrap() > 1.0 - 1e-12);
        }
    }
}

#[test]
fn six_nonlocal_frames_classified_nonlocal() {
    let v = ResourceVariant::new(VariantKind::Six);
    for o in v.all_outcomes() {
        let s = predicted_sigma(v, &o, LinkingByproducts::none()).unwrap();
        let verdict = is_local(&s.to_operator(), 3).unwrap();
        assert_eq!(verdict.is_local, o.bit(vertex(3)) == 0);
    }
    let _ = OutcomeBits::new();
}

#[test]
fn toffoli_fidelity_after_sigma_removal() {
    let toffoli = MultiQubitOperator::toffoli(0, 1, 2);
    let v = ResourceVariant::new(VariantKind::Six);
    for (o, b) in branch_operators(v, &base_program(v), LinkingByproducts::none(), TargetEncoding::Hadamard).unwrap() {
        let sigma = predicted_sigma(v, &o, LinkingByproducts::none()).unwrap();
        if !sigma.is_local() {
            continue;
        }
        let p = branch_probability(&b);
        let corrected = MultiQubitOperator::on_wires(sigma.to_operator().adjoint().matrix() * b.matrix() / C64::new(p.sqrt(), 0.0)).unwrap();
        assert!(process_fidelity(&corrected, &toffoli).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn theta_other_than_pi_rejects_x_linking() {
    let v = ResourceVariant::with_theta(VariantKind::Eight, Phase::pi_frac(1, 3)).unwrap();
    assert!(matches!(
        measurement_program(v, LinkingByproducts::new([0, 0, 1], [0; 3])),
        Err(ToffoliError::LinkingNeedsPi)
    ));
    assert!(ResourceVariant::with_theta(VariantKind::Six, Phase::Radians(0.3)).is_err());
}
