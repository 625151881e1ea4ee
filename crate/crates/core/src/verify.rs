//! Operator comparison up to global phase, tensor-product locality, and
//! fidelity metrics.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::phase::Phase;
use crate::qstate::{MultiQubitOperator, SingleQubitUnitary};

/// Relative threshold on the second operator-Schmidt value.
pub const LOCALITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("operators have dimensions {0} and {1}")]
    Dimension(usize, usize),
    #[error("reference operator is zero")]
    ZeroOperator,
    #[error("operator of dimension {dim} is not on {wires} qubits")]
    Wires { dim: usize, wires: usize },
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn same_shape(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<(), VerifyError> {
    if a.shape() != b.shape() {
        return Err(VerifyError::Dimension(a.nrows(), b.nrows()));
    }
    Ok(())
}

/// `max |A − c·B|` with `c = tr(B†A)/tr(B†B)`, the best phase-and-scale fit.
pub fn phase_distance(a: &MultiQubitOperator, b: &MultiQubitOperator) -> Result<f64, VerifyError> {
    let (a, b) = (a.matrix(), b.matrix());
    same_shape(a, b)?;
    let bb = b.dotc(b);
    if bb.norm() == 0.0 {
        return Err(VerifyError::ZeroOperator);
    }
    let coef = b.dotc(a) / bb;
    Ok(max_abs(&(a - b * coef)))
}

/// `A = e^{iφ}B` for some `φ`, within `tol` entrywise.
pub fn equal_up_to_phase(a: &MultiQubitOperator, b: &MultiQubitOperator, tol: f64) -> Result<bool, VerifyError> {
    Ok(phase_distance(a, b)? <= tol)
}

/// `|tr(A†B)|² / d²`.
pub fn process_fidelity(a: &MultiQubitOperator, b: &MultiQubitOperator) -> Result<f64, VerifyError> {
    let (a, b) = (a.matrix(), b.matrix());
    same_shape(a, b)?;
    let d = a.nrows() as f64;
    Ok(a.dotc(b).norm_sqr() / (d * d))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityVerdict {
    pub is_local: bool,
    /// Operator-Schmidt singular values for the cut `{w} | rest`, per wire `w`.
    pub schmidt_singular_values: Vec<Vec<f64>>,
    pub tolerance: f64,
}

fn wire_count(m: &DMatrix<C64>, n: usize) -> Result<(), VerifyError> {
    if m.nrows() != 1 << n || m.ncols() != 1 << n {
        return Err(VerifyError::Wires { dim: m.nrows(), wires: n });
    }
    Ok(())
}

/// Realign `A` so rows index `(r_w, c_w)` and columns index the other wires.
fn matricize(m: &DMatrix<C64>, n: usize, w: usize) -> DMatrix<C64> {
    let rest = 1usize << (n - 1);
    let squeeze = |x: usize| (x & ((1 << w) - 1)) | ((x >> (w + 1)) << w);
    let mut out = DMatrix::zeros(4, rest * rest);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let row = ((r >> w) & 1) * 2 + ((c >> w) & 1);
            let col = squeeze(r) * rest + squeeze(c);
            out[(row, col)] = m[(r, c)];
        }
    }
    out
}

/// Tensor-product test across every single-wire cut.
pub fn is_local(op: &MultiQubitOperator, n: usize) -> Result<LocalityVerdict, VerifyError> {
    let m = op.matrix();
    wire_count(m, n)?;
    let mut values = Vec::with_capacity(n);
    let mut local = true;
    for w in 0..n {
        let mut sv: Vec<f64> = matricize(m, n, w).svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        if sv.len() > 1 && sv[1] >= LOCALITY_TOL * sv[0] {
            local = false;
        }
        values.push(sv);
    }
    Ok(LocalityVerdict { is_local: local, schmidt_singular_values: values, tolerance: LOCALITY_TOL })
}

/// Independent product test: slice `A` through its largest entry along
/// each wire and check that the slices rebuild `A`.
pub fn factorizes_by_slicing(op: &MultiQubitOperator, n: usize, tol: f64) -> Result<bool, VerifyError> {
    let m = op.matrix();
    wire_count(m, n)?;
    let (mut r0, mut c0, mut peak) = (0, 0, 0.0);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)].norm() > peak {
                (r0, c0, peak) = (r, c, m[(r, c)].norm());
            }
        }
    }
    if peak == 0.0 {
        return Err(VerifyError::ZeroOperator);
    }
    let p = m[(r0, c0)];
    let set = |x: usize, w: usize, b: usize| (x & !(1 << w)) | (b << w);
    let slices: Vec<[[C64; 2]; 2]> = (0..n)
        .map(|w| {
            let mut f = [[C64::new(0.0, 0.0); 2]; 2];
            for (i, row) in f.iter_mut().enumerate() {
                for (j, e) in row.iter_mut().enumerate() {
                    *e = m[(set(r0, w, i), set(c0, w, j))];
                }
            }
            f
        })
        .collect();
    let norm = p.powi(n as i32 - 1);
    let mut dev: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let prod = slices.iter().enumerate().fold(C64::new(1.0, 0.0), |acc, (w, f)| acc * f[(r >> w) & 1][(c >> w) & 1]);
            dev = dev.max((prod / norm - m[(r, c)]).norm());
        }
    }
    Ok(dev <= tol * peak)
}

/// Haar-ish random single-qubit unitary from three Euler angles and a phase.
pub fn random_single_qubit_unitary<R: Rng + ?Sized>(rng: &mut R) -> SingleQubitUnitary {
    let tau = std::f64::consts::TAU;
    let (a, b, d) = (rng.random::<f64>() * tau, rng.random::<f64>() * tau, rng.random::<f64>() * tau);
    let g = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
    let e = |x: f64| C64::from_polar(1.0, x);
    let m = nalgebra::Matrix2::new(
        e(a) * g.cos(),
        -e(a + d) * g.sin(),
        e(a + b) * g.sin(),
        e(a + b + d) * g.cos(),
    );
    SingleQubitUnitary::new(m).expect("Euler form is unitary")
}

pub fn random_local_operator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MultiQubitOperator {
    let ops: Vec<_> = (0..n).map(|_| random_single_qubit_unitary(rng)).collect();
    MultiQubitOperator::local(&ops)
}

/// Local layers around a `CZ^φ` on a random pair, `φ` bounded away from 0.
pub fn random_nonlocal_operator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> MultiQubitOperator {
    assert!(n >= 2, "non-local operators need two wires");
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    let phi = Phase::Radians(rng.random_range(0.5..std::f64::consts::TAU - 0.5));
    let before = random_local_operator(rng, n);
    let after = random_local_operator(rng, n);
    let m = after.matrix() * MultiQubitOperator::cz_theta(a, b, phi).embed(n).expect("pair fits") * before.matrix();
    MultiQubitOperator::on_wires(m).expect("square power-of-two")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(u: SingleQubitUnitary) -> MultiQubitOperator {
        MultiQubitOperator::local(&[u])
    }

    #[test]
    fn phase_equality_examples() {
        let i = single(SingleQubitUnitary::identity());
        let minus_i = MultiQubitOperator::on_wires(-i.matrix()).unwrap();
        assert!(equal_up_to_phase(&i, &minus_i, 1e-12).unwrap());
        assert!(!equal_up_to_phase(&i, &single(SingleQubitUnitary::pauli_z()), 1e-12).unwrap());
        let err = equal_up_to_phase(&i, &MultiQubitOperator::identity(2), 1e-12);
        assert_eq!(err, Err(VerifyError::Dimension(2, 4)));
    }

    #[test]
    fn fidelity_of_identity_against_toffoli() {
        let f = process_fidelity(&MultiQubitOperator::identity(3), &MultiQubitOperator::toffoli(0, 1, 2)).unwrap();
        assert!((f - 0.5625).abs() < 1e-15);
        let t = MultiQubitOperator::toffoli(0, 1, 2);
        assert!((process_fidelity(&t, &t).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn locality_examples() {
        let word = MultiQubitOperator::local(&[
            SingleQubitUnitary::pauli_z(),
            SingleQubitUnitary::rz(Phase::pi_frac(1, 4)),
            SingleQubitUnitary::pauli_x(),
        ]);
        let v = is_local(&word, 3).unwrap();
        assert!(v.is_local);
        assert_eq!(v.schmidt_singular_values.len(), 3);
        let cnot = MultiQubitOperator::on_wires(MultiQubitOperator::cnot(1, 2).embed(3).unwrap()).unwrap();
        let v = is_local(&cnot, 3).unwrap();
        assert!(!v.is_local);
        // wire 0 is untouched, so only cuts 1 and 2 carry rank 2
        assert!(v.schmidt_singular_values[0][1] < 1e-12);
        assert!(v.schmidt_singular_values[1][1] > 0.5);
        assert!(!factorizes_by_slicing(&cnot, 3, 1e-9).unwrap());
        assert!(factorizes_by_slicing(&word, 3, 1e-9).unwrap());
    }

    #[test]
    fn two_methods_agree_on_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let l = random_local_operator(&mut rng, 3);
            assert!(is_local(&l, 3).unwrap().is_local);
            assert!(factorizes_by_slicing(&l, 3, 1e-9).unwrap());
            let nl = random_nonlocal_operator(&mut rng, 3);
            assert!(!is_local(&nl, 3).unwrap().is_local);
            assert!(!factorizes_by_slicing(&nl, 3, 1e-9).unwrap());
        }
    }

    fn arb_op() -> impl Strategy<Value = MultiQubitOperator> {
        (any::<u64>(), any::<bool>()).prop_map(|(seed, nl)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if nl {
                random_nonlocal_operator(&mut rng, 2)
            } else {
                random_local_operator(&mut rng, 2)
            }
        })
    }

    fn with_phase(a: &MultiQubitOperator, x: f64) -> MultiQubitOperator {
        MultiQubitOperator::on_wires(a.matrix() * C64::from_polar(1.0, x)).unwrap()
    }

    proptest! {
        #[test]
        fn phase_equality_is_an_equivalence(a in arb_op(), x in 0.0..6.3f64, y in 0.0..6.3f64) {
            let b = with_phase(&a, x);
            let c = with_phase(&b, y);
            prop_assert!(equal_up_to_phase(&a, &a, 1e-12).unwrap());
            prop_assert!(equal_up_to_phase(&a, &b, 1e-12).unwrap());
            prop_assert!(equal_up_to_phase(&b, &a, 1e-12).unwrap());
            prop_assert!(equal_up_to_phase(&a, &c, 1e-12).unwrap());
        }

        #[test]
        fn classifiers_agree(a in arb_op()) {
            prop_assert_eq!(is_local(&a, 2).unwrap().is_local, factorizes_by_slicing(&a, 2, 1e-9).unwrap());
        }

        #[test]
        fn fidelity_is_bounded(a in arb_op(), b in arb_op()) {
            let f = process_fidelity(&a, &b).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        }
    }
}
