//! Dense state-vector engine.
//!
//! Qubit `k` addresses bit `k` of the amplitude index (qubit 0 is the least
//! significant bit). States produced by projection are left unnormalized so
//! that branch probabilities can be read off as squared-norm ratios.

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::phase::Phase;

/// Largest register the engine accepts.
pub const MAX_QUBITS: usize = 12;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("qubit count {0} out of range 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    Index { index: usize, num_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("amplitude array of length {0} is not a power of two")]
    Length(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("ket is not normalized (norm² = {0})")]
    KetNorm(f64),
}

pub type Ket = Vector2<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn ket_zero() -> Ket {
    Ket::new(c(1.0, 0.0), c(0.0, 0.0))
}

pub fn ket_one() -> Ket {
    Ket::new(c(0.0, 0.0), c(1.0, 0.0))
}

pub fn ket_plus() -> Ket {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ket::new(c(h, 0.0), c(h, 0.0))
}

pub fn ket_minus() -> Ket {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Ket::new(c(h, 0.0), c(-h, 0.0))
}

/// `|α_±⟩ = (|0⟩ ± e^{iα}|1⟩)/√2`; `sign` selects the branch.
pub fn ket_equatorial(alpha: Phase, minus: bool) -> Ket {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let e = alpha.unit() * h;
    Ket::new(c(h, 0.0), if minus { -e } else { e })
}

/// A 2×2 unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitUnitary(Matrix2<C64>);

impl SingleQubitUnitary {
    pub fn new(m: Matrix2<C64>) -> Result<Self, QStateError> {
        let dev = (m.adjoint() * m - Matrix2::identity()).map(|z| z.norm()).max();
        if dev > UNITARY_TOL {
            return Err(QStateError::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self(Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)))
    }

    pub fn pauli_x() -> Self {
        Self(Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)))
    }

    pub fn pauli_y() -> Self {
        Self(Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)))
    }

    pub fn pauli_z() -> Self {
        Self(Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)))
    }

    /// `R_z^α = diag(1, e^{iα})`. The rotation written `R_z^{-α}` is `rz(-α)`.
    pub fn rz(alpha: Phase) -> Self {
        Self(Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), alpha.unit()))
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Self) -> Self {
        Self(self.0 * rhs.0)
    }

    pub fn apply_ket(&self, k: &Ket) -> Ket {
        self.0 * k
    }
}

/// A `2^k × 2^k` operator on an ordered list of target qubits; matrix bit `i`
/// corresponds to `targets[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiQubitOperator {
    matrix: DMatrix<C64>,
    targets: Vec<usize>,
}

impl MultiQubitOperator {
    pub fn new(matrix: DMatrix<C64>, targets: Vec<usize>) -> Result<Self, QStateError> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QStateError::Dimension { expected: dim, got: matrix.nrows().max(matrix.ncols()) });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(QStateError::SameQubit(*t));
            }
        }
        Ok(Self { matrix, targets })
    }

    /// Operator on wires `0..k` in natural order.
    pub fn on_wires(matrix: DMatrix<C64>) -> Result<Self, QStateError> {
        let dim = matrix.nrows();
        if !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(QStateError::Length(dim));
        }
        let k = dim.trailing_zeros() as usize;
        Self::new(matrix, (0..k).collect())
    }

    pub fn identity(k: usize) -> Self {
        Self { matrix: DMatrix::identity(1 << k, 1 << k), targets: (0..k).collect() }
    }

    fn diagonal(k: usize, f: impl Fn(usize) -> C64) -> DMatrix<C64> {
        let d = 1 << k;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = f(i);
        }
        m
    }

    fn permutation(k: usize, f: impl Fn(usize) -> usize) -> DMatrix<C64> {
        let d = 1 << k;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(f(i), i)] = c(1.0, 0.0);
        }
        m
    }

    /// `CZ^θ = diag(1, 1, 1, e^{iθ})` on `(a, b)`.
    pub fn cz_theta(a: usize, b: usize, theta: Phase) -> Self {
        let e = theta.unit();
        let m = Self::diagonal(2, |i| if i == 3 { e } else { c(1.0, 0.0) });
        Self { matrix: m, targets: vec![a, b] }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let m = Self::permutation(2, |i| if i & 1 == 1 { i ^ 2 } else { i });
        Self { matrix: m, targets: vec![control, target] }
    }

    /// Phase `e^{iθ}` on `|111⟩`.
    pub fn ccz_theta(a: usize, b: usize, t: usize, theta: Phase) -> Self {
        let e = theta.unit();
        let m = Self::diagonal(3, |i| if i == 7 { e } else { c(1.0, 0.0) });
        Self { matrix: m, targets: vec![a, b, t] }
    }

    pub fn toffoli(c1: usize, c2: usize, t: usize) -> Self {
        let m = Self::permutation(3, |i| if i & 3 == 3 { i ^ 4 } else { i });
        Self { matrix: m, targets: vec![c1, c2, t] }
    }

    pub fn single(q: usize, u: &SingleQubitUnitary) -> Self {
        let m = DMatrix::from_fn(2, 2, |r, col| u.0[(r, col)]);
        Self { matrix: m, targets: vec![q] }
    }

    /// Tensor product `ops[k-1] ⊗ … ⊗ ops[0]` on wires `0..k`.
    pub fn local(ops: &[SingleQubitUnitary]) -> Self {
        let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
        for u in ops {
            let f = DMatrix::from_fn(2, 2, |r, col| u.0[(r, col)]);
            m = f.kronecker(&m);
        }
        Self { matrix: m, targets: (0..ops.len()).collect() }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    /// Full `2^n × 2^n` matrix with the targets placed among `n` qubits.
    pub fn embed(&self, n: usize) -> Result<DMatrix<C64>, QStateError> {
        for &t in &self.targets {
            if t >= n {
                return Err(QStateError::Index { index: t, num_qubits: n });
            }
        }
        let dim = 1usize << n;
        let mut out = DMatrix::zeros(dim, dim);
        let mask: usize = self.targets.iter().map(|t| 1 << t).sum();
        for col in 0..dim {
            let sub_col = self.sub_index(col);
            let rest = col & !mask;
            for sub_row in 0..self.matrix.nrows() {
                let v = self.matrix[(sub_row, sub_col)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                out[(rest | self.spread(sub_row), col)] = v;
            }
        }
        Ok(out)
    }

    fn sub_index(&self, full: usize) -> usize {
        self.targets.iter().enumerate().map(|(i, &t)| ((full >> t) & 1) << i).sum()
    }

    fn spread(&self, sub: usize) -> usize {
        self.targets.iter().enumerate().map(|(i, &t)| ((sub >> i) & 1) << t).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), targets: self.targets.clone() }
    }

    /// `self · rhs` on a common register of `n` qubits (rhs applied first).
    pub fn compose(&self, rhs: &Self, n: usize) -> Result<Self, QStateError> {
        let m = self.embed(n)? * rhs.embed(n)?;
        Ok(Self { matrix: m, targets: (0..n).collect() })
    }
}

/// Dense complex amplitude vector over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    fn check_count(n: usize) -> Result<(), QStateError> {
        if n == 0 || n > MAX_QUBITS {
            return Err(QStateError::QubitCount(n));
        }
        Ok(())
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus_state(n: usize) -> Result<Self, QStateError> {
        Self::check_count(n)?;
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(Self { num_qubits: n, amplitudes: vec![c(a, 0.0); 1 << n] })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self, QStateError> {
        Self::check_count(n)?;
        if index >= 1 << n {
            return Err(QStateError::Index { index, num_qubits: n });
        }
        let mut amplitudes = vec![c(0.0, 0.0); 1 << n];
        amplitudes[index] = c(1.0, 0.0);
        Ok(Self { num_qubits: n, amplitudes })
    }

    /// Product state with `kets[k]` on qubit `k`.
    pub fn product(kets: &[Ket]) -> Result<Self, QStateError> {
        Self::check_count(kets.len())?;
        let n = kets.len();
        let amplitudes = (0..1usize << n)
            .map(|i| (0..n).map(|q| kets[q][(i >> q) & 1]).product())
            .collect();
        Ok(Self { num_qubits: n, amplitudes })
    }

    /// Zero-qubit scalar, used as the seed of tensor-product builds.
    pub(crate) fn scalar(v: C64) -> Self {
        Self { num_qubits: 0, amplitudes: vec![v] }
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self, QStateError> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(QStateError::Length(len));
        }
        let n = len.trailing_zeros() as usize;
        Self::check_count(n)?;
        Ok(Self { num_qubits: n, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        let mut out = self.clone();
        if n > 0.0 {
            out.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
        out
    }

    pub fn scale(&mut self, s: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
    }

    /// `self` on the low qubits, `other` on the high ones.
    pub fn tensor(&self, other: &Self) -> Result<Self, QStateError> {
        let n = self.num_qubits + other.num_qubits;
        Self::check_count(n)?;
        let lo = self.amplitudes.len();
        let amplitudes = (0..lo * other.amplitudes.len())
            .map(|i| self.amplitudes[i % lo] * other.amplitudes[i / lo])
            .collect();
        Ok(Self { num_qubits: n, amplitudes })
    }

    fn check_index(&self, q: usize) -> Result<(), QStateError> {
        if q >= self.num_qubits {
            return Err(QStateError::Index { index: q, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    pub fn apply_single(&mut self, q: usize, u: &SingleQubitUnitary) -> Result<(), QStateError> {
        self.check_index(q)?;
        let m = u.matrix();
        let bit = 1 << q;
        for i in 0..self.amplitudes.len() {
            if i & bit != 0 {
                continue;
            }
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            self.amplitudes[i] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
            self.amplitudes[i | bit] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
        }
        Ok(())
    }

    /// Multiply every amplitude with `bit(q1) = bit(q2) = 1` by `e^{iθ}`.
    pub fn apply_cz_theta(&mut self, q1: usize, q2: usize, theta: Phase) -> Result<(), QStateError> {
        self.check_index(q1)?;
        self.check_index(q2)?;
        if q1 == q2 {
            return Err(QStateError::SameQubit(q1));
        }
        let e = theta.unit();
        let mask = (1 << q1) | (1 << q2);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= e;
            }
        }
        Ok(())
    }

    pub fn apply_operator(&mut self, op: &MultiQubitOperator) -> Result<(), QStateError> {
        for &t in op.targets() {
            self.check_index(t)?;
        }
        let k = op.arity();
        let mask: usize = op.targets().iter().map(|t| 1 << t).sum();
        let mut out = vec![c(0.0, 0.0); self.amplitudes.len()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            if a == c(0.0, 0.0) {
                continue;
            }
            let col = op.sub_index(i);
            let rest = i & !mask;
            for row in 0..1usize << k {
                let m = op.matrix()[(row, col)];
                if m != c(0.0, 0.0) {
                    out[rest | op.spread(row)] += m * a;
                }
            }
        }
        self.amplitudes = out;
        Ok(())
    }

    /// Contract qubit `q` with `⟨ket|`, removing it. The result is not
    /// renormalized: its `norm_sq` is the outcome probability times the input
    /// `norm_sq`. Higher qubits shift down by one.
    pub fn project(&self, q: usize, ket: &Ket) -> Result<Self, QStateError> {
        self.check_index(q)?;
        let kn = ket.norm_squared();
        if (kn - 1.0).abs() > 1e-10 {
            return Err(QStateError::KetNorm(kn));
        }
        let (b0, b1) = (ket[0].conj(), ket[1].conj());
        let low = (1usize << q) - 1;
        let half = self.amplitudes.len() / 2;
        let amplitudes = (0..half)
            .map(|j| {
                let i0 = (j & low) | ((j & !low) << 1);
                b0 * self.amplitudes[i0] + b1 * self.amplitudes[i0 | (1 << q)]
            })
            .collect();
        Ok(Self { num_qubits: self.num_qubits - 1, amplitudes })
    }

    /// New qubit `i` is old qubit `order[i]`.
    pub fn reorder(&self, order: &[usize]) -> Result<Self, QStateError> {
        if order.len() != self.num_qubits {
            return Err(QStateError::Dimension { expected: self.num_qubits, got: order.len() });
        }
        let mut seen = vec![false; self.num_qubits];
        for &o in order {
            self.check_index(o)?;
            if seen[o] {
                return Err(QStateError::SameQubit(o));
            }
            seen[o] = true;
        }
        let mut amplitudes = vec![c(0.0, 0.0); self.amplitudes.len()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let j: usize = order.iter().enumerate().map(|(new, &old)| ((i >> old) & 1) << new).sum();
            amplitudes[j] = a;
        }
        Ok(Self { num_qubits: self.num_qubits, amplitudes })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64, QStateError> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(QStateError::Dimension { expected: self.amplitudes.len(), got: other.amplitudes.len() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`, insensitive to norm and global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64, QStateError> {
        let ip = self.inner(other)?;
        let d = self.norm_sq() * other.norm_sq();
        Ok(if d == 0.0 { 0.0 } else { ip.norm_sqr() / d })
    }
}

/// Feed each computational basis state of `k` qubits through `circuit` and
/// assemble the columns: column `j` is `circuit(|j⟩)`.
pub fn reconstruct_operator<F, E>(k: usize, mut circuit: F) -> Result<MultiQubitOperator, E>
where
    F: FnMut(StateVector) -> Result<StateVector, E>,
    E: From<QStateError>,
{
    let dim = 1usize << k;
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let out = circuit(StateVector::basis_state(k, j)?)?;
        if out.num_qubits() != k {
            return Err(QStateError::Dimension { expected: k, got: out.num_qubits() }.into());
        }
        for (i, &a) in out.amplitudes().iter().enumerate() {
            m[(i, j)] = a;
        }
    }
    Ok(MultiQubitOperator::on_wires(m)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn plus_state_amplitudes() {
        let s = StateVector::plus_state(1).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(*a, c(H, 0.0))));
        let s = StateVector::plus_state(2).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(*a, c(0.5, 0.0))));
        let s = StateVector::plus_state(6).unwrap();
        assert_eq!(s.amplitudes().len(), 64);
        assert!(s.amplitudes().iter().all(|a| close(*a, c(0.125, 0.0))));
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        assert_eq!(StateVector::plus_state(0), Err(QStateError::QubitCount(0)));
        assert_eq!(StateVector::plus_state(13), Err(QStateError::QubitCount(13)));
    }

    #[test]
    fn single_qubit_gates() {
        let mut s = StateVector::basis_state(1, 0).unwrap();
        s.apply_single(0, &SingleQubitUnitary::hadamard()).unwrap();
        assert!(s.fidelity(&StateVector::plus_state(1).unwrap()).unwrap() > 1.0 - 1e-12);

        let mut s = StateVector::basis_state(1, 1).unwrap();
        s.apply_single(0, &SingleQubitUnitary::rz(-Phase::pi_frac(1, 2))).unwrap();
        assert!(close(s.amplitudes()[1], c(0.0, -1.0)));

        let mut s = StateVector::plus_state(1).unwrap();
        let before = s.clone();
        s.apply_single(0, &SingleQubitUnitary::pauli_x()).unwrap();
        assert_eq!(s, before);
        assert!(s.apply_single(1, &SingleQubitUnitary::pauli_x()).is_err());
    }

    #[test]
    fn cz_theta_examples() {
        let mut s = StateVector::basis_state(2, 3).unwrap();
        s.apply_cz_theta(0, 1, Phase::pi()).unwrap();
        assert!(close(s.amplitudes()[3], c(-1.0, 0.0)));

        let mut s = StateVector::basis_state(2, 3).unwrap();
        s.apply_cz_theta(0, 1, Phase::pi_frac(1, 2)).unwrap();
        assert!(close(s.amplitudes()[3], c(0.0, 1.0)));

        let th = Phase::Radians(0.731);
        let mut s = StateVector::plus_state(2).unwrap();
        s.apply_cz_theta(1, 0, th).unwrap();
        let want = [c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), th.unit() * 0.5];
        assert!(s.amplitudes().iter().zip(want).all(|(a, b)| close(*a, b)));
        assert_eq!(s.apply_cz_theta(1, 1, th), Err(QStateError::SameQubit(1)));
    }

    #[test]
    fn project_examples() {
        // |+⟩ on qubit 0, |φ⟩ on qubit 1
        let phi = Ket::new(c(0.6, 0.0), c(0.0, 0.8));
        let s = StateVector::product(&[ket_plus(), phi]).unwrap();
        let p = s.project(0, &ket_plus()).unwrap();
        assert!((p.norm_sq() - 1.0).abs() < 1e-12);
        assert!(close(p.amplitudes()[0], phi[0]) && close(p.amplitudes()[1], phi[1]));

        let s = StateVector::basis_state(1, 0).unwrap();
        let p = s.project(0, &ket_one()).unwrap();
        assert_eq!(p.norm_sq(), 0.0);

        // (|0+⟩ + |1−⟩)/√2 with qubit 0 as the first factor
        let mut g = StateVector::plus_state(2).unwrap();
        g.apply_cz_theta(0, 1, Phase::pi()).unwrap();
        let p = g.project(0, &ket_zero()).unwrap();
        assert!((p.norm_sq() - 0.5).abs() < 1e-12);
        assert!(p.normalized().fidelity(&StateVector::plus_state(1).unwrap()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn project_completeness() {
        let s = StateVector::from_amplitudes(vec![c(0.1, 0.2), c(0.3, -0.1), c(0.0, 0.5), c(0.4, 0.4), c(0.2, 0.0), c(-0.1, 0.1), c(0.3, 0.2), c(0.1, -0.3)]).unwrap();
        for q in 0..3 {
            let total: f64 = [ket_plus(), ket_minus()].iter().map(|k| s.project(q, k).unwrap().norm_sq()).sum();
            assert!((total - s.norm_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_simple_operators() {
        let op = reconstruct_operator::<_, QStateError>(1, |mut s| {
            s.apply_single(0, &SingleQubitUnitary::hadamard())?;
            Ok(s)
        })
        .unwrap();
        let h = SingleQubitUnitary::hadamard();
        assert!((op.matrix()[(1, 1)] - h.matrix()[(1, 1)]).norm() < 1e-12);
        assert!((op.matrix()[(0, 1)] - h.matrix()[(0, 1)]).norm() < 1e-12);

        let op = reconstruct_operator::<_, QStateError>(2, |mut s| {
            s.apply_cz_theta(0, 1, Phase::pi())?;
            Ok(s)
        })
        .unwrap();
        let want = MultiQubitOperator::cz_theta(0, 1, Phase::pi());
        assert!((op.matrix() - want.matrix()).map(|z| z.norm()).max() < 1e-12);

        let bad = reconstruct_operator::<_, QStateError>(2, |s| s.project(0, &ket_zero()));
        assert!(matches!(bad, Err(QStateError::Dimension { .. })));
    }

    #[test]
    fn embed_matches_direct_application() {
        let op = MultiQubitOperator::cnot(2, 0);
        let m = op.embed(3).unwrap();
        for j in 0..8 {
            let mut s = StateVector::basis_state(3, j).unwrap();
            s.apply_operator(&op).unwrap();
            for i in 0..8 {
                assert!(close(s.amplitudes()[i], m[(i, j)]));
            }
        }
        // control on qubit 2 set, target qubit 0 flips: |100⟩ → |101⟩
        assert!(close(m[(5, 4)], c(1.0, 0.0)));
    }

    #[test]
    fn toffoli_and_ccz_relation() {
        // Toffoli = H_t · CCZ · H_t
        let h = MultiQubitOperator::single(2, &SingleQubitUnitary::hadamard());
        let ccz = MultiQubitOperator::ccz_theta(0, 1, 2, Phase::pi());
        let lhs = h.compose(&ccz, 3).unwrap().compose(&h, 3).unwrap();
        let tof = MultiQubitOperator::toffoli(0, 1, 2);
        assert!((lhs.matrix() - tof.matrix()).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn reorder_and_tensor() {
        let s = StateVector::product(&[ket_zero(), ket_one(), ket_plus()]).unwrap();
        let r = s.reorder(&[1, 0, 2]).unwrap();
        let want = StateVector::product(&[ket_one(), ket_zero(), ket_plus()]).unwrap();
        assert!(r.fidelity(&want).unwrap() > 1.0 - 1e-12);
        let t = StateVector::product(&[ket_zero()]).unwrap().tensor(&StateVector::product(&[ket_one(), ket_plus()]).unwrap()).unwrap();
        assert!(t.fidelity(&s).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn unitary_check() {
        let m = Matrix2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(SingleQubitUnitary::new(m), Err(QStateError::NotUnitary(_))));
        assert!(SingleQubitUnitary::new(*SingleQubitUnitary::pauli_y().matrix()).is_ok());
    }
}
