use crate::phase::Phase;
use crate::qstate::{ket_equatorial, Ket, SingleQubitUnitary};

/// Single-qubit measurement basis `B(α) = {|α_±⟩}`, optionally in its tilde
/// form `B̃(α) = {H|α_±⟩}`, with an absorbed correction `R` that turns the
/// kets into `R†|·⟩`.
///
/// Outcome `s = 0` is always the `+` ket.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    pub alpha: Phase,
    pub tilde: bool,
    pub absorbed: SingleQubitUnitary,
}

impl MeasurementBasis {
    pub fn plain(alpha: Phase) -> Self {
        Self { alpha, tilde: false, absorbed: SingleQubitUnitary::identity() }
    }

    pub fn tilde(alpha: Phase) -> Self {
        Self { alpha, tilde: true, absorbed: SingleQubitUnitary::identity() }
    }

    /// `{|0⟩, |1⟩}`, which is `B̃(0)`.
    pub fn computational() -> Self {
        Self::tilde(Phase::zero())
    }

    /// Absorb a further correction `r`, applied to the qubit after any
    /// correction already absorbed.
    pub fn absorb(&self, r: &SingleQubitUnitary) -> Self {
        Self { absorbed: r.then_after(&self.absorbed), ..self.clone() }
    }

    /// `(ket for s = 0, ket for s = 1)`.
    pub fn basis_states(&self) -> (Ket, Ket) {
        let mut plus = ket_equatorial(self.alpha, false);
        let mut minus = ket_equatorial(self.alpha, true);
        if self.tilde {
            let h = SingleQubitUnitary::hadamard();
            plus = h.apply_ket(&plus);
            minus = h.apply_ket(&minus);
        }
        let r = self.absorbed.adjoint();
        (r.apply_ket(&plus), r.apply_ket(&minus))
    }

    pub fn ket(&self, outcome: u8) -> Ket {
        let (p, m) = self.basis_states();
        if outcome == 0 {
            p
        } else {
            m
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ket_minus, ket_one, ket_plus, ket_zero};

    fn same(a: &Ket, b: &Ket) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn plain_zero_is_x_basis() {
        let (p, m) = MeasurementBasis::plain(Phase::zero()).basis_states();
        assert!(same(&p, &ket_plus()) && same(&m, &ket_minus()));
    }

    #[test]
    fn tilde_zero_is_computational() {
        let (p, m) = MeasurementBasis::tilde(Phase::zero()).basis_states();
        assert!(same(&p, &ket_zero()) && same(&m, &ket_one()));
    }

    #[test]
    fn orthonormal_for_any_alpha_and_absorption() {
        let r = SingleQubitUnitary::rz(Phase::pi_frac(-1, 2)).then_after(&SingleQubitUnitary::pauli_x());
        for a in [0.0, 0.3, 1.7, -2.2] {
            for b in [MeasurementBasis::plain(Phase::Radians(a)), MeasurementBasis::tilde(Phase::Radians(a)).absorb(&r)] {
                let (p, m) = b.basis_states();
                assert!((p.norm() - 1.0).abs() < 1e-12);
                assert!((m.norm() - 1.0).abs() < 1e-12);
                assert!(p.dotc(&m).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn absorbed_kets_are_adjoint_images() {
        let r = SingleQubitUnitary::pauli_z();
        let (p, _) = MeasurementBasis::plain(Phase::zero()).absorb(&r).basis_states();
        assert!(same(&p, &ket_minus()));
    }
}
