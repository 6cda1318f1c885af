//! Closed-system evolution under a static Hamiltonian.

use crate::dynamics::state::QuantumState;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianMatrix;
use crate::linalg::{CMatrix, HermitianEigen};

/// Cached eigendecomposition for repeated propagation under one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: HamiltonianMatrix,
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &HamiltonianMatrix) -> Self {
        Self {
            matrix: h.clone(),
            eigen: HermitianEigen::new(&h.matrix),
        }
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        self.eigen.propagator(t)
    }

    pub fn evolve(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        if state.basis() != self.matrix.basis {
            return Err(Error::BasisMismatch {
                expected: self.matrix.basis.n_sites(),
                got: state.basis().n_sites(),
            });
        }
        let u = self.unitary(t);
        Ok(match state {
            QuantumState::Pure { basis, psi } => QuantumState::Pure {
                basis: *basis,
                psi: &u * psi,
            },
            QuantumState::Mixed { basis, rho } => QuantumState::Mixed {
                basis: *basis,
                rho: &u * rho * u.adjoint(),
            },
        })
    }

    /// Site populations at each requested time.
    pub fn population_series(&self, state: &QuantumState, times: &[f64]) -> Result<Vec<Vec<f64>>> {
        times
            .iter()
            .map(|&t| self.evolve(state, t).map(|s| s.populations()))
            .collect()
    }
}

/// `ψ(t) = exp(-iHt)·ψ₀` (or `UρU†` for a density matrix).
pub fn evolve_unitary(h: &HamiltonianMatrix, state: &QuantumState, t: f64) -> Result<QuantumState> {
    Propagator::new(h).evolve(state, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{apply_fst_deformation, build_line, build_zigzag};
    use crate::hamiltonian::{realize, Basis};
    use crate::linalg::{c, I};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn line_pst() {
        let h = realize(&build_line(5, 1.0).unwrap(), Basis::single(5)).unwrap();
        let s = QuantumState::excitation(Basis::single(5), 0).unwrap();
        let out = evolve_unitary(&h, &s, PI).unwrap();
        assert!((out.populations()[4] - 1.0).abs() < 1e-9);
        let same = evolve_unitary(&h, &s, 0.0).unwrap();
        for (a, b) in same.populations().iter().zip(s.populations()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fst_populations() {
        let spec = apply_fst_deformation(&build_zigzag(5, 4, 1.0).unwrap(), PI / 8.0).unwrap();
        let h = realize(&spec, Basis::single(5)).unwrap();
        let s = QuantumState::excitation(Basis::single(5), 0).unwrap();
        let p = evolve_unitary(&h, &s, PI).unwrap().populations();
        let expected = [0.5, 0.0, 0.0, 0.0, 0.5];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn matches_pade_exponential() {
        let spec = build_zigzag(5, 2, 0.7).unwrap();
        let h = realize(&spec, Basis::full(5).unwrap()).unwrap();
        let u = Propagator::new(&h).unitary(3.1);
        let pade = (h.matrix.clone() * (-I * 3.1)).exp();
        assert!(crate::linalg::max_abs_diff(&u, &pade) < 1e-10);
    }

    #[test]
    fn fst_periodicity() {
        let spec = apply_fst_deformation(&build_zigzag(5, 4, 1.0).unwrap(), PI / 8.0).unwrap();
        let prop = Propagator::new(&realize(&spec, Basis::single(5)).unwrap());
        let s = QuantumState::excitation(Basis::single(5), 0).unwrap();
        for t in [0.3, 1.1, 2.7] {
            let a = prop.evolve(&s, t).unwrap().populations();
            let b = prop.evolve(&s, t + 2.0 * PI).unwrap().populations();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-4);
            }
        }
    }

    proptest! {
        #[test]
        fn norm_and_mirror_twin(m in 0u32..8, t in 0.0f64..10.0, j in 0.2f64..2.0) {
            let spec = build_zigzag(5, m, j).unwrap();
            let prop = Propagator::new(&realize(&spec, Basis::single(5)).unwrap());
            let b = Basis::single(5);
            let a = prop.evolve(&QuantumState::excitation(b, 0).unwrap(), t).unwrap();
            let z = prop.evolve(&QuantumState::excitation(b, 4).unwrap(), t).unwrap();
            prop_assert!((a.trace() - 1.0).abs() < 1e-10);
            prop_assert!((a.populations()[4] - z.populations()[0]).abs() < 1e-10);
        }

        #[test]
        fn full_space_conserves_excitation_number(t in 0.0f64..5.0) {
            let spec = build_zigzag(3, 1, 1.0).unwrap();
            let basis = Basis::full(3).unwrap();
            let prop = Propagator::new(&realize(&spec, basis).unwrap());
            let mut psi = crate::linalg::CVector::zeros(8);
            psi[0b110] = c(1.0);
            let out = prop.evolve(&QuantumState::pure(basis, psi).unwrap(), t).unwrap();
            let total: f64 = out.populations().iter().sum();
            prop_assert!((total - 2.0).abs() < 1e-10);
        }
    }
}
