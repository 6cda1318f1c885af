//! Fidelities against Bell and W targets, reduced states, frames and
//! single-qubit process fidelity.
//!
//! Fidelity is the overlap `⟨t|ρ|t⟩` with a pure target. Reduced registers are
//! written in the full basis of the selected sites, first site most significant.

use serde::Serialize;

use crate::dynamics::state::{reduced_density, QuantumState};
use crate::error::{Error, Result};
use crate::hamiltonian::Basis;
use crate::linalg::{c, CMatrix, CVector, HermitianEigen, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityTarget {
    BellSinglet,
    W4,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub target: FidelityTarget,
    /// Overlap with the literal target.
    pub value: f64,
    /// Maximum overlap over local phases on the register sites.
    pub phase_maximized_value: f64,
    /// Measured sites (0-based).
    pub subsystem: Vec<usize>,
}

/// Reduced state of `sites` as a register in the full basis.
pub fn reduce_to_sites(state: &QuantumState, sites: &[usize]) -> Result<QuantumState> {
    for (k, s) in sites.iter().enumerate() {
        if sites[..k].contains(s) {
            return Err(Error::Precondition(format!("site {s} listed twice")));
        }
    }
    let rho = reduced_density(state.basis(), &state.density(), sites)?;
    Ok(QuantumState::Mixed {
        basis: Basis::Full { n_sites: sites.len() },
        rho,
    })
}

pub fn populations(state: &QuantumState) -> Vec<f64> {
    state.populations()
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn state_fidelity(rho: &CMatrix, psi: &CVector) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}

/// `(|01⟩ - |10⟩)/√2`.
pub fn bell_singlet() -> CVector {
    let r = 0.5f64.sqrt();
    CVector::from_vec(vec![c(0.0), c(r), c(-r), c(0.0)])
}

/// `(|1000⟩ + |0100⟩ + |0010⟩ + |0001⟩)/2`.
pub fn w_state() -> CVector {
    let mut v = CVector::zeros(16);
    for q in 0..4 {
        v[1 << q] = c(0.5);
    }
    v
}

fn one_hot(k: usize, q: usize) -> usize {
    1 << (k - 1 - q)
}

fn register_size(rho: &CMatrix) -> Result<usize> {
    let d = rho.nrows();
    if d == 0 || !d.is_power_of_two() || rho.ncols() != d {
        return Err(Error::InvalidSize(format!("not a qubit register: {d}x{}", rho.ncols())));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Multiply `|…1_q…⟩` components by `e^{iχ_q}` (virtual Z rotations).
pub fn apply_local_phases(rho: &CMatrix, phases: &[f64]) -> Result<CMatrix> {
    let k = register_size(rho)?;
    if phases.len() != k {
        return Err(Error::InvalidSize(format!("{} phases for {k} qubits", phases.len())));
    }
    let phase_of = |i: usize| -> f64 {
        (0..k)
            .filter(|&q| i & one_hot(k, q) != 0)
            .map(|q| phases[q])
            .sum()
    };
    let d = rho.nrows();
    Ok(CMatrix::from_fn(d, d, |i, j| {
        rho[(i, j)] * C64::from_polar(1.0, phase_of(i) - phase_of(j))
    }))
}

/// Local phases that rotate the one-excitation coherences of `reference` onto
/// those of `target`. Applied with [`apply_local_phases`].
pub fn local_phase_frame(reference: &CMatrix, target: &CVector) -> Result<Vec<f64>> {
    let k = register_size(reference)?;
    let anchor = (0..k)
        .find(|&q| target[one_hot(k, q)].norm() > 1e-12)
        .ok_or_else(|| Error::Precondition("target has no one-excitation component".into()))?;
    let a = one_hot(k, anchor);
    Ok((0..k)
        .map(|q| {
            let i = one_hot(k, q);
            if q == anchor || target[i].norm() <= 1e-12 {
                0.0
            } else {
                (target[i] * target[a].conj()).arg() - reference[(i, a)].arg()
            }
        })
        .collect())
}

fn phase_maximized_one_hot(rho: &CMatrix, target: &CVector) -> f64 {
    let k = register_size(rho).unwrap_or(0);
    let amp: Vec<f64> = (0..k).map(|q| target[one_hot(k, q)].norm()).collect();
    // Coordinate ascent on v_q = amp_q·e^{iφ_q}; each update is the exact maximizer for φ_q.
    let best_from = |mut phi: Vec<f64>| -> f64 {
        let value = |phi: &[f64]| -> f64 {
            let v = CVector::from_fn(1 << k, |i, _| {
                (0..k)
                    .find(|&q| one_hot(k, q) == i)
                    .map_or(c(0.0), |q| C64::from_polar(amp[q], phi[q]))
            });
            state_fidelity(rho, &v)
        };
        let mut last = value(&phi);
        for _ in 0..200 {
            for q in 0..k {
                let mut s = c(0.0);
                for r in 0..k {
                    if r != q {
                        s += rho[(one_hot(k, q), one_hot(k, r))] * C64::from_polar(amp[r], phi[r]);
                    }
                }
                if s.norm() > 0.0 {
                    phi[q] = s.arg();
                }
            }
            let now = value(&phi);
            if now - last < 1e-15 {
                last = now;
                break;
            }
            last = now;
        }
        last
    };
    let zero = best_from(vec![0.0; k]);
    let seeded = best_from((0..k).map(|q| rho[(one_hot(k, q), one_hot(k, 0))].arg()).collect());
    zero.max(seeded)
}

fn report(rho: &CMatrix, target: &CVector, kind: FidelityTarget, subsystem: &[usize]) -> FidelityReport {
    let value = state_fidelity(rho, target);
    let pm = phase_maximized_one_hot(rho, target).max(value);
    FidelityReport {
        target: kind,
        value,
        phase_maximized_value: pm,
        subsystem: subsystem.to_vec(),
    }
}

/// Overlap of a two-qubit register with `|Ψ⁻⟩`.
pub fn bell_fidelity(rho2: &CMatrix, subsystem: &[usize]) -> Result<FidelityReport> {
    if register_size(rho2)? != 2 {
        return Err(Error::InvalidSize("Bell fidelity needs a 2-qubit register".into()));
    }
    let mut r = report(rho2, &bell_singlet(), FidelityTarget::BellSinglet, subsystem);
    // Closed form: ½(ρ₀₁,₀₁ + ρ₁₀,₁₀) + |ρ₀₁,₁₀|.
    r.phase_maximized_value = r
        .phase_maximized_value
        .max(0.5 * (rho2[(1, 1)].re + rho2[(2, 2)].re) + rho2[(1, 2)].norm());
    Ok(r)
}

/// Overlap of a four-qubit register with `|W⟩`.
pub fn w_fidelity(rho4: &CMatrix, subsystem: &[usize]) -> Result<FidelityReport> {
    if register_size(rho4)? != 4 {
        return Err(Error::InvalidSize("W fidelity needs a 4-qubit register".into()));
    }
    Ok(report(rho4, &w_state(), FidelityTarget::W4, subsystem))
}

/// Overlap with an arbitrary pure register state.
pub fn custom_fidelity(rho: &CMatrix, target: &CVector, subsystem: &[usize]) -> Result<FidelityReport> {
    if rho.nrows() != target.len() {
        return Err(Error::InvalidSize("target and register dimensions differ".into()));
    }
    Ok(report(rho, target, FidelityTarget::Custom, subsystem))
}

/// Single-qubit process reconstructed from the images of `|0⟩, |1⟩, |+⟩, |+i⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessFidelity {
    /// `Tr(χ·χ_ideal)` with the identity as ideal process, after projection.
    pub fidelity: f64,
    /// `χ₀₀` before projection.
    pub raw_fidelity: f64,
    /// Frobenius distance moved by the projection.
    pub projection_distance: f64,
}

/// Process matrix in the `{I, X, -iY, Z}` basis by linear inversion.
pub fn process_matrix(outputs: &[CMatrix; 4]) -> CMatrix {
    let [r0, r1, rp, rpi] = outputs;
    let mix = (r0 + r1) * c(0.5);
    // Images of |0⟩⟨1| and |1⟩⟨0|.
    let r01 = rp + rpi * I - &mix * C64::new(1.0, 1.0);
    let r10 = rp - rpi * I - &mix * C64::new(1.0, -1.0);
    let mut big = CMatrix::zeros(4, 4);
    big.view_mut((0, 0), (2, 2)).copy_from(r0);
    big.view_mut((0, 2), (2, 2)).copy_from(&r01);
    big.view_mut((2, 0), (2, 2)).copy_from(&r10);
    big.view_mut((2, 2), (2, 2)).copy_from(r1);
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let id = CMatrix::identity(2, 2);
    let mut lambda = CMatrix::zeros(4, 4);
    lambda.view_mut((0, 0), (2, 2)).copy_from(&id);
    lambda.view_mut((0, 2), (2, 2)).copy_from(&x);
    lambda.view_mut((2, 0), (2, 2)).copy_from(&x);
    lambda.view_mut((2, 2), (2, 2)).copy_from(&(-id));
    let lambda = lambda * c(0.5);
    &lambda * big * &lambda
}

/// Hermitian part, negative eigenvalues clipped, trace renormalized to 1.
pub fn project_process(chi: &CMatrix) -> (CMatrix, f64) {
    let herm = (chi + chi.adjoint()) * c(0.5);
    let eig = HermitianEigen::new(&herm);
    let clipped: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let n = chi.nrows();
    let mut out = CMatrix::zeros(n, n);
    if total > 0.0 {
        for (k, &v) in clipped.iter().enumerate() {
            let col = eig.vectors.column(k);
            out += col * col.adjoint() * c(v / total);
        }
    }
    let dist = (&out - chi).norm();
    (out, dist)
}

pub fn process_fidelity_from_outputs(outputs: &[CMatrix; 4]) -> ProcessFidelity {
    let chi = process_matrix(outputs);
    let (proj, dist) = project_process(&chi);
    ProcessFidelity {
        fidelity: proj[(0, 0)].re,
        raw_fidelity: chi[(0, 0)].re,
        projection_distance: dist,
    }
}

/// The four probe states as `(α, β)` amplitudes of `α|0⟩ + β|1⟩`.
pub fn process_probes() -> [(C64, C64); 4] {
    let r = 0.5f64.sqrt();
    [
        (c(1.0), c(0.0)),
        (c(0.0), c(1.0)),
        (c(r), c(r)),
        (c(r), C64::new(0.0, r)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dm(v: &CVector) -> CMatrix {
        v * v.adjoint()
    }

    #[test]
    fn bell_examples() {
        let psi = bell_singlet();
        let r = bell_fidelity(&dm(&psi), &[0, 4]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        let mixed = CMatrix::identity(4, 4) * c(0.25);
        assert!((bell_fidelity(&mixed, &[0, 4]).unwrap().value - 0.25).abs() < 1e-15);
        let r2 = 0.5f64.sqrt();
        let plus = CVector::from_vec(vec![c(0.0), c(r2), c(r2), c(0.0)]);
        let r = bell_fidelity(&dm(&plus), &[0, 4]).unwrap();
        assert!(r.value.abs() < 1e-15);
        assert!((r.phase_maximized_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_examples() {
        let r = w_fidelity(&dm(&w_state()), &[0, 2, 6, 8]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        let mut e = CVector::zeros(16);
        e[8] = c(1.0);
        assert!((w_fidelity(&dm(&e), &[0, 2, 6, 8]).unwrap().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduce_excited_site() {
        let b = Basis::single(5);
        let s = QuantumState::excitation(b, 0).unwrap();
        let r = reduce_to_sites(&s, &[0, 4]).unwrap();
        let rho = r.density();
        assert_eq!(rho[(2, 2)], c(1.0));
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(reduce_to_sites(&s, &[0, 0]).is_err());
        assert!(reduce_to_sites(&s, &[7]).is_err());
    }

    #[test]
    fn frame_maps_reference_onto_target() {
        let mut v = CVector::zeros(4);
        v[1] = C64::from_polar(0.5f64.sqrt(), 0.7);
        v[2] = C64::from_polar(0.5f64.sqrt(), -1.9);
        let phases = local_phase_frame(&dm(&v), &bell_singlet()).unwrap();
        let fixed = apply_local_phases(&dm(&v), &phases).unwrap();
        assert!((state_fidelity(&fixed, &bell_singlet()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_process_is_quarter() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        let p = process_fidelity_from_outputs(&[half.clone(), half.clone(), half.clone(), half]);
        assert!((p.fidelity - 0.25).abs() < 1e-14);
        assert!(p.projection_distance < 1e-14);
    }

    #[test]
    fn identity_process_is_one() {
        let outs = process_probes().map(|(a, b)| {
            let v = CVector::from_vec(vec![a, b]);
            dm(&v)
        });
        let p = process_fidelity_from_outputs(&outs);
        assert!((p.fidelity - 1.0).abs() < 1e-14);
        assert!((p.raw_fidelity - 1.0).abs() < 1e-14);
    }

    #[test]
    fn amplitude_damping_process() {
        // Amplitude damping with decay probability g: χ₀₀ = (1 + √(1-g))²/4.
        let g = 0.3f64;
        let outs = process_probes().map(|(a, b)| {
            let mut r = CMatrix::zeros(2, 2);
            r[(0, 0)] = c(a.norm_sqr() + g * b.norm_sqr());
            r[(1, 1)] = c((1.0 - g) * b.norm_sqr());
            r[(0, 1)] = a * b.conj() * (1.0 - g).sqrt();
            r[(1, 0)] = r[(0, 1)].conj();
            r
        });
        let p = process_fidelity_from_outputs(&outs);
        assert!((p.fidelity - (1.0 + (1.0 - g).sqrt()).powi(2) / 4.0).abs() < 1e-12);
    }

    fn random_rho(seed: &[f64]) -> CMatrix {
        let d = 16;
        let a = CMatrix::from_fn(d, d, |i, j| {
            let k = (i * d + j) % seed.len();
            C64::new(seed[k] * (1.0 + i as f64 * 0.37).sin(), seed[(k + 3) % seed.len()] * (j as f64 * 1.3).cos())
        });
        let r = &a * a.adjoint();
        let t = r.trace().re;
        r / c(t)
    }

    proptest! {
        #[test]
        fn w_phase_max_is_invariant_under_local_phases(
            seed in proptest::collection::vec(-1.0f64..1.0, 8),
            ph in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            let rho = random_rho(&seed);
            let rotated = apply_local_phases(&rho, &ph).unwrap();
            let a = w_fidelity(&rho, &[0, 1, 2, 3]).unwrap();
            let b = w_fidelity(&rotated, &[0, 1, 2, 3]).unwrap();
            prop_assert!(a.value <= a.phase_maximized_value + 1e-12);
            prop_assert!(a.phase_maximized_value <= 1.0 + 1e-9);
            prop_assert!((a.phase_maximized_value - b.phase_maximized_value).abs() < 1e-6);
        }

        #[test]
        fn fidelity_is_linear(w in 0.0f64..1.0, seed in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let a = random_rho(&seed);
            let b = dm(&w_state());
            let mix = &a * c(w) + &b * c(1.0 - w);
            let f = w_fidelity(&mix, &[0, 1, 2, 3]).unwrap().value;
            let expect = w * w_fidelity(&a, &[0, 1, 2, 3]).unwrap().value + (1.0 - w);
            prop_assert!((f - expect).abs() < 1e-12);
        }
    }
}
