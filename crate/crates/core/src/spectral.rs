//! Target spectra, persymmetric inverse eigenvalue reconstruction, PST checks
//! and the FST transform matrices.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::f64::consts::PI;

use crate::chain::{ChainKind, ChainMeta, ChainSpec};
use crate::error::{Error, Result};

/// Relative tolerance used when checking that a reconstruction reproduces its spectrum.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
/// Tolerance on `(λ_{n+1} - λ_n)τ/π` being an odd integer.
pub const SPACING_TOL: f64 = 1e-6;
/// Relative tolerance for mirror symmetry.
pub const MIRROR_TOL: f64 = 1e-9;

/// Ascending single-excitation eigenvalues in units of `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSpectrum {
    pub values: Vec<f64>,
    pub m: u32,
    pub n_sites: usize,
}

/// `{-(N-1)/2, ..., -1, 0, 2m+1, ..., 2m+(N-1)/2}` for odd `N`.
pub fn target_spectrum(n_sites: usize, m: u32) -> Result<TargetSpectrum> {
    if n_sites % 2 == 0 {
        return Err(Error::UnsupportedParity(format!(
            "target spectrum defined for odd N, got {n_sites}"
        )));
    }
    if n_sites < 3 {
        return Err(Error::InvalidSize(format!("target spectrum needs N >= 3, got {n_sites}")));
    }
    let half = (n_sites as i64 - 1) / 2;
    let shift = 2 * m as i64;
    let values = (-half..=0)
        .chain((1..=half).map(|k| shift + k))
        .map(|v| v as f64)
        .collect();
    Ok(TargetSpectrum {
        values,
        m,
        n_sites,
    })
}

/// Eigenvalues (ascending) of the `N × N` tridiagonal block of a chain.
pub fn chain_spectrum(spec: &ChainSpec) -> Vec<f64> {
    let n = spec.n_sites();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for (k, &w) in spec.frequencies().iter().enumerate() {
        t[(k, k)] = w;
    }
    for (k, &c) in spec.couplings().iter().enumerate() {
        t[(k, k + 1)] = c;
        t[(k + 1, k)] = c;
    }
    let mut ev: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// The unique mirror-symmetric Jacobi matrix (positive couplings) with the given spectrum.
///
/// For a persymmetric Jacobi matrix the squared first components of the
/// normalized eigenvectors are `w_k ∝ 1 / ∏_{j≠k} |λ_k - λ_j|`. Lanczos on
/// `diag(λ)` started from `(√w_k)` then returns the matrix directly.
pub fn reconstruct_tridiagonal(spectrum: &[f64]) -> Result<ChainSpec> {
    let n = spectrum.len();
    if n == 0 {
        return Err(Error::InvalidSize("empty spectrum".into()));
    }
    if spectrum.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precondition("non-finite eigenvalue".into()));
    }
    let mut lambda = spectrum.to_vec();
    lambda.sort_by(f64::total_cmp);
    let scale = lambda.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
    for k in 1..n {
        if (lambda[k] - lambda[k - 1]).abs() <= 1e-12 * scale {
            return Err(Error::DegenerateSpectrum(k - 1, k));
        }
    }
    // Weights in log space so large gaps cannot overflow.
    let log_w: Vec<f64> = (0..n)
        .map(|k| {
            -(0..n)
                .filter(|&j| j != k)
                .map(|j| (lambda[k] - lambda[j]).abs().ln())
                .sum::<f64>()
        })
        .collect();
    let max_log = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut q0 = DVector::from_iterator(n, log_w.iter().map(|l| (0.5 * (l - max_log)).exp()));
    q0 /= q0.norm();

    let mut basis: Vec<DVector<f64>> = vec![q0];
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    let lam = DVector::from_vec(lambda.clone());
    for k in 0..n {
        let q = &basis[k];
        let aq = lam.component_mul(q);
        let alpha = q.dot(&aq);
        diag.push(alpha);
        if k + 1 == n {
            break;
        }
        let mut r = aq;
        // Full reorthogonalization, twice.
        for _ in 0..2 {
            for b in &basis {
                let p = b.dot(&r);
                r -= b * p;
            }
        }
        let beta = r.norm();
        if beta <= 1e-14 * scale {
            return Err(Error::Invariant(format!("Lanczos breakdown at step {k}")));
        }
        off.push(beta);
        basis.push(r / beta);
    }
    // Exact persymmetry: average mirrored entries.
    let diag_sym: Vec<f64> = (0..n).map(|k| 0.5 * (diag[k] + diag[n - 1 - k])).collect();
    let nc = off.len();
    let off_sym: Vec<f64> = (0..nc).map(|k| 0.5 * (off[k] + off[nc - 1 - k])).collect();
    ChainSpec::with_meta(
        diag_sym,
        off_sym,
        ChainMeta {
            kind: ChainKind::Custom,
            m: 0,
            j: 1.0,
            theta: 0.0,
        },
    )
}

/// Result of checking mirror symmetry and the odd-multiple spacing condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PstConditionReport {
    pub mirror_ok: bool,
    pub frequency_asymmetry: f64,
    pub coupling_asymmetry: f64,
    pub spacing_ok: bool,
    /// `m_n` with `(λ_{n+1} - λ_n)τ = (2m_n + 1)π`.
    pub gap_integers: Vec<i64>,
    /// `|(λ_{n+1} - λ_n)τ/π - (2m_n + 1)|`.
    pub gap_residuals: Vec<f64>,
    pub tau: f64,
}

impl PstConditionReport {
    pub fn ok(&self) -> bool {
        self.mirror_ok && self.spacing_ok
    }
}

pub fn check_pst_conditions(spec: &ChainSpec, tau: f64) -> PstConditionReport {
    check_pst_conditions_with(spec, tau, MIRROR_TOL, SPACING_TOL)
}

pub fn check_pst_conditions_with(
    spec: &ChainSpec,
    tau: f64,
    mirror_tol: f64,
    spacing_tol: f64,
) -> PstConditionReport {
    let (fa, ca) = spec.mirror_residuals();
    let mirror_ok = spec.is_mirror_symmetric(mirror_tol);
    let ev = chain_spectrum(spec);
    let mut gap_integers = Vec::new();
    let mut gap_residuals = Vec::new();
    let mut spacing_ok = true;
    for w in ev.windows(2) {
        let x = (w[1] - w[0]) * tau / PI;
        let mn = ((x - 1.0) / 2.0).round();
        let res = (x - (2.0 * mn + 1.0)).abs();
        if res > spacing_tol || mn < 0.0 {
            spacing_ok = false;
        }
        gap_integers.push(mn as i64);
        gap_residuals.push(res);
    }
    PstConditionReport {
        mirror_ok,
        frequency_asymmetry: fa,
        coupling_asymmetry: ca,
        spacing_ok,
        gap_integers,
        gap_residuals,
        tau,
    }
}

/// `τ = π / J`.
pub fn transfer_time(j: f64) -> Result<f64> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::Precondition(format!("coupling must be positive, got {j}")));
    }
    Ok(PI / j)
}

/// The matrices relating PST and FST evolution: `U = VR`, `Q = VRV`.
#[derive(Debug, Clone, PartialEq)]
pub struct FstTransform {
    pub v: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub theta: f64,
}

/// Mirror permutation `R = Σ |n⟩⟨N+1-n|`.
pub fn mirror_permutation(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if i + j == n - 1 { 1.0 } else { 0.0 })
}

pub fn fst_transform(n: usize, theta: f64) -> Result<FstTransform> {
    if n < 2 {
        return Err(Error::InvalidSize(format!("FST transform needs N >= 2, got {n}")));
    }
    let (s, c) = theta.sin_cos();
    let mut v = DMatrix::<f64>::zeros(n, n);
    let half = n / 2;
    for i in 0..half {
        v[(i, i)] = s;
        v[(n - 1 - i, n - 1 - i)] = -s;
        v[(i, n - 1 - i)] = c;
        v[(n - 1 - i, i)] = c;
    }
    if n % 2 == 1 {
        v[(half, half)] = 1.0;
    }
    let r = mirror_permutation(n);
    let q = &v * &r * &v;
    Ok(FstTransform { v, r, q, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{apply_fst_deformation, build_line, build_zigzag};
    use crate::hamiltonian::{realize, Basis};
    use crate::linalg::HermitianEigen;
    use proptest::prelude::*;

    #[test]
    fn target_spectrum_examples() {
        assert_eq!(target_spectrum(5, 0).unwrap().values, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(target_spectrum(5, 1).unwrap().values, vec![-2.0, -1.0, 0.0, 3.0, 4.0]);
        assert_eq!(target_spectrum(3, 4).unwrap().values, vec![-1.0, 0.0, 9.0]);
        assert!(matches!(target_spectrum(4, 1), Err(Error::UnsupportedParity(_))));
    }

    #[test]
    fn zigzag_spectrum_equals_target() {
        for n in [3, 5, 7, 9] {
            for m in 0..=10 {
                let ev = chain_spectrum(&build_zigzag(n, m, 1.0).unwrap());
                let t = target_spectrum(n, m).unwrap().values;
                for (a, b) in ev.iter().zip(&t) {
                    assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "N={n} m={m}: {ev:?}");
                }
            }
        }
    }

    #[test]
    fn reconstruction_matches_builder() {
        for n in [3, 5, 7, 9] {
            for m in 0..=10 {
                let t = target_spectrum(n, m).unwrap();
                let rec = reconstruct_tridiagonal(&t.values).unwrap();
                let z = build_zigzag(n, m, 1.0).unwrap();
                for (a, b) in rec.frequencies().iter().zip(z.frequencies()) {
                    assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "N={n} m={m}");
                }
                for (a, b) in rec.couplings().iter().zip(z.couplings()) {
                    assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "N={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn reconstruction_small_cases() {
        let two = reconstruct_tridiagonal(&[-0.5, 0.5]).unwrap();
        assert!(two.frequencies().iter().all(|w| w.abs() < 1e-15));
        assert!((two.couplings()[0] - 0.5).abs() < 1e-15);
        let three = reconstruct_tridiagonal(&[-1.0, 0.0, 1.0]).unwrap();
        for &c in three.couplings() {
            assert!((c - 0.5f64.sqrt()).abs() < 1e-14);
        }
        assert!(three.frequencies().iter().all(|w| w.abs() < 1e-14));
    }

    #[test]
    fn reconstruction_rejects_degenerate() {
        assert!(matches!(
            reconstruct_tridiagonal(&[0.0, 1.0, 1.0]),
            Err(Error::DegenerateSpectrum(1, 2))
        ));
    }

    #[test]
    fn pst_report_for_zigzag_and_line() {
        let r = check_pst_conditions(&build_zigzag(5, 4, 1.0).unwrap(), PI);
        assert!(r.ok());
        assert_eq!(r.gap_integers, vec![0, 0, 4, 0]);
        let r = check_pst_conditions(&build_line(4, 1.0).unwrap(), PI);
        assert!(r.ok());
    }

    #[test]
    fn perturbed_coupling_breaks_mirror() {
        let z = build_line(5, 1.0).unwrap();
        let mut c = z.couplings().to_vec();
        c[0] *= 1.1;
        let p = z.with_parameters(z.frequencies().to_vec(), c).unwrap();
        let r = check_pst_conditions(&p, PI);
        assert!(!r.mirror_ok);
        assert!(!r.ok());
    }

    #[test]
    fn transfer_time_examples() {
        use crate::units::mhz_to_angular;
        assert!((transfer_time(mhz_to_angular(8.3)).unwrap() - 60.24).abs() < 0.01);
        assert!((transfer_time(mhz_to_angular(9.0)).unwrap() - 55.556).abs() < 1e-3);
        assert!((transfer_time(mhz_to_angular(500.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!(transfer_time(0.0).is_err());
    }

    #[test]
    fn fst_transform_first_column() {
        let t = fst_transform(5, PI / 8.0).unwrap();
        let r = 0.5f64.sqrt();
        assert!((t.q[(0, 0)] - r).abs() < 1e-15);
        assert!((t.q[(4, 0)] - r).abs() < 1e-15);
        for i in 1..4 {
            assert!(t.q[(i, 0)].abs() < 1e-15);
        }
    }

    #[test]
    fn fst_transform_zero_angle_is_mirror() {
        let t = fst_transform(3, 0.0).unwrap();
        assert_eq!(t.v, t.r);
        assert_eq!(t.q, t.r);
    }

    #[test]
    fn q_is_v_with_doubled_angle() {
        for n in 2..10 {
            let t = fst_transform(n, 0.37).unwrap();
            let v2 = fst_transform(n, 0.74).unwrap().v;
            assert!((&t.q - v2).norm() < 1e-14);
        }
    }

    #[test]
    fn fst_unitary_first_column_matches_q() {
        for (n, m) in [(3, 1), (5, 4), (7, 2)] {
            let spec = apply_fst_deformation(&build_zigzag(n, m, 1.0).unwrap(), PI / 8.0).unwrap();
            let h = realize(&spec, Basis::single(n)).unwrap().matrix;
            let u = HermitianEigen::new(&h).propagator(PI);
            let t = fst_transform(n, PI / 8.0).unwrap();
            let col: Vec<_> = (0..n).map(|i| u[(i + 1, 1)]).collect();
            for i in 0..n {
                assert!((col[i].norm() - t.q[(i, 0)].abs()).abs() < 1e-6, "N={n}");
            }
            // Up to a global phase the amplitudes agree including relative sign.
            let phase = col[0] / col[0].norm();
            for i in 0..n {
                let z = col[i] / phase;
                assert!((z.re - t.q[(i, 0)]).abs() < 1e-6 || (z.re + t.q[(i, 0)]).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn v_is_symmetric_involution(n in 2usize..10, theta in -3.2f64..3.2) {
            let t = fst_transform(n, theta).unwrap();
            prop_assert!((&t.v - t.v.transpose()).norm() < 1e-12);
            prop_assert!((&t.v * &t.v - DMatrix::<f64>::identity(n, n)).norm() < 1e-12);
            prop_assert!((&t.q * t.q.transpose() - DMatrix::<f64>::identity(n, n)).norm() < 1e-12);
            prop_assert!((t.q[(0, 0)] - (2.0 * theta).sin()).abs() < 1e-12);
            prop_assert!((t.q[(n - 1, 0)] - (2.0 * theta).cos()).abs() < 1e-12);
        }

        #[test]
        fn fst_deformation_is_isospectral(n in 2usize..10, m in 0u32..8, theta in -1.5f64..1.5) {
            let base = if n % 2 == 1 && n >= 3 { build_zigzag(n, m, 1.0).unwrap() } else { build_line(n, 1.0).unwrap() };
            let fst = apply_fst_deformation(&base, theta).unwrap();
            let a = chain_spectrum(&base);
            let b = chain_spectrum(&fst);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-10 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn reconstruct_round_trip(n in 2usize..10, m in 0u32..6, j in 0.2f64..3.0) {
            let spec = if n % 2 == 1 && n >= 3 { build_zigzag(n, m, j).unwrap() } else { build_line(n, j).unwrap() };
            let rec = reconstruct_tridiagonal(&chain_spectrum(&spec)).unwrap();
            let scale = 1.0 + 2.0 * m as f64 * j;
            for (a, b) in rec.frequencies().iter().zip(spec.frequencies()) {
                prop_assert!((a - b).abs() < 1e-7 * scale);
            }
            for (a, b) in rec.couplings().iter().zip(spec.couplings()) {
                prop_assert!((a - b).abs() < 1e-7 * scale);
            }
            let (f, c) = rec.mirror_residuals();
            prop_assert!(f <= 1e-10 * scale && c <= 1e-10 * scale * scale);
        }

        #[test]
        fn builders_satisfy_pst(n in 3usize..10, m in 0u32..10, j in 0.2f64..3.0) {
            let n = n | 1;
            let spec = build_zigzag(n, m, j).unwrap();
            let tau = transfer_time(j).unwrap();
            prop_assert!(check_pst_conditions(&spec, tau).ok());
        }
    }
}
