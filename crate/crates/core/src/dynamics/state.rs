//! Pure and mixed states in a [`Basis`].

use crate::error::{Error, Result};
use crate::hamiltonian::Basis;
use crate::linalg::{c, CMatrix, CVector, HermitianEigen, C64};

/// Tolerance for the norm/trace invariants of a state.
pub const STATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure { basis: Basis, psi: CVector },
    Mixed { basis: Basis, rho: CMatrix },
}

impl QuantumState {
    pub fn pure(basis: Basis, psi: CVector) -> Result<Self> {
        if psi.len() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.dim(),
                got: psi.len(),
            });
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Invariant(format!("state norm {norm} != 1")));
        }
        Ok(QuantumState::Pure { basis, psi })
    }

    pub fn mixed(basis: Basis, rho: CMatrix) -> Result<Self> {
        if rho.nrows() != basis.dim() || rho.ncols() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.dim(),
                got: rho.nrows(),
            });
        }
        let s = QuantumState::Mixed { basis, rho };
        s.validate(STATE_TOL)?;
        Ok(s)
    }

    pub fn vacuum(basis: Basis) -> Self {
        let mut psi = CVector::zeros(basis.dim());
        psi[0] = c(1.0);
        QuantumState::Pure { basis, psi }
    }

    /// One excitation on `site` (0-based), all other sites empty.
    pub fn excitation(basis: Basis, site: usize) -> Result<Self> {
        if site >= basis.n_sites() {
            return Err(Error::InvalidSize(format!(
                "site {site} out of range for {} sites",
                basis.n_sites()
            )));
        }
        let mut psi = CVector::zeros(basis.dim());
        psi[basis.site_state(site)] = c(1.0);
        Ok(QuantumState::Pure { basis, psi })
    }

    /// `α|vac⟩ + β|site⟩`, normalized.
    pub fn site_superposition(basis: Basis, site: usize, alpha: C64, beta: C64) -> Result<Self> {
        let mut psi = CVector::zeros(basis.dim());
        psi[0] = alpha;
        psi[basis.site_state(site)] = beta;
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::Precondition("zero superposition".into()));
        }
        Ok(QuantumState::Pure { basis, psi: psi / c(n) })
    }

    pub fn basis(&self) -> Basis {
        match self {
            QuantumState::Pure { basis, .. } | QuantumState::Mixed { basis, .. } => *basis,
        }
    }

    pub fn density(&self) -> CMatrix {
        match self {
            QuantumState::Pure { psi, .. } => psi * psi.adjoint(),
            QuantumState::Mixed { rho, .. } => rho.clone(),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        match self {
            QuantumState::Pure { basis, psi } => {
                let diag: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
                site_populations_from_diag(*basis, &diag)
            }
            QuantumState::Mixed { basis, rho } => site_populations(*basis, rho),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            QuantumState::Pure { psi, .. } => psi.norm_squared(),
            QuantumState::Mixed { rho, .. } => rho.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            QuantumState::Pure { psi, .. } => psi.norm_squared().powi(2),
            QuantumState::Mixed { rho, .. } => purity(rho),
        }
    }

    /// Check norm/trace, Hermiticity and the positivity floor.
    pub fn validate(&self, tol: f64) -> Result<()> {
        match self {
            QuantumState::Pure { psi, .. } => {
                let n = psi.norm();
                if (n - 1.0).abs() > tol {
                    return Err(Error::Invariant(format!("state norm {n} != 1")));
                }
            }
            QuantumState::Mixed { rho, .. } => {
                let tr = rho.trace();
                if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
                    return Err(Error::Invariant(format!("trace {tr} != 1")));
                }
                let herm = crate::linalg::hermiticity_residual(rho);
                if herm > tol {
                    return Err(Error::Invariant(format!("density matrix not Hermitian ({herm:e})")));
                }
                let min = min_eigenvalue(rho);
                if min < -tol {
                    return Err(Error::Invariant(format!("negative eigenvalue {min:e}")));
                }
            }
        }
        Ok(())
    }
}

pub fn purity(rho: &CMatrix) -> f64 {
    rho.iter().map(|z| z.norm_sqr()).sum()
}

pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    HermitianEigen::new(rho).values.first().copied().unwrap_or(0.0)
}

fn site_populations_from_diag(basis: Basis, diag: &[f64]) -> Vec<f64> {
    (0..basis.n_sites())
        .map(|s| {
            diag.iter()
                .enumerate()
                .filter(|(i, _)| basis.occupied(*i, s))
                .map(|(_, p)| p)
                .sum()
        })
        .collect()
}

/// Excitation probability of every site.
pub fn site_populations(basis: Basis, rho: &CMatrix) -> Vec<f64> {
    let diag: Vec<f64> = (0..rho.nrows()).map(|i| rho[(i, i)].re).collect();
    site_populations_from_diag(basis, &diag)
}

/// Occupation bit mask of each basis state (bit `s` set when site `s` is excited).
fn occupation_masks(basis: Basis) -> Vec<u128> {
    (0..basis.dim())
        .map(|i| {
            (0..basis.n_sites())
                .filter(|&s| basis.occupied(i, s))
                .fold(0u128, |m, s| m | 1 << s)
        })
        .collect()
}

/// Reduced density matrix of `sites` (in the given order, first site most significant bit).
pub fn reduced_density(basis: Basis, rho: &CMatrix, sites: &[usize]) -> Result<CMatrix> {
    if basis.n_sites() > 128 {
        return Err(Error::InvalidSize("reduced density limited to 128 sites".into()));
    }
    for &s in sites {
        if s >= basis.n_sites() {
            return Err(Error::InvalidSize(format!("site {s} out of range")));
        }
    }
    let k = sites.len();
    let masks = occupation_masks(basis);
    let sel: u128 = sites.iter().fold(0, |m, &s| m | 1 << s);
    let sub = |mask: u128| -> usize {
        sites
            .iter()
            .enumerate()
            .filter(|(_, &s)| mask >> s & 1 == 1)
            .fold(0usize, |acc, (pos, _)| acc | 1 << (k - 1 - pos))
    };
    let mut out = CMatrix::zeros(1 << k, 1 << k);
    for i in 0..basis.dim() {
        for j in 0..basis.dim() {
            if masks[i] & !sel == masks[j] & !sel {
                out[(sub(masks[i]), sub(masks[j]))] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn excitation_populations() {
        let b = Basis::single(4);
        let s = QuantumState::excitation(b, 2).unwrap();
        assert_eq!(s.populations(), vec![0.0, 0.0, 1.0, 0.0]);
        let f = Basis::full(4).unwrap();
        let s = QuantumState::excitation(f, 2).unwrap();
        assert_eq!(s.populations(), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn invalid_states_rejected() {
        let b = Basis::single(2);
        assert!(QuantumState::pure(b, CVector::from_element(3, c(1.0))).is_err());
        let mut rho = CMatrix::zeros(3, 3);
        rho[(0, 0)] = c(1.2);
        rho[(1, 1)] = c(-0.2);
        assert!(QuantumState::mixed(b, rho).is_err());
    }

    #[test]
    fn reduced_single_qubit_of_superposition() {
        let b = Basis::single(3);
        let s = QuantumState::site_superposition(b, 0, c(1.0), c(1.0)).unwrap();
        let r = reduced_density(b, &s.density(), &[0]).unwrap();
        for z in r.iter() {
            assert!((z.re - 0.5).abs() < 1e-15);
        }
        let r2 = reduced_density(b, &s.density(), &[2]).unwrap();
        assert!((r2[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_density_agrees_between_bases() {
        let single = Basis::single(3);
        let full = Basis::full(3).unwrap();
        let amps = [c(0.3), C64::new(0.1, 0.5), c(-0.4), C64::new(0.2, 0.2)];
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut a = CVector::zeros(4);
        let mut bv = CVector::zeros(8);
        a[0] = amps[0] / n;
        bv[0] = amps[0] / n;
        for s in 0..3 {
            a[single.site_state(s)] = amps[s + 1] / n;
            bv[full.site_state(s)] = amps[s + 1] / n;
        }
        let ra = reduced_density(single, &(&a * a.adjoint()), &[0, 2]).unwrap();
        let rb = reduced_density(full, &(&bv * bv.adjoint()), &[0, 2]).unwrap();
        assert!((ra - rb).norm() < 1e-15);
    }
}
