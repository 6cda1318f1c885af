//! Matrix realizations of the XY model in a chosen basis.
//!
//! The single-excitation basis is `{|vac⟩, |1⟩, ..., |N⟩}` (vacuum first, its
//! row and column are zero). The full basis has `2^N` states; in a state index
//! site 1 is the most significant bit.

use crate::chain::{ChainSpec, LatticeSpec};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

/// Largest system handled in the full `2^N` space.
pub const MAX_FULL_SITES: usize = 12;

/// One hopping term `J (σ⁺_a σ⁻_b + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub coupling: f64,
}

/// Site frequencies plus an arbitrary bond graph.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianParams {
    pub frequencies: Vec<f64>,
    pub bonds: Vec<Bond>,
}

impl HamiltonianParams {
    pub fn n_sites(&self) -> usize {
        self.frequencies.len()
    }

    /// Nearest-neighbour chain `0-1-2-...`.
    pub fn chain(frequencies: Vec<f64>, couplings: &[f64]) -> Self {
        let bonds = couplings
            .iter()
            .enumerate()
            .map(|(k, &coupling)| Bond { a: k, b: k + 1, coupling })
            .collect();
        Self { frequencies, bonds }
    }

    /// Scale every parameter by `s` (used for flattop envelopes).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            frequencies: self.frequencies.iter().map(|w| w * s).collect(),
            bonds: self
                .bonds
                .iter()
                .map(|b| Bond { coupling: b.coupling * s, ..*b })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        for b in &self.bonds {
            if b.a >= n || b.b >= n || b.a == b.b {
                return Err(Error::InvalidSize(format!("bad bond ({}, {}) for {n} sites", b.a, b.b)));
            }
        }
        Ok(())
    }
}

/// Anything that can be turned into [`HamiltonianParams`].
pub trait SiteModel {
    fn params(&self) -> HamiltonianParams;

    fn n_sites(&self) -> usize {
        self.params().n_sites()
    }
}

impl SiteModel for ChainSpec {
    fn params(&self) -> HamiltonianParams {
        HamiltonianParams::chain(self.frequencies().to_vec(), self.couplings())
    }

    fn n_sites(&self) -> usize {
        ChainSpec::n_sites(self)
    }
}

impl SiteModel for LatticeSpec {
    fn params(&self) -> HamiltonianParams {
        HamiltonianParams {
            frequencies: self.site_frequencies(),
            bonds: self
                .bonds()
                .into_iter()
                .map(|(a, b, coupling)| Bond { a, b, coupling })
                .collect(),
        }
    }

    fn n_sites(&self) -> usize {
        LatticeSpec::n_sites(self)
    }
}

impl SiteModel for HamiltonianParams {
    fn params(&self) -> HamiltonianParams {
        self.clone()
    }

    fn n_sites(&self) -> usize {
        HamiltonianParams::n_sites(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    SingleExcitation { n_sites: usize },
    Full { n_sites: usize },
}

impl Basis {
    pub fn single(n_sites: usize) -> Self {
        Basis::SingleExcitation { n_sites }
    }

    pub fn full(n_sites: usize) -> Result<Self> {
        if n_sites > MAX_FULL_SITES {
            return Err(Error::InvalidSize(format!(
                "full space limited to {MAX_FULL_SITES} sites, got {n_sites}"
            )));
        }
        Ok(Basis::Full { n_sites })
    }

    pub fn n_sites(self) -> usize {
        match self {
            Basis::SingleExcitation { n_sites } | Basis::Full { n_sites } => n_sites,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Basis::SingleExcitation { n_sites } => n_sites + 1,
            Basis::Full { n_sites } => 1 << n_sites,
        }
    }

    /// Basis index of the state with one excitation on `site`.
    pub fn site_state(self, site: usize) -> usize {
        match self {
            Basis::SingleExcitation { .. } => site + 1,
            Basis::Full { n_sites } => 1 << (n_sites - 1 - site),
        }
    }

    /// Whether `site` is excited in basis state `index`.
    pub fn occupied(self, index: usize, site: usize) -> bool {
        match self {
            Basis::SingleExcitation { .. } => index == site + 1,
            Basis::Full { n_sites } => index >> (n_sites - 1 - site) & 1 == 1,
        }
    }

    /// Human-readable labels: `vac`, `1`, ..., `N`, or bit strings with site 1 first.
    pub fn labels(self) -> Vec<String> {
        match self {
            Basis::SingleExcitation { n_sites } => std::iter::once("vac".to_string())
                .chain((1..=n_sites).map(|k| k.to_string()))
                .collect(),
            Basis::Full { n_sites } => (0..1usize << n_sites)
                .map(|i| format!("{:0width$b}", i, width = n_sites))
                .collect(),
        }
    }
}

/// A Hermitian matrix together with the basis it is written in.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub basis: Basis,
    pub matrix: CMatrix,
}

impl HamiltonianMatrix {
    pub fn labels(&self) -> Vec<String> {
        self.basis.labels()
    }
}

/// Build the matrix of `model` in `basis`.
pub fn realize(model: &impl SiteModel, basis: Basis) -> Result<HamiltonianMatrix> {
    let params = model.params();
    if params.n_sites() != basis.n_sites() {
        return Err(Error::BasisMismatch {
            expected: basis.n_sites(),
            got: params.n_sites(),
        });
    }
    Ok(HamiltonianMatrix {
        basis,
        matrix: realize_params(&params, basis)?,
    })
}

pub fn realize_params(params: &HamiltonianParams, basis: Basis) -> Result<CMatrix> {
    params.validate()?;
    if params.n_sites() != basis.n_sites() {
        return Err(Error::BasisMismatch {
            expected: basis.n_sites(),
            got: params.n_sites(),
        });
    }
    let dim = basis.dim();
    let mut h = CMatrix::zeros(dim, dim);
    match basis {
        Basis::SingleExcitation { .. } => {
            for (k, &w) in params.frequencies.iter().enumerate() {
                h[(k + 1, k + 1)] = c(w);
            }
            for b in &params.bonds {
                h[(b.a + 1, b.b + 1)] += c(b.coupling);
                h[(b.b + 1, b.a + 1)] += c(b.coupling);
            }
        }
        Basis::Full { n_sites } => {
            let bit = |site: usize| 1usize << (n_sites - 1 - site);
            for i in 0..dim {
                let diag: f64 = params
                    .frequencies
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| i & bit(*k) != 0)
                    .map(|(_, w)| w)
                    .sum();
                h[(i, i)] = c(diag);
                for bnd in &params.bonds {
                    let (ba, bb) = (bit(bnd.a), bit(bnd.b));
                    // σ⁺_a σ⁻_b moves an excitation from b to a.
                    if i & bb != 0 && i & ba == 0 {
                        let j = i ^ bb ^ ba;
                        h[(j, i)] += c(bnd.coupling);
                        h[(i, j)] += c(bnd.coupling);
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Diagonal of the total excitation number operator in `basis`.
pub fn excitation_numbers(basis: Basis) -> Vec<usize> {
    match basis {
        Basis::SingleExcitation { n_sites } => (0..=n_sites).map(|i| usize::from(i > 0)).collect(),
        Basis::Full { n_sites } => (0..1usize << n_sites).map(|i| i.count_ones() as usize).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_lattice, build_line, build_zigzag};
    use crate::linalg::{hermiticity_residual, HermitianEigen};

    #[test]
    fn single_excitation_line_three() {
        let spec = build_line(3, 2.0).unwrap();
        let h = realize(&spec, Basis::single(3)).unwrap();
        assert_eq!(h.matrix.nrows(), 4);
        assert!(h.matrix.row(0).iter().all(|z| z.norm() == 0.0));
        assert_eq!(h.matrix[(1, 2)].re, 2f64.sqrt());
        assert_eq!(h.matrix[(2, 3)].re, 2f64.sqrt());
        assert_eq!(h.matrix[(1, 3)].re, 0.0);
        assert_eq!(h.labels(), vec!["vac", "1", "2", "3"]);
    }

    #[test]
    fn full_space_is_block_diagonal_and_hermitian() {
        let spec = build_zigzag(5, 2, 1.0).unwrap();
        let h = realize(&spec, Basis::full(5).unwrap()).unwrap().matrix;
        assert_eq!(hermiticity_residual(&h), 0.0);
        let nums = excitation_numbers(Basis::full(5).unwrap());
        for i in 0..32 {
            for j in 0..32 {
                if nums[i] != nums[j] {
                    assert_eq!(h[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn full_single_sector_matches_single_basis() {
        let spec = build_zigzag(5, 3, 0.8).unwrap();
        let full = realize(&spec, Basis::full(5).unwrap()).unwrap().matrix;
        let single = realize(&spec, Basis::single(5)).unwrap().matrix;
        let b = Basis::full(5).unwrap();
        for a in 0..5 {
            for c in 0..5 {
                assert_eq!(full[(b.site_state(a), b.site_state(c))], single[(a + 1, c + 1)]);
            }
        }
    }

    #[test]
    fn full_space_rejects_large_n() {
        assert!(matches!(Basis::full(13), Err(Error::InvalidSize(_))));
        assert_eq!(Basis::full(12).unwrap().dim(), 4096);
    }

    #[test]
    fn bit_ordering_puts_site_one_first() {
        let b = Basis::full(3).unwrap();
        assert_eq!(b.site_state(0), 0b100);
        assert_eq!(b.labels()[4], "100");
        assert!(b.occupied(0b101, 2));
    }

    #[test]
    fn basis_mismatch_is_reported() {
        let spec = build_line(3, 1.0).unwrap();
        assert!(matches!(
            realize(&spec, Basis::single(4)),
            Err(Error::BasisMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn lattice_matrix_is_kronecker_sum() {
        let lat = build_lattice(3, 5, 2, 1.0, None).unwrap();
        let h = realize(&lat, Basis::single(15)).unwrap().matrix;
        let hx = realize(lat.row_chain(), Basis::single(5)).unwrap().matrix;
        let hy = realize(lat.col_chain(), Basis::single(3)).unwrap().matrix;
        let hx = hx.view((1, 1), (5, 5)).into_owned();
        let hy = hy.view((1, 1), (3, 3)).into_owned();
        let ix = CMatrix::identity(5, 5);
        let iy = CMatrix::identity(3, 3);
        let sum = hy.kronecker(&ix) + iy.kronecker(&hx);
        let sub = h.view((1, 1), (15, 15)).into_owned();
        assert!((sub - sum).norm() < 1e-14);
        let ev = HermitianEigen::new(&h).values;
        assert_eq!(ev.len(), 16);
    }
}
