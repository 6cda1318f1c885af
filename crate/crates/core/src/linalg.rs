//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the normalized eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        let n = h.nrows();
        // Symmetrize to remove round-off asymmetry before the solver sees it.
        let sym = (h + h.adjoint()) * c(0.5);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self { values, vectors }
    }

    /// `exp(-i H t)` reconstructed from the decomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lambda * t);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn real_eigenvalues(h: &CMatrix) -> Vec<f64> {
    HermitianEigen::new(h).values
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_residual(h: &CMatrix) -> f64 {
    max_abs_diff(h, &h.adjoint())
}

/// Pairwise (cascade) summation, independent of how the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_matches_series_exponential() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.3),
                C64::new(0.1, 0.2),
                c(0.0),
                C64::new(0.1, -0.2),
                c(-0.4),
                c(0.5),
                c(0.0),
                c(0.5),
                c(1.1),
            ],
        );
        let t = 1.7;
        let eig = HermitianEigen::new(&h);
        let via_eig = eig.propagator(t);
        let via_pade = (h * (-I * t)).exp();
        assert!(max_abs_diff(&via_eig, &via_pade) < 1e-12);
    }

    #[test]
    fn eigenvalues_are_sorted() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0), c(-1.0), c(2.0)]));
        assert_eq!(real_eigenvalues(&h), vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn pairwise_sum_of_ones_is_exact() {
        let xs = vec![1.0; 100];
        assert_eq!(pairwise_sum(&xs) / 100.0, 1.0);
    }
}
