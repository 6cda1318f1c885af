//! Relaxation and dephasing channels.
//!
//! Per site: relaxation `L = √Γ₁·σ⁻` and dephasing `L = √γ·n` with
//! `Γ₁ = 1/T₁`, `γ = 2/T_φ` and `1/T_φ = 1/T₂ - 1/(2T₁)`. In the truncated
//! basis these become `√Γ₁·|vac⟩⟨k|` and `√γ·|k⟩⟨k|`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::Basis;
use crate::linalg::{c, CMatrix};
use crate::units::us_to_ns;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseChannelSet {
    /// `1/T₁` per site (1/ns).
    pub gamma1: Vec<f64>,
    /// `2/T_φ` per site (1/ns).
    pub gamma_phi: Vec<f64>,
}

fn rate(t_us: f64) -> f64 {
    if t_us.is_infinite() {
        0.0
    } else {
        1.0 / us_to_ns(t_us)
    }
}

impl NoiseChannelSet {
    pub fn none(n_sites: usize) -> Self {
        Self {
            gamma1: vec![0.0; n_sites],
            gamma_phi: vec![0.0; n_sites],
        }
    }

    /// From per-site `T₁` and `T₂` in µs (infinite values disable a channel).
    pub fn from_t1_t2(t1_us: &[f64], t2_us: &[f64]) -> Result<Self> {
        if t1_us.len() != t2_us.len() {
            return Err(Error::InvalidSize("T1 and T2 lists differ in length".into()));
        }
        let mut gamma1 = Vec::with_capacity(t1_us.len());
        let mut gamma_phi = Vec::with_capacity(t1_us.len());
        for (&t1, &t2) in t1_us.iter().zip(t2_us) {
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::Invariant(format!("coherence times must be positive (T1 {t1}, T2 {t2})")));
            }
            if t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return Err(Error::Invariant(format!("T2 = {t2} µs exceeds 2·T1 = {} µs", 2.0 * t1)));
            }
            let g1 = rate(t1);
            let inv_tphi = (rate(t2) - 0.5 * g1).max(0.0);
            gamma1.push(g1);
            gamma_phi.push(2.0 * inv_tphi);
        }
        Ok(Self { gamma1, gamma_phi })
    }

    pub fn uniform_t1_t2(n_sites: usize, t1_us: f64, t2_us: f64) -> Result<Self> {
        Self::from_t1_t2(&vec![t1_us; n_sites], &vec![t2_us; n_sites])
    }

    /// From `T₁` and the pure dephasing time `T_φ`, both in µs.
    pub fn uniform_t1_tphi(n_sites: usize, t1_us: f64, tphi_us: f64) -> Result<Self> {
        if !(t1_us > 0.0) || !(tphi_us > 0.0) {
            return Err(Error::Invariant("coherence times must be positive".into()));
        }
        Ok(Self {
            gamma1: vec![rate(t1_us); n_sites],
            gamma_phi: vec![2.0 * rate(tphi_us); n_sites],
        })
    }

    pub fn n_sites(&self) -> usize {
        self.gamma1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma1.iter().chain(&self.gamma_phi).all(|&g| g == 0.0)
    }

    /// Collapse operators in `basis` (zero-rate channels omitted).
    pub fn collapse_operators(&self, basis: Basis) -> Vec<CMatrix> {
        let d = basis.dim();
        let mut ops = Vec::new();
        for s in 0..self.n_sites() {
            if self.gamma1[s] > 0.0 {
                let mut l = CMatrix::zeros(d, d);
                let amp = c(self.gamma1[s].sqrt());
                match basis {
                    Basis::SingleExcitation { .. } => l[(0, basis.site_state(s))] = amp,
                    Basis::Full { .. } => {
                        let bit = basis.site_state(s);
                        for i in 0..d {
                            if i & bit != 0 {
                                l[(i ^ bit, i)] = amp;
                            }
                        }
                    }
                }
                ops.push(l);
            }
            if self.gamma_phi[s] > 0.0 {
                let mut l = CMatrix::zeros(d, d);
                let amp = c(self.gamma_phi[s].sqrt());
                for i in 0..d {
                    if basis.occupied(i, s) {
                        l[(i, i)] = amp;
                    }
                }
                ops.push(l);
            }
        }
        ops
    }

    /// Apply the exact dissipative evolution `exp(h·D)` to `rho` in place.
    pub fn apply_exact(&self, basis: Basis, rho: &mut CMatrix, h: f64) {
        match basis {
            Basis::SingleExcitation { n_sites } => {
                let keep: Vec<f64> = self.gamma1.iter().map(|g| (-g * h).exp()).collect();
                // Amplitude decay of each single-excitation state.
                let amp: Vec<f64> = (0..n_sites)
                    .map(|s| (-0.5 * (self.gamma1[s] + self.gamma_phi[s]) * h).exp())
                    .collect();
                let mut gained = 0.0;
                for s in 0..n_sites {
                    let k = s + 1;
                    gained += (1.0 - keep[s]) * rho[(k, k)].re;
                    for t in 0..n_sites {
                        let l = t + 1;
                        if s == t {
                            rho[(k, k)] *= keep[s];
                        } else {
                            rho[(k, l)] *= amp[s] * amp[t];
                        }
                    }
                    rho[(0, k)] *= amp[s];
                    rho[(k, 0)] *= amp[s];
                }
                rho[(0, 0)] += gained;
            }
            Basis::Full { n_sites } => {
                let d = 1usize << n_sites;
                for s in 0..n_sites {
                    let bit = 1usize << (n_sites - 1 - s);
                    let keep = (-self.gamma1[s] * h).exp();
                    let coh = (-0.5 * (self.gamma1[s] + self.gamma_phi[s]) * h).exp();
                    if keep == 1.0 && coh == 1.0 {
                        continue;
                    }
                    for i in 0..d {
                        for j in 0..d {
                            let (bi, bj) = (i & bit != 0, j & bit != 0);
                            match (bi, bj) {
                                (true, true) => {
                                    let v = rho[(i, j)];
                                    rho[(i ^ bit, j ^ bit)] += v * (1.0 - keep);
                                    rho[(i, j)] = v * keep;
                                }
                                (true, false) | (false, true) => rho[(i, j)] *= coh,
                                (false, false) => {}
                            }
                        }
                    }
                }
            }
        }
    }
}
