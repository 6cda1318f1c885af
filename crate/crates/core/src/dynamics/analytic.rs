//! Closed-form populations of the 3-site chain `ω = (0, Δ, 0)`, `J₁ = J₂ = J`,
//! with the excitation starting on site 1, and the `(Δ, J)` solution-space scan.

use serde::Serialize;

use crate::calibration::nelder_mead::{nelder_mead, NelderMeadOptions};

/// `(P₁, P₂, P₃)` at time `t`, with `Ω² = Δ² + 8J²`.
pub fn analytic_three_site(delta: f64, j: f64, t: f64) -> [f64; 3] {
    let omega = (delta * delta + 8.0 * j * j).sqrt();
    if omega == 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let (so, co) = (0.5 * omega * t).sin_cos();
    let (sd, cd) = (0.5 * delta * t).sin_cos();
    let r = delta / omega;
    let p1 = 0.25 * (co + cd).powi(2) + 0.25 * (r * so + sd).powi(2);
    let p2 = 4.0 * j * j / (omega * omega) * so * so;
    let p3 = 0.25 * (co - cd).powi(2) + 0.25 * (r * so - sd).powi(2);
    [p1, p2, p3]
}

/// `P₃` over a `(Δ, J)` grid at fixed time; `p3[i][k]` belongs to `deltas[i]`, `couplings[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSpace {
    pub tau: f64,
    pub deltas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub p3: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrightSpot {
    pub delta: f64,
    pub coupling: f64,
    pub p3: f64,
}

pub fn sweep_solution_space(tau: f64, deltas: &[f64], couplings: &[f64]) -> SolutionSpace {
    let p3 = deltas
        .iter()
        .map(|&d| couplings.iter().map(|&j| analytic_three_site(d, j, tau)[2]).collect())
        .collect();
    SolutionSpace {
        tau,
        deltas: deltas.to_vec(),
        couplings: couplings.to_vec(),
        p3,
    }
}

impl SolutionSpace {
    /// Grid points that are local maxima (8-neighbourhood) with `P₃ > threshold`.
    pub fn bright_spots(&self, threshold: f64) -> Vec<BrightSpot> {
        let (nd, nc) = (self.deltas.len(), self.couplings.len());
        let mut out: Vec<BrightSpot> = Vec::new();
        for i in 0..nd {
            for k in 0..nc {
                let v = self.p3[i][k];
                if v <= threshold {
                    continue;
                }
                let mut is_max = true;
                for di in -1i64..=1 {
                    for dk in -1i64..=1 {
                        let (a, b) = (i as i64 + di, k as i64 + dk);
                        if (di, dk) == (0, 0) || a < 0 || b < 0 || a >= nd as i64 || b >= nc as i64 {
                            continue;
                        }
                        let w = self.p3[a as usize][b as usize];
                        // Ties go to the earliest grid point.
                        if w > v || (w == v && (a, b) < (i as i64, k as i64)) {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    out.push(BrightSpot {
                        delta: self.deltas[i],
                        coupling: self.couplings[k],
                        p3: v,
                    });
                }
            }
        }
        out
    }
}

/// Polish a grid bright spot to the nearby continuous maximum of `P₃(Δ, J)` at `tau`.
///
/// `scale` sets the initial simplex size (same units as `Δ` and `J`).
pub fn refine_bright_spot(tau: f64, spot: &BrightSpot, scale: f64) -> BrightSpot {
    let f = |x: &[f64]| Ok(-analytic_three_site(x[0], x[1], tau)[2]);
    let r = nelder_mead(
        f,
        &[spot.delta, spot.coupling],
        &[scale, scale],
        &NelderMeadOptions {
            max_iterations: 500,
            f_tol: 1e-15,
        },
    );
    if r.cost <= -spot.p3 {
        BrightSpot {
            delta: r.x[0],
            coupling: r.x[1],
            p3: -r.cost,
        }
    } else {
        *spot
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainSpec;
    use crate::dynamics::state::QuantumState;
    use crate::dynamics::unitary::evolve_unitary;
    use crate::hamiltonian::{realize, Basis};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn initial_and_pst_points() {
        assert_eq!(analytic_three_site(0.3, 1.0, 0.0), [1.0, 0.0, 0.0]);
        let j = 1.0;
        let t = 2.0 * PI / (2.0 * 2f64.sqrt() * j);
        let p = analytic_three_site(0.0, j, t);
        assert!((p[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_coupling_grid_is_dark() {
        let s = sweep_solution_space(60.0, &linspace(-1.0, 1.0, 11), &[0.0]);
        assert!(s.p3.iter().flatten().all(|&p| p.abs() < 1e-15));
        assert!(s.bright_spots(0.99).is_empty());
    }

    #[test]
    fn refined_spot_reaches_unit_transfer() {
        let tau = 60.0;
        let j = PI / tau;
        let deltas = linspace(0.0, 0.4, 81);
        let couplings = linspace(0.0, 0.12, 61);
        let s = sweep_solution_space(tau, &deltas, &couplings);
        let spots = s.bright_spots(0.95);
        let near = spots
            .iter()
            .min_by(|a, b| (a.delta - 2.0 * j).abs().total_cmp(&(b.delta - 2.0 * j).abs()))
            .unwrap();
        let r = refine_bright_spot(tau, near, 0.002);
        assert!(r.p3 > 1.0 - 1e-9);
        assert!((r.delta - 2.0 * j).abs() < 1e-4);
        assert!((r.coupling - 0.5 * j * 6f64.sqrt()).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn matches_unitary_oracle(delta in -3.0f64..3.0, j in 0.01f64..2.0, t in 0.0f64..20.0) {
            let spec = ChainSpec::custom(vec![0.0, delta, 0.0], vec![j, j]).unwrap();
            let h = realize(&spec, Basis::single(3)).unwrap();
            let s = evolve_unitary(&h, &QuantumState::excitation(Basis::single(3), 0).unwrap(), t).unwrap();
            let p = s.populations();
            let a = analytic_three_site(delta, j, t);
            for k in 0..3 {
                prop_assert!((p[k] - a[k]).abs() < 1e-10);
            }
        }
    }
}
