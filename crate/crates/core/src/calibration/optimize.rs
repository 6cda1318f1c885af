//! Feedback optimization of device Zpas against the sampled end-site populations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::device::{Device, ZPA_MAX, ZPA_MIN};
use crate::calibration::differential_evolution::{differential_evolution, DifferentialEvolutionOptions};
use crate::calibration::nelder_mead::{nelder_mead, NelderMeadOptions, SearchResult};
use crate::chain::ChainSpec;
use crate::dynamics::{Propagator, QuantumState};
use crate::error::{Error, Result};
use crate::hamiltonian::{realize, Basis};

/// Sum of end-site populations below which a sample counts as maximal mismatch.
pub const COST_GUARD: f64 = 1e-6;

/// Samples at `t_l = (2l - 1)·tau`, `l = 1..=samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub samples: usize,
    pub tau_ns: f64,
}

impl CostSpec {
    pub fn times(&self) -> Vec<f64> {
        (1..=self.samples).map(|l| (2 * l - 1) as f64 * self.tau_ns).collect()
    }
}

/// `(1/L) Σ |P1 - PN| / (P1 + PN)`.
pub fn population_cost(first: &[f64], last: &[f64]) -> f64 {
    let terms: Vec<f64> = first
        .iter()
        .zip(last)
        .map(|(&a, &b)| if a + b < COST_GUARD { 1.0 } else { (a - b).abs() / (a + b) })
        .collect();
    crate::linalg::pairwise_sum(&terms) / terms.len().max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    NelderMead,
    DifferentialEvolution,
}

/// A device, the chain it should realize and the cost sampling.
///
/// The free variables are the Zpas of every element except qubit 0.
#[derive(Debug, Clone)]
pub struct OptimizationProblem {
    pub device: Device,
    pub template: ChainSpec,
    pub cost: CostSpec,
}

impl OptimizationProblem {
    pub fn n_free(&self) -> usize {
        self.device.elements.len() - 1
    }

    pub fn full_zpa(&self, x: &[f64]) -> Vec<f64> {
        std::iter::once(self.device.zpa[0]).chain(x.iter().copied()).collect()
    }

    /// End-site populations at the sample times, starting from an excitation on site 1.
    pub fn sampled_populations(&self, zpa: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let spec = self.device.realized_chain_with(&self.template, zpa)?;
        let n = spec.n_sites();
        let basis = Basis::single(n);
        let prop = Propagator::new(&realize(&spec, basis)?);
        let start = QuantumState::excitation(basis, 0)?;
        let series = prop.population_series(&start, &self.cost.times())?;
        Ok(series.iter().map(|p| (p[0], p[n - 1])).unzip())
    }

    /// Cost of the free Zpas `x`. Points outside the Zpa range cost `1 + overshoot`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let over: f64 = x.iter().map(|&z| (z - ZPA_MAX).max(ZPA_MIN - z).max(0.0)).sum();
        if over > 0.0 {
            return Ok(1.0 + over);
        }
        let (a, b) = self.sampled_populations(&self.full_zpa(x))?;
        let c = population_cost(&a, &b);
        if !c.is_finite() {
            return Err(Error::CostEvaluation(format!("non-finite cost at {x:?}")));
        }
        Ok(c)
    }

    /// Local Zpa change per MHz of every free element at `x`.
    fn zpa_per_mhz(&self, x: &[f64]) -> Vec<f64> {
        let z = self.full_zpa(x);
        (1..self.device.elements.len())
            .map(|e| 1.0 / self.device.elements[e].map.slope(z[e]).abs().max(1e-9))
            .collect()
    }
}

/// Free Zpas for the exact targets shifted by independent uniform draws in `±spread_mhz`
/// (qubit 0 keeps its exact target).
pub fn perturbed_start(device: &Device, targets: &[f64], spread_mhz: f64, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifted: Vec<f64> = targets
        .iter()
        .enumerate()
        .map(|(e, &t)| if e == 0 { t } else { t + rng.random_range(-spread_mhz..=spread_mhz) })
        .collect();
    let z = device.solve_zpa(&shifted)?;
    Ok(z[1..].to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeOptions {
    pub max_iterations: usize,
    /// Initial simplex step, MHz-equivalent per parameter.
    pub simplex_mhz: f64,
    /// Half-width of the DE search box, MHz-equivalent per parameter.
    pub box_mhz: f64,
    pub population: usize,
    pub mutation: f64,
    pub crossover: f64,
    pub seed: u64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            simplex_mhz: 0.5,
            box_mhz: 5.0,
            population: 15,
            mutation: 0.6,
            crossover: 0.8,
            seed: 7,
        }
    }
}

/// Tolerance on the best-so-far cost used to define stabilization.
pub const STABILIZATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeOutcome {
    pub method: Method,
    pub search: SearchResult,
    /// Full Zpa vector (qubit 0 included) at the best point.
    pub zpa: Vec<f64>,
    pub stabilization_iteration: usize,
    pub first_populations: Vec<f64>,
    pub last_populations: Vec<f64>,
}

impl OptimizeOutcome {
    pub fn trace_json(&self) -> serde_json::Value {
        serde_json::json!({
            "method": self.method,
            "final_cost": self.search.cost,
            "iterations": self.search.iterations(),
            "evaluations": self.search.evaluations,
            "stabilization_iteration": self.stabilization_iteration,
            "aborted": self.search.aborted,
            "zpa": self.zpa,
            "trace": self.search.trace_json(),
        })
    }

    /// Largest distance of a sampled end-site population from 0.5.
    pub fn max_population_deviation(&self) -> f64 {
        self.first_populations
            .iter()
            .chain(&self.last_populations)
            .fold(0.0, |m, p| m.max((p - 0.5).abs()))
    }
}

/// Run `method` from the free Zpas `x0`.
pub fn optimize(problem: &OptimizationProblem, x0: &[f64], method: Method, opts: &OptimizeOptions) -> Result<OptimizeOutcome> {
    if x0.len() != problem.n_free() {
        return Err(Error::InvalidSize(format!("{} free Zpas, expected {}", x0.len(), problem.n_free())));
    }
    let scale = problem.zpa_per_mhz(x0);
    let search = match method {
        Method::NelderMead => {
            let step: Vec<f64> = scale.iter().map(|s| s * opts.simplex_mhz).collect();
            nelder_mead(
                |x| problem.evaluate(x),
                x0,
                &step,
                &NelderMeadOptions {
                    max_iterations: opts.max_iterations,
                    ..Default::default()
                },
            )
        }
        Method::DifferentialEvolution => {
            let lower: Vec<f64> = x0.iter().zip(&scale).map(|(x, s)| (x - s * opts.box_mhz).max(ZPA_MIN)).collect();
            let upper: Vec<f64> = x0.iter().zip(&scale).map(|(x, s)| (x + s * opts.box_mhz).min(ZPA_MAX)).collect();
            differential_evolution(
                |x| problem.evaluate(x),
                x0,
                &lower,
                &upper,
                &DifferentialEvolutionOptions {
                    population: opts.population,
                    mutation: opts.mutation,
                    crossover: opts.crossover,
                    max_generations: opts.max_iterations,
                    seed: opts.seed,
                },
            )
        }
    };
    let zpa = problem.full_zpa(&search.x);
    let (first, last) = problem.sampled_populations(&zpa)?;
    Ok(OptimizeOutcome {
        method,
        stabilization_iteration: search.stabilization_iteration(STABILIZATION_TOL),
        search,
        zpa,
        first_populations: first,
        last_populations: last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::device::{chain_targets, DeviceConfig};
    use crate::chain::{apply_fst_deformation, build_zigzag};
    use crate::spectral::transfer_time;
    use crate::units::mhz_to_angular;
    use std::f64::consts::FRAC_PI_8;

    fn problem(samples: usize) -> (OptimizationProblem, Vec<f64>) {
        let j = mhz_to_angular(9.0);
        let spec = apply_fst_deformation(&build_zigzag(5, 4, j).unwrap(), FRAC_PI_8).unwrap();
        let cfg = DeviceConfig::default();
        let (q, c) = chain_targets(&spec, cfg.lab_offset_mhz);
        let targets: Vec<f64> = q.into_iter().chain(c).collect();
        let mut device = Device::for_chain(&spec, cfg).unwrap();
        device.zpa = device.solve_zpa(&targets).unwrap();
        let p = OptimizationProblem {
            device,
            template: spec,
            cost: CostSpec {
                samples,
                tau_ns: transfer_time(j).unwrap(),
            },
        };
        (p, targets)
    }

    #[test]
    fn cost_formula() {
        assert_eq!(population_cost(&[0.5, 0.5], &[0.5, 0.5]), 0.0);
        assert_eq!(population_cost(&[0.0], &[0.0]), 1.0);
        assert!((population_cost(&[0.6, 0.5], &[0.2, 0.5]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn exact_start_has_zero_cost_and_stays() {
        let (p, _) = problem(15);
        let x0 = p.device.zpa[1..].to_vec();
        assert!(p.evaluate(&x0).unwrap() < 1e-10);
        let out = optimize(
            &p,
            &x0,
            Method::NelderMead,
            &OptimizeOptions {
                max_iterations: 50,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.search.cost < 1e-10);
        let moved = out.zpa.iter().zip(&p.device.zpa).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(moved < 1e-3, "{moved}");
    }

    #[test]
    fn out_of_range_is_penalized() {
        let (p, _) = problem(5);
        let mut x = p.device.zpa[1..].to_vec();
        x[0] = 1.2;
        assert!((p.evaluate(&x).unwrap() - 1.2).abs() < 1e-12);
    }

    #[test]
    fn perturbed_start_keeps_first_qubit() {
        let (p, t) = problem(5);
        let x = perturbed_start(&p.device, &t, 2.0, 3).unwrap();
        let z = p.full_zpa(&x);
        assert_eq!(z[0], p.device.zpa[0]);
        for e in 1..z.len() {
            assert!((p.device.true_value_with(e, &z) - t[e]).abs() <= 2.0 + 1e-9);
        }
    }
}
