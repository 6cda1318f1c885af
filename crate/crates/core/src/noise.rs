//! Quasi-static Gaussian parameter noise and Monte Carlo fidelity degradation.
//!
//! Every perturbed parameter gets one `N(0, σ)` draw per realization from its
//! own ChaCha8 stream, keyed by `(seed, σ index, sample index, parameter index)`,
//! so results do not depend on evaluation order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::dynamics::channels::NoiseChannelSet;
use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;
use crate::protocol::{EntanglementProtocol, ProcessProtocol};
use crate::units::mhz_to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseTarget {
    /// Frequencies of sites 2, 4, ...
    OmegaEven,
    /// Frequencies of sites 1, 3, ...
    OmegaOdd,
    Couplings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseModel {
    pub target: NoiseTarget,
    /// Standard deviation as an ordinary frequency (MHz).
    pub sigma_mhz: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream for one parameter of one realization.
pub fn stream_seed(seed: u64, sigma_index: u64, sample: u64, parameter: u64) -> u64 {
    [sigma_index, sample, parameter]
        .into_iter()
        .fold(splitmix64(seed), |acc, k| splitmix64(acc ^ splitmix64(k)))
}

/// One standard normal draw for the given key.
pub fn standard_normal(seed: u64, sigma_index: u64, sample: u64, parameter: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, sigma_index, sample, parameter));
    StandardNormal.sample(&mut rng)
}

fn perturb(spec: &ChainSpec, model: &NoiseModel, key: (u64, u64, u64)) -> Result<ChainSpec> {
    if !(model.sigma_mhz >= 0.0) {
        return Err(Error::Precondition(format!("sigma must be non-negative, got {}", model.sigma_mhz)));
    }
    let sigma = mhz_to_angular(model.sigma_mhz);
    let (seed, si, sample) = key;
    let draw = |p: usize| sigma * standard_normal(seed, si, sample, p as u64);
    let mut freqs = spec.frequencies().to_vec();
    let mut coups = spec.couplings().to_vec();
    match model.target {
        NoiseTarget::OmegaEven | NoiseTarget::OmegaOdd => {
            // 0-based index k is site k + 1.
            let want_even = model.target == NoiseTarget::OmegaEven;
            for (k, w) in freqs.iter_mut().enumerate() {
                if ((k + 1) % 2 == 0) == want_even {
                    *w += draw(k);
                }
            }
        }
        NoiseTarget::Couplings => {
            for (k, c) in coups.iter_mut().enumerate() {
                *c += draw(k);
            }
        }
    }
    spec.with_parameters(freqs, coups)
}

/// One noisy realization of `spec`.
pub fn sample_noisy_spec(spec: &ChainSpec, model: &NoiseModel, seed: u64) -> Result<ChainSpec> {
    perturb(spec, model, (seed, 0, 0))
}

/// Anything that turns a chain into a scalar fidelity.
pub trait FidelityMeasure: Sync {
    fn fidelity(&self, spec: &ChainSpec, channels: &NoiseChannelSet) -> Result<f64>;
}

impl FidelityMeasure for EntanglementProtocol {
    fn fidelity(&self, spec: &ChainSpec, channels: &NoiseChannelSet) -> Result<f64> {
        Ok(self.measure(spec, channels)?.report.value)
    }
}

impl FidelityMeasure for ProcessProtocol {
    fn fidelity(&self, spec: &ChainSpec, channels: &NoiseChannelSet) -> Result<f64> {
        Ok(self.measure(spec, channels)?.fidelity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradationCurve {
    pub target: NoiseTarget,
    pub sigma_mhz: Vec<f64>,
    /// Mean of `F/F₀` over the samples.
    pub mean_ratio: Vec<f64>,
    /// Sample standard deviation of `F/F₀`.
    pub std: Vec<f64>,
    pub n_samples: usize,
    /// `F₀`, the fidelity of the unperturbed chain.
    pub baseline: f64,
    pub seed: u64,
}

impl DegradationCurve {
    /// Standard error of the mean at each σ.
    pub fn sem(&self) -> Vec<f64> {
        self.std.iter().map(|s| s / (self.n_samples as f64).sqrt()).collect()
    }

    /// `sigma_mhz,mean_ratio,std,n_samples`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma_mhz,mean_ratio,std,n_samples\n");
        for k in 0..self.sigma_mhz.len() {
            out.push_str(&format!(
                "{:.6},{:.10},{:.10},{}\n",
                self.sigma_mhz[k], self.mean_ratio[k], self.std[k], self.n_samples
            ));
        }
        out
    }
}

/// Mean and sample standard deviation, with order-independent summation.
pub fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    (mean, (pairwise_sum(&sq) / (n - 1.0)).sqrt())
}

/// `F/F₀` statistics for each σ in `sigma_grid`, `n_samples` realizations each.
pub fn degradation_sweep(
    spec: &ChainSpec,
    measure: &impl FidelityMeasure,
    target: NoiseTarget,
    sigma_grid: &[f64],
    channels: &NoiseChannelSet,
    n_samples: usize,
    seed: u64,
) -> Result<DegradationCurve> {
    if n_samples < 2 {
        return Err(Error::Precondition(format!("need at least 2 samples, got {n_samples}")));
    }
    let baseline = measure.fidelity(spec, channels)?;
    if !(baseline > 0.0) {
        return Err(Error::Invariant(format!("baseline fidelity {baseline} is not positive")));
    }
    let mut mean_ratio = Vec::with_capacity(sigma_grid.len());
    let mut std = Vec::with_capacity(sigma_grid.len());
    for (si, &sigma) in sigma_grid.iter().enumerate() {
        let model = NoiseModel {
            target,
            sigma_mhz: sigma,
        };
        let ratios: Vec<f64> = (0..n_samples)
            .into_par_iter()
            .map(|k| {
                let noisy = perturb(spec, &model, (seed, si as u64, k as u64))?;
                Ok(measure.fidelity(&noisy, channels)? / baseline)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (m, s) = mean_and_std(&ratios);
        mean_ratio.push(m);
        std.push(s);
    }
    Ok(DegradationCurve {
        target,
        sigma_mhz: sigma_grid.to_vec(),
        mean_ratio,
        std,
        n_samples,
        baseline,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{apply_fst_deformation, build_zigzag};
    use crate::protocol::{EntanglementTarget, RunSetup};
    use crate::spectral::transfer_time;
    use std::f64::consts::PI;

    #[test]
    fn zero_sigma_is_identity() {
        let spec = build_zigzag(5, 4, 0.05).unwrap();
        let m = NoiseModel {
            target: NoiseTarget::OmegaEven,
            sigma_mhz: 0.0,
        };
        assert_eq!(sample_noisy_spec(&spec, &m, 7).unwrap(), spec);
    }

    #[test]
    fn even_targeting_touches_sites_two_and_four() {
        let spec = build_zigzag(5, 4, 0.05).unwrap();
        let m = NoiseModel {
            target: NoiseTarget::OmegaEven,
            sigma_mhz: 5.0,
        };
        let noisy = sample_noisy_spec(&spec, &m, 11).unwrap();
        let changed: Vec<usize> = (0..5)
            .filter(|&k| noisy.frequencies()[k] != spec.frequencies()[k])
            .collect();
        assert_eq!(changed, vec![1, 3]);
        assert_eq!(noisy.couplings(), spec.couplings());
        assert_eq!(sample_noisy_spec(&spec, &m, 11).unwrap(), noisy);
    }

    #[test]
    fn draws_have_unit_variance() {
        let xs: Vec<f64> = (0..10_000).map(|k| standard_normal(3, 0, k, 1)).collect();
        let (mean, std) = mean_and_std(&xs);
        assert!(mean.abs() < 0.05);
        assert!((std - 1.0).abs() < 0.02);
    }

    #[test]
    fn zero_grid_gives_exactly_one() {
        let j = crate::units::mhz_to_angular(9.0);
        let spec = apply_fst_deformation(&build_zigzag(5, 4, j).unwrap(), PI / 8.0).unwrap();
        let setup = RunSetup::flattop(5, transfer_time(j).unwrap()).unwrap();
        let p = EntanglementProtocol::calibrate(&spec, setup, EntanglementTarget::Bell { a: 0, b: 4 }, 0).unwrap();
        let ch = NoiseChannelSet::uniform_t1_t2(5, 16.0, 0.75).unwrap();
        let curve = degradation_sweep(&spec, &p, NoiseTarget::OmegaEven, &[0.0], &ch, 4, 1).unwrap();
        assert_eq!(curve.mean_ratio, vec![1.0]);
        assert_eq!(curve.std, vec![0.0]);
        let again = degradation_sweep(&spec, &p, NoiseTarget::OmegaEven, &[0.0, 5.0], &ch, 4, 1).unwrap();
        let twice = degradation_sweep(&spec, &p, NoiseTarget::OmegaEven, &[0.0, 5.0], &ch, 4, 1).unwrap();
        assert_eq!(again, twice);
        assert!(again.to_csv().starts_with("sigma_mhz,mean_ratio,std,n_samples\n0.000000,1.0000000000,"));
    }
}
