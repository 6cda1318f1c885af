//! Synthetic device: hidden Zpa → parameter maps, linear crosstalk and noisy
//! swap / Ramsey readouts.
//!
//! Elements are the qubits followed by the couplers. Qubits sit at their grid
//! positions, couplers at the midpoint of the bond they mediate. The effective
//! Zpa of an element is its own Zpa plus `crosstalk` times the Zpas of every
//! other element within `crosstalk_radius`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, LatticeSpec};
use crate::error::{Error, Result};
use crate::noise::stream_seed;
use crate::units::angular_to_mhz;

/// Allowed Zpa interval.
pub const ZPA_MIN: f64 = -1.0;
pub const ZPA_MAX: f64 = 1.0;

/// `f(Z) = offset + scale·(Z + b·Z² + c·Z³)`; monotone increasing on the Zpa range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicMap {
    pub offset: f64,
    pub scale: f64,
    pub b: f64,
    pub c: f64,
}

impl CubicMap {
    pub fn eval(&self, z: f64) -> f64 {
        self.offset + self.scale * (z + self.b * z * z + self.c * z * z * z)
    }

    pub fn slope(&self, z: f64) -> f64 {
        self.scale * (1.0 + 2.0 * self.b * z + 3.0 * self.c * z * z)
    }

    /// `Z` with `eval(Z) = value` on `[lo, hi]`, by bisection.
    pub fn invert(&self, value: f64, lo: f64, hi: f64) -> Result<f64> {
        let (flo, fhi) = (self.eval(lo), self.eval(hi));
        if value < flo || value > fhi {
            return Err(Error::OutOfRange {
                zpa: value,
                min: flo,
                max: fhi,
            });
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.eval(m) < value {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Qubit,
    Coupler,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub kind: ElementKind,
    pub position: (f64, f64),
    pub map: CubicMap,
    /// For couplers, the two qubit indices.
    pub ends: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceConfig {
    pub crosstalk: f64,
    pub crosstalk_radius: f64,
    /// Standard deviation of the readout noise on fitted values (MHz).
    pub noise_mhz: f64,
    pub seed: u64,
    /// Nominal qubit frequency around which targets are placed (MHz).
    pub lab_offset_mhz: f64,
}

impl Default for DeviceConfig {
    fn default() -> Self {
        Self {
            crosstalk: 0.03,
            crosstalk_radius: 1.0,
            noise_mhz: 0.02,
            seed: 2024,
            lab_offset_mhz: 4500.0,
        }
    }
}

/// Sampling grid of the simulated swap and Ramsey traces (ns).
const TRACE_STEP: f64 = 2.0;
const TRACE_POINTS: usize = 251;
/// Largest frequency considered by the trace fit (MHz).
const FIT_MAX_MHZ: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Device {
    pub config: DeviceConfig,
    pub elements: Vec<Element>,
    pub n_qubits: usize,
    /// Current Zpa of every element.
    pub zpa: Vec<f64>,
    /// Number of readouts taken per element (keys the readout noise).
    pub readouts: Vec<u64>,
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Where an environment qubit is parked during a Ramsey measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "scheme")]
pub enum Environment {
    /// No dispersive shift (isolated readout).
    Ideal,
    /// Neighbours alternately at `target ± detuning`; `flip` swaps the signs.
    Staggered { detuning_mhz: f64, flip: bool },
    /// Neighbours at `target - detuning`.
    Extreme { detuning_mhz: f64 },
}

impl Device {
    /// Device with the given qubit positions and bonds; map parameters drawn from `config.seed`.
    pub fn new(positions: &[(f64, f64)], bonds: &[(usize, usize)], config: DeviceConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let u = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
        let mut elements = Vec::with_capacity(positions.len() + bonds.len());
        for &p in positions {
            elements.push(Element {
                kind: ElementKind::Qubit,
                position: p,
                map: CubicMap {
                    offset: config.lab_offset_mhz + 20.0 * u.sample(&mut rng),
                    scale: 200.0 * (1.0 + 0.1 * u.sample(&mut rng)),
                    b: 0.1 + 0.05 * u.sample(&mut rng),
                    c: 0.05,
                },
                ends: None,
            });
        }
        for &(a, b) in bonds {
            if a >= positions.len() || b >= positions.len() || a == b {
                return Err(Error::InvalidSize(format!("bad bond ({a}, {b})")));
            }
            let scale = 20.0 * (1.0 + 0.1 * u.sample(&mut rng));
            let (pa, pb) = (positions[a], positions[b]);
            elements.push(Element {
                kind: ElementKind::Coupler,
                position: (0.5 * (pa.0 + pb.0), 0.5 * (pa.1 + pb.1)),
                map: CubicMap {
                    offset: scale,
                    scale,
                    b: 0.15 + 0.05 * u.sample(&mut rng),
                    c: 0.05,
                },
                ends: Some((a, b)),
            });
        }
        let n = elements.len();
        Ok(Self {
            config,
            elements,
            n_qubits: positions.len(),
            zpa: vec![0.0; n],
            readouts: vec![0; n],
        })
    }

    pub fn for_chain(spec: &ChainSpec, config: DeviceConfig) -> Result<Self> {
        let n = spec.n_sites();
        let pos: Vec<(f64, f64)> = (0..n).map(|k| (k as f64, 0.0)).collect();
        let bonds: Vec<(usize, usize)> = (0..n - 1).map(|k| (k, k + 1)).collect();
        Self::new(&pos, &bonds, config)
    }

    pub fn for_lattice(lat: &LatticeSpec, config: DeviceConfig) -> Result<Self> {
        let pos: Vec<(f64, f64)> = (0..lat.rows())
            .flat_map(|r| (0..lat.cols()).map(move |c| (c as f64, r as f64)))
            .collect();
        let bonds: Vec<(usize, usize)> = lat.bonds().into_iter().map(|(a, b, _)| (a, b)).collect();
        Self::new(&pos, &bonds, config)
    }

    pub fn n_couplers(&self) -> usize {
        self.elements.len() - self.n_qubits
    }

    pub fn coupler_element(&self, k: usize) -> usize {
        self.n_qubits + k
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        distance(self.elements[a].position, self.elements[b].position)
    }

    /// Elements whose Zpa leaks into element `e`.
    pub fn crosstalk_neighbours(&self, e: usize) -> Vec<usize> {
        (0..self.elements.len())
            .filter(|&o| o != e && self.distance(e, o) <= self.config.crosstalk_radius + 1e-12)
            .collect()
    }

    fn effective_zpa(&self, e: usize, zpa: &[f64]) -> f64 {
        let leak: f64 = self.crosstalk_neighbours(e).iter().map(|&o| zpa[o]).sum();
        zpa[e] + self.config.crosstalk * leak
    }

    /// Actual parameter of element `e` (MHz) for the Zpa vector `zpa`.
    pub fn true_value_with(&self, e: usize, zpa: &[f64]) -> f64 {
        self.elements[e].map.eval(self.effective_zpa(e, zpa))
    }

    pub fn true_value(&self, e: usize) -> f64 {
        self.true_value_with(e, &self.zpa)
    }

    /// Zpa that reaches `value` with every other element at zero (isolated calibration).
    pub fn isolated_zpa(&self, e: usize, value: f64) -> Result<f64> {
        self.elements[e].map.invert(value, ZPA_MIN, ZPA_MAX)
    }

    /// Zpas that realize `targets` exactly, crosstalk included (fixed-point solve).
    pub fn solve_zpa(&self, targets: &[f64]) -> Result<Vec<f64>> {
        let n = self.elements.len();
        if targets.len() != n {
            return Err(Error::InvalidSize(format!("{} targets for {n} elements", targets.len())));
        }
        let eff: Vec<f64> = targets
            .iter()
            .enumerate()
            .map(|(e, &t)| self.elements[e].map.invert(t, 1.5 * ZPA_MIN, 1.5 * ZPA_MAX))
            .collect::<Result<_>>()?;
        let nbrs: Vec<Vec<usize>> = (0..n).map(|e| self.crosstalk_neighbours(e)).collect();
        let mut z = eff.clone();
        for _ in 0..500 {
            let next: Vec<f64> = (0..n)
                .map(|e| eff[e] - self.config.crosstalk * nbrs[e].iter().map(|&o| z[o]).sum::<f64>())
                .collect();
            let change = next.iter().zip(&z).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            z = next;
            if change < 1e-15 {
                break;
            }
        }
        for &v in &z {
            Self::check_zpa(v)?;
        }
        Ok(z)
    }

    /// Local slope `d value / d Zpa` of element `e` at its current Zpa (MHz per unit).
    pub fn slope(&self, e: usize) -> f64 {
        self.elements[e].map.slope(self.effective_zpa(e, &self.zpa))
    }

    fn check_zpa(zpa: f64) -> Result<()> {
        if !(ZPA_MIN..=ZPA_MAX).contains(&zpa) {
            return Err(Error::OutOfRange {
                zpa,
                min: ZPA_MIN,
                max: ZPA_MAX,
            });
        }
        Ok(())
    }

    fn readout_noise(&self, e: usize, readout: u64) -> f64 {
        if self.config.noise_mhz == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.config.seed, 1, e as u64, readout));
        let z: f64 = StandardNormal.sample(&mut rng);
        self.config.noise_mhz * z
    }

    /// Swap readout of coupler `k` with its Zpa set to `zpa`, without touching the device.
    ///
    /// `readout` is the per-element readout index that keys the noise.
    pub fn swap_readout(&self, k: usize, zpa: f64, readout: u64, others: &[f64]) -> Result<f64> {
        Self::check_zpa(zpa)?;
        let e = self.coupler_element(k);
        let mut z = others.to_vec();
        z[e] = zpa;
        let j = self.true_value_with(e, &z);
        let omega = 2.0 * std::f64::consts::PI * j * 1e-3;
        let times: Vec<f64> = (0..TRACE_POINTS).map(|i| i as f64 * TRACE_STEP).collect();
        let trace: Vec<f64> = times.iter().map(|t| (omega * t).sin().powi(2)).collect();
        let fitted = fit_frequency(&times, &trace, |f, t| (2.0 * std::f64::consts::PI * f * 1e-3 * t).sin().powi(2));
        Ok(fitted + self.readout_noise(e, readout))
    }

    /// Ramsey readout of qubit `q` with its Zpa set to `zpa`, reference `reference_mhz`.
    pub fn ramsey_readout(
        &self,
        q: usize,
        zpa: f64,
        readout: u64,
        others: &[f64],
        reference_mhz: f64,
        target_mhz: f64,
        env: Environment,
    ) -> Result<f64> {
        Self::check_zpa(zpa)?;
        let mut z = others.to_vec();
        z[q] = zpa;
        let f = self.true_value_with(q, &z) + self.dispersive_shift(q, &z, target_mhz, env);
        let detuning = f - reference_mhz;
        let times: Vec<f64> = (0..TRACE_POINTS).map(|i| i as f64 * TRACE_STEP).collect();
        let tw = 2.0 * std::f64::consts::PI * 1e-3;
        let trace: Vec<f64> = times.iter().map(|t| 0.5 * (1.0 + (tw * detuning * t).cos())).collect();
        let fitted = fit_frequency(&times, &trace, |d, t| 0.5 * (1.0 + (tw * d * t).cos()));
        Ok(reference_mhz + fitted + self.readout_noise(q, readout))
    }

    /// Frequency shift of qubit `q` from its coupled neighbours parked according to `env`.
    pub fn dispersive_shift(&self, q: usize, zpa: &[f64], target_mhz: f64, env: Environment) -> f64 {
        let fq = self.true_value_with(q, zpa);
        let mut shift = 0.0;
        let mut k = 0;
        for e in self.n_qubits..self.elements.len() {
            let Some((a, b)) = self.elements[e].ends else { continue };
            if a != q && b != q {
                continue;
            }
            let g = self.true_value_with(e, zpa);
            let f_env = match env {
                Environment::Ideal => continue,
                Environment::Staggered { detuning_mhz, flip } => {
                    let up = (k % 2 == 0) != flip;
                    target_mhz + if up { detuning_mhz } else { -detuning_mhz }
                }
                Environment::Extreme { detuning_mhz } => target_mhz - detuning_mhz,
            };
            k += 1;
            shift += g * g / (fq - f_env);
        }
        shift
    }

    /// Set coupler `k` to `zpa` and take one swap readout.
    pub fn swap_experiment(&mut self, k: usize, zpa: f64) -> Result<f64> {
        let e = self.coupler_element(k);
        let v = self.swap_readout(k, zpa, self.readouts[e], &self.zpa.clone())?;
        self.zpa[e] = zpa;
        self.readouts[e] += 1;
        Ok(v)
    }

    /// Set qubit `q` to `zpa` and take one Ramsey readout against `reference_mhz`.
    pub fn ramsey_experiment(&mut self, q: usize, zpa: f64, reference_mhz: f64) -> Result<f64> {
        let v = self.ramsey_readout(
            q,
            zpa,
            self.readouts[q],
            &self.zpa.clone(),
            reference_mhz,
            reference_mhz,
            Environment::Ideal,
        )?;
        self.zpa[q] = zpa;
        self.readouts[q] += 1;
        Ok(v)
    }

    /// Chain parameters (angular, relative to the lab offset) realized by the current Zpas.
    pub fn realized_chain(&self, template: &ChainSpec) -> Result<ChainSpec> {
        self.realized_chain_with(template, &self.zpa)
    }

    pub fn realized_chain_with(&self, template: &ChainSpec, zpa: &[f64]) -> Result<ChainSpec> {
        let to_ang = |mhz: f64| 2.0 * std::f64::consts::PI * mhz * 1e-3;
        let freqs = (0..self.n_qubits)
            .map(|q| to_ang(self.true_value_with(q, zpa) - self.config.lab_offset_mhz))
            .collect();
        let coups = (0..self.n_couplers())
            .map(|k| to_ang(self.true_value_with(self.coupler_element(k), zpa)))
            .collect();
        template.with_parameters(freqs, coups)
    }
}

/// Target values in MHz for a chain: lab-frame qubit frequencies and couplings.
pub fn chain_targets(spec: &ChainSpec, lab_offset_mhz: f64) -> (Vec<f64>, Vec<f64>) {
    (
        spec.frequencies().iter().map(|&w| lab_offset_mhz + angular_to_mhz(w)).collect(),
        spec.couplings().iter().map(|&c| angular_to_mhz(c)).collect(),
    )
}

pub fn lattice_targets(lat: &LatticeSpec, lab_offset_mhz: f64) -> (Vec<f64>, Vec<f64>) {
    (
        lat.site_frequencies().iter().map(|&w| lab_offset_mhz + angular_to_mhz(w)).collect(),
        lat.bonds().iter().map(|&(_, _, c)| angular_to_mhz(c)).collect(),
    )
}

/// Least-squares frequency fit of a sampled trace: grid search then golden section.
pub fn fit_frequency(times: &[f64], data: &[f64], model: impl Fn(f64, f64) -> f64) -> f64 {
    let loss = |f: f64| -> f64 {
        times
            .iter()
            .zip(data)
            .map(|(&t, &y)| (model(f, t) - y).powi(2))
            .sum()
    };
    let step = 0.05;
    let n = (FIT_MAX_MHZ / step) as usize;
    let (mut best_f, mut best_l) = (0.0, f64::INFINITY);
    for k in 0..=n {
        let f = k as f64 * step;
        let l = loss(f);
        if l < best_l {
            best_l = l;
            best_f = f;
        }
    }
    let (mut a, mut b) = ((best_f - step).max(0.0), best_f + step);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut l1, mut l2) = (loss(x1), loss(x2));
    for _ in 0..100 {
        if l1 < l2 {
            b = x2;
            x2 = x1;
            l2 = l1;
            x1 = b - r * (b - a);
            l1 = loss(x1);
        } else {
            a = x1;
            x1 = x2;
            l1 = l2;
            x2 = a + r * (b - a);
            l2 = loss(x2);
        }
        if b - a < 1e-12 {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::build_zigzag;

    fn noiseless() -> DeviceConfig {
        DeviceConfig {
            noise_mhz: 0.0,
            crosstalk: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn maps_are_monotone_and_invertible() {
        let d = Device::for_chain(&build_zigzag(5, 4, 0.05).unwrap(), DeviceConfig::default()).unwrap();
        for e in &d.elements {
            for k in 0..=100 {
                let z = -1.0 + 0.02 * k as f64;
                assert!(e.map.slope(z) > 0.0);
            }
            let v = e.map.eval(0.3);
            assert!((e.map.invert(v, ZPA_MIN, ZPA_MAX).unwrap() - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_fit_recovers_coupling() {
        let mut d = Device::for_chain(&build_zigzag(3, 1, 0.05).unwrap(), noiseless()).unwrap();
        let e = d.coupler_element(0);
        let z = d.isolated_zpa(e, 10.0).unwrap();
        let j = d.swap_experiment(0, z).unwrap();
        assert!((j - 10.0).abs() < 0.01);
    }

    #[test]
    fn swap_on_linear_map_is_exact() {
        let mut d = Device::for_chain(&build_zigzag(3, 1, 0.05).unwrap(), noiseless()).unwrap();
        let e = d.coupler_element(1);
        d.elements[e].map = CubicMap {
            offset: 15.0,
            scale: 8.0,
            b: 0.0,
            c: 0.0,
        };
        let j = d.swap_experiment(1, 0.25).unwrap();
        assert!((j - 17.0).abs() < 1e-8);
    }

    #[test]
    fn ramsey_fit_recovers_frequency() {
        let mut d = Device::for_chain(&build_zigzag(3, 1, 0.05).unwrap(), noiseless()).unwrap();
        let z = d.isolated_zpa(1, 4560.0).unwrap();
        let f = d.ramsey_experiment(1, z, 4530.0).unwrap();
        assert!((f - 4560.0).abs() < 0.01);
    }

    #[test]
    fn readouts_are_deterministic() {
        let spec = build_zigzag(3, 1, 0.05).unwrap();
        let mut a = Device::for_chain(&spec, DeviceConfig::default()).unwrap();
        let mut b = Device::for_chain(&spec, DeviceConfig::default()).unwrap();
        assert_eq!(a.swap_experiment(0, 0.1).unwrap(), b.swap_experiment(0, 0.1).unwrap());
        assert_eq!(a.swap_experiment(0, 0.1).unwrap(), b.swap_experiment(0, 0.1).unwrap());
    }

    #[test]
    fn out_of_range_zpa_rejected() {
        let mut d = Device::for_chain(&build_zigzag(3, 1, 0.05).unwrap(), noiseless()).unwrap();
        assert!(matches!(d.swap_experiment(0, 1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn solved_zpa_hits_targets() {
        let d = Device::for_chain(&build_zigzag(5, 4, 0.05).unwrap(), DeviceConfig::default()).unwrap();
        let targets: Vec<f64> = (0..d.elements.len())
            .map(|e| if e < d.n_qubits { 4510.0 + 10.0 * e as f64 } else { 12.0 })
            .collect();
        let z = d.solve_zpa(&targets).unwrap();
        for (e, t) in targets.iter().enumerate() {
            assert!((d.true_value_with(e, &z) - t).abs() < 1e-9);
        }
    }

    #[test]
    fn crosstalk_is_local() {
        let d = Device::for_chain(&build_zigzag(5, 1, 0.05).unwrap(), DeviceConfig::default()).unwrap();
        // Qubit 0 sees coupler 0 (0.5 away) and qubit 1 (1.0 away), nothing else.
        assert_eq!(d.crosstalk_neighbours(0), vec![1, d.coupler_element(0)]);
    }
}
