//! Crosstalk-aware calibration of a whole device.
//!
//! Each outer cycle calibrates every coupler (swap readout), re-runs the
//! offenders, freezes the couplers and then calibrates every qubit (Ramsey
//! readout). Units farther apart than `parallel_distance` form one batch and
//! are calibrated concurrently.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::device::{Device, ElementKind, Environment};
use crate::calibration::secant::secant_search;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentScheme {
    /// Neighbours staggered at `±stagger`, two rounds with swapped signs, Zpas averaged.
    #[default]
    Staggered,
    /// Neighbours parked far below the target.
    Extreme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub threshold_mhz: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Extra passes over offenders within one stage.
    pub max_passes: usize,
    /// Radius of the environment region around a calibrated element; one of 1, 1.5, 2.
    pub unit_radius: f64,
    pub parallel_distance: f64,
    pub scheme: EnvironmentScheme,
    pub stagger_mhz: f64,
    pub extreme_mhz: f64,
    /// Ramsey reference sits this far below the target.
    pub ramsey_offset_mhz: f64,
    /// Size of the second secant probe, in MHz of the isolated map.
    pub probe_mhz: f64,
    pub concurrent: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            threshold_mhz: 0.1,
            max_outer: 2,
            max_inner: 5,
            max_passes: 3,
            unit_radius: 1.0,
            parallel_distance: 2.0,
            scheme: EnvironmentScheme::Staggered,
            stagger_mhz: 200.0,
            extreme_mhz: 1000.0,
            ramsey_offset_mhz: 30.0,
            probe_mhz: 1.0,
            concurrent: true,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Precondition(msg.to_string()));
        if !(self.threshold_mhz > 0.0) {
            return bad("threshold must be positive");
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.max_passes == 0 {
            return bad("iteration caps must be at least 1");
        }
        if ![1.0, 1.5, 2.0].contains(&self.unit_radius) {
            return bad("unit radius must be 1, 1.5 or 2");
        }
        if !(self.parallel_distance > 0.0) || !(self.probe_mhz > 0.0) {
            return bad("parallel distance and probe must be positive");
        }
        Ok(())
    }

    /// Units closer than this never run in the same batch: their regions would overlap.
    pub fn separation(&self) -> f64 {
        self.parallel_distance.max(2.0 * self.unit_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub element: usize,
    pub kind: ElementKind,
    pub target_mhz: f64,
    pub zpa: f64,
    /// Largest number of readouts used by one secant search.
    pub iterations: usize,
    pub passes: usize,
    pub measured_mhz: f64,
    pub measured_residual_mhz: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub cycle: usize,
    pub couplers: Vec<ParameterReport>,
    pub qubits: Vec<ParameterReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub scheme: EnvironmentScheme,
    pub cycles: Vec<CycleReport>,
    pub zpa: Vec<f64>,
    pub qubit_residuals_mhz: Vec<f64>,
    pub coupler_residuals_mhz: Vec<f64>,
    pub batches: Vec<Vec<usize>>,
    /// Elements that missed the threshold in the last cycle.
    pub flagged: Vec<usize>,
}

impl CalibrationReport {
    pub fn max_true_residual(&self) -> f64 {
        self.qubit_residuals_mhz
            .iter()
            .chain(&self.coupler_residuals_mhz)
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Largest |measured - target| in the last cycle.
    pub fn max_measured_residual(&self) -> f64 {
        self.cycles.last().map_or(0.0, |c| {
            c.couplers
                .iter()
                .chain(&c.qubits)
                .fold(0.0, |m, p| m.max(p.measured_residual_mhz.abs()))
        })
    }

    pub fn max_iterations(&self) -> usize {
        self.cycles
            .iter()
            .flat_map(|c| c.couplers.iter().chain(&c.qubits))
            .map(|p| p.iterations)
            .max()
            .unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,element,kind,target_mhz,zpa,iterations,passes,measured_residual_mhz,converged\n");
        for c in &self.cycles {
            for p in c.couplers.iter().chain(&c.qubits) {
                s.push_str(&format!(
                    "{},{},{},{:.6},{:.9},{},{},{:.6},{}\n",
                    c.cycle,
                    p.element,
                    match p.kind {
                        ElementKind::Qubit => "qubit",
                        ElementKind::Coupler => "coupler",
                    },
                    p.target_mhz,
                    p.zpa,
                    p.iterations,
                    p.passes,
                    p.measured_residual_mhz,
                    p.converged
                ));
            }
        }
        s
    }
}

/// Greedy grouping of `elements` into batches whose members are pairwise farther than `d`.
pub fn parallel_batches(device: &Device, elements: &[usize], d: f64) -> Vec<Vec<usize>> {
    let mut batches: Vec<Vec<usize>> = Vec::new();
    for &e in elements {
        match batches
            .iter_mut()
            .find(|b| b.iter().all(|&o| device.distance(e, o) > d))
        {
            Some(b) => b.push(e),
            None => batches.push(vec![e]),
        }
    }
    batches
}

struct UnitResult {
    element: usize,
    zpa: f64,
    readouts: u64,
    report: ParameterReport,
}

fn calibrate_unit(device: &Device, e: usize, target: f64, cfg: &CalibrationConfig, env: Environment) -> Result<UnitResult> {
    let snapshot = device.zpa.clone();
    let mut readout = device.readouts[e];
    let kind = device.elements[e].kind;
    let slope = device.elements[e].map.slope(snapshot[e]).abs().max(1e-9);
    let out = secant_search(
        snapshot[e],
        target,
        cfg.threshold_mhz,
        cfg.max_inner,
        cfg.probe_mhz / slope,
        |z| {
            let v = match kind {
                ElementKind::Coupler => device.swap_readout(e - device.n_qubits, z, readout, &snapshot),
                ElementKind::Qubit => device.ramsey_readout(
                    e,
                    z,
                    readout,
                    &snapshot,
                    target - cfg.ramsey_offset_mhz,
                    target,
                    env,
                ),
            };
            readout += 1;
            v
        },
    )?;
    Ok(UnitResult {
        element: e,
        zpa: out.zpa,
        readouts: readout,
        report: ParameterReport {
            element: e,
            kind,
            target_mhz: target,
            zpa: out.zpa,
            iterations: out.iterations,
            passes: 1,
            measured_mhz: out.measured,
            measured_residual_mhz: out.measured - target,
            converged: out.converged,
        },
    })
}

/// Calibrate `elements` (with `targets[e]`) to convergence or `max_passes`.
fn run_stage(
    device: &mut Device,
    elements: &[usize],
    targets: &[f64],
    cfg: &CalibrationConfig,
    env: Environment,
) -> Result<Vec<ParameterReport>> {
    let mut reports: Vec<Option<ParameterReport>> = vec![None; device.elements.len()];
    let mut todo = elements.to_vec();
    for _ in 0..cfg.max_passes.max(1) {
        if todo.is_empty() {
            break;
        }
        for batch in parallel_batches(device, &todo, cfg.separation()) {
            let results: Vec<UnitResult> = if cfg.concurrent {
                let snapshot = &*device;
                batch
                    .par_iter()
                    .map(|&e| calibrate_unit(snapshot, e, targets[e], cfg, env))
                    .collect::<Result<_>>()?
            } else {
                let mut out = Vec::with_capacity(batch.len());
                for &e in &batch {
                    let r = calibrate_unit(device, e, targets[e], cfg, env)?;
                    device.zpa[e] = r.zpa;
                    device.readouts[e] = r.readouts;
                    out.push(r);
                }
                out
            };
            for r in results {
                device.zpa[r.element] = r.zpa;
                device.readouts[r.element] = r.readouts;
                let mut rep = r.report;
                if let Some(prev) = &reports[r.element] {
                    rep.passes = prev.passes + 1;
                    rep.iterations = rep.iterations.max(prev.iterations);
                }
                reports[r.element] = Some(rep);
            }
        }
        todo.retain(|&e| !reports[e].as_ref().is_some_and(|r| r.converged));
    }
    Ok(elements.iter().map(|&e| reports[e].clone().expect("calibrated")).collect())
}

/// Calibrate all couplers and qubits of `device` towards the lab-frame targets (MHz).
///
/// Starting Zpas come from the isolated maps. True residuals are evaluated with
/// the final Zpas and no environment.
pub fn calibrate_all(
    device: &mut Device,
    qubit_targets: &[f64],
    coupler_targets: &[f64],
    cfg: &CalibrationConfig,
) -> Result<CalibrationReport> {
    if qubit_targets.len() != device.n_qubits || coupler_targets.len() != device.n_couplers() {
        return Err(Error::InvalidSize(format!(
            "targets for {} qubits / {} couplers, device has {} / {}",
            qubit_targets.len(),
            coupler_targets.len(),
            device.n_qubits,
            device.n_couplers()
        )));
    }
    cfg.validate()?;
    let targets: Vec<f64> = qubit_targets.iter().chain(coupler_targets).copied().collect();
    for (e, &t) in targets.iter().enumerate() {
        device.zpa[e] = device.isolated_zpa(e, t)?;
    }
    let qubits: Vec<usize> = (0..device.n_qubits).collect();
    let couplers: Vec<usize> = (device.n_qubits..device.elements.len()).collect();
    let mut cycles = Vec::with_capacity(cfg.max_outer);
    for cycle in 1..=cfg.max_outer.max(1) {
        let coupler_reports = run_stage(device, &couplers, &targets, cfg, Environment::Ideal)?;
        let qubit_reports = match cfg.scheme {
            EnvironmentScheme::Extreme => run_stage(
                device,
                &qubits,
                &targets,
                cfg,
                Environment::Extreme {
                    detuning_mhz: cfg.extreme_mhz,
                },
            )?,
            EnvironmentScheme::Staggered => {
                let start = device.zpa.clone();
                let env = |flip| Environment::Staggered {
                    detuning_mhz: cfg.stagger_mhz,
                    flip,
                };
                let a = run_stage(device, &qubits, &targets, cfg, env(false))?;
                let za = device.zpa.clone();
                device.zpa.clone_from(&start);
                let b = run_stage(device, &qubits, &targets, cfg, env(true))?;
                for &q in &qubits {
                    device.zpa[q] = 0.5 * (za[q] + device.zpa[q]);
                }
                a.into_iter()
                    .zip(b)
                    .map(|(ra, rb)| {
                        let worse = if ra.measured_residual_mhz.abs() >= rb.measured_residual_mhz.abs() {
                            &ra
                        } else {
                            &rb
                        };
                        ParameterReport {
                            zpa: device.zpa[ra.element],
                            iterations: ra.iterations.max(rb.iterations),
                            passes: ra.passes.max(rb.passes),
                            measured_mhz: worse.measured_mhz,
                            measured_residual_mhz: worse.measured_residual_mhz,
                            converged: ra.converged && rb.converged,
                            ..ra.clone()
                        }
                    })
                    .collect()
            }
        };
        cycles.push(CycleReport {
            cycle,
            couplers: coupler_reports,
            qubits: qubit_reports,
        });
    }
    let residual = |e: usize| device.true_value(e) - targets[e];
    let mut batches = parallel_batches(device, &couplers, cfg.separation());
    batches.extend(parallel_batches(device, &qubits, cfg.separation()));
    let flagged = cycles.last().map_or(Vec::new(), |c: &CycleReport| {
        c.couplers
            .iter()
            .chain(&c.qubits)
            .filter(|p| !p.converged)
            .map(|p| p.element)
            .collect()
    });
    Ok(CalibrationReport {
        flagged,
        scheme: cfg.scheme,
        cycles,
        zpa: device.zpa.clone(),
        qubit_residuals_mhz: qubits.iter().map(|&e| residual(e)).collect(),
        coupler_residuals_mhz: couplers.iter().map(|&e| residual(e)).collect(),
        batches,
    })
}
