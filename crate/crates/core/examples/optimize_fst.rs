//! Recover the N=5 FST chain from a perturbed start with Nelder–Mead and
//! differential evolution.

use std::f64::consts::FRAC_PI_8;

use zigzag_transfer::calibration::device::chain_targets;
use zigzag_transfer::calibration::optimize::perturbed_start;
use zigzag_transfer::calibration::{optimize, CostSpec, Device, DeviceConfig, Method, OptimizationProblem, OptimizeOptions};
use zigzag_transfer::chain::{apply_fst_deformation, build_zigzag};
use zigzag_transfer::spectral::transfer_time;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let j = mhz_to_angular(9.0);
    let spec = apply_fst_deformation(&build_zigzag(5, 4, j)?, FRAC_PI_8)?;
    let cfg = DeviceConfig::default();
    let (q, c) = chain_targets(&spec, cfg.lab_offset_mhz);
    let targets: Vec<f64> = q.into_iter().chain(c).collect();
    let mut device = Device::for_chain(&spec, cfg)?;
    device.zpa = device.solve_zpa(&targets)?;
    let x0 = perturbed_start(&device, &targets, 2.0, 11)?;

    for (method, samples) in [(Method::NelderMead, 15), (Method::DifferentialEvolution, 5)] {
        let problem = OptimizationProblem {
            device: device.clone(),
            template: spec.clone(),
            cost: CostSpec {
                samples,
                tau_ns: transfer_time(j)?,
            },
        };
        let start = problem.evaluate(&x0)?;
        let out = optimize(&problem, &x0, method, &OptimizeOptions::default())?;
        println!(
            "{method:?}: L={samples} start cost {start:.4} -> {:.5} after {} iterations, stable at {}, max |P-0.5| = {:.4}",
            out.search.cost,
            out.search.iterations(),
            out.stabilization_iteration,
            out.max_population_deviation()
        );
    }
    Ok(())
}
