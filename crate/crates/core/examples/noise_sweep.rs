//! F/F0 of dissipation-free 1x5 FST under noise on the even-site frequencies.

use std::f64::consts::PI;

use zigzag_transfer::chain::{apply_fst_deformation, build_zigzag};
use zigzag_transfer::dynamics::NoiseChannelSet;
use zigzag_transfer::noise::{degradation_sweep, NoiseTarget};
use zigzag_transfer::protocol::{EntanglementProtocol, EntanglementTarget, RunSetup};
use zigzag_transfer::spectral::transfer_time;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let j = mhz_to_angular(9.0);
    let setup = RunSetup::flattop(5, transfer_time(j)?)?;
    let sigmas = [0.0, 10.0, 20.0, 30.0];
    println!("m    F/F0 at sigma = {sigmas:?} MHz");
    for m in [0, 4, 6, 50] {
        let spec = apply_fst_deformation(&build_zigzag(5, m, j)?, PI / 8.0)?;
        let p = EntanglementProtocol::calibrate(&spec, setup, EntanglementTarget::Bell { a: 0, b: 4 }, 0)?;
        let c = degradation_sweep(&spec, &p, NoiseTarget::OmegaEven, &sigmas, &NoiseChannelSet::none(5), 40, 1)?;
        let cells: Vec<String> = c
            .mean_ratio
            .iter()
            .zip(c.sem())
            .map(|(a, e)| format!("{a:.3}+-{e:.3}"))
            .collect();
        println!("{m:<4} {}", cells.join("  "));
    }
    Ok(())
}
