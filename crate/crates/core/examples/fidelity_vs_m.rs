//! Bell fidelity of a dissipative 1x5 FST run as a function of the zig-zag gap m.

use std::f64::consts::PI;

use zigzag_transfer::chain::{apply_fst_deformation, build_zigzag};
use zigzag_transfer::dynamics::NoiseChannelSet;
use zigzag_transfer::protocol::{EntanglementProtocol, EntanglementTarget, RunSetup};
use zigzag_transfer::spectral::transfer_time;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let n = 5;
    let j = mhz_to_angular(9.0);
    let setup = RunSetup::flattop(n, transfer_time(j)?)?;
    let channels = NoiseChannelSet::uniform_t1_t2(n, 16.0, 0.75)?;
    println!("m  F(Psi-)  F(phase-max)");
    for m in [0, 1, 2, 3, 4, 6, 10, 30, 50] {
        let spec = apply_fst_deformation(&build_zigzag(n, m, j)?, PI / 8.0)?;
        let p = EntanglementProtocol::calibrate(&spec, setup, EntanglementTarget::Bell { a: 0, b: n - 1 }, 0)?;
        let r = p.measure(&spec, &channels)?.report;
        println!("{m:<2} {:.4}   {:.4}", r.value, r.phase_maximized_value);
    }
    Ok(())
}
