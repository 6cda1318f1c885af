//! 3x3 lattice FST into a four-corner W state, with T1 = 16 us and Tphi = 0.5 us.

use std::f64::consts::PI;

use zigzag_transfer::chain::build_lattice;
use zigzag_transfer::dynamics::NoiseChannelSet;
use zigzag_transfer::protocol::{EntanglementProtocol, EntanglementTarget, RunSetup};
use zigzag_transfer::spectral::transfer_time;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let j = mhz_to_angular(9.0);
    let setup = RunSetup::flattop(9, transfer_time(j)?)?;
    let noisy = NoiseChannelSet::uniform_t1_tphi(9, 16.0, 0.5)?;
    println!("m    F_W ideal  F_W noisy");
    for m in [0, 4, 10, 50] {
        let lat = build_lattice(3, 3, m, j, Some(PI / 8.0))?;
        let target = EntanglementTarget::W { corners: lat.corners() };
        let p = EntanglementProtocol::calibrate(&lat, setup, target, 0)?;
        let ideal = p.measure(&lat, &NoiseChannelSet::none(9))?.report.value;
        let diss = p.measure(&lat, &noisy)?.report.value;
        println!("{m:<4} {ideal:.5}    {diss:.5}");
    }
    Ok(())
}
