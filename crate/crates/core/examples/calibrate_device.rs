//! Calibrate a synthetic 3x3 device to the m=4 FST lattice with both
//! environment schemes.

use std::f64::consts::FRAC_PI_8;

use zigzag_transfer::calibration::device::lattice_targets;
use zigzag_transfer::calibration::{calibrate_all, CalibrationConfig, Device, DeviceConfig, EnvironmentScheme};
use zigzag_transfer::chain::build_lattice;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let lat = build_lattice(3, 3, 4, mhz_to_angular(9.0), Some(FRAC_PI_8))?;
    let dev_cfg = DeviceConfig::default();
    let (q, c) = lattice_targets(&lat, dev_cfg.lab_offset_mhz);
    for scheme in [EnvironmentScheme::Staggered, EnvironmentScheme::Extreme] {
        let mut device = Device::for_lattice(&lat, dev_cfg)?;
        let cfg = CalibrationConfig {
            scheme,
            ..Default::default()
        };
        let report = calibrate_all(&mut device, &q, &c, &cfg)?;
        println!(
            "{scheme:?}: max measured residual {:.4} MHz, max true residual {:.4} MHz, max readouts per search {}",
            report.max_measured_residual(),
            report.max_true_residual(),
            report.max_iterations()
        );
        println!("  parallel batches: {:?}", report.batches);
    }
    Ok(())
}
