//! Line, zig-zag, FST and effective-limit parameters for a 1x5 chain at f_J = 9 MHz.

use std::f64::consts::PI;

use zigzag_transfer::chain::{apply_fst_deformation, build_effective_limit, build_line, build_zigzag};
use zigzag_transfer::units::{angular_to_mhz, mhz_to_angular};

fn main() -> zigzag_transfer::Result<()> {
    let j = mhz_to_angular(9.0);
    let chains = [
        ("line", build_line(5, j)?),
        ("zigzag m=4", build_zigzag(5, 4, j)?),
        ("fst m=4", apply_fst_deformation(&build_zigzag(5, 4, j)?, PI / 8.0)?),
        ("effective", build_effective_limit(5, j)?),
    ];
    for (name, spec) in &chains {
        let w: Vec<String> = spec.frequencies().iter().map(|&x| format!("{:7.2}", angular_to_mhz(x))).collect();
        let c: Vec<String> = spec.couplings().iter().map(|&x| format!("{:6.3}", angular_to_mhz(x))).collect();
        println!("{name:<11} f [MHz] {}", w.join(" "));
        println!("{:<11} J [MHz] {}", "", c.join(" "));
    }
    Ok(())
}
