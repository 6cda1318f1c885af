//! Ideal PST end-site population over [0, 2 tau] for m = 0 and m = 4.

use zigzag_transfer::chain::build_zigzag;
use zigzag_transfer::dynamics::analytic::linspace;
use zigzag_transfer::dynamics::{Propagator, QuantumState};
use zigzag_transfer::hamiltonian::{realize, Basis};
use zigzag_transfer::spectral::transfer_time;
use zigzag_transfer::units::mhz_to_angular;

fn main() -> zigzag_transfer::Result<()> {
    let j = mhz_to_angular(9.0);
    let tau = transfer_time(j)?;
    let basis = Basis::single(5);
    let times = linspace(0.0, 2.0 * tau, 9);
    println!("t/tau   P5(m=0)  P5(m=4)  P2+P4(m=4)");
    let series: Vec<Vec<Vec<f64>>> = [0, 4]
        .iter()
        .map(|&m| {
            let prop = Propagator::new(&realize(&build_zigzag(5, m, j)?, basis)?);
            prop.population_series(&QuantumState::excitation(basis, 0)?, &times)
        })
        .collect::<zigzag_transfer::Result<_>>()?;
    for (k, t) in times.iter().enumerate() {
        let (a, b) = (&series[0][k], &series[1][k]);
        println!("{:5.2}   {:.5}  {:.5}  {:.5}", t / tau, a[4], b[4], b[1] + b[3]);
    }
    Ok(())
}
