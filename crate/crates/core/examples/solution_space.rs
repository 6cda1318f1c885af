//! Bright spots of the 3-site transfer map at tau = 60 ns.

use zigzag_transfer::dynamics::analytic::linspace;
use zigzag_transfer::dynamics::{refine_bright_spot, sweep_solution_space};
use zigzag_transfer::units::{angular_to_mhz, mhz_to_angular};

fn main() {
    let tau = 60.0;
    let deltas: Vec<f64> = linspace(0.0, 70.0, 351).into_iter().map(mhz_to_angular).collect();
    let js: Vec<f64> = linspace(0.0, 20.0, 201).into_iter().map(mhz_to_angular).collect();
    let space = sweep_solution_space(tau, &deltas, &js);
    println!("delta [MHz]  J [MHz]   P3");
    for spot in space.bright_spots(0.99) {
        let r = refine_bright_spot(tau, &spot, mhz_to_angular(0.1));
        println!("{:10.3}  {:7.3}   {:.9}", angular_to_mhz(r.delta), angular_to_mhz(r.coupling), r.p3);
    }
}
