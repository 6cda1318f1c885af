//! Zig-zag spectrum against the target spectrum, then rebuild the chain from it.

use zigzag_transfer::chain::build_zigzag;
use zigzag_transfer::spectral::{chain_spectrum, reconstruct_tridiagonal, target_spectrum};

fn main() -> zigzag_transfer::Result<()> {
    for m in [0, 1, 4] {
        let target = target_spectrum(5, m)?;
        let chain = build_zigzag(5, m, 1.0)?;
        let realized = chain_spectrum(&chain);
        println!("m={m} target {:?}", target.values);
        println!("    realized {:?}", realized.iter().map(|x| (x * 1e9).round() / 1e9).collect::<Vec<_>>());
        let rec = reconstruct_tridiagonal(&target.values)?;
        let err = rec
            .couplings()
            .iter()
            .zip(chain.couplings())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("    reconstructed couplings max error {err:.1e}");
    }
    Ok(())
}
