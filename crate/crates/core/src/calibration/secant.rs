//! Secant root finding on a noisy scalar readout.

use serde::Serialize;

use crate::calibration::device::{ZPA_MAX, ZPA_MIN};
use crate::error::{Error, Result};

/// Smallest readout difference accepted by a secant step (MHz).
pub const SECANT_EPS: f64 = 1e-9;

/// Next Zpa from two probes: `Z1 + k (target - v1)` with `k = (Z1 - Z0)/(v1 - v0)`.
pub fn secant_step(z0: f64, v0: f64, z1: f64, v1: f64, target: f64) -> Result<f64> {
    let dv = v1 - v0;
    if dv.abs() <= SECANT_EPS {
        return Err(Error::DegenerateSecant(dv));
    }
    let k = (z1 - z0) / dv;
    Ok(z1 + k * (target - v1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecantOutcome {
    pub zpa: f64,
    pub measured: f64,
    /// Number of readouts taken.
    pub iterations: usize,
    pub converged: bool,
}

/// Drive `measure(Z)` to `target` within `threshold`, using at most `max_iter` readouts.
///
/// The second probe sits `probe` away from the start, on the side of the target.
/// A degenerate secant re-probes with a doubled offset.
pub fn secant_search(
    start: f64,
    target: f64,
    threshold: f64,
    max_iter: usize,
    probe: f64,
    mut measure: impl FnMut(f64) -> Result<f64>,
) -> Result<SecantOutcome> {
    let clamp = |z: f64| z.clamp(ZPA_MIN, ZPA_MAX);
    let mut z0 = clamp(start);
    let mut v0 = measure(z0)?;
    let mut iterations = 1;
    let done = |v: f64| (v - target).abs() < threshold;
    if done(v0) || max_iter <= 1 {
        return Ok(SecantOutcome {
            zpa: z0,
            measured: v0,
            iterations,
            converged: done(v0),
        });
    }
    let dir = if target >= v0 { 1.0 } else { -1.0 };
    let mut z1 = clamp(z0 + dir * probe);
    if z1 == z0 {
        z1 = clamp(z0 - dir * probe);
    }
    let mut v1 = measure(z1)?;
    iterations += 1;
    let mut offset = probe;
    while !done(v1) && iterations < max_iter {
        let z2 = match secant_step(z0, v0, z1, v1, target) {
            Ok(z) => clamp(z),
            Err(Error::DegenerateSecant(_)) => {
                offset *= 2.0;
                clamp(z1 + dir * offset)
            }
            Err(e) => return Err(e),
        };
        let v2 = measure(z2)?;
        iterations += 1;
        (z0, v0, z1, v1) = (z1, v1, z2, v2);
    }
    Ok(SecantOutcome {
        zpa: z1,
        measured: v1,
        iterations,
        converged: done(v1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_solved_in_one_step() {
        let z = secant_step(0.0, 10.0, 0.1, 12.0, 15.0).unwrap();
        assert!((z - 0.25).abs() < 1e-14);
    }

    #[test]
    fn degenerate_secant_is_an_error() {
        assert!(matches!(
            secant_step(0.0, 3.0, 0.1, 3.0, 5.0),
            Err(Error::DegenerateSecant(_))
        ));
    }

    #[test]
    fn converges_on_cubic() {
        let f = |z: f64| 4500.0 + 200.0 * (z + 0.1 * z * z + 0.05 * z * z * z);
        let out = secant_search(0.0, 4570.0, 0.1, 5, 0.005, |z| Ok(f(z))).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 5);
        assert!((f(out.zpa) - 4570.0).abs() < 0.1);
    }

    #[test]
    fn flat_readout_reprobes_then_gives_up() {
        let out = secant_search(0.0, 5.0, 0.1, 5, 0.01, |_| Ok(1.0)).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 5);
    }
}
