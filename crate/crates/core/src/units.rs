//! Unit conversions.
//!
//! Internally every frequency and coupling is an angular frequency in rad/ns
//! and every time is in ns. Inputs and outputs use ordinary frequency in MHz
//! (`f = ω / 2π`) and coherence times in µs.

use std::f64::consts::PI;

/// Ordinary frequency in MHz to angular frequency in rad/ns.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e-3
}

/// Angular frequency in rad/ns to ordinary frequency in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega * 1e3 / (2.0 * PI)
}

pub fn us_to_ns(t_us: f64) -> f64 {
    t_us * 1e3
}

/// Round to 6 decimal places, the precision used for serialized MHz values.
pub fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for f in [0.0, 1.0, 8.3, -42.5, 1234.5] {
            assert!((angular_to_mhz(mhz_to_angular(f)) - f).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_zero_is_normalized() {
        assert_eq!(round6(-1e-9).to_bits(), 0.0f64.to_bits());
    }
}
