//! Small post-processing helpers over fidelity-versus-m curves.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeOff {
    /// Some `m > 0` before the crossing falls below `F(0)`.
    pub dip: bool,
    /// Smallest `m > 0` (after the dip, if any) with `F(m) >= F(0)`.
    pub crossing: Option<u32>,
}

/// Trade-off point of `fidelity[i]` sampled at ascending `ms[i]`; `ms[0]` must be 0.
pub fn trade_off(ms: &[u32], fidelity: &[f64]) -> Option<TradeOff> {
    if ms.first() != Some(&0) || ms.len() != fidelity.len() {
        return None;
    }
    let f0 = fidelity[0];
    let mut dip = false;
    for (&m, &f) in ms.iter().zip(fidelity).skip(1) {
        if f < f0 {
            dip = true;
        } else {
            return Some(TradeOff { dip, crossing: Some(m) });
        }
    }
    Some(TradeOff { dip, crossing: None })
}

/// Whether `values` is strictly decreasing.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dip_then_rise() {
        let t = trade_off(&[0, 1, 2, 4, 6], &[0.9, 0.85, 0.88, 0.91, 0.93]).unwrap();
        assert!(t.dip);
        assert_eq!(t.crossing, Some(4));
    }

    #[test]
    fn monotone_rise_has_no_dip() {
        let t = trade_off(&[0, 1], &[0.9, 0.95]).unwrap();
        assert!(!t.dip);
        assert_eq!(t.crossing, Some(1));
        assert_eq!(trade_off(&[1, 2], &[0.9, 0.8]), None);
    }
}
