//! Flattop pulses with Gaussian-integral edges.
//!
//! Each edge is `Φ((t - c)/σ)` (standard normal CDF) truncated to `|t - c| ≤ 3σ`
//! and rescaled so that it is exactly 0 before and exactly 1 after the
//! truncation window. The rising edge is centred at `c₁ = buffer`, the falling
//! edge at `c₂ = buffer + plateau`, and the envelope is `g(t - c₁) - g(t - c₂)`.
//! The integral of the unit envelope is therefore exactly `plateau`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const CUT: f64 = 3.0;

fn phi(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / SQRT_2))
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn norm() -> f64 {
    phi(CUT) - phi(-CUT)
}

/// Unit step edge as a function of `x = (t - c)/σ`.
fn edge(x: f64) -> f64 {
    if x <= -CUT {
        0.0
    } else if x >= CUT {
        1.0
    } else {
        (phi(x) - phi(-CUT)) / norm()
    }
}

/// `∫_{-∞}^{x} edge(y) dy`; equals `x` for `x ≥ 3`.
fn edge_integral(x: f64) -> f64 {
    if x <= -CUT {
        0.0
    } else if x >= CUT {
        x
    } else {
        let prim = |y: f64| y * phi(y) + density(y);
        (prim(x) - prim(-CUT) - phi(-CUT) * (x + CUT)) / norm()
    }
}

/// A single flattop pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    /// Edge width (ns).
    pub sigma: f64,
    /// Padding before and after the plateau (ns); edges are centred on its inner boundary.
    pub buffer: f64,
    /// Plateau duration (ns), also the integral of the unit envelope.
    pub plateau: f64,
    pub amplitude: f64,
}

impl PulseShape {
    pub fn new(sigma: f64, buffer: f64, plateau: f64, amplitude: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::Precondition(format!("pulse sigma must be positive, got {sigma}")));
        }
        if buffer < CUT * sigma {
            return Err(Error::Precondition(format!(
                "buffer {buffer} ns shorter than the {CUT}σ edge half-width ({} ns)",
                CUT * sigma
            )));
        }
        if !(plateau >= 0.0) {
            return Err(Error::Precondition(format!("plateau must be non-negative, got {plateau}")));
        }
        Ok(Self {
            sigma,
            buffer,
            plateau,
            amplitude,
        })
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.buffer + self.plateau
    }

    fn centres(&self) -> (f64, f64) {
        (self.buffer, self.buffer + self.plateau)
    }

    pub fn value(&self, t: f64) -> f64 {
        let (c1, c2) = self.centres();
        self.amplitude * (edge((t - c1) / self.sigma) - edge((t - c2) / self.sigma))
    }

    /// `∫_a^b value(t) dt`.
    pub fn area(&self, a: f64, b: f64) -> f64 {
        let (c1, c2) = self.centres();
        let s = self.sigma;
        let prim = |t: f64| s * (edge_integral((t - c1) / s) - edge_integral((t - c2) / s));
        self.amplitude * (prim(b) - prim(a))
    }

    /// The constant value on `[a, b]`, if the pulse is flat there.
    pub fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        let (c1, c2) = self.centres();
        let w = CUT * self.sigma;
        if b <= c1 - w || a >= c2 + w {
            Some(0.0)
        } else if a >= c1 + w && b <= c2 - w {
            Some(self.amplitude)
        } else {
            None
        }
    }
}

/// `amplitude · envelope(t)` for a flattop pulse.
pub fn flattop_gaussian(t: f64, shape: &PulseShape) -> f64 {
    shape.value(t)
}

/// Time profile multiplying a class of Hamiltonian parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Flattop(PulseShape),
    /// Parameters held at their target for `[0, duration]`.
    Square { duration: f64 },
}

impl Envelope {
    pub fn duration(&self) -> f64 {
        match self {
            Envelope::Flattop(p) => p.duration(),
            Envelope::Square { duration } => *duration,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Envelope::Flattop(p) => p.value(t),
            Envelope::Square { duration } => {
                if (0.0..=*duration).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn area(&self, a: f64, b: f64) -> f64 {
        match self {
            Envelope::Flattop(p) => p.area(a, b),
            Envelope::Square { duration } => (b.min(*duration) - a.max(0.0)).max(0.0),
        }
    }

    pub fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        match self {
            Envelope::Flattop(p) => p.constant_on(a, b),
            Envelope::Square { duration } => {
                if a >= 0.0 && b <= *duration {
                    Some(1.0)
                } else if b <= 0.0 || a >= *duration {
                    Some(0.0)
                } else {
                    None
                }
            }
        }
    }

    fn sigma(&self) -> Option<f64> {
        match self {
            Envelope::Flattop(p) => Some(p.sigma),
            Envelope::Square { .. } => None,
        }
    }
}

/// Default edge width for qubit frequency pulses (ns).
pub const QUBIT_SIGMA: f64 = 1.25;
/// Default edge width for coupler pulses (ns).
pub const COUPLER_SIGMA: f64 = 2.0;
/// Default buffer on either side of the plateau (ns).
pub const BUFFER: f64 = 7.5;

/// Envelopes for the frequency terms and the coupling terms of a Hamiltonian.
///
/// `H(t) = s_q(t)·H_ω + s_c(t)·H_J`, where `H_ω` and `H_J` hold the target values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub qubit: Envelope,
    pub coupler: Envelope,
}

impl Schedule {
    /// Every parameter follows one flattop envelope (σ = 1.25 ns, buffer 7.5 ns).
    pub fn common(plateau: f64) -> Result<Self> {
        let p = Envelope::Flattop(PulseShape::new(QUBIT_SIGMA, BUFFER, plateau, 1.0)?);
        Ok(Self { qubit: p, coupler: p })
    }

    /// Qubit pulses with σ = 1.25 ns and coupler pulses with σ = 2 ns, same buffer and plateau.
    pub fn per_class(plateau: f64) -> Result<Self> {
        Ok(Self {
            qubit: Envelope::Flattop(PulseShape::new(QUBIT_SIGMA, BUFFER, plateau, 1.0)?),
            coupler: Envelope::Flattop(PulseShape::new(COUPLER_SIGMA, BUFFER, plateau, 1.0)?),
        })
    }

    pub fn flattop(sigma: f64, buffer: f64, plateau: f64) -> Result<Self> {
        let p = Envelope::Flattop(PulseShape::new(sigma, buffer, plateau, 1.0)?);
        Ok(Self { qubit: p, coupler: p })
    }

    /// Static Hamiltonian switched on for `duration`.
    pub fn square(duration: f64) -> Self {
        let e = Envelope::Square { duration };
        Self { qubit: e, coupler: e }
    }

    pub fn duration(&self) -> f64 {
        self.qubit.duration().max(self.coupler.duration())
    }

    pub fn is_common(&self) -> bool {
        self.qubit == self.coupler
    }

    /// Largest time step that resolves the pulse edges (`σ_min / 5`).
    pub fn max_dt(&self) -> f64 {
        [self.qubit.sigma(), self.coupler.sigma()]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
            / 5.0
    }

    pub fn check_resolution(&self, dt: f64) -> Result<()> {
        let max = self.max_dt();
        if !(dt > 0.0) || dt > max * (1.0 + 1e-12) {
            return Err(Error::Resolution { dt, max });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shape() -> PulseShape {
        PulseShape::new(1.25, 7.5, 55.6, 2.0).unwrap()
    }

    #[test]
    fn plateau_and_start() {
        let p = shape();
        assert_eq!(p.value(p.duration() / 2.0), 2.0);
        assert!(p.value(0.0).abs() <= 1e-4 * 2.0);
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(p.duration()), 0.0);
        assert!((p.value(7.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let p = shape();
        let t_total = p.duration();
        for k in 0..200 {
            let t = t_total * k as f64 / 199.0;
            assert!((p.value(t) - p.value(t_total - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn area_equals_plateau() {
        let p = PulseShape::new(2.0, 7.5, 55.6, 1.0).unwrap();
        assert!((p.area(0.0, p.duration()) - 55.6).abs() < 1e-12);
        let short = PulseShape::new(2.0, 7.5, 3.0, 1.0).unwrap();
        assert!((short.area(-1.0, 30.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn area_matches_quadrature() {
        let p = shape();
        let (a, b) = (4.0, 11.3);
        let n = 20000;
        let h = (b - a) / n as f64;
        let mut s = 0.0;
        for k in 0..n {
            s += p.value(a + (k as f64 + 0.5) * h) * h;
        }
        assert!((p.area(a, b) - s).abs() < 1e-7);
    }

    #[test]
    fn constant_regions() {
        let p = shape();
        assert_eq!(p.constant_on(0.0, 3.75), Some(0.0));
        assert_eq!(p.constant_on(11.25, 20.0), Some(2.0));
        assert_eq!(p.constant_on(3.0, 4.0), None);
    }

    #[test]
    fn buffer_must_cover_edge() {
        assert!(PulseShape::new(3.0, 7.5, 10.0, 1.0).is_err());
        assert!(PulseShape::new(0.0, 7.5, 10.0, 1.0).is_err());
    }

    #[test]
    fn resolution_limit() {
        let s = Schedule::per_class(50.0).unwrap();
        assert!((s.max_dt() - 0.25).abs() < 1e-15);
        assert!(s.check_resolution(0.05).is_ok());
        assert!(matches!(s.check_resolution(0.3), Err(Error::Resolution { .. })));
        assert!(Schedule::square(10.0).check_resolution(1.0).is_ok());
    }

    proptest! {
        #[test]
        fn value_in_unit_range(t in -5.0f64..80.0, sigma in 0.3f64..2.5, plateau in 0.0f64..60.0) {
            let p = PulseShape::new(sigma, 7.5, plateau, 1.0).unwrap();
            let v = p.value(t);
            prop_assert!((0.0..=1.0 + 1e-15).contains(&v));
        }
    }
}
