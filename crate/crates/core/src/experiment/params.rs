//! Parameter blocks of each experiment kind. Frequencies in MHz, times in ns,
//! T1 / T2 / Tφ in µs.

use std::f64::consts::FRAC_PI_8;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ExperimentKind, RunError};
use crate::calibration::{CalibrationConfig, DeviceConfig, Method, OptimizeOptions};
use crate::chain::{build_effective_limit, build_lattice, build_line, build_zigzag, ChainKind};
use crate::dynamics::NoiseChannelSet;
use crate::noise::NoiseTarget;

fn fst_angle() -> f64 {
    FRAC_PI_8
}
fn nine() -> f64 {
    9.0
}
fn five() -> usize {
    5
}
fn three() -> usize {
    3
}
fn dt() -> f64 {
    0.05
}
fn record_every() -> usize {
    20
}

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

/// Relaxation and dephasing; exactly one of `t2_us` / `tphi_us`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decoherence {
    pub t1_us: f64,
    #[serde(default)]
    pub t2_us: Option<f64>,
    #[serde(default)]
    pub tphi_us: Option<f64>,
}

impl Decoherence {
    pub fn channels(&self, n_sites: usize) -> crate::Result<NoiseChannelSet> {
        match (self.t2_us, self.tphi_us) {
            (Some(t2), None) => NoiseChannelSet::uniform_t1_t2(n_sites, self.t1_us, t2),
            (None, Some(tphi)) => NoiseChannelSet::uniform_t1_tphi(n_sites, self.t1_us, tphi),
            _ => Err(crate::Error::Precondition("give exactly one of t2_us / tphi_us".into())),
        }
    }

    fn validate(&self) -> Result<(), RunError> {
        if !(self.t1_us > 0.0) {
            return Err(schema("t1_us must be positive"));
        }
        match (self.t2_us, self.tphi_us) {
            (Some(t), None) | (None, Some(t)) if t > 0.0 => Ok(()),
            _ => Err(schema("give exactly one positive t2_us or tphi_us")),
        }
    }
}

pub fn channels_for(d: &Option<Decoherence>, n_sites: usize) -> crate::Result<NoiseChannelSet> {
    match d {
        Some(d) => d.channels(n_sites),
        None => Ok(NoiseChannelSet::none(n_sites)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// One flattop envelope for every parameter.
    #[default]
    Common,
    /// Separate qubit and coupler edge widths.
    PerClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildParams {
    pub kind: ChainKind,
    #[serde(default = "five")]
    pub n_sites: usize,
    #[serde(default)]
    pub m: u32,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "fst_angle")]
    pub theta_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumCheckParams {
    pub n_values: Vec<usize>,
    pub m_values: Vec<u32>,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PstRunParams {
    pub n_values: Vec<usize>,
    pub m_values: Vec<u32>,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    /// Points of the ideal population trajectory over `[0, 2τ]`; 0 writes none.
    #[serde(default)]
    pub trajectory_points: usize,
    #[serde(default)]
    pub decoherence: Option<Decoherence>,
    #[serde(default = "dt")]
    pub dt_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FstRunParams {
    #[serde(default = "five")]
    pub n_sites: usize,
    pub m_values: Vec<u32>,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "fst_angle")]
    pub theta_rad: f64,
    #[serde(default)]
    pub decoherence: Option<Decoherence>,
    #[serde(default)]
    pub pulse: PulseKind,
    #[serde(default = "dt")]
    pub dt_ns: f64,
    #[serde(default = "record_every")]
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFstParams {
    #[serde(default = "three")]
    pub rows: usize,
    #[serde(default = "three")]
    pub cols: usize,
    pub m_values: Vec<u32>,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "fst_angle")]
    pub theta_rad: f64,
    #[serde(default)]
    pub decoherence: Option<Decoherence>,
    #[serde(default)]
    pub pulse: PulseKind,
    #[serde(default = "dt")]
    pub dt_ns: f64,
    #[serde(default = "record_every")]
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransferProtocol {
    /// Bell fidelity of the FST chain.
    #[default]
    Fst,
    /// Process fidelity of the PST chain.
    Pst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepParams {
    #[serde(default)]
    pub protocol: TransferProtocol,
    #[serde(default = "five")]
    pub n_sites: usize,
    pub m_values: Vec<u32>,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "fst_angle")]
    pub theta_rad: f64,
    pub targets: Vec<NoiseTarget>,
    pub sigma_grid_mhz: Vec<f64>,
    #[serde(default = "hundred")]
    pub n_samples: usize,
    #[serde(default)]
    pub decoherence: Option<Decoherence>,
    #[serde(default = "dt")]
    pub dt_ns: f64,
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionSpaceParams {
    #[serde(default = "sixty")]
    pub tau_ns: f64,
    /// Reference coupling for the expected detunings `2m·f_J`.
    #[serde(default = "eight_three")]
    pub f_j_mhz: f64,
    #[serde(default = "seventy")]
    pub delta_max_mhz: f64,
    #[serde(default = "twenty")]
    pub j_max_mhz: f64,
    #[serde(default = "delta_points")]
    pub delta_points: usize,
    #[serde(default = "j_points")]
    pub j_points: usize,
    #[serde(default = "threshold")]
    pub threshold: f64,
    /// Write every `export_stride`-th grid point to the map CSV.
    #[serde(default = "stride")]
    pub export_stride: usize,
    /// Random `(Δ, J, t)` triples compared against the unitary propagator.
    #[serde(default = "thousand")]
    pub oracle_samples: usize,
}

fn sixty() -> f64 {
    60.0
}
fn eight_three() -> f64 {
    8.3
}
fn seventy() -> f64 {
    70.0
}
fn twenty() -> f64 {
    20.0
}
fn delta_points() -> usize {
    701
}
fn j_points() -> usize {
    401
}
fn threshold() -> f64 {
    0.99
}
fn stride() -> usize {
    5
}
fn thousand() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    Chain,
    #[default]
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateParams {
    #[serde(default)]
    pub layout: Layout,
    #[serde(default = "five")]
    pub n_sites: usize,
    #[serde(default = "three")]
    pub rows: usize,
    #[serde(default = "three")]
    pub cols: usize,
    #[serde(default = "four")]
    pub m: u32,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "some_fst_angle")]
    pub theta_rad: Option<f64>,
    #[serde(default)]
    pub device: DeviceConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

fn four() -> u32 {
    4
}
fn some_fst_angle() -> Option<f64> {
    Some(FRAC_PI_8)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeRun {
    pub method: Method,
    /// Number of cost sampling points `L`.
    pub samples: usize,
    #[serde(default)]
    pub options: OptimizeOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    #[serde(default = "five")]
    pub n_sites: usize,
    #[serde(default = "four")]
    pub m: u32,
    #[serde(default = "nine")]
    pub f_j_mhz: f64,
    #[serde(default = "fst_angle")]
    pub theta_rad: f64,
    #[serde(default)]
    pub device: DeviceConfig,
    /// Half-width of the uniform perturbation of every free target (MHz).
    #[serde(default = "two")]
    pub perturbation_mhz: f64,
    pub runs: Vec<OptimizeRun>,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parameters {
    Build(BuildParams),
    SpectrumCheck(SpectrumCheckParams),
    PstRun(PstRunParams),
    FstRun(FstRunParams),
    SolutionSpace(SolutionSpaceParams),
    NoiseSweep(NoiseSweepParams),
    LatticeFst(LatticeFstParams),
    Calibrate(CalibrateParams),
    Optimize(OptimizeParams),
}

fn parse<T: DeserializeOwned>(v: &Value) -> Result<T, RunError> {
    serde_json::from_value(v.clone()).map_err(|e| schema(format!("parameters: {e}")))
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(schema(format!("{name} must be positive, got {v}")))
    }
}

fn non_empty<T>(name: &str, v: &[T]) -> Result<(), RunError> {
    if v.is_empty() {
        Err(schema(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

fn check_decoherence(d: &Option<Decoherence>) -> Result<(), RunError> {
    d.as_ref().map_or(Ok(()), |d| d.validate())
}

impl Parameters {
    pub fn from_value(kind: ExperimentKind, v: &Value) -> Result<Self, RunError> {
        Ok(match kind {
            ExperimentKind::Build => Parameters::Build(parse(v)?),
            ExperimentKind::SpectrumCheck => Parameters::SpectrumCheck(parse(v)?),
            ExperimentKind::PstRun => Parameters::PstRun(parse(v)?),
            ExperimentKind::FstRun => Parameters::FstRun(parse(v)?),
            ExperimentKind::SolutionSpace => Parameters::SolutionSpace(parse(v)?),
            ExperimentKind::NoiseSweep => Parameters::NoiseSweep(parse(v)?),
            ExperimentKind::LatticeFst => Parameters::LatticeFst(parse(v)?),
            ExperimentKind::Calibrate => Parameters::Calibrate(parse(v)?),
            ExperimentKind::Optimize => Parameters::Optimize(parse(v)?),
        })
    }

    /// Domain checks that serde cannot express.
    pub fn validate(&self) -> Result<(), RunError> {
        self.validate_ranges()?;
        self.dry_build()
    }

    /// Build every requested chain at unit coupling so size and parity errors surface early.
    fn dry_build(&self) -> Result<(), RunError> {
        let zigzags = |ns: &[usize], ms: &[u32]| -> Result<(), RunError> {
            for &n in ns {
                for &m in ms {
                    build_zigzag(n, m, 1.0)?;
                }
            }
            Ok(())
        };
        match self {
            Parameters::Build(p) => match p.kind {
                ChainKind::Line => build_line(p.n_sites, 1.0).map(|_| ())?,
                ChainKind::Effective => build_effective_limit(p.n_sites, 1.0).map(|_| ())?,
                _ => zigzags(&[p.n_sites], &[p.m])?,
            },
            Parameters::SpectrumCheck(p) => zigzags(&p.n_values, &p.m_values)?,
            Parameters::PstRun(p) => zigzags(&p.n_values, &p.m_values)?,
            Parameters::FstRun(p) => zigzags(&[p.n_sites], &p.m_values)?,
            Parameters::NoiseSweep(p) => zigzags(&[p.n_sites], &p.m_values)?,
            Parameters::LatticeFst(p) => {
                for &m in &p.m_values {
                    build_lattice(p.rows, p.cols, m, 1.0, Some(p.theta_rad))?;
                }
            }
            Parameters::Calibrate(p) => match p.layout {
                Layout::Chain => zigzags(&[p.n_sites], &[p.m])?,
                Layout::Lattice => build_lattice(p.rows, p.cols, p.m, 1.0, p.theta_rad).map(|_| ())?,
            },
            Parameters::Optimize(p) => zigzags(&[p.n_sites], &[p.m])?,
            Parameters::SolutionSpace(_) => {}
        }
        Ok(())
    }

    fn validate_ranges(&self) -> Result<(), RunError> {
        match self {
            Parameters::Build(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                if p.kind == ChainKind::Custom {
                    return Err(schema("kind 'custom' cannot be built from parameters"));
                }
            }
            Parameters::SpectrumCheck(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                non_empty("n_values", &p.n_values)?;
                non_empty("m_values", &p.m_values)?;
            }
            Parameters::PstRun(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                positive("dt_ns", p.dt_ns)?;
                non_empty("n_values", &p.n_values)?;
                non_empty("m_values", &p.m_values)?;
                check_decoherence(&p.decoherence)?;
            }
            Parameters::FstRun(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                positive("dt_ns", p.dt_ns)?;
                non_empty("m_values", &p.m_values)?;
                check_decoherence(&p.decoherence)?;
            }
            Parameters::LatticeFst(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                positive("dt_ns", p.dt_ns)?;
                non_empty("m_values", &p.m_values)?;
                check_decoherence(&p.decoherence)?;
            }
            Parameters::NoiseSweep(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                positive("dt_ns", p.dt_ns)?;
                non_empty("m_values", &p.m_values)?;
                non_empty("targets", &p.targets)?;
                non_empty("sigma_grid_mhz", &p.sigma_grid_mhz)?;
                if p.sigma_grid_mhz.iter().any(|s| !(*s >= 0.0)) {
                    return Err(schema("sigma values must be non-negative"));
                }
                if p.n_samples < 2 {
                    return Err(schema("n_samples must be at least 2"));
                }
                check_decoherence(&p.decoherence)?;
            }
            Parameters::SolutionSpace(p) => {
                positive("tau_ns", p.tau_ns)?;
                positive("f_j_mhz", p.f_j_mhz)?;
                positive("delta_max_mhz", p.delta_max_mhz)?;
                positive("j_max_mhz", p.j_max_mhz)?;
                if p.delta_points < 3 || p.j_points < 3 || p.export_stride == 0 {
                    return Err(schema("grids need at least 3 points and a positive stride"));
                }
            }
            Parameters::Calibrate(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                p.calibration.validate().map_err(RunError::from)?;
            }
            Parameters::Optimize(p) => {
                positive("f_j_mhz", p.f_j_mhz)?;
                non_empty("runs", &p.runs)?;
                if !(p.perturbation_mhz >= 0.0) {
                    return Err(schema("perturbation_mhz must be non-negative"));
                }
                for r in &p.runs {
                    if r.samples == 0 || r.options.max_iterations == 0 {
                        return Err(schema("samples and max_iterations must be at least 1"));
                    }
                }
            }
        }
        Ok(())
    }
}
