//! Lindblad master-equation solver for pulse-shaped Hamiltonians.
//!
//! `dρ/dt = -i[H(t), ρ] + Σ_k (L_k ρ L_k† - ½{L_k†L_k, ρ})` with
//! `H(t) = s_q(t)·H_ω + s_c(t)·H_J`.
//!
//! The default [`Integrator::Split`] propagates steps on which both envelopes
//! are constant with the exact superoperator exponential (Strang splitting
//! with an exact unitary when the Liouville space is large). Steps crossing a
//! pulse edge use Strang splitting: half a step of exact dissipation, a
//! fourth-order Magnus unitary, half a step of exact dissipation.
//! [`Integrator::Rk4`] is plain fixed-step RK4 on the full generator.

use serde::Serialize;

use crate::dynamics::channels::NoiseChannelSet;
use crate::dynamics::pulse::Schedule;
use crate::dynamics::state::{min_eigenvalue, purity, site_populations, QuantumState};
use crate::error::{Error, Result};
use crate::hamiltonian::{realize_params, Basis, HamiltonianParams, SiteModel};
use crate::linalg::{c, CMatrix, CVector, HermitianEigen, I};

/// Largest Liouville-space dimension for which static steps use the exact superoperator.
const MAX_SUPEROPERATOR_DIM: usize = 400;
/// Tolerance of the trace and positivity checks on the final state.
pub const LINDBLAD_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Split,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    /// Maximum step (ns); the actual step divides the schedule evenly.
    pub dt: f64,
    pub integrator: Integrator,
    /// Record a sample every this many steps; 0 records only start and end.
    pub record_every: usize,
}

impl Default for LindbladOptions {
    fn default() -> Self {
        Self {
            dt: 0.05,
            integrator: Integrator::Split,
            record_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sample {
    pub t_ns: f64,
    pub populations: Vec<f64>,
    pub trace: f64,
    pub purity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub basis: Basis,
    pub samples: Vec<Sample>,
    pub final_state: CMatrix,
}

impl Trajectory {
    pub fn final_populations(&self) -> Vec<f64> {
        site_populations(self.basis, &self.final_state)
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t_ns)
    }
}

fn sample(basis: Basis, t: f64, rho: &CMatrix) -> Sample {
    Sample {
        t_ns: t,
        populations: site_populations(basis, rho),
        trace: rho.trace().re,
        purity: purity(rho),
    }
}

fn vectorize(rho: &CMatrix) -> CVector {
    CVector::from_column_slice(rho.as_slice())
}

fn unvectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Column-stacking Liouvillian of `H` and the collapse operators.
pub fn liouvillian(h: &CMatrix, collapse: &[CMatrix]) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let mut l = id.kronecker(h) * (-I) + h.transpose().kronecker(&id) * I;
    for op in collapse {
        let ll = op.adjoint() * op;
        l += op.conjugate().kronecker(op);
        l -= id.kronecker(&ll) * c(0.5);
        l -= ll.transpose().kronecker(&id) * c(0.5);
    }
    l
}

fn dissipator(collapse: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    for op in collapse {
        let od = op.adjoint();
        let ll = &od * op;
        out += op * rho * &od - (&ll * rho + rho * &ll) * c(0.5);
    }
    out
}

enum StaticStep {
    Superoperator(CMatrix),
    Unitary(CMatrix),
}

struct Solver<'a> {
    basis: Basis,
    h_q: CMatrix,
    h_c: CMatrix,
    channels: &'a NoiseChannelSet,
    collapse: Vec<CMatrix>,
    schedule: &'a Schedule,
    step: f64,
    cache: Vec<((f64, f64), StaticStep)>,
    common_eigen: Option<HermitianEigen>,
}

impl Solver<'_> {
    fn hamiltonian(&self, vq: f64, vc: f64) -> CMatrix {
        &self.h_q * c(vq) + &self.h_c * c(vc)
    }

    fn dissipate(&self, rho: &mut CMatrix, h: f64) {
        self.channels.apply_exact(self.basis, rho, h);
    }

    fn static_step(&mut self, vq: f64, vc: f64, rho: &CMatrix) -> CMatrix {
        let d = self.basis.dim();
        if vq == 0.0 && vc == 0.0 {
            let mut r = rho.clone();
            self.dissipate(&mut r, self.step);
            return r;
        }
        let pos = match self.cache.iter().position(|(k, _)| *k == (vq, vc)) {
            Some(p) => p,
            None => {
                let h = self.hamiltonian(vq, vc);
                let op = if d * d <= MAX_SUPEROPERATOR_DIM {
                    StaticStep::Superoperator((liouvillian(&h, &self.collapse) * c(self.step)).exp())
                } else {
                    StaticStep::Unitary(HermitianEigen::new(&h).propagator(self.step))
                };
                self.cache.push(((vq, vc), op));
                self.cache.len() - 1
            }
        };
        match &self.cache[pos].1 {
            StaticStep::Superoperator(p) => unvectorize(&(p * vectorize(rho)), d),
            StaticStep::Unitary(u) => {
                let mut r = rho.clone();
                self.dissipate(&mut r, 0.5 * self.step);
                r = u * r * u.adjoint();
                self.dissipate(&mut r, 0.5 * self.step);
                r
            }
        }
    }

    fn ramp_unitary(&self, t0: f64) -> CMatrix {
        let h = self.step;
        let t1 = t0 + h;
        let aq = self.schedule.qubit.area(t0, t1);
        let ac = self.schedule.coupler.area(t0, t1);
        if let Some(eig) = &self.common_eigen {
            return eig.propagator(aq);
        }
        let g = 3f64.sqrt() / 6.0;
        let (ta, tb) = (t0 + h * (0.5 - g), t0 + h * (0.5 + g));
        let (qa, ca) = (self.schedule.qubit.value(ta), self.schedule.coupler.value(ta));
        let (qb, cb) = (self.schedule.qubit.value(tb), self.schedule.coupler.value(tb));
        let mut m = self.hamiltonian(aq, ac);
        let coeff = qb * ca - cb * qa;
        if coeff != 0.0 {
            let comm = &self.h_q * &self.h_c - &self.h_c * &self.h_q;
            m -= comm * (I * (3f64.sqrt() / 12.0 * h * h * coeff));
        }
        HermitianEigen::new(&m).propagator(1.0)
    }

    fn split_step(&mut self, k: usize, rho: &CMatrix) -> CMatrix {
        let t0 = k as f64 * self.step;
        let t1 = (k + 1) as f64 * self.step;
        let vq = self.schedule.qubit.constant_on(t0, t1);
        let vc = self.schedule.coupler.constant_on(t0, t1);
        if let (Some(a), Some(b)) = (vq, vc) {
            return self.static_step(a, b, rho);
        }
        let u = self.ramp_unitary(t0);
        let mut r = rho.clone();
        self.dissipate(&mut r, 0.5 * self.step);
        r = &u * r * u.adjoint();
        self.dissipate(&mut r, 0.5 * self.step);
        r
    }

    fn derivative(&self, t: f64, rho: &CMatrix) -> CMatrix {
        let h = self.hamiltonian(self.schedule.qubit.value(t), self.schedule.coupler.value(t));
        (&h * rho - rho * &h) * (-I) + dissipator(&self.collapse, rho)
    }

    fn rk4_step(&self, k: usize, rho: &CMatrix) -> CMatrix {
        let h = self.step;
        let t = k as f64 * h;
        let k1 = self.derivative(t, rho);
        let k2 = self.derivative(t + 0.5 * h, &(rho + &k1 * c(0.5 * h)));
        let k3 = self.derivative(t + 0.5 * h, &(rho + &k2 * c(0.5 * h)));
        let k4 = self.derivative(t + h, &(rho + &k3 * c(h)));
        rho + (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0)
    }
}

fn split_params(params: &HamiltonianParams) -> (HamiltonianParams, HamiltonianParams) {
    (
        HamiltonianParams {
            frequencies: params.frequencies.clone(),
            bonds: Vec::new(),
        },
        HamiltonianParams {
            frequencies: vec![0.0; params.n_sites()],
            bonds: params.bonds.clone(),
        },
    )
}

/// Evolve `rho0` through `schedule` with the given dissipation.
pub fn evolve_lindblad(
    schedule: &Schedule,
    model: &impl SiteModel,
    rho0: &QuantumState,
    channels: &NoiseChannelSet,
    basis: Basis,
    options: &LindbladOptions,
) -> Result<Trajectory> {
    let params = model.params();
    if params.n_sites() != basis.n_sites() || rho0.basis() != basis {
        return Err(Error::BasisMismatch {
            expected: basis.n_sites(),
            got: if rho0.basis() != basis {
                rho0.basis().n_sites()
            } else {
                params.n_sites()
            },
        });
    }
    if channels.n_sites() != basis.n_sites() {
        return Err(Error::BasisMismatch {
            expected: basis.n_sites(),
            got: channels.n_sites(),
        });
    }
    schedule.check_resolution(options.dt)?;
    let (pq, pc) = split_params(&params);
    let h_q = realize_params(&pq, basis)?;
    let h_c = realize_params(&pc, basis)?;
    let total = schedule.duration();
    let n_steps = ((total / options.dt) - 1e-9).ceil().max(1.0) as usize;
    let step = total / n_steps as f64;
    let common_eigen = schedule
        .is_common()
        .then(|| HermitianEigen::new(&(&h_q + &h_c)));
    let mut solver = Solver {
        basis,
        h_q,
        h_c,
        channels,
        collapse: channels.collapse_operators(basis),
        schedule,
        step,
        cache: Vec::new(),
        common_eigen,
    };

    let mut rho = rho0.density();
    let mut samples = vec![sample(basis, 0.0, &rho)];
    for k in 0..n_steps {
        rho = match options.integrator {
            Integrator::Split => solver.split_step(k, &rho),
            Integrator::Rk4 => solver.rk4_step(k, &rho),
        };
        let last = k + 1 == n_steps;
        if last || (options.record_every > 0 && (k + 1) % options.record_every == 0) {
            samples.push(sample(basis, (k + 1) as f64 * step, &rho));
        }
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > LINDBLAD_TOL {
        return Err(Error::Invariant(format!("trace drifted to {trace}")));
    }
    let min = min_eigenvalue(&rho);
    if min < -LINDBLAD_TOL {
        return Err(Error::Invariant(format!("density matrix eigenvalue {min:e}")));
    }
    Ok(Trajectory {
        basis,
        samples,
        final_state: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{apply_fst_deformation, build_line, build_zigzag, ChainSpec};
    use crate::dynamics::unitary::evolve_unitary;
    use crate::hamiltonian::realize;
    use crate::units::mhz_to_angular;
    use std::f64::consts::PI;

    fn fidelity_pure(rho: &CMatrix, psi: &CVector) -> f64 {
        (psi.adjoint() * rho * psi)[(0, 0)].re
    }

    #[test]
    fn dissipation_free_limit_matches_unitary() {
        let j = mhz_to_angular(9.0);
        let tau = PI / j;
        let spec = apply_fst_deformation(&build_zigzag(5, 4, j).unwrap(), PI / 8.0).unwrap();
        let basis = Basis::single(5);
        let rho0 = QuantumState::excitation(basis, 0).unwrap();
        let traj = evolve_lindblad(
            &Schedule::common(tau).unwrap(),
            &spec,
            &rho0,
            &NoiseChannelSet::none(5),
            basis,
            &LindbladOptions::default(),
        )
        .unwrap();
        let ideal = evolve_unitary(&realize(&spec, basis).unwrap(), &rho0, tau).unwrap();
        let QuantumState::Pure { psi, .. } = ideal else { unreachable!() };
        assert!((fidelity_pure(&traj.final_state, &psi) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn per_class_schedule_without_dissipation_is_unitary_and_close() {
        let j = mhz_to_angular(9.0);
        let tau = PI / j;
        let spec = build_line(5, j).unwrap();
        let basis = Basis::single(5);
        let rho0 = QuantumState::excitation(basis, 0).unwrap();
        let traj = evolve_lindblad(
            &Schedule::per_class(tau).unwrap(),
            &spec,
            &rho0,
            &NoiseChannelSet::none(5),
            basis,
            &LindbladOptions::default(),
        )
        .unwrap();
        assert!((traj.samples.last().unwrap().purity - 1.0).abs() < 1e-10);
        // Line chain has no frequencies, so only the coupler envelope matters.
        assert!((traj.final_populations()[4] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn t1_decay_of_single_site() {
        let spec = ChainSpec::custom(vec![0.0], vec![]).unwrap();
        let basis = Basis::single(1);
        let rho0 = QuantumState::excitation(basis, 0).unwrap();
        let ch = NoiseChannelSet::uniform_t1_t2(1, 2.0, 4.0).unwrap();
        let opts = LindbladOptions {
            dt: 1.0,
            ..Default::default()
        };
        let traj = evolve_lindblad(&Schedule::square(2000.0), &spec, &rho0, &ch, basis, &opts).unwrap();
        assert!((traj.final_populations()[0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn split_agrees_with_rk4_oracle() {
        let j = mhz_to_angular(9.0);
        let tau = PI / j;
        let spec = apply_fst_deformation(&build_zigzag(5, 2, j).unwrap(), PI / 8.0).unwrap();
        let basis = Basis::single(5);
        let rho0 = QuantumState::excitation(basis, 0).unwrap();
        let ch = NoiseChannelSet::uniform_t1_t2(5, 16.0, 0.75).unwrap();
        for schedule in [Schedule::common(tau).unwrap(), Schedule::per_class(tau).unwrap()] {
            let split = evolve_lindblad(&schedule, &spec, &rho0, &ch, basis, &LindbladOptions::default()).unwrap();
            let rk4 = evolve_lindblad(
                &schedule,
                &spec,
                &rho0,
                &ch,
                basis,
                &LindbladOptions {
                    dt: 0.01,
                    integrator: Integrator::Rk4,
                    record_every: 0,
                },
            )
            .unwrap();
            assert!((split.final_state - rk4.final_state).norm() < 1e-6);
        }
    }

    #[test]
    fn full_space_agrees_with_truncated() {
        let j = mhz_to_angular(9.0);
        let spec = apply_fst_deformation(&build_zigzag(3, 1, j).unwrap(), PI / 8.0).unwrap();
        let ch = NoiseChannelSet::uniform_t1_t2(3, 16.0, 0.75).unwrap();
        let sched = Schedule::common(PI / j).unwrap();
        let opts = LindbladOptions::default();
        let single = Basis::single(3);
        let full = Basis::full(3).unwrap();
        let a = evolve_lindblad(&sched, &spec, &QuantumState::excitation(single, 0).unwrap(), &ch, single, &opts)
            .unwrap();
        let b = evolve_lindblad(&sched, &spec, &QuantumState::excitation(full, 0).unwrap(), &ch, full, &opts)
            .unwrap();
        for (x, y) in a.final_populations().iter().zip(b.final_populations()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn halving_dt_changes_little() {
        let j = mhz_to_angular(9.0);
        let spec = apply_fst_deformation(&build_zigzag(5, 50, j).unwrap(), PI / 8.0).unwrap();
        let basis = Basis::single(5);
        let rho0 = QuantumState::excitation(basis, 0).unwrap();
        let ch = NoiseChannelSet::uniform_t1_t2(5, 16.0, 0.75).unwrap();
        for sched in [Schedule::common(PI / j).unwrap(), Schedule::per_class(PI / j).unwrap()] {
            let run = |dt: f64| {
                evolve_lindblad(
                    &sched,
                    &spec,
                    &rho0,
                    &ch,
                    basis,
                    &LindbladOptions {
                        dt,
                        ..Default::default()
                    },
                )
                .unwrap()
                .final_state
            };
            let (a, b) = (run(0.05), run(0.025));
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn excitation_never_increases() {
        let j = mhz_to_angular(9.0);
        let spec = build_zigzag(5, 1, j).unwrap();
        let basis = Basis::single(5);
        let ch = NoiseChannelSet::uniform_t1_t2(5, 5.0, 0.5).unwrap();
        let traj = evolve_lindblad(
            &Schedule::common(PI / j).unwrap(),
            &spec,
            &QuantumState::excitation(basis, 0).unwrap(),
            &ch,
            basis,
            &LindbladOptions {
                record_every: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let totals: Vec<f64> = traj.samples.iter().map(|s| s.populations.iter().sum()).collect();
        for w in totals.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        for s in &traj.samples {
            assert!((s.trace - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn coarse_step_rejected() {
        let spec = build_line(3, 1.0).unwrap();
        let basis = Basis::single(3);
        let r = evolve_lindblad(
            &Schedule::common(3.0).unwrap(),
            &spec,
            &QuantumState::excitation(basis, 0).unwrap(),
            &NoiseChannelSet::none(3),
            basis,
            &LindbladOptions {
                dt: 0.5,
                ..Default::default()
            },
        );
        assert!(matches!(r, Err(Error::Resolution { .. })));
    }
}
