//! One runner per experiment kind.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::analysis::{strictly_decreasing, trade_off};
use super::params::*;
use super::{RunError, RunOutput};
use crate::calibration::device::{chain_targets, lattice_targets};
use crate::calibration::optimize::perturbed_start;
use crate::calibration::{calibrate_all, optimize, CostSpec, Device, OptimizationProblem};
use crate::chain::{
    apply_fst_deformation, build_effective_limit, build_lattice, build_line, build_zigzag, ChainKind, ChainSpec,
};
use crate::dynamics::export::trajectory_csv;
use crate::dynamics::{
    analytic_three_site, refine_bright_spot, sweep_solution_space, Propagator, QuantumState, Schedule, Trajectory,
};
use crate::dynamics::analytic::linspace;
use crate::dynamics::state::reduced_density;
use crate::error::Result;
use crate::hamiltonian::{realize, Basis};
use crate::metrics::{apply_local_phases, bell_fidelity, bell_singlet, local_phase_frame, w_fidelity, w_state};
use crate::noise::{degradation_sweep, NoiseTarget};
use crate::protocol::{EntanglementProtocol, EntanglementTarget, ProcessProtocol, RunSetup};
use crate::spectral::{chain_spectrum, check_pst_conditions, reconstruct_tridiagonal, target_spectrum, transfer_time};
use crate::units::{angular_to_mhz, mhz_to_angular};

type Files = BTreeMap<String, String>;

pub(super) fn execute(params: &Parameters, seed: u64) -> std::result::Result<RunOutput, RunError> {
    let mut files = Files::new();
    let summary = match params {
        Parameters::Build(p) => build(p, &mut files)?,
        Parameters::SpectrumCheck(p) => spectrum_check(p, &mut files)?,
        Parameters::PstRun(p) => pst_run(p, &mut files)?,
        Parameters::FstRun(p) => fst_run(p, &mut files)?,
        Parameters::SolutionSpace(p) => solution_space(p, seed, &mut files)?,
        Parameters::NoiseSweep(p) => noise_sweep(p, seed, &mut files)?,
        Parameters::LatticeFst(p) => lattice_fst(p, &mut files)?,
        Parameters::Calibrate(p) => calibrate(p, seed, &mut files)?,
        Parameters::Optimize(p) => optimize_run(p, seed, &mut files)?,
    };
    Ok(RunOutput { files, summary })
}

fn chain_csv(spec: &ChainSpec) -> String {
    let mut s = String::from("site,frequency_mhz,coupling_to_next_mhz\n");
    for (k, &w) in spec.frequencies().iter().enumerate() {
        let c = spec.couplings().get(k).map_or(String::new(), |&c| format!("{:.9}", angular_to_mhz(c)));
        let _ = writeln!(s, "{},{:.9},{}", k + 1, angular_to_mhz(w), c);
    }
    s
}

fn build(p: &BuildParams, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let spec = match p.kind {
        ChainKind::Line => build_line(p.n_sites, j)?,
        ChainKind::Zigzag => build_zigzag(p.n_sites, p.m, j)?,
        ChainKind::Fst => apply_fst_deformation(&build_zigzag(p.n_sites, p.m, j)?, p.theta_rad)?,
        ChainKind::Effective => build_effective_limit(p.n_sites, j)?,
        ChainKind::Custom => unreachable!("rejected by validation"),
    };
    files.insert("chain.csv".into(), chain_csv(&spec));
    files.insert(
        "chain.json".into(),
        serde_json::to_string_pretty(&spec.to_document()).expect("document serializes") + "\n",
    );
    let tau = transfer_time(j)?;
    let report = check_pst_conditions(&spec, tau);
    Ok(json!({
        "kind": p.kind.as_str(),
        "n_sites": spec.n_sites(),
        "tau_ns": tau,
        "mirror_symmetric": report.mirror_ok,
        "pst_conditions": report.ok(),
    }))
}

fn spectrum_check(p: &SpectrumCheckParams, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let mut spec_csv = String::from("n_sites,m,k,target,realized_over_j,relative_error\n");
    let mut iep_csv = String::from("n_sites,m,max_frequency_error,max_coupling_error\n");
    let (mut worst_spec, mut worst_iep) = (0.0f64, 0.0f64);
    for &n in &p.n_values {
        for &m in &p.m_values {
            let target = target_spectrum(n, m)?;
            let realized = chain_spectrum(&build_zigzag(n, m, j)?);
            for (k, (&t, &r)) in target.values.iter().zip(&realized).enumerate() {
                let err = (r - t * j).abs() / (j * t.abs().max(1.0));
                worst_spec = worst_spec.max(err);
                let _ = writeln!(spec_csv, "{n},{m},{},{},{:.12},{:.3e}", k + 1, t, r / j, err);
            }
            let rec = reconstruct_tridiagonal(&target.values)?;
            let z = build_zigzag(n, m, 1.0)?;
            let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            let fe = diff(rec.frequencies(), z.frequencies());
            let ce = diff(rec.couplings(), z.couplings());
            worst_iep = worst_iep.max(fe).max(ce);
            let _ = writeln!(iep_csv, "{n},{m},{fe:.3e},{ce:.3e}");
        }
    }
    files.insert("spectrum.csv".into(), spec_csv);
    files.insert("iep.csv".into(), iep_csv);
    Ok(json!({
        "max_spectrum_relative_error": worst_spec,
        "max_iep_error": worst_iep,
        "spectrum_tolerance": 1e-8,
        "iep_tolerance": 1e-7,
        "pass": worst_spec <= 1e-8 && worst_iep <= 1e-7,
    }))
}

fn ideal_series(spec: &ChainSpec, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let basis = Basis::single(spec.n_sites());
    let prop = Propagator::new(&realize(spec, basis)?);
    prop.population_series(&QuantumState::excitation(basis, 0)?, times)
}

fn series_csv(times: &[f64], pops: &[Vec<f64>]) -> String {
    let n = pops.first().map_or(0, |p| p.len());
    let mut s = String::from("t_ns");
    for k in 1..=n {
        let _ = write!(s, ",P_site{k}");
    }
    s.push('\n');
    for (t, p) in times.iter().zip(pops) {
        let _ = write!(s, "{t:.6}");
        for v in p {
            let _ = write!(s, ",{v:.10}");
        }
        s.push('\n');
    }
    s
}

fn setup_for(n_sites: usize, plateau: f64, pulse: PulseKind, dt: f64, record_every: usize) -> Result<RunSetup> {
    let mut setup = RunSetup::flattop(n_sites, plateau)?;
    if pulse == PulseKind::PerClass {
        setup.schedule = Schedule::per_class(plateau)?;
    }
    setup.options.dt = dt;
    setup.options.record_every = record_every;
    Ok(setup)
}

fn pst_run(p: &PstRunParams, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let tau = transfer_time(j)?;
    let mut csv = String::from("n_sites,m,tau_ns,p_transfer,conditions_ok,process_fidelity\n");
    let mut worst = 1.0f64;
    let mut all_ok = true;
    for &n in &p.n_values {
        for &m in &p.m_values {
            let spec = build_zigzag(n, m, j)?;
            let ok = check_pst_conditions(&spec, tau).ok();
            all_ok &= ok;
            let pt = ideal_series(&spec, &[tau])?[0][n - 1];
            worst = worst.min(pt);
            let process = match &p.decoherence {
                Some(d) => {
                    let setup = setup_for(n, tau, PulseKind::Common, p.dt_ns, 0)?;
                    let proto = ProcessProtocol::calibrate(&spec, setup, 0, n - 1)?;
                    format!("{:.10}", proto.measure(&spec, &d.channels(n)?)?.fidelity)
                }
                None => String::new(),
            };
            let _ = writeln!(csv, "{n},{m},{tau:.6},{pt:.12},{ok},{process}");
            if p.trajectory_points > 1 {
                let times = linspace(0.0, 2.0 * tau, p.trajectory_points);
                files.insert(
                    format!("trajectory_n{n}_m{m}.csv"),
                    series_csv(&times, &ideal_series(&spec, &times)?),
                );
            }
        }
    }
    files.insert("transfer.csv".into(), csv);
    Ok(json!({
        "tau_ns": tau,
        "min_transfer_probability": worst,
        "all_conditions_ok": all_ok,
    }))
}

/// Highest population reached by any of `sites` along the recorded samples.
fn peak_population(traj: &Trajectory, sites: &[usize]) -> f64 {
    traj.samples
        .iter()
        .flat_map(|s| sites.iter().map(move |&k| s.populations[k]))
        .fold(0.0, f64::max)
}

fn fst_run(p: &FstRunParams, files: &mut Files) -> Result<Value> {
    let n = p.n_sites;
    let j = mhz_to_angular(p.f_j_mhz);
    let tau = transfer_time(j)?;
    let basis = Basis::single(n);
    let even_sites: Vec<usize> = (1..n).step_by(2).collect();
    let mut ideal = String::from("m,p_first_tau,p_last_tau,bell_fidelity_lab,bell_fidelity,bell_fidelity_phase_max,p_first_2tau\n");
    let mut ideal_rows = Vec::new();
    let mut diss = String::from("m,bell_fidelity,bell_fidelity_phase_max,even_peak_population,final_trace\n");
    let mut fids = Vec::new();
    for &m in &p.m_values {
        let spec = apply_fst_deformation(&build_zigzag(n, m, j)?, p.theta_rad)?;
        let prop = Propagator::new(&realize(&spec, basis)?);
        let start = QuantumState::excitation(basis, 0)?;
        let at_tau = prop.evolve(&start, tau)?;
        let pops = at_tau.populations();
        let reg = reduced_density(basis, &at_tau.density(), &[0, n - 1])?;
        let lab = bell_fidelity(&reg, &[0, n - 1])?;
        let framed = apply_local_phases(&reg, &local_phase_frame(&reg, &bell_singlet())?)?;
        let bell = bell_fidelity(&framed, &[0, n - 1])?;
        let revival = prop.evolve(&start, 2.0 * tau)?.populations()[0];
        let _ = writeln!(
            ideal,
            "{m},{:.12},{:.12},{:.12},{:.12},{:.12},{:.12}",
            pops[0],
            pops[n - 1],
            lab.value,
            bell.value,
            bell.phase_maximized_value,
            revival
        );
        ideal_rows.push(json!({
            "m": m, "p_first_tau": pops[0], "p_last_tau": pops[n - 1],
            "bell_fidelity_lab": lab.value, "bell_fidelity": bell.value,
            "bell_fidelity_phase_max": bell.phase_maximized_value, "p_first_2tau": revival,
        }));
        if let Some(d) = &p.decoherence {
            let setup = setup_for(n, tau, p.pulse, p.dt_ns, p.record_every)?;
            let proto = EntanglementProtocol::calibrate(&spec, setup, EntanglementTarget::Bell { a: 0, b: n - 1 }, 0)?;
            let out = proto.measure(&spec, &d.channels(n)?)?;
            let peak = peak_population(&out.trajectory, &even_sites);
            let _ = writeln!(
                diss,
                "{m},{:.10},{:.10},{:.10},{:.10}",
                out.report.value,
                out.report.phase_maximized_value,
                peak,
                out.trajectory.final_state.trace()
            );
            files.insert(format!("trajectory_m{m}.csv"), trajectory_csv(&out.trajectory));
            fids.push((m, out.report.value, out.report.phase_maximized_value, peak));
        }
    }
    files.insert("ideal.csv".into(), ideal);
    let mut summary = json!({ "tau_ns": tau, "ideal": ideal_rows });
    if p.decoherence.is_some() {
        files.insert("fidelity.csv".into(), diss);
        let ms: Vec<u32> = fids.iter().map(|f| f.0).collect();
        let fs: Vec<f64> = fids.iter().map(|f| f.1).collect();
        summary["fidelity"] = fids
            .iter()
            .map(|(m, f, fp, pk)| json!({"m": m, "bell_fidelity": f, "bell_fidelity_phase_max": fp, "even_peak_population": pk}))
            .collect();
        summary["trade_off"] = json!(trade_off(&ms, &fs));
    }
    Ok(summary)
}

fn lattice_fst(p: &LatticeFstParams, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let tau = transfer_time(j)?;
    let mut ideal = String::from("m,corner_populations_tau,w_fidelity,w_fidelity_phase_max\n");
    let mut diss = String::from("m,w_fidelity,w_fidelity_phase_max,even_peak_population,final_trace\n");
    let mut rows = Vec::new();
    let mut ideal_rows = Vec::new();
    for &m in &p.m_values {
        let lat = build_lattice(p.rows, p.cols, m, j, Some(p.theta_rad))?;
        let n = lat.n_sites();
        let basis = Basis::single(n);
        let corners = lat.corners();
        let even_sites: Vec<usize> = (0..p.rows)
            .flat_map(|r| (0..p.cols).map(move |c| (r, c)))
            .filter(|(r, c)| r % 2 == 1 || c % 2 == 1)
            .map(|(r, c)| lat.site_index(r, c))
            .collect();
        let prop = Propagator::new(&realize(&lat, basis)?);
        let at_tau = prop.evolve(&QuantumState::excitation(basis, 0)?, tau)?;
        let pops = at_tau.populations();
        let reg = reduced_density(basis, &at_tau.density(), &corners)?;
        let framed = apply_local_phases(&reg, &local_phase_frame(&reg, &w_state())?)?;
        let w = w_fidelity(&framed, &corners)?;
        let cp: Vec<String> = corners.iter().map(|&k| format!("{:.10}", pops[k])).collect();
        let _ = writeln!(ideal, "{m},{},{:.12},{:.12}", cp.join(";"), w.value, w.phase_maximized_value);
        ideal_rows.push(json!({"m": m, "w_fidelity": w.value, "w_fidelity_phase_max": w.phase_maximized_value}));
        if let Some(d) = &p.decoherence {
            let setup = setup_for(n, tau, p.pulse, p.dt_ns, p.record_every)?;
            let proto = EntanglementProtocol::calibrate(&lat, setup, EntanglementTarget::W { corners }, 0)?;
            let out = proto.measure(&lat, &d.channels(n)?)?;
            let peak = peak_population(&out.trajectory, &even_sites);
            let _ = writeln!(
                diss,
                "{m},{:.10},{:.10},{:.10},{:.10}",
                out.report.value,
                out.report.phase_maximized_value,
                peak,
                out.trajectory.final_state.trace()
            );
            files.insert(format!("trajectory_m{m}.csv"), trajectory_csv(&out.trajectory));
            rows.push((m, out.report.value, out.report.phase_maximized_value, peak));
        }
    }
    files.insert("ideal.csv".into(), ideal);
    let mut summary = json!({ "tau_ns": tau, "ideal": ideal_rows });
    if p.decoherence.is_some() {
        files.insert("fidelity.csv".into(), diss);
        let ms: Vec<u32> = rows.iter().map(|r| r.0).collect();
        let fs: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let peaks: Vec<f64> = rows.iter().map(|r| r.3).collect();
        summary["fidelity"] = rows
            .iter()
            .map(|(m, f, fp, pk)| json!({"m": m, "w_fidelity": f, "w_fidelity_phase_max": fp, "even_peak_population": pk}))
            .collect();
        summary["trade_off"] = json!(trade_off(&ms, &fs));
        summary["even_peaks_decreasing"] = json!(strictly_decreasing(&peaks));
    }
    Ok(summary)
}

fn solution_space(p: &SolutionSpaceParams, seed: u64, files: &mut Files) -> Result<Value> {
    let deltas_mhz = linspace(0.0, p.delta_max_mhz, p.delta_points);
    let js_mhz = linspace(0.0, p.j_max_mhz, p.j_points);
    let deltas: Vec<f64> = deltas_mhz.iter().map(|&d| mhz_to_angular(d)).collect();
    let js: Vec<f64> = js_mhz.iter().map(|&d| mhz_to_angular(d)).collect();
    let space = sweep_solution_space(p.tau_ns, &deltas, &js);
    let mut map = String::from("delta_mhz,j_mhz,p3\n");
    for i in (0..deltas.len()).step_by(p.export_stride) {
        for k in (0..js.len()).step_by(p.export_stride) {
            let _ = writeln!(map, "{:.4},{:.4},{:.8}", deltas_mhz[i], js_mhz[k], space.p3[i][k]);
        }
    }
    files.insert("solution_space.csv".into(), map);
    let cell = mhz_to_angular(p.delta_max_mhz / (p.delta_points - 1) as f64);
    let mut spots: Vec<_> = space
        .bright_spots(p.threshold)
        .iter()
        .map(|s| refine_bright_spot(p.tau_ns, s, 0.5 * cell))
        .collect();
    spots.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.coupling.total_cmp(&b.coupling)));
    let mut spot_csv = String::from("delta_mhz,j_mhz,p3\n");
    let spot_json: Vec<Value> = spots
        .iter()
        .map(|s| {
            let (d, c) = (angular_to_mhz(s.delta), angular_to_mhz(s.coupling));
            let _ = writeln!(spot_csv, "{d:.6},{c:.6},{:.10}", s.p3);
            json!({"delta_mhz": d, "j_mhz": c, "p3": s.p3})
        })
        .collect();
    files.insert("bright_spots.csv".into(), spot_csv);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = String::from("delta_mhz,j_mhz,t_ns,max_abs_error\n");
    let mut worst = 0.0f64;
    for _ in 0..p.oracle_samples {
        let d = rng.random_range(-p.delta_max_mhz..=p.delta_max_mhz);
        let jm = rng.random_range(0.01..=p.j_max_mhz);
        let t = rng.random_range(0.0..=4.0 * p.tau_ns);
        let (da, ja) = (mhz_to_angular(d), mhz_to_angular(jm));
        let a = analytic_three_site(da, ja, t);
        let spec = ChainSpec::custom(vec![0.0, da, 0.0], vec![ja, ja])?;
        let u = ideal_series(&spec, &[t])?;
        let err = (0..3).fold(0.0f64, |m, k| m.max((a[k] - u[0][k]).abs()));
        worst = worst.max(err);
        let _ = writeln!(oracle, "{d:.6},{jm:.6},{t:.6},{err:.3e}");
    }
    files.insert("oracle.csv".into(), oracle);
    Ok(json!({
        "tau_ns": p.tau_ns,
        "bright_spots": spot_json,
        "oracle_samples": p.oracle_samples,
        "oracle_max_error": worst,
    }))
}

fn noise_sweep(p: &NoiseSweepParams, seed: u64, files: &mut Files) -> Result<Value> {
    let n = p.n_sites;
    let j = mhz_to_angular(p.f_j_mhz);
    let tau = transfer_time(j)?;
    let channels = channels_for(&p.decoherence, n)?;
    let mut curves = Vec::new();
    for &target in &p.targets {
        for &m in &p.m_values {
            let setup = setup_for(n, tau, PulseKind::Common, p.dt_ns, 0)?;
            let curve = match p.protocol {
                TransferProtocol::Fst => {
                    let spec = apply_fst_deformation(&build_zigzag(n, m, j)?, p.theta_rad)?;
                    let proto = EntanglementProtocol::calibrate(&spec, setup, EntanglementTarget::Bell { a: 0, b: n - 1 }, 0)?;
                    degradation_sweep(&spec, &proto, target, &p.sigma_grid_mhz, &channels, p.n_samples, seed)?
                }
                TransferProtocol::Pst => {
                    let spec = build_zigzag(n, m, j)?;
                    let proto = ProcessProtocol::calibrate(&spec, setup, 0, n - 1)?;
                    degradation_sweep(&spec, &proto, target, &p.sigma_grid_mhz, &channels, p.n_samples, seed)?
                }
            };
            let name = match target {
                NoiseTarget::OmegaEven => "omega_even",
                NoiseTarget::OmegaOdd => "omega_odd",
                NoiseTarget::Couplings => "couplings",
            };
            files.insert(format!("curve_{name}_m{m}.csv"), curve.to_csv());
            curves.push(json!({
                "target": target,
                "m": m,
                "baseline": curve.baseline,
                "sigma_mhz": curve.sigma_mhz,
                "mean_ratio": curve.mean_ratio,
                "std": curve.std,
                "sem": curve.sem(),
                "n_samples": curve.n_samples,
            }));
        }
    }
    Ok(json!({ "seed": seed, "curves": curves }))
}

fn calibrate(p: &CalibrateParams, seed: u64, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let dev_cfg = crate::calibration::DeviceConfig { seed, ..p.device };
    let (mut device, q, c) = match p.layout {
        Layout::Chain => {
            let mut spec = build_zigzag(p.n_sites, p.m, j)?;
            if let Some(t) = p.theta_rad {
                spec = apply_fst_deformation(&spec, t)?;
            }
            let (q, c) = chain_targets(&spec, dev_cfg.lab_offset_mhz);
            (Device::for_chain(&spec, dev_cfg)?, q, c)
        }
        Layout::Lattice => {
            let lat = build_lattice(p.rows, p.cols, p.m, j, p.theta_rad)?;
            let (q, c) = lattice_targets(&lat, dev_cfg.lab_offset_mhz);
            (Device::for_lattice(&lat, dev_cfg)?, q, c)
        }
    };
    let report = calibrate_all(&mut device, &q, &c, &p.calibration)?;
    files.insert("calibration.csv".into(), report.to_csv());
    let mut res = String::from("element,kind,target_mhz,true_mhz,residual_mhz\n");
    let targets: Vec<f64> = q.iter().chain(&c).copied().collect();
    for (e, t) in targets.iter().enumerate() {
        let kind = if e < device.n_qubits { "qubit" } else { "coupler" };
        let v = device.true_value(e);
        let _ = writeln!(res, "{e},{kind},{t:.6},{v:.6},{:.6}", v - t);
    }
    files.insert("residuals.csv".into(), res);
    files.insert(
        "report.json".into(),
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    );
    Ok(json!({
        "scheme": report.scheme,
        "max_true_residual_mhz": report.max_true_residual(),
        "max_measured_residual_mhz": report.max_measured_residual(),
        "max_iterations": report.max_iterations(),
        "outer_cycles": report.cycles.len(),
        "flagged": report.flagged,
        "threshold_mhz": p.calibration.threshold_mhz,
    }))
}

fn optimize_run(p: &OptimizeParams, seed: u64, files: &mut Files) -> Result<Value> {
    let j = mhz_to_angular(p.f_j_mhz);
    let spec = apply_fst_deformation(&build_zigzag(p.n_sites, p.m, j)?, p.theta_rad)?;
    let dev_cfg = crate::calibration::DeviceConfig { seed, ..p.device };
    let (q, c) = chain_targets(&spec, dev_cfg.lab_offset_mhz);
    let targets: Vec<f64> = q.into_iter().chain(c).collect();
    let mut device = Device::for_chain(&spec, dev_cfg)?;
    device.zpa = device.solve_zpa(&targets)?;
    let x0 = perturbed_start(&device, &targets, p.perturbation_mhz, seed)?;
    let tau = transfer_time(j)?;
    let mut runs = Vec::new();
    for r in &p.runs {
        let problem = OptimizationProblem {
            device: device.clone(),
            template: spec.clone(),
            cost: CostSpec {
                samples: r.samples,
                tau_ns: tau,
            },
        };
        let opts = crate::calibration::OptimizeOptions { seed, ..r.options };
        let start_cost = problem.evaluate(&x0)?;
        let (p1_start, pn_start) = problem.sampled_populations(&problem.full_zpa(&x0))?;
        let out = optimize(&problem, &x0, r.method, &opts)?;
        if let Some(msg) = &out.search.aborted {
            return Err(crate::Error::CostEvaluation(msg.clone()));
        }
        let name = match r.method {
            crate::calibration::Method::NelderMead => "nelder_mead",
            crate::calibration::Method::DifferentialEvolution => "differential_evolution",
        };
        let mut pops = String::from("stage,l,t_ns,p_first,p_last\n");
        for (stage, a, b) in [
            ("start", &p1_start, &pn_start),
            ("optimized", &out.first_populations, &out.last_populations),
        ] {
            for (l, t) in problem.cost.times().iter().enumerate() {
                let _ = writeln!(pops, "{stage},{},{t:.6},{:.10},{:.10}", l + 1, a[l], b[l]);
            }
        }
        files.insert(format!("populations_{name}_L{}.csv", r.samples), pops);
        let mut trace = String::from("iteration,best_cost\n");
        for (i, c) in out.search.best_costs.iter().enumerate() {
            let _ = writeln!(trace, "{i},{c:.12}");
        }
        files.insert(format!("trace_{name}_L{}.csv", r.samples), trace);
        files.insert(
            format!("trace_{name}_L{}.json", r.samples),
            serde_json::to_string_pretty(&out.trace_json()).expect("trace serializes") + "\n",
        );
        runs.push(json!({
            "method": r.method,
            "samples": r.samples,
            "start_cost": start_cost,
            "final_cost": out.search.cost,
            "iterations": out.search.iterations(),
            "evaluations": out.search.evaluations,
            "stabilization_iteration": out.stabilization_iteration,
            "max_population_deviation": out.max_population_deviation(),
        }));
    }
    Ok(json!({ "seed": seed, "perturbation_mhz": p.perturbation_mhz, "runs": runs }))
}
