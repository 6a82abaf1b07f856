use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dualrail::config::StudyConfig;
use dualrail::evolver::NoiseParams;
use dualrail::hilbert::{Level, ModeLayout, PureState};
use dualrail::io::OutputDir;
use dualrail::protocols::{
    cphase_joint_snap, run_joint_parity_check, sample_many, CphaseDesign, DualRailLabel, ReadoutModel,
};
use dualrail::pulses::AncillaVariant;
use dualrail::studies::{
    leakage_channel, single_check_report, study_error_scaling, study_performance_projection, study_power_rabi,
    study_repeated_checks, study_scheme_comparison, study_spectroscopy_map, tuned_square_check, Probe,
    ProjectionSettings, ReadoutResonator, Scheme, TransmonChannel, TransmonCouplings, TunedCheck,
};
use dualrail::tuneup::{fit_chevron, simulate_chevron, transfer_infidelities, tune_gaussian_erasure_check, GaussianTuneConfig};
use dualrail::units::{mhz, to_mhz};
use dualrail::{Error, Result};

#[derive(Parser)]
#[command(name = "dualrail", version, about = "Dual-rail cavity simulation studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config file, or `defaults` for the built-in values.
    #[arg(long, default_value = "defaults")]
    config: String,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ancilla spectroscopy maps with oracle ridges.
    Spectroscopy(Common),
    /// Normalized power-Rabi rates of the N = 1 lines.
    PowerRabi(Common),
    /// One square erasure check on the six cardinal states.
    ErasureCheck(Common),
    /// Repeated checks and the per-check error budget.
    RepeatedChecks(Common),
    /// Error-rate exponents against pulse length and beamsplitter strength.
    Scaling(Common),
    /// Joint-photon-number and joint-parity checks on g–e and g–f ancillas.
    CompareSchemes(Common),
    /// Error rates with longer coherence times.
    Project(Common),
    /// Joint-SNAP CPHASE gates.
    Cphase(Common),
    /// Joint-parity check on low photon-number states.
    Parity(Common),
    /// Square-check tune-up from the analytic guess.
    Tuneup(Common),
    /// Beamsplitter chevron and its fit.
    Chevron(Common),
    /// Monte Carlo draws from the two-qubit gate error channel.
    SampleChannel(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectroscopy(c)
            | Command::PowerRabi(c)
            | Command::ErasureCheck(c)
            | Command::RepeatedChecks(c)
            | Command::Scaling(c)
            | Command::CompareSchemes(c)
            | Command::Project(c)
            | Command::Cphase(c)
            | Command::Parity(c)
            | Command::Tuneup(c)
            | Command::Chevron(c)
            | Command::SampleChannel(c) => c,
        }
    }
}

struct Ctx {
    cfg: StudyConfig,
    out: OutputDir,
}

impl Ctx {
    fn chi(&self) -> f64 {
        self.cfg.system().chi_bob
    }

    fn done(&self, files: &[PathBuf]) {
        for f in files {
            println!("{}", f.display());
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).parse_default_env().init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn run(cmd: &Command) -> Result<()> {
    let common = cmd.common();
    let mut cfg = StudyConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(j) = common.jobs {
        set_jobs(j)?;
    }
    let out = OutputDir::create(&common.out, &cfg)?;
    let ctx = Ctx { cfg, out };
    match cmd {
        Command::Spectroscopy(_) => spectroscopy(&ctx),
        Command::PowerRabi(_) => power_rabi(&ctx),
        Command::ErasureCheck(_) => erasure_check(&ctx),
        Command::RepeatedChecks(_) => repeated_checks(&ctx),
        Command::Scaling(_) => scaling(&ctx),
        Command::CompareSchemes(_) => compare_schemes(&ctx),
        Command::Project(_) => project(&ctx),
        Command::Cphase(_) => cphase(&ctx),
        Command::Parity(_) => parity(&ctx),
        Command::Tuneup(_) => tuneup(&ctx),
        Command::Chevron(_) => chevron(&ctx),
        Command::SampleChannel(_) => sample_channel(&ctx),
    }
}

#[cfg(feature = "parallel")]
fn set_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
fn set_jobs(jobs: usize) -> Result<()> {
    if jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    log::info!("built without the parallel feature; --jobs {jobs} has no effect");
    Ok(())
}

fn upper_level(v: AncillaVariant) -> f64 {
    match v {
        AncillaVariant::Ge => 1.0,
        AncillaVariant::Gf => 2.0,
    }
}

fn spectroscopy(ctx: &Ctx) -> Result<()> {
    let sp = &ctx.cfg.spectroscopy;
    let chi = ctx.chi();
    let c = chi.abs();
    let g: Vec<f64> = sp.g_over_chi.values().iter().map(|x| x * c).collect();
    let det: Vec<f64> = sp.detuning_over_chi.values().iter().map(|x| x * c).collect();
    let mut probe = Probe::pi_pulse(chi, sp.probe_periods);
    if let Some(a) = sp.probe_amplitude_over_chi {
        probe.amplitude = a * c;
    }
    let opts = ctx.cfg.evolve_options();
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for &n in &sp.photon_numbers {
        let map = study_spectroscopy_map(n, chi, sp.delta_over_chi * chi, &g, &det, probe, opts)?;
        let mut rows = Vec::new();
        for (i, &gv) in map.g_values.iter().enumerate() {
            for (j, &d) in map.detunings.iter().enumerate() {
                rows.push(vec![to_mhz(gv), to_mhz(d), map.p_e[i][j]]);
            }
        }
        files.push(ctx.out.csv(&format!("spectroscopy_n{n}.csv"), &["g_bs_mhz", "detuning_mhz", "p_e"], &rows)?);
        let ridges: Vec<Vec<f64>> = map
            .ridges
            .iter()
            .map(|r| vec![to_mhz(r.g_bs), f64::from(r.delta_m), to_mhz(r.predicted), to_mhz(r.measured), r.height])
            .collect();
        files.push(ctx.out.csv(
            &format!("ridges_n{n}.csv"),
            &["g_bs_mhz", "delta_m", "predicted_mhz", "measured_mhz", "height"],
            &ridges,
        )?);
        summary.push(json!({
            "n_photons": n,
            "delta_mhz": to_mhz(map.delta),
            "ridges": map.ridges.len(),
            "unresolved_lines": map.unresolved,
            "half_linewidth_mhz": to_mhz(map.half_linewidth),
            "max_deviation_mhz": to_mhz(map.max_deviation),
            "max_deviation_over_half_linewidth": map.max_deviation / map.half_linewidth,
        }));
    }
    let probe_json = json!({ "amplitude_mhz": to_mhz(probe.amplitude), "duration_us": probe.duration });
    files.push(ctx.out.json("spectroscopy_summary.json", &json!({ "probe": probe_json, "maps": summary }))?);
    ctx.done(&files);
    Ok(())
}

fn power_rabi(ctx: &Ctx) -> Result<()> {
    let pr = &ctx.cfg.power_rabi;
    let chi = ctx.chi();
    let g: Vec<f64> = pr.g_over_chi.values().iter().map(|x| x * chi.abs()).collect();
    let s = study_power_rabi(chi, &g, pr.settings(), ctx.cfg.evolve_options())?;
    let rows: Vec<Vec<f64>> = s
        .points
        .iter()
        .map(|p| {
            vec![
                to_mhz(p.g_bs),
                f64::from(p.delta_m),
                to_mhz(p.frequency),
                p.normalized_rate.unwrap_or(f64::NAN),
                p.predicted,
                p.relative_error().unwrap_or(f64::NAN),
            ]
        })
        .collect();
    let csv = ctx.out.csv(
        "power_rabi.csv",
        &["g_bs_mhz", "delta_m", "drive_freq_mhz", "normalized_rate", "predicted_rate", "relative_error"],
        &rows,
    )?;
    let nulls = s.points.iter().filter(|p| p.normalized_rate.is_none()).count();
    let js = ctx.out.json(
        "power_rabi_summary.json",
        &json!({ "anchor_rate": s.anchor_rate, "max_relative_error": s.max_relative_error, "null_points": nulls }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn tuned_check(ctx: &Ctx) -> Result<TunedCheck> {
    let ck = &ctx.cfg.check;
    let sys = ctx.cfg.system();
    let fixed = match (ck.g_bs_mhz, ck.t_p_us) {
        (Some(g), Some(t)) => Some((sys.clip_g_bs(mhz(g)), t)),
        (None, None) => None,
        _ => return Err(Error::Config("check.g_bs_mhz and check.t_p_us must be given together".into())),
    };
    tuned_square_check(sys.chi_bob, ck.n, ck.m, ck.bs_ramp_us, ck.pulse_ramp_us, sys.g_bs_max, fixed)
}

fn check_json(check: &TunedCheck) -> serde_json::Value {
    let p = &check.params;
    json!({
        "g_bs_mhz": to_mhz(p.g_bs),
        "delta_mhz": to_mhz(p.delta),
        "t_p_us": p.t_p,
        "amplitude_mhz": to_mhz(p.amplitude),
        "delta_omega_mhz": to_mhz(p.delta_omega),
        "bs_ramp_us": check.design.bs_ramp,
        "tuned": check.tune.is_some(),
        "tune_cost": check.tune.as_ref().map(|t| t.final_cost),
    })
}

fn erasure_check(ctx: &Ctx) -> Result<()> {
    let ck = &ctx.cfg.check;
    let check = tuned_check(ctx)?;
    let ch = leakage_channel(&check, &ctx.cfg.noise, ck.readout(), ck.inter_check_idle_us, ctx.cfg.evolve_options())?;
    let r = single_check_report(&ch)?;
    let rows: Vec<Vec<f64>> = r.rows.iter().enumerate().map(|(i, row)| vec![i as f64, row.p_flag, row.fidelity]).collect();
    let csv = ctx.out.csv("erasure_check.csv", &["state_index", "p_flag", "fidelity"], &rows)?;
    let js = ctx.out.json(
        "erasure_check.json",
        &json!({
            "check": check_json(&check),
            "states": DualRailLabel::ALL.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
            "p_flag_vacuum": r.p_flag_vacuum,
            "p_fn": r.p_fn,
            "cycle_us": r.duration,
            "logical_phase_rad": ch.logical_phase,
        }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn repeated_checks(ctx: &Ctx) -> Result<()> {
    let ck = &ctx.cfg.check;
    let check = tuned_check(ctx)?;
    let s = study_repeated_checks(
        check,
        &ctx.cfg.noise,
        ck.readout(),
        ck.inter_check_idle_us,
        ck.n_checks,
        ck.echo,
        ctx.cfg.evolve_options(),
    )?;
    let mut rows = Vec::new();
    for (i, t) in s.traces.iter().enumerate() {
        for k in 0..t.n.len() {
            rows.push(vec![i as f64, t.n[k] as f64, t.success[k], t.fidelity[k], t.p00[k]]);
        }
    }
    let csv = ctx.out.csv("repeated_checks.csv", &["state_index", "n_checks", "p_success", "fidelity", "p00"], &rows)?;
    let b = &s.budget;
    let js = ctx.out.json(
        "error_budget.json",
        &json!({
            "check": check_json(&s.check),
            "states": DualRailLabel::ALL.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
            "p_fn": b.p_fn,
            "p_fp": b.p_fp,
            "p_erasure": b.p_erasure,
            "p_intrinsic": b.p_intrinsic,
            "p_pauli": b.p_pauli,
            "fidelities": b.fidelities,
            "check_cycle_us": b.check_duration,
        }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn scaling(ctx: &Ctx) -> Result<()> {
    let chi = ctx.chi();
    let s = study_error_scaling(chi, &ctx.cfg.scaling.settings(), ctx.cfg.evolve_options())?;
    let channel_index = |c: TransmonChannel| TransmonChannel::ALL.iter().position(|&x| x == c).expect("listed") as f64;
    let rows: Vec<Vec<f64>> = s
        .points
        .iter()
        .map(|p| {
            vec![
                f64::from(p.n),
                f64::from(p.m),
                channel_index(p.channel),
                to_mhz(p.params.g_bs),
                p.params.t_p,
                p.tune_cost,
                p.erasure_slope,
                p.pauli_slope,
            ]
        })
        .collect();
    let csv = ctx.out.csv(
        "scaling_points.csv",
        &["n", "m", "channel_index", "g_bs_mhz", "t_p_us", "tune_cost", "erasure_slope", "pauli_slope"],
        &rows,
    )?;
    let exps: Vec<_> = s
        .exponents
        .iter()
        .map(|e| {
            json!({
                "channel": e.channel.as_str(),
                "erasure_vs_tp": e.erasure_vs_tp,
                "pauli_vs_g_bs": e.pauli_vs_g,
                "pauli_vs_tp": e.pauli_vs_tp,
            })
        })
        .collect();
    let names: Vec<_> = TransmonChannel::ALL.iter().map(|c| c.as_str()).collect();
    let js = ctx.out.json("scaling_exponents.json", &json!({ "channels": names, "exponents": exps }))?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn compare_schemes(ctx: &Ctx) -> Result<()> {
    let cp = &ctx.cfg.comparison;
    let sys = ctx.cfg.system();
    let params = ctx.cfg.comparison_params(to_mhz(sys.clip_g_bs(mhz(cp.g_bs_mhz))), cp.t_p_us);
    let noise = ctx.cfg.noise.without_cavities();
    let rows = study_scheme_comparison(sys.chi_bob, &params, &noise, ctx.cfg.evolve_options())?;
    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let scheme = match r.scheme {
                Scheme::JointPhotonNumber => 0.0,
                Scheme::JointParity => 1.0,
            };
            vec![scheme, upper_level(r.variant), r.p_erasure, r.p_pauli, r.duration]
        })
        .collect();
    let csv = ctx.out.csv(
        "scheme_comparison.csv",
        &["scheme_index", "upper_level", "p_erasure", "p_pauli", "duration_us"],
        &table,
    )?;
    ctx.done(&[csv]);
    Ok(())
}

fn project(ctx: &Ctx) -> Result<()> {
    let cp = &ctx.cfg.comparison;
    let sys = ctx.cfg.system();
    let settings = ProjectionSettings {
        params: ctx.cfg.comparison_params(to_mhz(sys.clip_g_bs(mhz(cp.projection_g_bs_mhz))), cp.t_p_us),
        tau_ro: cp.tau_ro_us,
        transmon_t1: cp.projection_transmon_us,
        transmon_tphi: cp.projection_transmon_us,
        cavity_t1: cp.projection_cavity_us,
    };
    let resonator = ReadoutResonator {
        nbar: cp.readout_nbar,
        kappa: sys.kappa_readout,
        chi: mhz(cp.readout_chi_khz * 1e-3),
        duration: cp.readout_duration_us,
    };
    let couplings = TransmonCouplings { chi_tr: sys.chi_tr, chi_ct: sys.chi_ct, alpha: sys.alpha };
    let p = study_performance_projection(sys.chi_bob, settings, resonator, couplings, ctx.cfg.evolve_options())?;
    let js = ctx.out.json(
        "projection.json",
        &json!({
            "p_intrinsic": p.p_intrinsic,
            "p_pauli_induced": p.p_pauli_induced,
            "p_fp": p.p_fp,
            "readout": {
                "gamma_phi_per_us": p.readout.dephasing.gamma_phi,
                "p_pauli": p.readout.dephasing.p_pauli,
                "chi_khz": cp.readout_chi_khz,
                "chi_estimate_khz": to_mhz(p.readout.chi_estimate) * 1e3,
            },
        }),
    )?;
    ctx.done(&[js]);
    Ok(())
}

fn cphase(ctx: &Ctx) -> Result<()> {
    let c = &ctx.cfg.cphase;
    let sys = ctx.cfg.system();
    let tune = tune_gaussian_erasure_check(&GaussianTuneConfig {
        chi: sys.chi_bob,
        g_bs_start: sys.clip_g_bs(mhz(c.g_bs_start_mhz)),
        g_bs_max: sys.g_bs_max,
        n_chop: c.n_chop,
        sigma_start: c.sigma_start_us,
        excitation_threshold: c.excitation_threshold,
        infidelity_target: c.infidelity_target,
        include_11: true,
        ..GaussianTuneConfig::default()
    })?;
    let opts = ctx.cfg.evolve_options();
    let design = CphaseDesign {
        chi: sys.chi_bob,
        g_bs: tune.params.g_bs,
        delta: tune.params.delta,
        sigma: tune.sigma,
        n_chop: tune.n_chop,
        amplitude: tune.params.amplitude,
        delta_omega: tune.params.delta_omega,
        phase_correction: 0.0,
    }
    .calibrate(opts)?;
    let noise = if c.with_noise { ctx.cfg.noise } else { NoiseParams::none() };
    let mut rows = Vec::new();
    for &theta in &c.thetas {
        let s = cphase_joint_snap(theta, &design, &noise, opts)?;
        let mut row = vec![theta, s.conditional_phase];
        row.extend_from_slice(&s.phases);
        row.extend([s.ancilla_excited, s.leakage]);
        rows.push(row);
    }
    let csv = ctx.out.csv(
        "cphase.csv",
        &[
            "theta_rad",
            "conditional_phase_rad",
            "phase_00_rad",
            "phase_01_rad",
            "phase_10_rad",
            "phase_11_rad",
            "ancilla_excited",
            "leakage",
        ],
        &rows,
    )?;
    let js = ctx.out.json(
        "cphase_design.json",
        &json!({
            "g_bs_mhz": to_mhz(design.g_bs),
            "delta_mhz": to_mhz(design.delta),
            "sigma_us": design.sigma,
            "n_chop": design.n_chop,
            "amplitude_mhz": to_mhz(design.amplitude),
            "delta_omega_mhz": to_mhz(design.delta_omega),
            "phase_correction_rad": design.phase_correction,
            "gate_duration_us": design.duration(),
            "tune_converged": tune.converged,
        }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn parity(ctx: &Ctx) -> Result<()> {
    let chi = ctx.chi();
    let opts = dualrail::evolver::EvolveOptions { monitor_truncation: false, ..ctx.cfg.evolve_options() };
    let inputs = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)];
    let mut rows = Vec::new();
    for variant in [AncillaVariant::Ge, AncillaVariant::Gf] {
        let layout = ModeLayout { dim_a: 3, dim_b: 3, dim_q: variant.dim_q() };
        for &(na, nb) in &inputs {
            let psi = PureState::basis(layout, na, nb, Level::G)?.into();
            let flag = |noise: &NoiseParams| -> Result<f64> {
                let r = run_joint_parity_check(&psi, chi, variant, noise, true, 0.0, ReadoutModel::instantaneous(), opts)?;
                Ok(r.p_flag)
            };
            let ideal = flag(&NoiseParams::none())?;
            let noisy = flag(&ctx.cfg.noise.without_cavities())?;
            rows.push(vec![upper_level(variant), na as f64, nb as f64, (na + nb) as f64, ideal, noisy]);
        }
    }
    let csv = ctx.out.csv(
        "parity.csv",
        &["upper_level", "n_a", "n_b", "total_n", "p_flag_ideal", "p_flag_transmon_noise"],
        &rows,
    )?;
    ctx.done(&[csv]);
    Ok(())
}

fn tuneup(ctx: &Ctx) -> Result<()> {
    let ck = &ctx.cfg.check;
    let sys = ctx.cfg.system();
    let check = tuned_square_check(sys.chi_bob, ck.n, ck.m, ck.bs_ramp_us, ck.pulse_ramp_us, sys.g_bs_max, None)?;
    let inf = transfer_infidelities(&check.design, &check.params, false)?;
    let trace: Vec<Vec<f64>> = check
        .tune
        .as_ref()
        .map(|t| t.cost_trace.iter().enumerate().map(|(i, &c)| vec![i as f64, c]).collect())
        .unwrap_or_default();
    let csv = ctx.out.csv("tuneup_trace.csv", &["iteration", "cost"], &trace)?;
    let js = ctx.out.json(
        "tuneup.json",
        &json!({
            "n": ck.n,
            "m": ck.m,
            "g_bs_max_mhz": to_mhz(sys.g_bs_max),
            "check": check_json(&check),
            "transfer_infidelities": inf,
            "iterations": check.tune.as_ref().map(|t| t.iterations),
            "converged": check.tune.as_ref().map(|t| t.converged),
        }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn chevron(ctx: &Ctx) -> Result<()> {
    let c = &ctx.cfg.chevron;
    let sys = ctx.cfg.system();
    let g = sys.clip_g_bs(mhz(c.g_bs_mhz));
    let times = c.time.values();
    let freqs: Vec<f64> = c.detuning_mhz.values().into_iter().map(mhz).collect();
    let noise = c.with_noise.then_some(&ctx.cfg.noise);
    let data = simulate_chevron(g, 0.0, &times, &freqs, noise, c.ramp_us, ctx.cfg.evolve_options())?;
    let mut rows = Vec::new();
    for (i, &f) in data.freqs.iter().enumerate() {
        for (j, &t) in data.times.iter().enumerate() {
            rows.push(vec![to_mhz(f), t, data.p1[i][j]]);
        }
    }
    let csv = ctx.out.csv("chevron.csv", &["detuning_mhz", "time_us", "p1"], &rows)?;
    let fit = fit_chevron(&data)?;
    let js = ctx.out.json(
        "chevron_fit.json",
        &json!({
            "g_bs_mhz": to_mhz(fit.g_bs),
            "omega0_mhz": to_mhz(fit.omega0),
            "a": fit.a,
            "c": fit.c,
            "phi_rad": fit.phi,
            "residual_norm": fit.residual_norm,
            "std_errors": {
                "g_bs_mhz": to_mhz(fit.std_errors[0]),
                "omega0_mhz": to_mhz(fit.std_errors[1]),
                "a": fit.std_errors[2],
                "c": fit.std_errors[3],
                "phi_rad": fit.std_errors[4],
            },
            "iterations": fit.iterations,
        }),
    )?;
    ctx.done(&[csv, js]);
    Ok(())
}

fn sample_channel(ctx: &Ctx) -> Result<()> {
    let s = &ctx.cfg.sampler;
    let st = sample_many(s.p, s.erasure_ratio, s.p_fn, s.gate, s.draws, ctx.cfg.seed, s.chunks as u64)?;
    let js = ctx.out.json(
        "sample_channel.json",
        &json!({
            "draws": st.draws,
            "erasures": st.erasures,
            "missed": st.missed,
            "pauli_only": st.pauli_only,
            "erasure_fraction": st.erasures as f64 / st.draws as f64,
            "missed_fraction_of_erasures": if st.erasures > 0 { st.missed as f64 / st.erasures as f64 } else { 0.0 },
        }),
    )?;
    ctx.done(&[js]);
    Ok(())
}
