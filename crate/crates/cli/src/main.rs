//! Command-line front end: loads netlists and target files, runs the
//! analyses, and writes diff-stable TSV tables plus a JSON run manifest per
//! invocation.

mod input;
mod report;

use anyhow::{bail, Context, Result};
use circuitq::coherence::{self, NoiseParams};
use circuitq::evolve;
use circuitq::gate::{self, GateTarget, PulseSchedule};
use circuitq::quantize::{assemble, QuantizeOptions};
use circuitq::readout::{self, ReadoutConfig};
use circuitq::spectrum::{self, SpectrumOptions};
use clap::{Args, Parser, Subcommand};
use input::{load_evolve_config, load_netlist, netlist_to_toml, parse_angle, parse_grid, parse_list, LoadedNetlist};
use report::{sig9, Run};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "circuitq", version, about = "Superconducting-circuit design toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every analysis.
#[derive(Args, Debug)]
struct Common {
    /// Cooper-pair cutoff for charge-like modes (dimension 2N+1).
    #[arg(long, default_value_t = 10)]
    cutoff_charge: usize,
    /// Fock-space dimension for flux-like modes.
    #[arg(long, default_value_t = 31)]
    cutoff_flux: usize,
    /// Number of eigenstates kept in tables and models.
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Eigensolver tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Random seed (eigensolver start vectors, search, Monte Carlo).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output directory for tables and manifests.
    #[arg(long, env = "CIRCUITQ_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// External flux in radians; accepts `pi` / `0.9pi` syntax. Overrides
    /// the netlist's stored bias.
    #[arg(long)]
    phi_ext: Option<String>,
    /// External charge offset in Cooper pairs. Overrides the stored bias.
    #[arg(long)]
    ng_ext: Option<f64>,
}

impl Common {
    fn quantize(&self) -> QuantizeOptions {
        QuantizeOptions {
            charge_cutoff: self.cutoff_charge,
            fock_cutoff: self.cutoff_flux,
            ..Default::default()
        }
    }

    fn bias(&self, loaded: &LoadedNetlist) -> Result<(f64, f64)> {
        let ng = self.ng_ext.unwrap_or(loaded.ng);
        let phi = match &self.phi_ext {
            Some(s) => parse_angle(s)?,
            None => loaded.phi,
        };
        Ok((ng, phi))
    }

    fn run(&self, command: &str, config_bytes: &[u8]) -> Result<Run> {
        Run::new(
            &self.out_dir,
            command,
            config_bytes,
            self.seed,
            (self.cutoff_charge, self.cutoff_flux),
            self.tol,
        )
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenspectrum, anharmonicities, and charge matrix elements at one
    /// bias point.
    Spectrum {
        netlist: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Transition frequencies over a flux or charge grid.
    Sweep {
        netlist: PathBuf,
        /// Flux grid `lo:hi:n` (angle syntax allowed).
        #[arg(long, conflicts_with = "charge")]
        flux: Option<String>,
        /// Charge grid `lo:hi:n` in Cooper pairs.
        #[arg(long)]
        charge: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Depolarization and dephasing estimates at a point or over a flux
    /// grid.
    Coherence {
        netlist: PathBuf,
        /// Flux grid `lo:hi:n` for a coherence-vs-flux table.
        #[arg(long)]
        sweep_flux: Option<String>,
        /// Dielectric quality factor.
        #[arg(long, default_value_t = 3e6)]
        q_cap: f64,
        /// Inductive quality factor.
        #[arg(long, default_value_t = 500e6)]
        q_ind: f64,
        /// Device temperature in kelvin.
        #[arg(long, default_value_t = 0.015)]
        temperature_k: f64,
        /// 1/f flux-noise amplitude in flux quanta.
        #[arg(long, default_value_t = 1e-6)]
        a_flux: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Single-qubit X-gate error and leakage versus gate time.
    Gate {
        netlist: PathBuf,
        /// Mode whose charge operator carries the drive.
        #[arg(long, default_value_t = 0)]
        drive_mode: usize,
        /// Pulse shape: plain Hahn window, DRAG-corrected, or fully
        /// calibrated (amplitude, detuning, beta).
        #[arg(long, value_parser = ["hahn", "drag", "calibrated"], default_value = "drag")]
        shape: String,
        /// DRAG quadrature weight (drag shape only).
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Gate-time grid `lo:hi:n` in ns.
        #[arg(long, default_value = "5:20:4")]
        tg: String,
        #[command(flatten)]
        common: Common,
    },
    /// Dispersive shifts, IQ trajectories, and optional active-reset pulse.
    Readout {
        netlist: PathBuf,
        /// Mode whose charge operator couples to the resonator.
        #[arg(long, default_value_t = 2)]
        readout_mode: usize,
        /// Bare resonator frequency, GHz.
        #[arg(long, default_value_t = 6.99)]
        omega_r: f64,
        /// Qubit-resonator coupling, GHz.
        #[arg(long, default_value_t = 0.087)]
        g: f64,
        /// Cavity decay rate in rad/ns; default is `kappa_factor` times the
        /// excited-state pull.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 9.03)]
        kappa_factor: f64,
        /// Measurement time, ns.
        #[arg(long, default_value_t = 100.0)]
        t_m: f64,
        /// Mid-measurement photon target for amplitude calibration.
        #[arg(long, default_value_t = 5.0)]
        photons: f64,
        /// Also synthesize an unconditional-reset pulse.
        #[arg(long)]
        reset: bool,
        /// States the reset pulse empties, comma separated.
        #[arg(long, default_value = "0,1")]
        reset_states: String,
        /// Flag reset pulses whose peak exceeds this multiple of the trial.
        #[arg(long, default_value_t = 20.0)]
        amplification_bound: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Evolutionary search driven by a TOML target file.
    Evolve {
        targets: PathBuf,
        /// Gradient-descent fine-tuning pass on the best genome.
        #[arg(long)]
        fine_tune: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fabrication-spread Monte Carlo of the qubit observables.
    Resilience {
        netlist: PathBuf,
        /// Relative component spreads, comma separated.
        #[arg(long, default_value = "0.01,0.02,0.05")]
        sigmas: String,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Spectrum { netlist, common } => cmd_spectrum(&netlist, &common),
        Command::Sweep { netlist, flux, charge, common } => {
            cmd_sweep(&netlist, flux.as_deref(), charge.as_deref(), &common)
        }
        Command::Coherence { netlist, sweep_flux, q_cap, q_ind, temperature_k, a_flux, common } => {
            cmd_coherence(&netlist, sweep_flux.as_deref(), q_cap, q_ind, temperature_k, a_flux, &common)
        }
        Command::Gate { netlist, drive_mode, shape, beta, tg, common } => {
            cmd_gate(&netlist, drive_mode, &shape, beta, &tg, &common)
        }
        Command::Readout {
            netlist,
            readout_mode,
            omega_r,
            g,
            kappa,
            kappa_factor,
            t_m,
            photons,
            reset,
            reset_states,
            amplification_bound,
            common,
        } => cmd_readout(
            &netlist,
            readout_mode,
            omega_r,
            g,
            kappa,
            kappa_factor,
            t_m,
            photons,
            reset,
            &reset_states,
            amplification_bound,
            &common,
        ),
        Command::Evolve { targets, fine_tune, common } => cmd_evolve(&targets, fine_tune, &common),
        Command::Resilience { netlist, sigmas, samples, common } => {
            cmd_resilience(&netlist, &sigmas, samples, &common)
        }
    }
}

fn config_bytes(paths: &[&PathBuf], extra: &str) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    for p in paths {
        bytes.extend_from_slice(
            &std::fs::read(p).with_context(|| format!("cannot read {}", p.display()))?,
        );
    }
    bytes.extend_from_slice(extra.as_bytes());
    Ok(bytes)
}

fn cmd_spectrum(netlist: &PathBuf, common: &Common) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let mut run = common.run("spectrum", &config_bytes(&[netlist], &format!("{ng} {phi} {}", common.levels))?)?;

    let sys = assemble(&loaded.netlist, &common.quantize())?;
    let opts = SpectrumOptions { n_keep: common.levels, tol: common.tol, seed: common.seed };
    let spec = spectrum::analyze(&sys, ng, phi, &opts)?;

    let n_modes = loaded.netlist.n_modes();
    let mut table = run.table("spectrum");
    table
        .meta("netlist", &netlist.display().to_string())
        .meta("ng_ext", &sig9(ng))
        .meta("phi_ext_rad", &sig9(phi))
        .meta("w01_ghz", &sig9(spec.transitions[1]))
        .meta("eta_ghz", &sig9(spec.eta))
        .meta("alpha_ghz", &sig9(spec.alpha));
    let mut cols = vec!["k".to_string(), "energy_ghz".to_string(), "transition_ghz".to_string()];
    for m in 0..n_modes {
        cols.push(format!("abs_n{m}_k0"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    table.columns(&col_refs);
    for k in 0..spec.energies.len() {
        let mut row = vec![spec.energies[k], spec.transitions[k]];
        for m in 0..n_modes {
            row.push(spec.n_elements[m][(k, 0)].norm());
        }
        table.row_indexed(k, &row);
    }
    let path = table.save()?;
    println!(
        "w01 = {} GHz, eta = {} GHz, alpha = {} GHz",
        sig9(spec.transitions[1]),
        sig9(spec.eta),
        sig9(spec.alpha)
    );
    println!("wrote {}", path.display());
    run.finish()?;
    Ok(())
}

fn cmd_sweep(
    netlist: &PathBuf,
    flux: Option<&str>,
    charge: Option<&str>,
    common: &Common,
) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let spec = format!("{flux:?} {charge:?} {ng} {phi} {}", common.levels);
    let mut run = common.run("sweep", &config_bytes(&[netlist], &spec)?)?;

    let sys = assemble(&loaded.netlist, &common.quantize())?;
    let opts = SpectrumOptions { n_keep: common.levels, tol: common.tol, seed: common.seed };
    let (bias_name, points) = match (flux, charge) {
        (Some(grid), None) => {
            ("phi_ext_rad", spectrum::sweep_flux(&sys, ng, &parse_grid(grid)?, &opts)?)
        }
        (None, Some(grid)) => {
            ("ng_ext", spectrum::sweep_charge(&sys, phi, &parse_grid(grid)?, &opts)?)
        }
        _ => bail!("pass exactly one of --flux or --charge"),
    };

    let mut table = run.table("sweep");
    table.meta("netlist", &netlist.display().to_string());
    let mut cols = vec![bias_name.to_string()];
    for k in 1..common.levels {
        cols.push(format!("w0{k}_ghz"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    table.columns(&col_refs);
    for p in &points {
        let mut row = vec![p.bias];
        row.extend(p.transitions.iter().skip(1));
        table.row(&row);
    }
    println!("wrote {}", table.save()?.display());
    run.finish()?;
    Ok(())
}

fn cmd_coherence(
    netlist: &PathBuf,
    sweep_flux: Option<&str>,
    q_cap: f64,
    q_ind: f64,
    temperature_k: f64,
    a_flux: f64,
    common: &Common,
) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let spec = format!("{sweep_flux:?} {q_cap} {q_ind} {temperature_k} {a_flux} {ng} {phi}");
    let mut run = common.run("coherence", &config_bytes(&[netlist], &spec)?)?;

    let params = NoiseParams {
        q_cap,
        q_ind,
        temperature_k,
        a_flux_phi0: a_flux,
        n_keep: common.levels,
        tol: common.tol,
        seed: common.seed,
        ..Default::default()
    };
    let qopts = common.quantize();
    let (grid, reports) = match sweep_flux {
        Some(g) => {
            let grid = parse_grid(g)?;
            let reports =
                coherence::sweep_flux_coherence(&loaded.netlist, &qopts, ng, &grid, &params)?;
            (grid, reports)
        }
        None => {
            (vec![phi], vec![coherence::estimate(&loaded.netlist, &qopts, ng, phi, &params)?])
        }
    };

    let mut table = run.table("coherence");
    table
        .meta("netlist", &netlist.display().to_string())
        .meta("ng_ext", &sig9(ng))
        .columns(&[
            "phi_ext_rad",
            "t1_us",
            "tphi_us",
            "t2_us",
            "gamma1_dielectric_hz",
            "gamma1_inductive_hz",
            "gamma1_quasiparticle_hz",
            "gamma_phi_flux_hz",
            "gamma_phi_charge_hz",
        ]);
    for (b, r) in grid.iter().zip(&reports) {
        table.row(&[
            *b,
            r.t1_us,
            r.t_phi_us,
            r.t2_us,
            r.gamma1_dielectric,
            r.gamma1_inductive,
            r.gamma1_quasiparticle,
            r.gamma_phi_flux,
            r.gamma_phi_charge,
        ]);
    }
    println!("wrote {}", table.save()?.display());
    run.finish()?;
    Ok(())
}

fn cmd_gate(
    netlist: &PathBuf,
    drive_mode: usize,
    shape: &str,
    beta: f64,
    tg: &str,
    common: &Common,
) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let spec = format!("{drive_mode} {shape} {beta} {tg} {ng} {phi} {}", common.levels);
    let mut run = common.run("gate", &config_bytes(&[netlist], &spec)?)?;

    let model_levels = common.levels.max(4);
    let sys = assemble(&loaded.netlist, &common.quantize())?;
    let opts = SpectrumOptions { n_keep: model_levels, tol: common.tol, seed: common.seed };
    let spectrum = spectrum::analyze(&sys, ng, phi, &opts)?;
    let model = gate::build_control_model(&spectrum, drive_mode, model_levels)?;

    let mut table = run.table("gate");
    table
        .meta("netlist", &netlist.display().to_string())
        .meta("shape", shape)
        .meta("drive_mode", &drive_mode.to_string())
        .meta("optimal_beta", &sig9(model.optimal_beta()))
        .columns(&["tg_ns", "error", "leakage", "amplitude_rad_ns", "detuning_rad_ns", "beta"]);
    for t_g in parse_grid(tg)? {
        let base = PulseSchedule::hahn_pi(&model, t_g);
        let (result, amp, det, b) = match shape {
            "hahn" => (gate::propagate(&model, &base, GateTarget::X)?, base.amplitude, 0.0, 0.0),
            "drag" => {
                let sched = gate::drag_correct(&base, &model, beta)?;
                (gate::propagate(&model, &sched, GateTarget::X)?, sched.amplitude, 0.0, beta)
            }
            "calibrated" => {
                let cal = gate::calibrate(&model, t_g)?;
                let (a, d, b) = (cal.amplitude, cal.detuning, cal.beta);
                (cal.result, a, d, b)
            }
            other => bail!("unknown pulse shape `{other}`"),
        };
        table.row(&[t_g, result.error, result.leakage, amp, det, b]);
    }
    println!("wrote {}", table.save()?.display());
    run.finish()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_readout(
    netlist: &PathBuf,
    readout_mode: usize,
    omega_r_ghz: f64,
    g_ghz: f64,
    kappa: Option<f64>,
    kappa_factor: f64,
    t_m: f64,
    photons: f64,
    reset: bool,
    reset_states: &str,
    amplification_bound: f64,
    common: &Common,
) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let spec = format!(
        "{readout_mode} {omega_r_ghz} {g_ghz} {kappa:?} {kappa_factor} {t_m} {photons} {reset} {reset_states} {amplification_bound} {ng} {phi}"
    );
    let mut run = common.run("readout", &config_bytes(&[netlist], &spec)?)?;

    let sys = assemble(&loaded.netlist, &common.quantize())?;
    let opts = SpectrumOptions { n_keep: common.levels.max(3), tol: common.tol, seed: common.seed };
    let spectrum = spectrum::analyze(&sys, ng, phi, &opts)?;

    let mut config = ReadoutConfig {
        omega_r: 2.0 * PI * omega_r_ghz,
        g: 2.0 * PI * g_ghz,
        readout_mode,
        kappa: 0.0,
        t_m,
        amplitude: 2.0 * PI * 0.035,
        levels: opts.n_keep,
        samples: 4096,
    };
    let model = readout::dispersive_shifts(&spectrum, &config)?;
    config.kappa = kappa.unwrap_or(kappa_factor * model.chi[1].abs());
    config.amplitude = readout::calibrate_amplitude(&model, &config, 0, photons)?;

    let traj0 = readout::simulate_iq(&model, &config, 0)?;
    let traj1 = readout::simulate_iq(&model, &config, 1)?;

    let mut table = run.table("readout");
    table
        .meta("netlist", &netlist.display().to_string())
        .meta("chi_0_rad_ns", &sig9(model.chi[0]))
        .meta("chi_1_rad_ns", &sig9(model.chi[1]))
        .meta("chi_qubit_rad_ns", &sig9(model.chi_qubit))
        .meta("delta_10_rad_ns", &sig9(model.delta_10))
        .meta("n_crit", &sig9(model.n_crit))
        .meta("kappa_rad_ns", &sig9(config.kappa))
        .meta("amplitude_rad_ns", &sig9(config.amplitude))
        .meta("photons_mid_0", &sig9(traj0.photons_mid()))
        .meta("photons_mid_1", &sig9(traj1.photons_mid()))
        .columns(&["t_ns", "i_0", "q_0", "photons_0", "i_1", "q_1", "photons_1"]);
    for k in 0..traj0.t.len() {
        table.row(&[
            traj0.t[k],
            traj0.a[k].re,
            traj0.a[k].im,
            traj0.photons[k],
            traj1.a[k].re,
            traj1.a[k].im,
            traj1.photons[k],
        ]);
    }
    println!("wrote {}", table.save()?.display());

    if reset {
        let states: Vec<usize> = reset_states
            .split(',')
            .map(|s| s.trim().parse::<usize>().context("bad reset state"))
            .collect::<Result<_>>()?;
        let pulse = readout::synthesize_reset_pulse(&model, &config, &states, amplification_bound)?;
        let steps = pulse.t.len().min(4096);
        let check0 = readout::simulate_iq_with(&model, &config, 0, |t| pulse.envelope(t), steps)?;
        let mut table = run.table("reset");
        table
            .meta("states", reset_states)
            .meta("amplification", &sig9(pulse.amplification))
            .meta(
                "amplified_beyond_bound",
                if pulse.amplified_beyond_bound { "true" } else { "false" },
            )
            .meta("leftover_photons_0", &sig9(check0.leftover))
            .columns(&["t_ns", "re_omega_rad_ns", "im_omega_rad_ns"]);
        for (k, t) in pulse.t.iter().enumerate() {
            table.row(&[*t, pulse.omega[k].re, pulse.omega[k].im]);
        }
        println!("wrote {}", table.save()?.display());
    }
    run.finish()?;
    Ok(())
}

fn cmd_evolve(targets: &PathBuf, fine_tune: bool, common: &Common) -> Result<()> {
    let spec = format!("{fine_tune}");
    let mut run = common.run("evolve", &config_bytes(&[targets], &spec)?)?;
    let (config, fitness) =
        load_evolve_config(targets, common.seed, common.quantize(), common.tol)?;

    let result = evolve::evolve(&config, &fitness)?;
    let (best, best_cost) = if fine_tune {
        let (tuned, report) = evolve::fine_tune(&result.best, &fitness, &config.bounds)?;
        (tuned, report.cost)
    } else {
        (result.best.clone(), result.best_cost)
    };

    let mut table = run.table("history");
    table
        .meta("targets", &targets.display().to_string())
        .meta("best_cost", &sig9(best_cost))
        .columns(&["generation", "best_cost", "mean_cost"]);
    for (g, stats) in result.history.iter().enumerate() {
        table.row_indexed(g, &[stats.best_cost, stats.mean_cost]);
    }
    println!("wrote {}", table.save()?.display());

    let path = run.write_text("best.toml", &netlist_to_toml(&best.decode()))?;
    println!("best cost {} -> {}", sig9(best_cost), path.display());
    run.finish()?;
    Ok(())
}

fn cmd_resilience(netlist: &PathBuf, sigmas: &str, samples: usize, common: &Common) -> Result<()> {
    let loaded = load_netlist(netlist)?;
    let (ng, phi) = common.bias(&loaded)?;
    let spec = format!("{sigmas} {samples} {ng} {phi}");
    let mut run = common.run("resilience", &config_bytes(&[netlist], &spec)?)?;

    let study = evolve::resilience_study(
        &loaded.netlist,
        &parse_list(sigmas)?,
        samples,
        common.seed,
        &common.quantize(),
        ng,
        phi,
    )?;

    let mut table = run.table("resilience");
    table
        .meta("netlist", &netlist.display().to_string())
        .meta("ng_ext", &sig9(ng))
        .meta("phi_ext_rad", &sig9(phi))
        .columns(&[
            "sigma",
            "samples",
            "resampled",
            "alpha_mean_ghz",
            "alpha_std_ghz",
            "eta_mean_ghz",
            "eta_std_ghz",
            "flux_disp_mean_ghz",
            "flux_disp_std_ghz",
            "charge_disp_mean_ghz",
            "charge_disp_std_ghz",
        ]);
    for e in &study.entries {
        table.row(&[
            e.sigma,
            e.n_samples as f64,
            e.n_resampled as f64,
            e.alpha.mean,
            e.alpha.std,
            e.eta.mean,
            e.eta.std,
            e.flux_dispersion.mean,
            e.flux_dispersion.std,
            e.charge_dispersion.mean,
            e.charge_dispersion.std,
        ]);
    }
    println!("wrote {}", table.save()?.display());
    run.finish()?;
    Ok(())
}
