//! Dispersive readout: multi-level cavity shifts, semiclassical IQ
//! trajectories, and active-reset pulse synthesis by inverse transfer
//! functions in the Fourier domain.
//!
//! The qubit-resonator system is treated in the dispersive regime: each
//! circuit level k pulls the cavity by chi_k, and the cavity amplitude obeys
//! the linear input-output equation
//! `d<a>/dt = (i chi_k - kappa/2) <a> + i Omega(t)`.
//! All frequencies in this module are angular (rad/ns); times are ns.

use crate::error::{Error, Result};
use crate::spectrum::SpectrumResult;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Readout configuration. Frequencies are angular rad/ns.
#[derive(Debug, Clone)]
pub struct ReadoutConfig {
    /// Bare resonator frequency omega_r.
    pub omega_r: f64,
    /// Bare qubit-resonator coupling g.
    pub g: f64,
    /// Circuit mode whose charge operator couples to the resonator.
    pub readout_mode: usize,
    /// Cavity decay rate kappa.
    pub kappa: f64,
    /// Measurement time t_m, ns.
    pub t_m: f64,
    /// Trial-envelope peak amplitude Omega_0 for Omega_0 sin^3(pi t / t_m).
    pub amplitude: f64,
    /// Number of circuit levels retained in the dispersive model.
    pub levels: usize,
    /// Fourier grid size for reset synthesis (rounded up to >= 4096).
    pub samples: usize,
}

impl ReadoutConfig {
    /// Trial envelope Omega(t) = Omega_0 sin^3(pi t / t_m).
    pub fn trial_envelope(&self, t: f64) -> f64 {
        self.amplitude * (PI * t / self.t_m).sin().powi(3)
    }
}

/// Per-level dispersive shifts and derived readout figures.
#[derive(Debug, Clone)]
pub struct DispersiveModel {
    /// Normalized couplings |g_{k,l}| = g |<k|n|l>| / |<0|n|1>|.
    pub g_elements: DMatrix<f64>,
    /// Per-level cavity pulls chi_k, rad/ns.
    pub chi: Vec<f64>,
    /// Qubit-subspace dispersive shift (chi_1 - chi_0) / 2.
    pub chi_qubit: f64,
    /// Signed detuning Delta_10 = epsilon_10 - omega_r.
    pub delta_10: f64,
    /// Critical photon number [Delta_10 / (2 g_10)]^2.
    pub n_crit: f64,
    /// Largest g_{k,l} / |epsilon_{k,l} - omega_r| over the kept levels;
    /// must be << 1 for the dispersive expansion to hold.
    pub validity_ratio: f64,
}

/// Dispersive shifts from explicit level energies (linear GHz) and charge
/// matrix elements. chi_k sums the Stark terms of every downward transition
/// touching level k:
/// `chi_k = sum_{l<k} chibar_{k,l} - sum_{l>k} chibar_{l,k}` with
/// `chibar_{a,b} = |g_{a,b}|^2 / (epsilon_{a,b} - omega_r)`, epsilon_ab > 0.
/// Counter-rotating terms are dropped, matching the rotating-wave model the
/// equation of motion derives from; the two-level case then reduces to
/// chi_1 = g^2 / Delta_10 exactly.
pub fn dispersive_shifts_from_parts(
    energies_ghz: &[f64],
    elements: &DMatrix<Complex64>,
    config: &ReadoutConfig,
) -> Result<DispersiveModel> {
    let n = config.levels;
    if n < 2 {
        return Err(Error::Configuration("dispersive model needs at least 2 levels".into()));
    }
    if energies_ghz.len() < n || elements.nrows() < n {
        return Err(Error::Configuration(format!(
            "need {} levels of energies and matrix elements, have {} and {}",
            n,
            energies_ghz.len(),
            elements.nrows()
        )));
    }
    let norm = elements[(0, 1)].norm();
    if norm < 1e-12 {
        return Err(Error::Configuration(
            "readout mode has vanishing 0-1 charge matrix element".into(),
        ));
    }
    let mut g_elements = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            g_elements[(k, l)] = config.g * elements[(k, l)].norm() / norm;
        }
    }

    let eps = |k: usize, l: usize| 2.0 * PI * (energies_ghz[k] - energies_ghz[l]);
    // resonance guard: any kept transition too close to the resonator makes
    // the dispersive expansion meaningless
    let guard = 1e-4 * config.omega_r.abs().max(1.0);
    let mut validity_ratio: f64 = 0.0;
    for k in 0..n {
        for l in 0..k {
            if g_elements[(k, l)] == 0.0 {
                continue;
            }
            let det = eps(k, l) - config.omega_r;
            if det.abs() < guard {
                return Err(Error::Configuration(format!(
                    "transition {l} -> {k} (epsilon = {:.6} rad/ns) is resonant with the \
                     resonator at {:.6} rad/ns",
                    eps(k, l),
                    config.omega_r
                )));
            }
            validity_ratio = validity_ratio.max(g_elements[(k, l)] / det.abs());
        }
    }

    let chibar = |upper: usize, lower: usize| -> f64 {
        let g = g_elements[(upper, lower)];
        g * g / (eps(upper, lower) - config.omega_r)
    };
    let chi: Vec<f64> = (0..n)
        .map(|k| {
            let down: f64 = (0..k).map(|l| chibar(k, l)).sum();
            let up: f64 = (k + 1..n).map(|l| chibar(l, k)).sum();
            down - up
        })
        .collect();

    let delta_10 = eps(1, 0) - config.omega_r;
    let g10 = g_elements[(1, 0)];
    Ok(DispersiveModel {
        chi_qubit: (chi[1] - chi[0]) / 2.0,
        chi,
        delta_10,
        n_crit: (delta_10 / (2.0 * g10)).powi(2),
        g_elements,
        validity_ratio,
    })
}

/// Dispersive shifts for a solved spectrum, coupling through the charge
/// operator of `config.readout_mode`.
pub fn dispersive_shifts(
    spectrum: &SpectrumResult,
    config: &ReadoutConfig,
) -> Result<DispersiveModel> {
    let elements = spectrum.n_elements.get(config.readout_mode).ok_or_else(|| {
        Error::Configuration(format!("no charge matrix elements for mode {}", config.readout_mode))
    })?;
    dispersive_shifts_from_parts(&spectrum.energies, elements, config)
}

/// Semiclassical cavity trajectory for one initial circuit level.
#[derive(Debug, Clone)]
pub struct IqTrajectory {
    /// Initial circuit level.
    pub level: usize,
    /// Sample times, ns.
    pub t: Vec<f64>,
    /// Cavity amplitude <a>(t).
    pub a: Vec<Complex64>,
    /// Photon-number proxy |<a>|^2 at each sample.
    pub photons: Vec<f64>,
    /// |<a>(t_m)|^2.
    pub leftover: f64,
}

impl IqTrajectory {
    /// Photon proxy at mid-measurement.
    pub fn photons_mid(&self) -> f64 {
        self.photons[self.photons.len() / 2]
    }

    pub fn peak_photons(&self) -> f64 {
        self.photons.iter().cloned().fold(0.0, f64::max)
    }
}

/// Integrate `d a/dt = (i chi - kappa/2) a + i Omega(t)` from vacuum with a
/// classic fourth-order Runge-Kutta on `steps` uniform steps over
/// `[0, t_m]`, sampling every step.
pub fn simulate_iq_with(
    model: &DispersiveModel,
    config: &ReadoutConfig,
    level: usize,
    envelope: impl Fn(f64) -> Complex64,
    steps: usize,
) -> Result<IqTrajectory> {
    let chi = *model
        .chi
        .get(level)
        .ok_or_else(|| Error::Configuration(format!("no dispersive shift for level {level}")))?;
    if steps < 16 {
        return Err(Error::Configuration("IQ integration needs at least 16 steps".into()));
    }
    let lam = c(-config.kappa / 2.0, chi);
    let dt = config.t_m / steps as f64;
    let deriv = |t: f64, a: Complex64| lam * a + c(0.0, 1.0) * envelope(t);

    let mut t_out = Vec::with_capacity(steps + 1);
    let mut a_out = Vec::with_capacity(steps + 1);
    let mut a = c(0.0, 0.0);
    t_out.push(0.0);
    a_out.push(a);
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = deriv(t, a);
        let k2 = deriv(t + dt / 2.0, a + k1 * (dt / 2.0));
        let k3 = deriv(t + dt / 2.0, a + k2 * (dt / 2.0));
        let k4 = deriv(t + dt, a + k3 * dt);
        a += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
        t_out.push((s + 1) as f64 * dt);
        a_out.push(a);
    }
    let photons: Vec<f64> = a_out.iter().map(|z| z.norm_sqr()).collect();
    Ok(IqTrajectory { level, t: t_out, a: a_out, leftover: photons[steps], photons })
}

/// Trajectory under the sin^3 trial envelope of the config.
pub fn simulate_iq(
    model: &DispersiveModel,
    config: &ReadoutConfig,
    level: usize,
) -> Result<IqTrajectory> {
    simulate_iq_with(model, config, level, |t| c(config.trial_envelope(t), 0.0), 4096)
}

/// Steady-state amplitude under a constant drive Omega:
/// `<a> = (-4 chi Omega + 2 i kappa Omega) / (kappa^2 + 4 chi^2)`.
pub fn steady_state(chi: f64, kappa: f64, omega: f64) -> Complex64 {
    let denom = kappa * kappa + 4.0 * chi * chi;
    c(-4.0 * chi * omega / denom, 2.0 * kappa * omega / denom)
}

/// Rescale the trial amplitude so the photon proxy hits `target` photons at
/// mid-measurement for the given initial level (the model is linear in the
/// drive, so a single simulation fixes the scale).
pub fn calibrate_amplitude(
    model: &DispersiveModel,
    config: &ReadoutConfig,
    level: usize,
    target: f64,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Configuration("photon target must be positive".into()));
    }
    let probe = simulate_iq(model, config, level)?;
    let mid = probe.photons_mid();
    if mid <= 0.0 {
        return Err(Error::Configuration("trial pulse stores no photons at mid-measurement".into()));
    }
    Ok(config.amplitude * (target / mid).sqrt())
}

/// Synthesized reset drive.
#[derive(Debug, Clone)]
pub struct ResetPulse {
    /// Sample times over [0, t_m).
    pub t: Vec<f64>,
    /// Complex drive envelope samples.
    pub omega: Vec<Complex64>,
    /// Peak |Omega| of the corrected pulse over the trial peak.
    pub amplification: f64,
    /// Set when `amplification` exceeded the configured bound.
    pub amplified_beyond_bound: bool,
}

impl ResetPulse {
    /// Linear-interpolation view of the sampled envelope, zero outside
    /// [0, t_m).
    pub fn envelope(&self, t: f64) -> Complex64 {
        let n = self.omega.len();
        if n == 0 || t < 0.0 {
            return c(0.0, 0.0);
        }
        let dt = self.t[1] - self.t[0];
        let x = t / dt;
        let i = x.floor() as usize;
        if i + 1 >= n {
            // the grid covers [0, t_m); the envelope returns to zero there
            return if i < n { self.omega[n - 1] * (1.0 - (x - i as f64)) } else { c(0.0, 0.0) };
        }
        let frac = x - i as f64;
        self.omega[i] * (1.0 - frac) + self.omega[i + 1] * frac
    }
}

/// Shape the trial envelope so the cavity returns to vacuum at t_m for each
/// initial state in `states`: apply the inverse transfer function
/// `i (omega - chi_k) + kappa/2` of every corrected state in the Fourier
/// domain, normalized to unit DC gain. A peak amplification above
/// `amplification_bound` is flagged (numerical ringing from aggressive
/// filters).
pub fn synthesize_reset_pulse(
    model: &DispersiveModel,
    config: &ReadoutConfig,
    states: &[usize],
    amplification_bound: f64,
) -> Result<ResetPulse> {
    for &s in states {
        if s >= model.chi.len() {
            return Err(Error::Configuration(format!("no dispersive shift for level {s}")));
        }
    }
    let m = config.samples.max(4096).next_power_of_two();
    let dt = config.t_m / m as f64;
    let mut buf: Vec<Complex64> = (0..m).map(|j| c(config.trial_envelope(j as f64 * dt), 0.0)).collect();
    let trial_peak = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);

    // angular FFT frequencies, negative branch in the upper half
    for (j, v) in buf.iter_mut().enumerate() {
        let idx = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
        let omega = 2.0 * PI * idx / (m as f64 * dt);
        for &k in states {
            let chi = model.chi[k];
            let filt = c(config.kappa / 2.0, omega - chi) / c(config.kappa / 2.0, -chi);
            *v *= filt;
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    let omega: Vec<Complex64> = buf.into_iter().map(|z| z * scale).collect();

    let peak = omega.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let amplification = if trial_peak > 0.0 { peak / trial_peak } else { 0.0 };
    Ok(ResetPulse {
        t: (0..m).map(|j| j as f64 * dt).collect(),
        omega,
        amplification,
        amplified_beyond_bound: amplification > amplification_bound,
    })
}
