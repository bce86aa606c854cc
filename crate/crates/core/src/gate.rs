//! Charge-driven single-qubit gate simulation on the truncated multi-level
//! system.
//!
//! The device is reduced to its lowest N eigenlevels with the drive-node
//! charge matrix elements as the control operator. Dynamics run in a
//! rotating frame where each level k is boosted by an integer number of
//! drive photons nu_k; couplings between levels whose photon numbers differ
//! by one survive the rotating-wave approximation with a static residual
//! detuning on the diagonal, everything else is dropped. A lab-frame
//! propagator (no rotating-wave approximation) is kept as a cross-check.
//!
//! Pulse shapes: plain sin^2 envelope, and its DRAG correction
//! `Omega_X = Omega + i dOmega/dt / alpha` with either a time-dependent
//! detuning law or a constant drive detuning left to the calibrator.
//! All frequencies and amplitudes in this module are angular (rad/ns);
//! times are ns.

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::spectrum::SpectrumResult;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Reduced control model: level frequencies and drive-operator matrix
/// elements, with the dressed couplings of the dominant leakage channel.
#[derive(Debug, Clone)]
pub struct ControlModel {
    /// Number of retained levels N (>= 4).
    pub levels: usize,
    /// Level frequencies relative to the ground state, angular rad/ns.
    pub omega: Vec<f64>,
    /// Drive-operator matrix elements, normalized so |O_10| = 1 and
    /// gauge-rotated so O_10 is real positive (a global drive phase).
    pub drive: DMatrix<Complex64>,
    /// Drive-photon index nu_k of each level in the rotating frame.
    pub photon_index: Vec<i64>,
    /// Level of the dominant leakage transition from |1> (3 for the
    /// reference device, 2 for a transmon ladder).
    pub leakage_level: usize,
    /// lambda_1 = (n01^2 + m01^2)/n01 of the normalized drive operator.
    pub lambda1: f64,
    /// Re[(m01 + i n01)(m1l - i n1l)] for the leakage transition 1 <-> l.
    pub lambda2: f64,
    /// Im of the same product.
    pub lambda3: f64,
    /// Leakage gap alpha = omega_l - omega_1 - omega_10 (signed), rad/ns.
    pub alpha: f64,
}

impl ControlModel {
    /// Qubit transition frequency, rad/ns.
    pub fn omega10(&self) -> f64 {
        self.omega[1] - self.omega[0]
    }

    /// Optimal DRAG beta cancelling the qubit-subspace phase error without
    /// any detuning, beta = (lambda2^2 + lambda3^2) / (4 lambda1^2); 1/2 for
    /// a transmon ladder (half-DRAG).
    pub fn optimal_beta(&self) -> f64 {
        (self.lambda2 * self.lambda2 + self.lambda3 * self.lambda3)
            / (4.0 * self.lambda1 * self.lambda1)
    }

    /// Copy of the model with the 1 <-> leakage-level coupling removed
    /// (both directions). Used to isolate the leakage channel in tests.
    pub fn without_leakage_coupling(&self) -> ControlModel {
        let mut m = self.clone();
        let l = self.leakage_level;
        m.drive[(1, l)] = c(0.0, 0.0);
        m.drive[(l, 1)] = c(0.0, 0.0);
        m
    }
}

/// Build the control model from a solved spectrum, driving through the
/// charge operator of mode `drive_mode`.
pub fn build_control_model(
    spectrum: &SpectrumResult,
    drive_mode: usize,
    levels: usize,
) -> Result<ControlModel> {
    if levels < 4 {
        return Err(Error::Configuration("control model needs at least 4 levels".into()));
    }
    if spectrum.energies.len() < levels {
        return Err(Error::Configuration(format!(
            "spectrum holds {} levels, control model wants {}",
            spectrum.energies.len(),
            levels
        )));
    }
    let raw = spectrum.n_elements.get(drive_mode).ok_or_else(|| {
        Error::Configuration(format!("no charge matrix elements for mode {drive_mode}"))
    })?;
    let omega: Vec<f64> = (0..levels)
        .map(|k| 2.0 * PI * (spectrum.energies[k] - spectrum.energies[0]))
        .collect();
    let o10 = raw[(1, 0)];
    if o10.norm() < 1e-12 {
        return Err(Error::Configuration(
            "drive node has vanishing 0-1 charge matrix element; unusable for control".into(),
        ));
    }
    finish_control_model(omega, raw.view((0, 0), (levels, levels)).into_owned())
}

fn finish_control_model(omega: Vec<f64>, raw: DMatrix<Complex64>) -> Result<ControlModel> {
    let levels = omega.len();
    let o10 = raw[(1, 0)];
    let scale = o10.norm();
    let omega10 = omega[1] - omega[0];
    if omega10 <= 0.0 {
        return Err(Error::Configuration("levels must be sorted with omega10 > 0".into()));
    }
    let photon_index: Vec<i64> =
        omega.iter().map(|w| ((w - omega[0]) / omega10).round() as i64).collect();

    // normalize and rotate the global drive phase so O_10 is real positive;
    // raising elements (higher photon index) get exp(-i theta), lowering the
    // conjugate, which keeps the operator Hermitian
    let phase = o10 / scale;
    let mut drive = DMatrix::<Complex64>::zeros(levels, levels);
    for k in 0..levels {
        for j in 0..levels {
            if photon_index[k] > photon_index[j] {
                drive[(k, j)] = raw[(k, j)] / scale * phase.conj();
            } else if photon_index[k] < photon_index[j] {
                drive[(k, j)] = (raw[(j, k)] / scale * phase.conj()).conj();
            }
        }
    }

    // dominant leakage transition out of |1>: largest coupling among levels
    // one drive photon away from |1>
    let mut leakage_level = None;
    let mut best = 0.0;
    for k in 2..levels {
        if (photon_index[k] - photon_index[1]).abs() == 1 {
            let mag = drive[(k, 1)].norm();
            if mag > best {
                best = mag;
                leakage_level = Some(k);
            }
        }
    }
    let leakage_level = leakage_level.ok_or_else(|| {
        Error::Configuration("no level couples to |1> within one drive photon".into())
    })?;

    let (n01, m01) = (drive[(1, 0)].re, drive[(1, 0)].im);
    // matrix element of the 1 -> leakage transition, written as n + i m of
    // the raising element
    let o_l1 = drive[(leakage_level, 1)];
    let (n1l, m1l) = (o_l1.re, o_l1.im);
    let lambda1 = (n01 * n01 + m01 * m01) / n01;
    let dressed = c(m01, n01) * c(m1l, -n1l);
    let alpha = omega[leakage_level] - omega[1] - omega10;

    Ok(ControlModel {
        levels,
        omega,
        drive,
        photon_index,
        leakage_level,
        lambda1,
        lambda2: dressed.re,
        lambda3: dressed.im,
        alpha,
    })
}

/// Reference transmon ladder: omega10 = 2 pi x 5 GHz, anharmonicity
/// -2 pi x 250 MHz, drive elements sqrt(k+1) on the ladder.
pub fn transmon_control_model(levels: usize) -> Result<ControlModel> {
    if levels < 4 {
        return Err(Error::Configuration("control model needs at least 4 levels".into()));
    }
    let w10 = 2.0 * PI * 5.0;
    let anh = -2.0 * PI * 0.25;
    let omega: Vec<f64> =
        (0..levels).map(|k| k as f64 * w10 + anh * (k * k.saturating_sub(1)) as f64 / 2.0).collect();
    let mut raw = DMatrix::<Complex64>::zeros(levels, levels);
    for k in 0..levels - 1 {
        let v = ((k + 1) as f64).sqrt();
        raw[(k + 1, k)] = c(v, 0.0);
        raw[(k, k + 1)] = c(v, 0.0);
    }
    finish_control_model(omega, raw)
}

/// Pulse shape selector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Plain sin^2 envelope on the in-phase quadrature.
    Hahn,
    /// DRAG-corrected envelope with the derivative quadrature scaled by
    /// beta; beta = 1 cancels the leakage channel, beta = optimal_beta
    /// cancels the phase error instead.
    Drag {
        beta: f64,
        /// Apply the time-dependent detuning law
        /// delta(t) = (l2^2 + l3^2 - 4 beta l1^2) |Omega|^2 / (4 alpha l1^2)
        /// as nu_k * delta(t) on the diagonal, cancelling the residual
        /// ac-Stark phase for the chosen beta.
        dynamic_detuning: bool,
    },
}

/// A concrete drive pulse.
#[derive(Debug, Clone)]
pub struct PulseSchedule {
    pub shape: PulseShape,
    /// Peak envelope amplitude Omega_0, rad/ns.
    pub amplitude: f64,
    /// Gate time t_g, ns.
    pub gate_time: f64,
    /// Constant drive detuning: omega_d = omega10 + detuning, rad/ns.
    pub detuning: f64,
    /// Integrator step, ns. Must satisfy dt <= t_g / 200.
    pub dt: f64,
}

impl PulseSchedule {
    /// Hahn pulse at the analytic pi-rotation amplitude
    /// Omega_0 = 2 pi / (lambda1 t_g) for an X gate.
    pub fn hahn_pi(model: &ControlModel, gate_time: f64) -> PulseSchedule {
        PulseSchedule {
            shape: PulseShape::Hahn,
            amplitude: 2.0 * PI / (model.lambda1 * gate_time),
            gate_time,
            detuning: 0.0,
            dt: gate_time / 2000.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gate_time > 0.0) || !(self.dt > 0.0) {
            return Err(Error::Configuration("gate time and dt must be positive".into()));
        }
        if self.dt > self.gate_time / 200.0 {
            return Err(Error::Configuration(format!(
                "dt = {} too coarse; need dt <= t_g/200 = {}",
                self.dt,
                self.gate_time / 200.0
            )));
        }
        Ok(())
    }

    /// Complex envelope Omega_X(t) including the DRAG quadrature.
    pub fn envelope(&self, model: &ControlModel, t: f64) -> Complex64 {
        let s = (PI * t / self.gate_time).sin();
        let base = self.amplitude * s * s;
        match self.shape {
            PulseShape::Hahn => c(base, 0.0),
            PulseShape::Drag { beta, .. } => {
                let deriv =
                    self.amplitude * PI / self.gate_time * (2.0 * PI * t / self.gate_time).sin();
                // the raising coupling carries Omega_X, so the derivative
                // quadrature enters with the conjugate sign relative to a
                // lowering-side convention
                c(base, -beta * deriv / model.alpha)
            }
        }
    }

    /// Time-dependent detuning delta(t) (zero unless the DRAG detuning law
    /// is active).
    pub fn dynamic_delta(&self, model: &ControlModel, t: f64) -> f64 {
        match self.shape {
            PulseShape::Drag { beta, dynamic_detuning: true } => {
                let s = (PI * t / self.gate_time).sin();
                let omega = self.amplitude * s * s;
                let l1 = model.lambda1;
                let (l2, l3) = (model.lambda2, model.lambda3);
                omega * omega * (l2 * l2 + l3 * l3 - 4.0 * beta * l1 * l1)
                    / (4.0 * model.alpha * l1 * l1)
            }
            _ => 0.0,
        }
    }
}

/// Target unitary on the qubit subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateTarget {
    X,
    Y,
    Identity,
}

impl GateTarget {
    fn matrix(self) -> DMatrix<Complex64> {
        let mut v = DMatrix::<Complex64>::zeros(2, 2);
        match self {
            GateTarget::X => {
                v[(0, 1)] = c(1.0, 0.0);
                v[(1, 0)] = c(1.0, 0.0);
            }
            GateTarget::Y => {
                v[(0, 1)] = c(0.0, -1.0);
                v[(1, 0)] = c(0.0, 1.0);
            }
            GateTarget::Identity => {
                v[(0, 0)] = c(1.0, 0.0);
                v[(1, 1)] = c(1.0, 0.0);
            }
        }
        v
    }
}

/// Propagation outcome.
#[derive(Debug, Clone)]
pub struct GateResult {
    /// Full N-level rotating-frame propagator at t_g.
    pub u: DMatrix<Complex64>,
    /// Qubit block of `u`.
    pub u_qubit: DMatrix<Complex64>,
    /// Gate error 1 - F against the target.
    pub error: f64,
    /// Leakage out of |1> into levels >= 2.
    pub leakage: f64,
}

/// Average-fidelity gate error for the qubit block `uq` against target `v`,
/// with d = 2: F = Tr[Uq Uq^dag]/(d(d+1)) + |Tr[Uq V^dag]|^2/(d(d+1)).
pub fn gate_error(uq: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> f64 {
    let d = 2.0;
    let denom = d * (d + 1.0);
    let t1: f64 = (uq * uq.adjoint()).diagonal().iter().map(|z| z.re).sum();
    let t2 = (uq * v.adjoint()).diagonal().iter().sum::<Complex64>().norm_sqr();
    1.0 - (t1 + t2) / denom
}

/// Leakage from computational state |k> (d = 2):
/// L = (1/d) sum_{j>=2, j != k} |U_jk|^2 + |U_kj|^2.
pub fn leakage_from(u: &DMatrix<Complex64>, k: usize) -> f64 {
    let n = u.nrows();
    let mut acc = 0.0;
    for j in 2..n {
        if j == k {
            continue;
        }
        acc += u[(j, k)].norm_sqr() + u[(k, j)].norm_sqr();
    }
    acc / 2.0
}

/// Rotating-frame Hamiltonian at time `t` for the given schedule.
fn hamiltonian_at(
    model: &ControlModel,
    schedule: &PulseSchedule,
    omega_d: f64,
    t: f64,
) -> DMatrix<Complex64> {
    let n = model.levels;
    let env = schedule.envelope(model, t);
    let delta = schedule.dynamic_delta(model, t);
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let nu = model.photon_index[k] as f64;
        h[(k, k)] = c(model.omega[k] - nu * omega_d + nu * delta, 0.0);
    }
    for k in 0..n {
        for j in 0..k {
            let dn = model.photon_index[k] - model.photon_index[j];
            if dn.abs() != 1 {
                continue;
            }
            // raising side (higher photon index) carries Omega_X / 2
            let hv = if dn == 1 {
                model.drive[(k, j)] * env * 0.5
            } else {
                (model.drive[(j, k)] * env * 0.5).conj()
            };
            h[(k, j)] = hv;
            h[(j, k)] = hv.conj();
        }
    }
    h
}

/// exp(-i H dt) for Hermitian H via eigendecomposition.
fn expm_herm(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let phase = c(0.0, -eig.eigenvalues[k] * dt).exp();
        let col = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += phase * col[i] * col[j].conj();
            }
        }
    }
    out
}

/// Fourth-order commutator-free Magnus step coefficients.
const CF4_C1: f64 = 0.5 - 0.288_675_134_594_812_9; // 1/2 - sqrt(3)/6
const CF4_C2: f64 = 0.5 + 0.288_675_134_594_812_9;

fn cf4_step(
    model: &ControlModel,
    schedule: &PulseSchedule,
    omega_d: f64,
    t: f64,
    dt: f64,
) -> DMatrix<Complex64> {
    // Gauss-Legendre samples and the standard commutator-free weights
    // a = (3 - 2 sqrt(3)) / 12, b = (3 + 2 sqrt(3)) / 12
    let a = (3.0 - 2.0 * 3.0f64.sqrt()) / 12.0;
    let b = (3.0 + 2.0 * 3.0f64.sqrt()) / 12.0;
    let h1 = hamiltonian_at(model, schedule, omega_d, t + CF4_C1 * dt);
    let h2 = hamiltonian_at(model, schedule, omega_d, t + CF4_C2 * dt);
    // earliest sub-step acts first (rightmost factor)
    let first = &h1 * c(b, 0.0) + &h2 * c(a, 0.0);
    let second = &h1 * c(a, 0.0) + &h2 * c(b, 0.0);
    expm_herm(&second, dt) * expm_herm(&first, dt)
}

/// Propagate the schedule and score against the target.
pub fn propagate(
    model: &ControlModel,
    schedule: &PulseSchedule,
    target: GateTarget,
) -> Result<GateResult> {
    schedule.validate()?;
    let n = model.levels;
    let omega_d = model.omega10() + schedule.detuning;
    let steps = (schedule.gate_time / schedule.dt).ceil() as usize;
    let dt = schedule.gate_time / steps as f64;
    let mut u = DMatrix::<Complex64>::identity(n, n);
    for s in 0..steps {
        let t = s as f64 * dt;
        u = cf4_step(model, schedule, omega_d, t, dt) * u;
    }
    let defect = (u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).norm();
    if defect > 1e-8 * n as f64 {
        return Err(Error::Integrator(format!(
            "unitarity defect {defect:.3e} exceeds tolerance; reduce dt"
        )));
    }
    let u_qubit = u.view((0, 0), (2, 2)).into_owned();
    let error = gate_error(&u_qubit, &target.matrix());
    let leakage = leakage_from(&u, 1);
    Ok(GateResult { u, u_qubit, error, leakage })
}

/// Propagate the same physical drive in the lab frame (no rotating-wave
/// approximation, all drive couplings retained), then rotate the final
/// propagator into the frame used by [`propagate`]. The dynamic detuning
/// law is not supported here.
pub fn propagate_lab_frame(
    model: &ControlModel,
    schedule: &PulseSchedule,
    target: GateTarget,
) -> Result<GateResult> {
    schedule.validate()?;
    if matches!(schedule.shape, PulseShape::Drag { dynamic_detuning: true, .. }) {
        return Err(Error::Configuration(
            "lab-frame cross-check does not support the dynamic detuning law".into(),
        ));
    }
    let n = model.levels;
    let omega_d = model.omega10() + schedule.detuning;
    let steps = (schedule.gate_time / schedule.dt).ceil() as usize;
    let dt = schedule.gate_time / steps as f64;

    let h_at = |t: f64| -> DMatrix<Complex64> {
        let env = schedule.envelope(model, t);
        // physical drive f(t) = Re[Omega_X(t) exp(-i omega_d t)]
        let f = (env * c(0.0, -omega_d * t).exp()).re;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            h[(k, k)] = c(model.omega[k], 0.0);
        }
        for k in 0..n {
            for j in 0..k {
                let dn = model.photon_index[k] - model.photon_index[j];
                let hv = if dn >= 0 { model.drive[(k, j)] } else { model.drive[(j, k)].conj() };
                h[(k, j)] += hv * f;
                h[(j, k)] += (hv * f).conj();
            }
        }
        h
    };

    let mut u = DMatrix::<Complex64>::identity(n, n);
    let a = (3.0 - 2.0 * 3.0f64.sqrt()) / 12.0;
    let b = (3.0 + 2.0 * 3.0f64.sqrt()) / 12.0;
    for s in 0..steps {
        let t = s as f64 * dt;
        let h1 = h_at(t + CF4_C1 * dt);
        let h2 = h_at(t + CF4_C2 * dt);
        let first = &h1 * c(b, 0.0) + &h2 * c(a, 0.0);
        let second = &h1 * c(a, 0.0) + &h2 * c(b, 0.0);
        u = expm_herm(&second, dt) * expm_herm(&first, dt) * u;
    }
    let defect = (u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n)).norm();
    if defect > 1e-8 * n as f64 {
        return Err(Error::Integrator(format!(
            "unitarity defect {defect:.3e} exceeds tolerance; reduce dt"
        )));
    }
    // back to the rotating frame: U_rot = exp(i H_frame t_g) U_lab with
    // H_frame = diag(nu_k omega_d)
    let tg = schedule.gate_time;
    let mut rot = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        rot[(k, k)] = c(0.0, model.photon_index[k] as f64 * omega_d * tg).exp();
    }
    let u = rot * u;
    let u_qubit = u.view((0, 0), (2, 2)).into_owned();
    let error = gate_error(&u_qubit, &target.matrix());
    let leakage = leakage_from(&u, 1);
    Ok(GateResult { u, u_qubit, error, leakage })
}

/// Attach the DRAG correction to a schedule: complex envelope
/// Omega_X = Omega + i dOmega/dt / alpha plus the time-dependent detuning
/// law for the given beta.
pub fn drag_correct(schedule: &PulseSchedule, model: &ControlModel, beta: f64) -> Result<PulseSchedule> {
    if model.alpha == 0.0 {
        return Err(Error::Configuration("DRAG needs a nonzero leakage gap alpha".into()));
    }
    let mut out = schedule.clone();
    out.shape = PulseShape::Drag { beta, dynamic_detuning: true };
    Ok(out)
}

/// Calibration outcome.
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// Optimized peak amplitude, rad/ns.
    pub amplitude: f64,
    /// Optimized constant drive detuning, rad/ns.
    pub detuning: f64,
    /// Optimized DRAG beta (started from the model's optimal beta).
    pub beta: f64,
    pub result: GateResult,
    pub converged: bool,
    pub evaluations: usize,
}

/// Calibrate {Omega_0, delta, beta} for an X gate at `gate_time` with a
/// DRAG-corrected pulse, minimizing the gate error with the
/// downhill-simplex optimizer. The initial simplex sits around the analytic
/// pi-pulse amplitude, zero detuning, and the phase-optimal beta.
pub fn calibrate(model: &ControlModel, gate_time: f64) -> Result<CalibrationResult> {
    let amp0 = 2.0 * PI / (model.lambda1 * gate_time);
    let schedule_for = |x: &[f64]| PulseSchedule {
        shape: PulseShape::Drag { beta: x[2], dynamic_detuning: false },
        amplitude: x[0],
        gate_time,
        detuning: x[1],
        dt: gate_time / 2000.0,
    };
    let objective = |x: &[f64]| -> f64 {
        match propagate(model, &schedule_for(x), GateTarget::X) {
            Ok(r) => r.error,
            Err(_) => 1.0,
        }
    };
    let opts = NelderMeadOptions { tolerance: 1e-12, max_evaluations: 2000 };
    let fit = nelder_mead(
        objective,
        &[amp0, 0.0, model.optimal_beta()],
        &[0.05 * amp0, 0.02, 0.1],
        &opts,
    )?;
    let result = propagate(model, &schedule_for(&fit.x), GateTarget::X)?;
    Ok(CalibrationResult {
        amplitude: fit.x[0],
        detuning: fit.x[1],
        beta: fit.x[2],
        result,
        converged: fit.converged,
        evaluations: fit.evaluations,
    })
}
