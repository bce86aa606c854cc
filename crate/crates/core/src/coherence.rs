//! Golden-rule depolarization rates, 1/f dephasing, and composed coherence
//! times.
//!
//! Depolarization channels sum `(1/hbar^2) |<i|O_b|j>|^2 S_b(w_ij)` over
//! every branch and over all ordered transitions (i, j) touching the
//! computational states {0, 1}, with `w_ij = E_i - E_j` so that upward
//! transitions pick up the detailed-balance suppression through
//! `F(w, T) = coth(hbar|w|/2kT) / (1 + exp(-hbar w/kT))`.
//!
//! Channels:
//! - dielectric: `O = -2e n_b`, `S = (2 hbar / C_b Q_cap) F`
//! - inductive: `O = (Phi0/2pi) phi_b`, `S = (2 hbar / L_b Q_ind) F`
//! - quasiparticle: `O = 2 Phi0 sin(phi_b/2)`, `S = 2 hbar |w| ReY_qp(w) F`;
//!   evaluated in the single-electron representation because the operator
//!   transfers single electrons across the junction.
//!
//! 1/f dephasing uses the first-order away-from-sweet-spot expression
//! `Gamma = sqrt(2) A |dw01/dlambda| sqrt(|ln(w_ir t)|)`.

use crate::consts::{E_CHARGE, HBAR, K_B, PHI_0, PHI_0_BAR};
use crate::eigen::EigenSolution;
use crate::error::{Error, Result};
use crate::netlist::{classify_modes, CircuitNetlist, ModeKind};
use crate::quantize::{assemble, QuantizeOptions, QuantizedSystem};
use crate::spectrum::{charge_derivative_w01, flux_derivative_w01};
use num_complex::Complex64;
use rayon::prelude::*;

/// Quasiparticle admittance model.
#[derive(Debug, Clone, Copy)]
pub enum QpAdmittance {
    /// Single-junction form scaling with the junction energy:
    /// `ReY = x_qp E_J sqrt(2 Delta / (hbar |w|)) / (pi |w| Phi0^2)`,
    /// which reproduces the standard rate
    /// `x_qp sqrt(2 Delta/(hbar w)) (8 E_J / pi hbar) |<sin(phi/2)>|^2 F`.
    Standard {
        /// Quasiparticle density fraction.
        x_qp: f64,
        /// Superconducting gap in joules.
        gap_j: f64,
    },
    /// User-supplied `ReY(w_rad_s, E_J_joule) -> siemens`.
    Custom(fn(f64, f64) -> f64),
}

impl QpAdmittance {
    /// Evaluate the admittance in siemens at angular frequency `w` (rad/s)
    /// for a junction of energy `e_j_joule`.
    pub fn re_y(&self, w_rad_s: f64, e_j_joule: f64) -> f64 {
        let w = w_rad_s.abs();
        match *self {
            QpAdmittance::Standard { x_qp, gap_j } => {
                x_qp * e_j_joule * (2.0 * gap_j / (HBAR * w)).sqrt()
                    / (std::f64::consts::PI * w * PHI_0 * PHI_0)
            }
            QpAdmittance::Custom(f) => f(w_rad_s, e_j_joule),
        }
    }
}

#[derive(Debug, Clone)]
pub struct NoiseParams {
    pub q_cap: f64,
    pub q_ind: f64,
    /// Device temperature in kelvin.
    pub temperature_k: f64,
    /// 1/f flux noise amplitude in units of Phi0.
    pub a_flux_phi0: f64,
    /// 1/f charge noise amplitude in Cooper pairs (2e units).
    pub a_charge_2e: f64,
    /// Infrared cutoff of the 1/f integral, rad/s.
    pub omega_ir_rad_s: f64,
    /// Experiment timescale entering the 1/f log factor, seconds.
    pub t_exp_s: f64,
    pub qp: QpAdmittance,
    /// Number of eigenstates in the transition sum.
    pub n_keep: usize,
    /// Eigensolver tolerance and seed.
    pub tol: f64,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            q_cap: 3e6,
            q_ind: 500e6,
            temperature_k: 0.015,
            a_flux_phi0: 1e-6,
            a_charge_2e: 5e-5, // 1e-4 in single-electron units
            omega_ir_rad_s: 2.0 * std::f64::consts::PI,
            t_exp_s: 10e-6,
            qp: QpAdmittance::Standard { x_qp: 1e-8, gap_j: 2.9e-23 },
            n_keep: 6,
            tol: 1e-10,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoherenceReport {
    /// Depolarization rates in 1/s.
    pub gamma1_dielectric: f64,
    pub gamma1_inductive: f64,
    pub gamma1_quasiparticle: f64,
    /// Dephasing rates in 1/s.
    pub gamma_phi_flux: f64,
    pub gamma_phi_charge: f64,
    /// Composed times in microseconds (infinite when all rates vanish).
    pub t1_us: f64,
    pub t_phi_us: f64,
    pub t2_us: f64,
    /// First-order 1/f rates vanish at a sweet spot; these flags mark that
    /// the reported zero is a first-order statement only.
    pub flux_sweet_spot: bool,
    pub charge_sweet_spot: bool,
    /// Ordered transition pairs included in the depolarization sums.
    pub transitions: Vec<(usize, usize)>,
}

/// Thermal/detailed-balance factor
/// `F = coth(hbar|w|/2kT) / (1 + exp(-hbar w/kT))` for angular frequency
/// `w` in rad/s. Positive `w` is a downward (energy-emitting) transition.
pub fn thermal_factor(omega_rad_s: f64, temperature_k: f64) -> Result<f64> {
    if temperature_k <= 0.0 {
        return Err(Error::Configuration("temperature must be positive".into()));
    }
    if omega_rad_s == 0.0 {
        return Err(Error::Configuration(
            "thermal factor diverges at zero frequency; transition excluded".into(),
        ));
    }
    let x = HBAR * omega_rad_s.abs() / (2.0 * K_B * temperature_k);
    let coth = if x > 20.0 { 1.0 } else { 1.0 / x.tanh() };
    let denom = 1.0 + (-HBAR * omega_rad_s / (K_B * temperature_k)).exp();
    Ok(coth / denom)
}

/// Ordered transition pairs (i, j), i != j, with i or j in {0, 1}.
pub fn transition_pairs(n_keep: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n_keep {
        for j in 0..n_keep {
            if i != j && (i < 2 || j < 2) {
                out.push((i, j));
            }
        }
    }
    out
}

const GHZ_TO_RAD_S: f64 = 2.0 * std::f64::consts::PI * 1e9;

/// Dielectric depolarization rate (1/s) summed over every branch.
pub fn gamma1_dielectric(
    sys: &QuantizedSystem,
    sol: &EigenSolution,
    params: &NoiseParams,
) -> Result<f64> {
    let pairs = transition_pairs(params.n_keep.min(sol.values.len()));
    let mut gamma = 0.0;
    for (b, branch) in sys.netlist.branches.iter().enumerate() {
        let op = sys.branch_charge_op(b)?;
        let c_farad = branch.c_ff * 1e-15;
        for &(i, j) in &pairs {
            let w = (sol.values[i] - sol.values[j]) * GHZ_TO_RAD_S;
            let Ok(f) = thermal_factor(w, params.temperature_k) else { continue };
            let me2 = op.sandwich(&sol.vectors[i], &sol.vectors[j]).norm_sqr();
            gamma += 8.0 * E_CHARGE * E_CHARGE / (HBAR * c_farad * params.q_cap) * me2 * f;
        }
    }
    Ok(gamma)
}

/// Inductive depolarization rate (1/s) summed over inductor branches.
pub fn gamma1_inductive(
    sys: &QuantizedSystem,
    sol: &EigenSolution,
    params: &NoiseParams,
) -> Result<f64> {
    let pairs = transition_pairs(params.n_keep.min(sol.values.len()));
    let mut gamma = 0.0;
    for (b, branch) in sys.netlist.branches.iter().enumerate() {
        let Some(l_nh) = branch.l_nh else { continue };
        let l_henry = l_nh * 1e-9;
        for &(i, j) in &pairs {
            let w = (sol.values[i] - sol.values[j]) * GHZ_TO_RAD_S;
            let Ok(f) = thermal_factor(w, params.temperature_k) else { continue };
            let me2 = branch_phase_element(sys, sol, b, i, j)?.norm_sqr();
            gamma += 2.0 * PHI_0_BAR * PHI_0_BAR / (HBAR * l_henry * params.q_ind) * me2 * f;
        }
    }
    Ok(gamma)
}

/// `<i|phi_from - phi_to|j>` for a branch, valid for i != j on any mode
/// kind (the compact-mode part goes through the commutator identity).
pub fn branch_phase_element(
    sys: &QuantizedSystem,
    sol: &EigenSolution,
    branch: usize,
    i: usize,
    j: usize,
) -> Result<Complex64> {
    let b = &sys.netlist.branches[branch];
    let mut me = Complex64::new(0.0, 0.0);
    if let Some(m) = sys.netlist.mode_of_node(b.from) {
        me += sys.phase_matrix_element(m, sol, i, j)?;
    }
    if let Some(m) = sys.netlist.mode_of_node(b.to) {
        me -= sys.phase_matrix_element(m, sol, i, j)?;
    }
    Ok(me)
}

/// Quasiparticle channel evaluated in a single-electron-capable system.
/// Returns the rate plus the per-junction 0-1 matrix elements (useful for
/// sweet-spot diagnostics).
pub struct QpChannel {
    pub gamma: f64,
    /// `|<0|sin(phi_b/2)|1>|` per junction branch, in branch order.
    pub elements_01: Vec<f64>,
}

pub fn gamma1_quasiparticle(
    sys_se: &QuantizedSystem,
    ng_ext: f64,
    phi_ext: f64,
    params: &NoiseParams,
) -> Result<QpChannel> {
    let has_charge_like =
        sys_se.spec.modes.iter().any(|&k| k == ModeKind::ChargeLike);
    // the single-electron space interleaves the physical (integer
    // Cooper-pair) sector with the half-integer sector, so solve enough
    // states to keep n_keep physical ones
    let k_solve = if has_charge_like {
        (2 * params.n_keep + 2).min(sys_se.dim)
    } else {
        params.n_keep.min(sys_se.dim)
    };
    let sol = sys_se.eigens(ng_ext, phi_ext, k_solve, params.tol, params.seed)?;
    let physical = if has_charge_like {
        let parity = sector_parity(sys_se);
        select_physical_states(&sol, &parity, params.n_keep)?
    } else {
        (0..k_solve).collect::<Vec<_>>()
    };
    let comp = [physical[0], physical.get(1).copied().unwrap_or(physical[0])];

    let mut gamma = 0.0;
    let mut elements_01 = Vec::new();
    for (b, branch) in sys_se.netlist.branches.iter().enumerate() {
        let Some(e_j_ghz) = branch.e_j_ghz else { continue };
        let e_j_joule = e_j_ghz * 1e9 * crate::consts::PLANCK_H;
        let op = sys_se.branch_half_sin(b)?;
        elements_01.push(op.sandwich(&sol.vectors[comp[0]], &sol.vectors[comp[1]]).norm());
        // ordered transitions between a computational state and any other
        // solved state, in either charge sector; both directions are added
        // here, so each unordered pair is visited once
        for &i in &comp {
            for j in 0..sol.values.len() {
                if j == i || (i == comp[1] && j == comp[0]) {
                    continue;
                }
                let me2 = op.sandwich(&sol.vectors[i], &sol.vectors[j]).norm_sqr();
                if me2 == 0.0 {
                    continue;
                }
                for w_ghz in [sol.values[i] - sol.values[j], sol.values[j] - sol.values[i]] {
                    let w = w_ghz * GHZ_TO_RAD_S;
                    let Ok(f) = thermal_factor(w, params.temperature_k) else { continue };
                    let re_y = params.qp.re_y(w, e_j_joule);
                    gamma += 8.0 * PHI_0 * PHI_0 * w.abs() / HBAR * re_y * me2 * f;
                }
            }
        }
    }
    Ok(QpChannel { gamma, elements_01 })
}

/// Per-basis-state sector parity: +1 where every charge-like mode holds an
/// even number of single electrons (the physical Cooper-pair sector).
fn sector_parity(sys_se: &QuantizedSystem) -> Vec<f64> {
    let n_modes = sys_se.dims.len();
    let mut parity = vec![1.0f64; sys_se.dim];
    for idx in 0..sys_se.dim {
        let mut rem = idx;
        for m in (0..n_modes).rev() {
            let k = rem % sys_se.dims[m];
            rem /= sys_se.dims[m];
            if sys_se.spec.modes[m] == ModeKind::ChargeLike {
                // local index k maps to electron number k - N_{E,c}
                let n_cut = (sys_se.dims[m] - 1) / 2;
                if (k + n_cut) % 2 == 1 {
                    parity[idx] = -parity[idx];
                }
            }
        }
    }
    parity
}

/// Pick the eigenstates living in the physical sector, in energy order.
fn select_physical_states(
    sol: &EigenSolution,
    parity: &[f64],
    n_keep: usize,
) -> Result<Vec<usize>> {
    let mut physical = Vec::new();
    for (s, vec) in sol.vectors.iter().enumerate() {
        let p: f64 = vec.iter().zip(parity.iter()).map(|(v, &p)| p * v.norm_sqr()).sum();
        if p > 0.9 {
            physical.push(s);
        } else if p.abs() <= 0.9 {
            return Err(Error::SolverNonConvergence(format!(
                "eigenstate {s} mixes charge sectors (parity {p:.3}); \
                 sectors too close to degeneracy"
            )));
        }
        if physical.len() == n_keep {
            break;
        }
    }
    if physical.len() < 2 {
        return Err(Error::SolverNonConvergence(
            "fewer than two physical-sector states resolved".into(),
        ));
    }
    Ok(physical)
}

/// First-order 1/f dephasing rate
/// `sqrt(2) A |dw01/dlambda| sqrt(|ln(w_ir t)|)` (1/s), from the angular
/// derivative in rad/s per unit of lambda.
pub fn gamma_phi_oneoverf(a_lambda: f64, dw01_dlambda_rad_s: f64, params: &NoiseParams) -> f64 {
    let log_factor = (params.omega_ir_rad_s * params.t_exp_s).ln().abs().sqrt();
    std::f64::consts::SQRT_2 * a_lambda * dw01_dlambda_rad_s.abs() * log_factor
}

/// Compose channel rates into T1 / T_phi / T2 (microseconds).
pub fn compose(
    gamma1: &[f64],
    gamma_phi: &[f64],
    transitions: Vec<(usize, usize)>,
    flux_sweet_spot: bool,
    charge_sweet_spot: bool,
) -> CoherenceReport {
    let g1: f64 = gamma1.iter().sum();
    let gphi: f64 = gamma_phi.iter().sum();
    let t1_us = if g1 > 0.0 { 1e6 / g1 } else { f64::INFINITY };
    let t_phi_us = if gphi > 0.0 { 1e6 / gphi } else { f64::INFINITY };
    let t2_us = 1e6 / (g1 / 2.0 + gphi);
    CoherenceReport {
        gamma1_dielectric: gamma1[0],
        gamma1_inductive: gamma1[1],
        gamma1_quasiparticle: gamma1[2],
        gamma_phi_flux: gamma_phi[0],
        gamma_phi_charge: gamma_phi[1],
        t1_us,
        t_phi_us,
        t2_us,
        flux_sweet_spot,
        charge_sweet_spot,
        transitions,
    }
}

/// Full coherence estimate at one bias point. Assembles both the
/// Cooper-pair system (dielectric, inductive, dephasing) and the
/// single-electron system (quasiparticle channel).
pub fn estimate(
    netlist: &CircuitNetlist,
    qopts: &QuantizeOptions,
    ng_ext: f64,
    phi_ext: f64,
    params: &NoiseParams,
) -> Result<CoherenceReport> {
    let cp_opts = QuantizeOptions { single_electron: false, ..qopts.clone() };
    let sys = assemble(netlist, &cp_opts)?;
    estimate_with(&sys, netlist, qopts, ng_ext, phi_ext, params)
}

/// Like [`estimate`] but reuses a prebuilt Cooper-pair system.
pub fn estimate_with(
    sys: &QuantizedSystem,
    netlist: &CircuitNetlist,
    qopts: &QuantizeOptions,
    ng_ext: f64,
    phi_ext: f64,
    params: &NoiseParams,
) -> Result<CoherenceReport> {
    let sol = sys.eigens(ng_ext, phi_ext, params.n_keep, params.tol, params.seed)?;

    let g_diel = gamma1_dielectric(sys, &sol, params)?;
    let g_ind = gamma1_inductive(sys, &sol, params)?;

    let has_junctions = netlist.branches.iter().any(|b| b.e_j_ghz.is_some());
    let g_qp = if has_junctions {
        let needs_se = classify_modes(netlist).iter().any(|&k| k == ModeKind::ChargeLike);
        if needs_se {
            let se_opts = QuantizeOptions { single_electron: true, ..qopts.clone() };
            let sys_se = assemble(netlist, &se_opts)?;
            gamma1_quasiparticle(&sys_se, ng_ext, phi_ext, params)?.gamma
        } else {
            gamma1_quasiparticle(sys, ng_ext, phi_ext, params)?.gamma
        }
    } else {
        0.0
    };

    // dephasing: Hellmann-Feynman derivatives of w01, converted to angular
    // rad/s per Phi0 (flux) and per Cooper pair (charge)
    let dflux_ghz_per_rad = flux_derivative_w01(sys, &sol);
    let dflux = dflux_ghz_per_rad * GHZ_TO_RAD_S * 2.0 * std::f64::consts::PI;
    // threshold sits above the basis-truncation noise floor (~1e-6 GHz/rad)
    let flux_sweet_spot = dflux_ghz_per_rad.abs() < 1e-5;
    let g_flux = gamma_phi_oneoverf(params.a_flux_phi0, dflux, params);

    let dcharge_ghz = charge_derivative_w01(sys, &sol);
    let dcharge = dcharge_ghz * GHZ_TO_RAD_S;
    let charge_sweet_spot = dcharge_ghz.abs() < 1e-5;
    let g_charge = gamma_phi_oneoverf(params.a_charge_2e, dcharge, params);

    Ok(compose(
        &[g_diel, g_ind, g_qp],
        &[g_flux, g_charge],
        transition_pairs(params.n_keep),
        flux_sweet_spot,
        charge_sweet_spot,
    ))
}

/// Coherence estimates over a flux grid, evaluated in parallel.
pub fn sweep_flux_coherence(
    netlist: &CircuitNetlist,
    qopts: &QuantizeOptions,
    ng_ext: f64,
    phi_grid: &[f64],
    params: &NoiseParams,
) -> Result<Vec<CoherenceReport>> {
    let cp_opts = QuantizeOptions { single_electron: false, ..qopts.clone() };
    let sys = assemble(netlist, &cp_opts)?;
    phi_grid
        .par_iter()
        .map(|&phi| estimate_with(&sys, netlist, qopts, ng_ext, phi, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::PI;

    #[test]
    fn thermal_factor_limits() {
        let w = 2.0 * PI * 2.5e9;
        // T -> 0: downward transitions go to 1, upward are suppressed
        assert!((thermal_factor(w, 1e-4).unwrap() - 1.0).abs() < 1e-12);
        assert!(thermal_factor(-w, 1e-4).unwrap() < 1e-12);
        assert!(thermal_factor(0.0, 0.015).is_err());
        assert!(thermal_factor(w, 0.0).is_err());
    }

    #[test]
    fn thermal_factor_closed_form_and_detailed_balance() {
        // for w > 0, F reduces algebraically to 1/(1 - exp(-hbar w/kT))
        let t = 0.015;
        for f_ghz in [0.1, 1.0, 2.5, 7.0] {
            let w = 2.0 * PI * f_ghz * 1e9;
            let x = HBAR * w / (K_B * t);
            let expect = 1.0 / (1.0 - (-x).exp());
            let got = thermal_factor(w, t).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect, "{got} vs {expect}");
            // detailed balance: F(-w) = F(w) exp(-hbar w/kT)
            let up = thermal_factor(-w, t).unwrap();
            assert!((up - got * (-x).exp()).abs() < 1e-12 * got);
        }
    }

    #[test]
    fn transition_pairs_touch_computational_space() {
        let pairs = transition_pairs(5);
        for &(i, j) in &pairs {
            assert!(i != j && (i < 2 || j < 2));
        }
        // ordered pairs: 2*(2*3) off-block + 2 inside the block
        assert_eq!(pairs.len(), 14);
    }

    #[test]
    fn dielectric_rate_monotone_in_quality_factor() {
        let net = presets::transmon(12.5, 0.25);
        let qopts = QuantizeOptions::default();
        let sys = assemble(&net, &qopts).unwrap();
        let params = NoiseParams::default();
        let sol = sys.eigens(0.0, 0.0, params.n_keep, params.tol, params.seed).unwrap();
        let g1 = gamma1_dielectric(&sys, &sol, &params).unwrap();
        let better = NoiseParams { q_cap: 10.0 * params.q_cap, ..params.clone() };
        let g2 = gamma1_dielectric(&sys, &sol, &better).unwrap();
        assert!(g1 > 0.0);
        assert!((g2 - g1 / 10.0).abs() < 1e-9 * g1);
    }

    #[test]
    fn computational_only_restriction_lower_bounds_full_sum() {
        let net = presets::transmon(12.5, 0.25);
        let sys = assemble(&net, &QuantizeOptions::default()).unwrap();
        let params = NoiseParams::default();
        let sol = sys.eigens(0.0, 0.0, params.n_keep, params.tol, params.seed).unwrap();
        let full = gamma1_dielectric(&sys, &sol, &params).unwrap();
        let restricted =
            gamma1_dielectric(&sys, &sol, &NoiseParams { n_keep: 2, ..params }).unwrap();
        assert!(restricted <= full + 1e-18);
    }

    #[test]
    fn golden_rule_matches_brute_force_oracle() {
        // independent re-summation of the dielectric rate
        let net = presets::transmon(12.5, 0.25);
        let sys = assemble(&net, &QuantizeOptions::default()).unwrap();
        let params = NoiseParams::default();
        let sol = sys.eigens(0.0, 0.0, params.n_keep, params.tol, params.seed).unwrap();
        let got = gamma1_dielectric(&sys, &sol, &params).unwrap();

        let op = sys.branch_charge_op(0).unwrap();
        let c = net.branches[0].c_ff * 1e-15;
        let mut expect = 0.0;
        for i in 0..params.n_keep {
            for j in 0..params.n_keep {
                if i == j || (i >= 2 && j >= 2) {
                    continue;
                }
                let w = (sol.values[i] - sol.values[j]) * GHZ_TO_RAD_S;
                let me = op.sandwich(&sol.vectors[i], &sol.vectors[j]);
                let o2 = 4.0 * E_CHARGE * E_CHARGE * me.norm_sqr();
                let s = 2.0 * HBAR / (c * params.q_cap)
                    * thermal_factor(w, params.temperature_k).unwrap();
                expect += o2 * s / (HBAR * HBAR);
            }
        }
        assert!((got - expect).abs() <= 1e-12 * expect.max(1e-30), "{got} vs {expect}");
    }

    #[test]
    fn fluxonium_qp_elements_vanish_at_sweet_spot() {
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 50, ..Default::default() })
            .unwrap();
        let params = NoiseParams::default();
        let at_pi = gamma1_quasiparticle(&sys, 0.0, PI, &params).unwrap();
        let off = gamma1_quasiparticle(&sys, 0.0, 0.9 * PI, &params).unwrap();
        assert!(at_pi.elements_01[0] < 1e-3 * off.elements_01[0]);
    }

    #[test]
    fn compose_arithmetic() {
        // Gamma1 = 1/100us, Gamma_phi = 1/200us -> T2 = 100us
        let r = compose(&[1e4, 0.0, 0.0], &[5e3, 0.0], vec![], false, false);
        assert!((r.t1_us - 100.0).abs() < 1e-9);
        assert!((r.t_phi_us - 200.0).abs() < 1e-9);
        assert!((r.t2_us - 100.0).abs() < 1e-9);
        assert!(r.t2_us <= 2.0 * r.t1_us + 1e-12);

        // only dielectric -> T2 = 2 T1
        let r = compose(&[1e4, 0.0, 0.0], &[0.0, 0.0], vec![], true, true);
        assert!((r.t2_us - 2.0 * r.t1_us).abs() < 1e-9);
        assert!(r.t_phi_us.is_infinite());
    }

    #[test]
    fn estimate_reports_sweet_spot_flags() {
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let qopts = QuantizeOptions { fock_cutoff: 40, ..Default::default() };
        let params = NoiseParams { n_keep: 4, ..Default::default() };
        let at_pi = estimate(&net, &qopts, 0.0, PI, &params).unwrap();
        assert!(at_pi.flux_sweet_spot);
        assert!(at_pi.t2_us <= 2.0 * at_pi.t1_us + 1e-9);
        let off = estimate(&net, &qopts, 0.0, 0.8 * PI, &params).unwrap();
        assert!(!off.flux_sweet_spot);
        assert!(off.gamma_phi_flux > at_pi.gamma_phi_flux);
    }
}
