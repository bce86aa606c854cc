//! Spectra, anharmonicities, matrix-element tables, and bias sweeps.

use crate::eigen::EigenSolution;
use crate::error::{Error, Result};
use crate::quantize::{matrix_element, QuantizedSystem};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    /// Number of eigenstates kept in tables and transition lists.
    pub n_keep: usize,
    /// Eigensolver tolerance.
    pub tol: f64,
    /// Eigensolver start-vector seed.
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { n_keep: 6, tol: 1e-10, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Absolute eigenvalues in GHz (offset is bias-convention dependent).
    pub energies: Vec<f64>,
    /// Transition frequencies from the ground state, `w_k = E_k - E_0`.
    pub transitions: Vec<f64>,
    /// Anharmonicity of the 1-2 leakage channel, `w_2 - 2 w_1` (signed).
    pub eta: f64,
    /// Anharmonicity of the 1-3 leakage channel, `w_3 - 2 w_1` (signed).
    pub alpha: f64,
    /// Per-mode charge matrix elements `<i|n_m|j>`.
    pub n_elements: Vec<DMatrix<Complex64>>,
    /// Per-mode phase matrix elements `<i|phi_m|j>`. Diagonal entries of
    /// compact (charge-like) modes are undefined and stored as NaN.
    pub phi_elements: Vec<DMatrix<Complex64>>,
    pub solution: EigenSolution,
}

/// Diagonalize at a bias point and tabulate transitions and matrix
/// elements.
pub fn analyze(
    sys: &QuantizedSystem,
    ng_ext: f64,
    phi_ext: f64,
    opts: &SpectrumOptions,
) -> Result<SpectrumResult> {
    if opts.n_keep < 2 {
        return Err(Error::Configuration("need at least two kept states".into()));
    }
    let sol = sys.eigens(ng_ext, phi_ext, opts.n_keep, opts.tol, opts.seed)?;
    Ok(tabulate(sys, sol))
}

/// Build a [`SpectrumResult`] from an existing eigensolution.
pub fn tabulate(sys: &QuantizedSystem, sol: EigenSolution) -> SpectrumResult {
    let k = sol.values.len();
    let transitions: Vec<f64> = sol.values.iter().map(|v| v - sol.values[0]).collect();
    let eta = if k > 2 { transitions[2] - 2.0 * transitions[1] } else { f64::NAN };
    let alpha = if k > 3 { transitions[3] - 2.0 * transitions[1] } else { f64::NAN };

    let n_modes = sys.dims.len();
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut n_elements = Vec::with_capacity(n_modes);
    let mut phi_elements = Vec::with_capacity(n_modes);
    for m in 0..n_modes {
        let mut nt = DMatrix::zeros(k, k);
        let mut pt = DMatrix::from_element(k, k, nan);
        for i in 0..k {
            for j in 0..k {
                nt[(i, j)] = matrix_element(&sys.n_ops[m], &sol, i, j);
                if let Ok(v) = sys.phase_matrix_element(m, &sol, i, j) {
                    pt[(i, j)] = v;
                }
            }
        }
        n_elements.push(nt);
        phi_elements.push(pt);
    }
    SpectrumResult {
        energies: sol.values.clone(),
        transitions,
        eta,
        alpha,
        n_elements,
        phi_elements,
        solution: sol,
    }
}

/// One point of a bias sweep, in adiabatically tracked state order.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    /// Swept bias value (radians for flux, Cooper pairs for charge).
    pub bias: f64,
    /// Tracked-state eigenvalues (GHz).
    pub energies: Vec<f64>,
    /// Transitions from the tracked ground state.
    pub transitions: Vec<f64>,
}

/// Sweep the external flux at fixed charge bias. States are tracked between
/// neighboring points by eigenvector overlap so level crossings do not
/// scramble the transition labels.
pub fn sweep_flux(
    sys: &QuantizedSystem,
    ng_ext: f64,
    phi_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<Vec<SweepPoint>> {
    sweep(sys, phi_grid, opts, |phi| (ng_ext, phi))
}

/// Sweep the external charge at fixed flux bias, with the same overlap
/// tracking.
pub fn sweep_charge(
    sys: &QuantizedSystem,
    phi_ext: f64,
    ng_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<Vec<SweepPoint>> {
    sweep(sys, ng_grid, opts, |ng| (ng, phi_ext))
}

fn sweep(
    sys: &QuantizedSystem,
    grid: &[f64],
    opts: &SpectrumOptions,
    bias_of: impl Fn(f64) -> (f64, f64),
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::Configuration("empty sweep grid".into()));
    }
    // extra solved states give the tracker room when levels cross
    let k_solve = (opts.n_keep + 2).min(sys.dim);
    let mut out = Vec::with_capacity(grid.len());
    let mut prev: Option<Vec<Vec<Complex64>>> = None;
    for &bias in grid {
        let (ng, phi) = bias_of(bias);
        let sol = sys.eigens(ng, phi, k_solve, opts.tol, opts.seed)?;
        let order = match &prev {
            None => (0..opts.n_keep).collect::<Vec<_>>(),
            Some(tracked) => assign_by_overlap(tracked, &sol.vectors),
        };
        let energies: Vec<f64> = order.iter().map(|&j| sol.values[j]).collect();
        let transitions: Vec<f64> = energies.iter().map(|e| e - energies[0]).collect();
        prev = Some(order.iter().map(|&j| sol.vectors[j].clone()).collect());
        out.push(SweepPoint { bias, energies, transitions });
    }
    Ok(out)
}

/// Greedy assignment: slot i takes the unused new state with the largest
/// overlap against the previously tracked state i.
fn assign_by_overlap(tracked: &[Vec<Complex64>], fresh: &[Vec<Complex64>]) -> Vec<usize> {
    let mut used = vec![false; fresh.len()];
    let mut order = Vec::with_capacity(tracked.len());
    for t in tracked {
        let mut best = usize::MAX;
        let mut best_ov = -1.0;
        for (j, f) in fresh.iter().enumerate() {
            if used[j] {
                continue;
            }
            let ov: Complex64 = t.iter().zip(f.iter()).map(|(a, b)| a.conj() * b).sum();
            if ov.norm_sqr() > best_ov {
                best_ov = ov.norm_sqr();
                best = j;
            }
        }
        used[best] = true;
        order.push(best);
    }
    order
}

/// First derivative of the 0-1 transition w.r.t. external flux (GHz per
/// radian), via the Hellmann-Feynman theorem: the Hamiltonian is linear in
/// the bias, so `dE_k/dphi = <k|B_phi|k>`.
pub fn flux_derivative_w01(sys: &QuantizedSystem, sol: &EigenSolution) -> f64 {
    let d1 = sys.flux_bias_op.sandwich(&sol.vectors[1], &sol.vectors[1]).re;
    let d0 = sys.flux_bias_op.sandwich(&sol.vectors[0], &sol.vectors[0]).re;
    d1 - d0
}

/// First derivative of the 0-1 transition w.r.t. external charge (GHz per
/// Cooper pair), via the Hellmann-Feynman theorem.
pub fn charge_derivative_w01(sys: &QuantizedSystem, sol: &EigenSolution) -> f64 {
    let d1 = sys.charge_bias_op.sandwich(&sol.vectors[1], &sol.vectors[1]).re;
    let d0 = sys.charge_bias_op.sandwich(&sol.vectors[0], &sol.vectors[0]).re;
    d1 - d0
}

/// Peak-to-peak variation of `w01` over one external-charge period (GHz).
pub fn charge_dispersion_w01(
    sys: &QuantizedSystem,
    phi_ext: f64,
    n_points: usize,
    opts: &SpectrumOptions,
) -> Result<f64> {
    if n_points < 3 {
        return Err(Error::Configuration("need at least 3 charge points".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n_points {
        // charge spectra are even and 1-periodic; half a period suffices
        let ng = 0.5 * i as f64 / (n_points - 1) as f64;
        let sol = sys.eigens(ng, phi_ext, 2, opts.tol, opts.seed)?;
        let w01 = sol.values[1] - sol.values[0];
        lo = lo.min(w01);
        hi = hi.max(w01);
    }
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{Branch, CircuitNetlist};
    use crate::presets;
    use crate::quantize::{assemble, QuantizeOptions};
    use std::f64::consts::PI;

    fn lc() -> QuantizedSystem {
        let net = CircuitNetlist {
            n_nodes: 2,
            reference: 0,
            branches: vec![Branch::capacitive(0, 1, 40.0).with_inductor(60.0)],
            closure: vec![],
        };
        assemble(&net, &QuantizeOptions { fock_cutoff: 16, ..Default::default() }).unwrap()
    }

    #[test]
    fn harmonic_oscillator_has_zero_anharmonicity() {
        let res = analyze(&lc(), 0.0, 0.0, &SpectrumOptions::default()).unwrap();
        assert!(res.eta.abs() < 1e-9);
        // on a harmonic ladder w_k = k w, so the 1-3 gap deviation
        // w_3 - 2 w_1 collapses to the level spacing itself
        assert!((res.alpha - res.transitions[1]).abs() < 1e-9);
        for k in 1..res.transitions.len() - 1 {
            let gap = res.transitions[k + 1] - res.transitions[k];
            assert!((gap - res.transitions[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn matrix_element_table_is_hermitian() {
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 30, ..Default::default() })
            .unwrap();
        let res = analyze(&sys, 0.0, 0.4, &SpectrumOptions::default()).unwrap();
        for table in res.n_elements.iter().chain(res.phi_elements.iter()) {
            for i in 0..table.nrows() {
                for j in 0..table.ncols() {
                    if table[(i, j)].re.is_nan() {
                        continue;
                    }
                    assert!((table[(i, j)] - table[(j, i)].conj()).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn compact_mode_phase_diagonal_is_nan() {
        let net = presets::transmon(12.5, 0.25);
        let sys = assemble(&net, &QuantizeOptions::default()).unwrap();
        let res = analyze(&sys, 0.0, 0.0, &SpectrumOptions { n_keep: 3, ..Default::default() })
            .unwrap();
        assert!(res.phi_elements[0][(0, 0)].re.is_nan());
        assert!(!res.phi_elements[0][(0, 1)].re.is_nan());
    }

    #[test]
    fn flux_sweep_symmetric_about_pi() {
        // the Fock truncation breaks the phi -> 2 pi - phi symmetry at the
        // ~1e-6 level for moderate cutoffs, hence the loose tolerance
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 50, ..Default::default() })
            .unwrap();
        let grid: Vec<f64> = (0..=10).map(|i| PI - 0.3 + 0.06 * i as f64).collect();
        let pts =
            sweep_flux(&sys, 0.0, &grid, &SpectrumOptions { n_keep: 3, ..Default::default() })
                .unwrap();
        for i in 0..5 {
            let left = pts[i].transitions[1];
            let right = pts[10 - i].transitions[1];
            assert!((left - right).abs() < 1e-6, "w01({i}) {left} vs {right}");
        }
    }

    #[test]
    fn hellmann_feynman_matches_finite_difference() {
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 30, ..Default::default() })
            .unwrap();
        let phi = 2.0;
        let sol = sys.eigens(0.0, phi, 2, 1e-11, 7).unwrap();
        let analytic = flux_derivative_w01(&sys, &sol);
        let h = 1e-5;
        let wp = {
            let s = sys.eigens(0.0, phi + h, 2, 1e-11, 7).unwrap();
            s.values[1] - s.values[0]
        };
        let wm = {
            let s = sys.eigens(0.0, phi - h, 2, 1e-11, 7).unwrap();
            s.values[1] - s.values[0]
        };
        let numeric = (wp - wm) / (2.0 * h);
        assert!((analytic - numeric).abs() < 1e-6, "{analytic} vs {numeric}");
    }

    #[test]
    fn sweet_spot_derivatives_vanish() {
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 50, ..Default::default() })
            .unwrap();
        let sol = sys.eigens(0.0, PI, 2, 1e-11, 7).unwrap();
        assert!(flux_derivative_w01(&sys, &sol).abs() < 1e-5);

        let net = presets::transmon(5.0, 0.25);
        let sys = assemble(&net, &QuantizeOptions { charge_cutoff: 14, ..Default::default() })
            .unwrap();
        let sol = sys.eigens(0.0, 0.0, 2, 1e-11, 7).unwrap();
        assert!(charge_derivative_w01(&sys, &sol).abs() < 1e-7);
    }

    #[test]
    fn charge_dispersion_decreases_with_ej_over_ec() {
        let opts = SpectrumOptions::default();
        let qopts = QuantizeOptions { charge_cutoff: 14, ..Default::default() };
        let shallow = assemble(&presets::transmon(2.5, 0.25), &qopts).unwrap();
        let deep = assemble(&presets::transmon(12.5, 0.25), &qopts).unwrap();
        let d_shallow = charge_dispersion_w01(&shallow, 0.0, 9, &opts).unwrap();
        let d_deep = charge_dispersion_w01(&deep, 0.0, 9, &opts).unwrap();
        assert!(d_deep < d_shallow / 100.0, "{d_deep} vs {d_shallow}");
    }
}
