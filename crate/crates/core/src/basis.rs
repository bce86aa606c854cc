//! Per-mode operator stencils in three local bases.
//!
//! - Cooper-pair charge basis for charge-like modes: `n` is diagonal with
//!   integer eigenvalues, `exp(i phi)` raises `n` by one.
//! - Single-electron charge basis: same structure on a half-integer grid so
//!   that half-phase operators (`cos(phi/2)`, `sin(phi/2)`) exist; full-phase
//!   operators hop two steps.
//! - Harmonic-oscillator (Fock) basis for flux-like modes, with the mode
//!   impedance set by the diagonal charging and inductive energies.
//!
//! All operators satisfy `[phi, n] = i` (up to truncation edge effects) and
//! use the convention `n = -i d/dphi`.

use crate::error::{Error, Result};
use crate::sparse::SpMat;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Operators for one charge-like mode in the Cooper-pair basis with charge
/// cutoff `n_cut` (dimension `2 n_cut + 1`).
#[derive(Debug, Clone)]
pub struct ChargeOps {
    pub dim: usize,
    /// Charge operator in Cooper-pair units: diag(-n_cut ..= n_cut).
    pub n: SpMat,
    pub cos_phi: SpMat,
    pub sin_phi: SpMat,
}

pub fn charge_ops(n_cut: usize) -> Result<ChargeOps> {
    if n_cut == 0 {
        return Err(Error::Basis("charge cutoff must be at least 1".into()));
    }
    let dim = 2 * n_cut + 1;
    let n = SpMat::from_triplets(
        dim,
        (0..dim).map(|k| (k, k, c(k as f64 - n_cut as f64, 0.0))).collect(),
    );
    let (cos_phi, sin_phi) = trig_hop(dim, 1);
    Ok(ChargeOps { dim, n, cos_phi, sin_phi })
}

/// Operators for one charge-like mode in the single-electron basis with
/// electron-number cutoff `n_cut` (dimension `2 n_cut + 1`). The charge
/// operator stays in Cooper-pair units (half-integer eigenvalues); full-phase
/// operators hop two grid steps, half-phase operators hop one.
#[derive(Debug, Clone)]
pub struct SingleElectronOps {
    pub dim: usize,
    /// Charge in Cooper-pair units: diag(-n_cut ..= n_cut) / 2.
    pub n: SpMat,
    pub cos_phi: SpMat,
    pub sin_phi: SpMat,
    pub cos_half_phi: SpMat,
    pub sin_half_phi: SpMat,
}

pub fn single_electron_ops(n_cut: usize) -> Result<SingleElectronOps> {
    if n_cut < 2 {
        return Err(Error::Basis("single-electron cutoff must be at least 2".into()));
    }
    let dim = 2 * n_cut + 1;
    let n = SpMat::from_triplets(
        dim,
        (0..dim).map(|k| (k, k, c((k as f64 - n_cut as f64) / 2.0, 0.0))).collect(),
    );
    let (cos_phi, sin_phi) = trig_hop(dim, 2);
    let (cos_half_phi, sin_half_phi) = trig_hop(dim, 1);
    Ok(SingleElectronOps { dim, n, cos_phi, sin_phi, cos_half_phi, sin_half_phi })
}

/// `cos`/`sin` ladder stencils: `exp(i phi)` maps grid point `k` to `k+hop`,
/// so `cos` has 1/2 on both `hop` off-diagonals and `sin` has -i/2 below,
/// +i/2 above.
fn trig_hop(dim: usize, hop: usize) -> (SpMat, SpMat) {
    let mut tc = Vec::new();
    let mut ts = Vec::new();
    for k in 0..dim.saturating_sub(hop) {
        tc.push((k + hop, k, c(0.5, 0.0)));
        tc.push((k, k + hop, c(0.5, 0.0)));
        ts.push((k + hop, k, c(0.0, -0.5)));
        ts.push((k, k + hop, c(0.0, 0.5)));
    }
    (SpMat::from_triplets(dim, tc), SpMat::from_triplets(dim, ts))
}

/// Operators for one flux-like mode in the Fock basis of its harmonic part.
#[derive(Debug, Clone)]
pub struct OscillatorOps {
    pub dim: usize,
    /// Charge operator in Cooper-pair units.
    pub n: SpMat,
    /// Phase operator in radians.
    pub phi: SpMat,
    pub cos_phi: SpMat,
    pub sin_phi: SpMat,
    pub cos_half_phi: SpMat,
    pub sin_half_phi: SpMat,
    /// Harmonic frequency `sqrt(8 E_C E_L)` in GHz.
    pub freq_ghz: f64,
}

/// Build Fock-basis operators for a mode with diagonal charging energy
/// `e_c_ghz` and diagonal inductive energy `e_l_ghz` (both GHz, both > 0).
///
/// `phi = (8 E_C / E_L)^(1/4) (b + b^dag) / sqrt(2)`,
/// `n = i (E_L / 8 E_C)^(1/4) (b^dag - b) / sqrt(2)`.
pub fn oscillator_ops(dim: usize, e_c_ghz: f64, e_l_ghz: f64) -> Result<OscillatorOps> {
    if dim < 2 {
        return Err(Error::Basis("oscillator basis needs at least 2 levels".into()));
    }
    if !(e_c_ghz > 0.0) || !(e_l_ghz > 0.0) {
        return Err(Error::Basis("oscillator basis needs E_C > 0 and E_L > 0".into()));
    }
    let xi = (8.0 * e_c_ghz / e_l_ghz).powf(0.25);
    let mut tphi = Vec::new();
    let mut tn = Vec::new();
    for k in 0..dim - 1 {
        let s = ((k + 1) as f64).sqrt() / std::f64::consts::SQRT_2;
        // b entry: (k, k+1) = sqrt(k+1); b^dag entry: (k+1, k)
        tphi.push((k, k + 1, c(xi * s, 0.0)));
        tphi.push((k + 1, k, c(xi * s, 0.0)));
        tn.push((k, k + 1, c(0.0, -s / xi)));
        tn.push((k + 1, k, c(0.0, s / xi)));
    }
    let phi = SpMat::from_triplets(dim, tphi);
    let n = SpMat::from_triplets(dim, tn);
    let (cos_phi, sin_phi) = (phase_function(&phi, f64::cos), phase_function(&phi, f64::sin));
    let cos_half_phi = phase_function(&phi, |x| (x / 2.0).cos());
    let sin_half_phi = phase_function(&phi, |x| (x / 2.0).sin());
    let freq_ghz = (8.0 * e_c_ghz * e_l_ghz).sqrt();
    Ok(OscillatorOps { dim, n, phi, cos_phi, sin_phi, cos_half_phi, sin_half_phi, freq_ghz })
}

/// Apply a scalar function to a real-symmetric phase operator through its
/// eigendecomposition.
pub fn phase_function(phi: &SpMat, f: impl Fn(f64) -> f64) -> SpMat {
    let dim = phi.dim();
    let mut dense = DMatrix::<f64>::zeros(dim, dim);
    for (r, cidx, v) in phi.triplets() {
        debug_assert!(v.im == 0.0);
        dense[(r, cidx)] = v.re;
    }
    let eig = dense.symmetric_eigen();
    let fvals = eig.eigenvalues.map(f);
    let mut out = DMatrix::<f64>::zeros(dim, dim);
    for k in 0..dim {
        let col = eig.eigenvectors.column(k);
        let fv = fvals[k];
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += fv * col[i] * col[j];
            }
        }
    }
    let complex = out.map(|x| c(x, 0.0));
    SpMat::from_dense(&complex, 1e-14)
}
