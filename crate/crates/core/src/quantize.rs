//! Kronecker-product assembly of the full circuit Hamiltonian.
//!
//! Each mode gets a local basis (charge basis for charge-like modes, Fock
//! basis of the linear part for flux-like modes), operators are lifted into
//! the product space, and
//! `H = 4 n^T E_C n + 1/2 phi^T E_L phi - sum E_J cos(...) + H_ext`
//! is built as a sparse Hermitian matrix. External biases enter as two
//! separate operators so the Hamiltonian at any bias point is a cheap linear
//! combination.

use crate::basis;
use crate::eigen::{lowest_eigenpairs, EigenSolution};
use crate::error::{Error, Result};
use crate::netlist::{build_matrices, hamiltonian_spec, Bias, CircuitNetlist, EnergyMatrices,
                     HamiltonianSpec, ModeKind};
use crate::sparse::{lift, SpMat};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Debug, Clone)]
pub struct QuantizeOptions {
    /// Cooper-pair charge cutoff N_c for charge-like modes (dimension
    /// 2 N_c + 1).
    pub charge_cutoff: usize,
    /// Fock-space dimension for flux-like modes.
    pub fock_cutoff: usize,
    /// Represent charge-like modes in the single-electron basis (electron
    /// cutoff 2 N_c, same Cooper-pair span). Needed for half-phase
    /// operators.
    pub single_electron: bool,
    /// Maximum allowed total Hilbert-space dimension.
    pub dim_guard: usize,
}

impl Default for QuantizeOptions {
    fn default() -> Self {
        QuantizeOptions {
            charge_cutoff: 10,
            fock_cutoff: 31,
            single_electron: false,
            dim_guard: 400_000,
        }
    }
}

/// Per-mode operators plus the assembled Hamiltonian and bias operators.
#[derive(Debug, Clone)]
pub struct QuantizedSystem {
    pub netlist: CircuitNetlist,
    pub matrices: EnergyMatrices,
    pub spec: HamiltonianSpec,
    pub dims: Vec<usize>,
    pub dim: usize,
    /// Hamiltonian at zero external bias.
    pub h_static: SpMat,
    /// Operator multiplying `ng_ext`.
    pub charge_bias_op: SpMat,
    /// Operator multiplying `phi_ext`.
    pub flux_bias_op: SpMat,
    /// Lifted node charge operators (Cooper-pair units), one per mode.
    pub n_ops: Vec<SpMat>,
    /// Lifted node phase operators; None for charge-like modes in the
    /// Cooper-pair basis (compact phase).
    pub phi_ops: Vec<Option<SpMat>>,
    /// Per-mode (unlifted) half-phase operators `(cos(phi/2), sin(phi/2))`;
    /// present for flux-like modes always and for charge-like modes in the
    /// single-electron representation. Kept local so branch combinations can
    /// be assembled as single Kronecker products.
    pub half_ops: Vec<Option<(SpMat, SpMat)>>,
}

/// Quantize a netlist: build matrices, pick per-mode bases, and assemble all
/// operators.
pub fn assemble(netlist: &CircuitNetlist, opts: &QuantizeOptions) -> Result<QuantizedSystem> {
    netlist.validate()?;
    let matrices = build_matrices(netlist)?;
    let spec = hamiltonian_spec(netlist, &matrices, Bias::default())?;
    let n_modes = netlist.n_modes();

    if opts.charge_cutoff < 3 || opts.fock_cutoff < 3 {
        return Err(Error::Configuration("cutoffs must be at least 3".into()));
    }

    // local bases
    struct Local {
        dim: usize,
        n: SpMat,
        phi: Option<SpMat>,
        cos: SpMat,
        sin: SpMat,
        half: Option<(SpMat, SpMat)>,
    }
    let mut locals = Vec::with_capacity(n_modes);
    for m in 0..n_modes {
        let local = match spec.modes[m] {
            ModeKind::ChargeLike if opts.single_electron => {
                let ops = basis::single_electron_ops(2 * opts.charge_cutoff)?;
                Local {
                    dim: ops.dim,
                    n: ops.n,
                    phi: None,
                    cos: ops.cos_phi,
                    sin: ops.sin_phi,
                    half: Some((ops.cos_half_phi, ops.sin_half_phi)),
                }
            }
            ModeKind::ChargeLike => {
                let ops = basis::charge_ops(opts.charge_cutoff)?;
                Local {
                    dim: ops.dim,
                    n: ops.n,
                    phi: None,
                    cos: ops.cos_phi,
                    sin: ops.sin_phi,
                    half: None,
                }
            }
            ModeKind::FluxLike => {
                let ops = basis::oscillator_ops(
                    opts.fock_cutoff,
                    matrices.e_c[(m, m)],
                    matrices.e_l[(m, m)],
                )?;
                Local {
                    dim: ops.dim,
                    n: ops.n,
                    phi: Some(ops.phi),
                    cos: ops.cos_phi,
                    sin: ops.sin_phi,
                    half: Some((ops.cos_half_phi, ops.sin_half_phi)),
                }
            }
            other => return Err(Error::InvalidNetlist(format!("mode {m} is {other:?}"))),
        };
        locals.push(local);
    }

    let dims: Vec<usize> = locals.iter().map(|l| l.dim).collect();
    let dim: usize = dims.iter().product();
    if dim > opts.dim_guard {
        return Err(Error::DimensionGuard { dim, max: opts.dim_guard });
    }

    let n_ops: Vec<SpMat> = (0..n_modes).map(|m| lift(&locals[m].n, m, &dims)).collect();
    let phi_ops: Vec<Option<SpMat>> =
        (0..n_modes).map(|m| locals[m].phi.as_ref().map(|p| lift(p, m, &dims))).collect();
    let half_ops: Vec<Option<(SpMat, SpMat)>> =
        locals.iter().map(|l| l.half.clone()).collect();

    let mut h = SpMat::zeros(dim);
    // kinetic term 4 n E_C n
    for i in 0..n_modes {
        let n2 = mul_local(&locals[i].n, &locals[i].n);
        h = h.add_scaled(&lift(&n2, i, &dims), c(4.0 * matrices.e_c[(i, i)], 0.0));
        for j in (i + 1)..n_modes {
            let coupling = 8.0 * matrices.e_c[(i, j)];
            if coupling != 0.0 {
                let op = lift_pair(&locals[i].n, i, &locals[j].n, j, &dims);
                h = h.add_scaled(&op, c(coupling, 0.0));
            }
        }
    }
    // inductive term 1/2 phi E_L phi (rows of charge-like modes are zero)
    for i in 0..n_modes {
        if let Some(phi_i) = &locals[i].phi {
            let p2 = mul_local(phi_i, phi_i);
            h = h.add_scaled(&lift(&p2, i, &dims), c(0.5 * matrices.e_l[(i, i)], 0.0));
            for j in (i + 1)..n_modes {
                let coupling = matrices.e_l[(i, j)];
                if coupling != 0.0 {
                    let phi_j = locals[j].phi.as_ref().ok_or_else(|| {
                        Error::InvalidNetlist(format!(
                            "inductive coupling to charge-like mode {j}"
                        ))
                    })?;
                    let op = lift_pair(phi_i, i, phi_j, j, &dims);
                    h = h.add_scaled(&op, c(coupling, 0.0));
                }
            }
        }
    }
    // junction terms -E_J cos(sum_i s_i phi_i)
    for term in &spec.junctions {
        let parts: Vec<(usize, &SpMat, SpMat)> = term
            .phase
            .iter()
            .map(|&(m, s)| {
                let sin = if s > 0 { locals[m].sin.clone() } else { locals[m].sin.scale(c(-1.0, 0.0)) };
                (m, &locals[m].cos, sin)
            })
            .collect();
        let cos_sum = cos_of_sum(&parts, &dims);
        h = h.add_scaled(&cos_sum, c(-term.e_j, 0.0));
    }

    // bias operators
    let mut charge_bias_op = SpMat::zeros(dim);
    for (i, &coeff) in spec.charge_bias_coeff.iter().enumerate() {
        if coeff != 0.0 {
            charge_bias_op = charge_bias_op.add_scaled(&n_ops[i], c(coeff, 0.0));
        }
    }
    let mut flux_bias_op = SpMat::zeros(dim);
    for (i, &coeff) in spec.flux_bias_coeff.iter().enumerate() {
        if coeff != 0.0 {
            let phi = phi_ops[i]
                .as_ref()
                .ok_or_else(|| Error::InvalidNetlist(format!("flux bias on charge-like mode {i}")))?;
            flux_bias_op = flux_bias_op.add_scaled(phi, c(coeff, 0.0));
        }
    }

    Ok(QuantizedSystem {
        netlist: netlist.clone(),
        matrices,
        spec,
        dims,
        dim,
        h_static: h,
        charge_bias_op,
        flux_bias_op,
        n_ops,
        phi_ops,
        half_ops,
    })
}

impl QuantizedSystem {
    /// Hamiltonian at the given external charge (Cooper pairs) and flux
    /// (radians). Constant bias terms are dropped, so absolute eigenvalues
    /// carry a bias-dependent offset while transition frequencies do not.
    pub fn h_at(&self, ng_ext: f64, phi_ext: f64) -> SpMat {
        self.h_static
            .add_scaled(&self.charge_bias_op, c(ng_ext, 0.0))
            .add_scaled(&self.flux_bias_op, c(phi_ext, 0.0))
    }

    /// Lowest-k eigenpairs at a bias point.
    pub fn eigens(&self, ng_ext: f64, phi_ext: f64, k: usize, tol: f64, seed: u64) -> Result<EigenSolution> {
        lowest_eigenpairs(&self.h_at(ng_ext, phi_ext), k, tol, seed)
    }

    /// Branch charge operator `n_from - n_to` (zero contribution from the
    /// reference node).
    pub fn branch_charge_op(&self, branch: usize) -> Result<SpMat> {
        let b = self
            .netlist
            .branches
            .get(branch)
            .ok_or_else(|| Error::Configuration(format!("branch {branch} out of range")))?;
        let mut op = SpMat::zeros(self.dim);
        if let Some(i) = self.netlist.mode_of_node(b.from) {
            op = op.add_scaled(&self.n_ops[i], c(1.0, 0.0));
        }
        if let Some(j) = self.netlist.mode_of_node(b.to) {
            op = op.add_scaled(&self.n_ops[j], c(-1.0, 0.0));
        }
        Ok(op)
    }

    /// Branch phase operator `phi_from - phi_to`; requires phase operators
    /// on both non-reference endpoints.
    pub fn branch_phase_op(&self, branch: usize) -> Result<SpMat> {
        let b = self
            .netlist
            .branches
            .get(branch)
            .ok_or_else(|| Error::Configuration(format!("branch {branch} out of range")))?;
        let mut op = SpMat::zeros(self.dim);
        if let Some(i) = self.netlist.mode_of_node(b.from) {
            let phi = self.phi_ops[i].as_ref().ok_or_else(|| {
                Error::Basis(format!("mode {i} has no phase operator in this representation"))
            })?;
            op = op.add_scaled(phi, c(1.0, 0.0));
        }
        if let Some(j) = self.netlist.mode_of_node(b.to) {
            let phi = self.phi_ops[j].as_ref().ok_or_else(|| {
                Error::Basis(format!("mode {j} has no phase operator in this representation"))
            })?;
            op = op.add_scaled(phi, c(-1.0, 0.0));
        }
        Ok(op)
    }

    /// `sin((phi_from - phi_to)/2)` for a branch, from per-mode half-phase
    /// operators via the angle-difference identity. Charge-like endpoints
    /// need the single-electron representation.
    pub fn branch_half_sin(&self, branch: usize) -> Result<SpMat> {
        let b = self
            .netlist
            .branches
            .get(branch)
            .ok_or_else(|| Error::Configuration(format!("branch {branch} out of range")))?;
        let ma = self.netlist.mode_of_node(b.from);
        let mb = self.netlist.mode_of_node(b.to);
        match (ma, mb) {
            (Some(i), Some(j)) => {
                let (ca, sa) = self.mode_half(i)?;
                let (cb, sb) = self.mode_half(j)?;
                // sin(a/2 - b/2) = sin(a/2)cos(b/2) - cos(a/2)sin(b/2);
                // the factors live on different modes and commute
                let t1 = lift_factors(&[(i, sa.clone()), (j, cb.clone())], &self.dims);
                let t2 = lift_factors(&[(i, ca.clone()), (j, sb.clone())], &self.dims);
                Ok(t1.add_scaled(&t2, c(-1.0, 0.0)))
            }
            (Some(i), None) => {
                let (_, sa) = self.mode_half(i)?;
                Ok(lift(sa, i, &self.dims))
            }
            (None, Some(j)) => {
                let (_, sb) = self.mode_half(j)?;
                Ok(lift(sb, j, &self.dims).scale(c(-1.0, 0.0)))
            }
            (None, None) => Err(Error::Configuration("branch spans only the reference node".into())),
        }
    }

    fn mode_half(&self, m: usize) -> Result<&(SpMat, SpMat)> {
        self.half_ops[m].as_ref().ok_or_else(|| {
            Error::Basis(format!(
                "mode {m} has no half-phase operators; use the single-electron representation"
            ))
        })
    }

    /// `<i|phi_m|j>` from eigenpairs: direct for modes with a phase
    /// operator, otherwise through the commutator identity
    /// `(E_j - E_i) <i|phi_m|j> = 8 i sum_k [E_C]_{km} <i|n_k|j>`.
    pub fn phase_matrix_element(
        &self,
        mode: usize,
        sol: &EigenSolution,
        i: usize,
        j: usize,
    ) -> Result<Complex64> {
        if let Some(phi) = &self.phi_ops[mode] {
            return Ok(phi.sandwich(&sol.vectors[i], &sol.vectors[j]));
        }
        self.flux_op_via_commutator(mode, sol, i, j)
    }

    /// Commutator construction of a phase matrix element; valid only off the
    /// diagonal and away from degeneracies.
    pub fn flux_op_via_commutator(
        &self,
        mode: usize,
        sol: &EigenSolution,
        i: usize,
        j: usize,
    ) -> Result<Complex64> {
        if i == j {
            return Err(Error::Configuration(
                "diagonal phase matrix elements are undefined for compact modes".into(),
            ));
        }
        let omega = sol.values[j] - sol.values[i];
        if omega.abs() < 1e-6 {
            return Err(Error::Configuration(format!(
                "transition {i}->{j} too close to degeneracy ({omega:.3e} GHz)"
            )));
        }
        let mut acc = c(0.0, 0.0);
        for (k, n_op) in self.n_ops.iter().enumerate() {
            let ec = self.matrices.e_c[(k, mode)];
            if ec != 0.0 {
                acc += c(0.0, 8.0 * ec) * n_op.sandwich(&sol.vectors[i], &sol.vectors[j]);
            }
        }
        Ok(acc / omega)
    }
}

/// Matrix element `<i|op|j>` between eigenvectors.
pub fn matrix_element(op: &SpMat, sol: &EigenSolution, i: usize, j: usize) -> Complex64 {
    op.sandwich(&sol.vectors[i], &sol.vectors[j])
}

/// Dense product of two small same-mode operators.
fn mul_local(a: &SpMat, b: &SpMat) -> SpMat {
    let d = a.to_dense() * b.to_dense();
    SpMat::from_dense(&d, 0.0)
}

/// `A_i B_j` lifted, with the operators acting on different modes.
fn lift_pair(a: &SpMat, mode_a: usize, b: &SpMat, mode_b: usize, dims: &[usize]) -> SpMat {
    debug_assert_ne!(mode_a, mode_b);
    lift_factors(&[(mode_a, a.clone()), (mode_b, b.clone())], dims)
}

/// Kronecker assembly of per-mode factors (identity on unlisted modes); at
/// most one factor per mode.
fn lift_factors(factors: &[(usize, SpMat)], dims: &[usize]) -> SpMat {
    let mut out = SpMat::identity(1);
    for (m, &d) in dims.iter().enumerate() {
        let factor = factors.iter().find(|&&(fm, _)| fm == m);
        out = match factor {
            Some((_, op)) => out.kron(op),
            None => out.kron(&SpMat::identity(d)),
        };
    }
    out
}

/// `cos(sum of per-mode angles)` where each part contributes
/// `(mode, cos_m, signed sin_m)`. Uses the angle-addition expansion; the
/// per-mode factors commute, so each expansion term is a single Kronecker
/// product.
fn cos_of_sum(parts: &[(usize, &SpMat, SpMat)], dims: &[usize]) -> SpMat {
    // terms as (coefficient, per-mode factor list)
    let mut cos_terms: Vec<(f64, Vec<(usize, SpMat)>)> = vec![(1.0, Vec::new())];
    let mut sin_terms: Vec<(f64, Vec<(usize, SpMat)>)> = Vec::new();
    for (m, cos_m, sin_m) in parts {
        let mut new_cos = Vec::new();
        let mut new_sin = Vec::new();
        for (coeff, factors) in &cos_terms {
            let mut fc = factors.clone();
            fc.push((*m, (*cos_m).clone()));
            new_cos.push((*coeff, fc));
            let mut fs = factors.clone();
            fs.push((*m, sin_m.clone()));
            new_sin.push((*coeff, fs));
        }
        for (coeff, factors) in &sin_terms {
            let mut fs = factors.clone();
            fs.push((*m, sin_m.clone()));
            new_cos.push((-*coeff, fs));
            let mut fc = factors.clone();
            fc.push((*m, (*cos_m).clone()));
            new_sin.push((*coeff, fc));
        }
        cos_terms = new_cos;
        sin_terms = new_sin;
    }
    let dim: usize = dims.iter().product();
    let mut out = SpMat::zeros(dim);
    for (coeff, factors) in &cos_terms {
        out = out.add_scaled(&lift_factors(factors, dims), c(*coeff, 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::Branch;
    use crate::presets;

    fn lc_netlist(c_ff: f64, l_nh: f64) -> CircuitNetlist {
        CircuitNetlist {
            n_nodes: 2,
            reference: 0,
            branches: vec![Branch::capacitive(0, 1, c_ff).with_inductor(l_nh)],
            closure: vec![],
        }
    }

    #[test]
    fn lc_mode_has_exact_harmonic_spectrum() {
        let net = lc_netlist(60.0, 80.0);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 12, ..Default::default() }).unwrap();
        let sol = sys.eigens(0.0, 0.0, 4, 1e-10, 1).unwrap();
        let omega = (8.0 * sys.matrices.e_c[(0, 0)] * sys.matrices.e_l[(0, 0)]).sqrt();
        for i in 0..3 {
            let gap = sol.values[i + 1] - sol.values[i];
            assert!((gap - omega).abs() < 1e-10, "gap {gap} vs {omega}");
        }
    }

    #[test]
    fn transmon_matches_asymptotic_formulas() {
        // E_J/E_C = 50: w01 ~ sqrt(8 E_J E_C) - E_C, anharmonicity ~ -E_C
        let net = presets::transmon(12.5, 0.25);
        let sys = assemble(&net, &QuantizeOptions { charge_cutoff: 15, ..Default::default() })
            .unwrap();
        let sol = sys.eigens(0.0, 0.0, 3, 1e-10, 1).unwrap();
        let w01 = sol.values[1] - sol.values[0];
        let w12 = sol.values[2] - sol.values[1];
        let asym = (8.0f64 * 12.5 * 0.25).sqrt() - 0.25;
        assert!((w01 - asym).abs() / asym < 0.02, "w01 = {w01}, asymptotic {asym}");
        let anharm = w12 - w01;
        assert!((anharm + 0.25).abs() < 0.05, "anharmonicity {anharm}");
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let net = presets::difluxmon();
        let sys = assemble(
            &net,
            &QuantizeOptions { charge_cutoff: 4, fock_cutoff: 5, ..Default::default() },
        )
        .unwrap();
        assert!(sys.h_static.hermiticity_defect() < 1e-12);
        assert!(sys.h_at(0.17, 1.3).hermiticity_defect() < 1e-12);
        assert!(sys.charge_bias_op.hermiticity_defect() < 1e-12);
        assert!(sys.flux_bias_op.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn single_electron_rep_reproduces_cooper_pair_spectrum() {
        // the single-electron space contains the Cooper-pair sector; for a
        // transmon the integer and half-integer sectors are exponentially
        // degenerate, so the low spectrum appears in near-identical pairs
        let net = presets::transmon(12.5, 0.25);
        let cp = assemble(&net, &QuantizeOptions { charge_cutoff: 12, ..Default::default() })
            .unwrap();
        let se = assemble(
            &net,
            &QuantizeOptions { charge_cutoff: 12, single_electron: true, ..Default::default() },
        )
        .unwrap();
        let sol_cp = cp.eigens(0.0, 0.0, 2, 1e-10, 1).unwrap();
        let sol_se = se.eigens(0.0, 0.0, 5, 1e-10, 1).unwrap();
        // every Cooper-pair eigenvalue reappears in the larger space; the
        // interleaved sector levels sit nearby but not identically
        for cp_val in &sol_cp.values {
            let best = sol_se
                .values
                .iter()
                .map(|v| (v - cp_val).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "missing eigenvalue {cp_val}, best match off by {best}");
        }
    }

    #[test]
    fn commutator_flux_element_matches_direct_operator() {
        // single flux-like mode: the commutator identity must reproduce the
        // Fock-basis phase operator
        let net = presets::fluxonium(4.0, 1.0, 0.9);
        let sys = assemble(&net, &QuantizeOptions { fock_cutoff: 40, ..Default::default() })
            .unwrap();
        let sol = sys.eigens(0.0, 0.3, 5, 1e-10, 1).unwrap();
        let phi = sys.phi_ops[0].as_ref().unwrap();
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 3), (2, 4)] {
            let direct = phi.sandwich(&sol.vectors[i], &sol.vectors[j]);
            let comm = sys.flux_op_via_commutator(0, &sol, i, j).unwrap();
            assert!(
                (direct - comm).norm() < 1e-8,
                "({i},{j}): direct {direct}, commutator {comm}"
            );
        }
    }

    #[test]
    fn commutator_rejects_diagonal_and_degenerate() {
        let net = presets::transmon(12.5, 0.25);
        let sys = assemble(&net, &QuantizeOptions::default()).unwrap();
        let sol = sys.eigens(0.0, 0.0, 2, 1e-10, 1).unwrap();
        assert!(sys.flux_op_via_commutator(0, &sol, 1, 1).is_err());
    }

    #[test]
    fn charge_spectrum_even_and_transitions_periodic() {
        let net = presets::transmon(5.0, 0.25); // E_J/E_C = 20, visible dispersion
        let sys = assemble(&net, &QuantizeOptions { charge_cutoff: 14, ..Default::default() })
            .unwrap();
        let w01 = |ng: f64| {
            let sol = sys.eigens(ng, 0.0, 2, 1e-10, 1).unwrap();
            sol.values[1] - sol.values[0]
        };
        assert!((w01(0.23) - w01(-0.23)).abs() < 1e-9);
        assert!((w01(0.23) - w01(1.23)).abs() < 1e-7);
        assert!((w01(0.4) - w01(-0.6)).abs() < 1e-7);
    }

    #[test]
    fn dimension_guard_trips() {
        let net = presets::difluxmon();
        let err = assemble(
            &net,
            &QuantizeOptions { charge_cutoff: 30, fock_cutoff: 80, dim_guard: 10_000, ..Default::default() },
        );
        assert!(matches!(err, Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn branch_half_sin_needs_single_electron_rep() {
        let net = presets::difluxmon();
        let cp = assemble(
            &net,
            &QuantizeOptions { charge_cutoff: 4, fock_cutoff: 5, ..Default::default() },
        )
        .unwrap();
        // branch 5 touches the charge-like mode
        assert!(cp.branch_half_sin(5).is_err());
        let se = assemble(
            &net,
            &QuantizeOptions { charge_cutoff: 4, fock_cutoff: 5, single_electron: true, ..Default::default() },
        )
        .unwrap();
        let op = se.branch_half_sin(5).unwrap();
        assert!(op.hermiticity_defect() < 1e-12);
    }
}
