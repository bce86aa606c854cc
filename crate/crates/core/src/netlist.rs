//! Circuit netlists, energy matrices, mode classification, and the symbolic
//! Hamiltonian term list.
//!
//! A circuit is a connected graph of superconducting islands (nodes) joined
//! by branches. Every branch carries a capacitor and optionally one linear
//! inductor and/or one Josephson junction. One node is the reference; the
//! remaining nodes are the circuit modes.

use crate::consts::{EC_PREFACTOR_GHZ_FF, EL_PREFACTOR_GHZ_NH};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// One two-terminal branch: capacitance plus optional inductor and junction.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    /// Capacitance in fF.
    pub c_ff: f64,
    /// Linear inductance in nH.
    pub l_nh: Option<f64>,
    /// Josephson energy in GHz (omega/2pi convention).
    pub e_j_ghz: Option<f64>,
}

impl Branch {
    pub fn capacitive(from: usize, to: usize, c_ff: f64) -> Self {
        Branch { from, to, c_ff, l_nh: None, e_j_ghz: None }
    }

    pub fn with_inductor(mut self, l_nh: f64) -> Self {
        self.l_nh = Some(l_nh);
        self
    }

    pub fn with_junction(mut self, e_j_ghz: f64) -> Self {
        self.e_j_ghz = Some(e_j_ghz);
        self
    }

    /// True if the branch carries an inductor or a junction.
    pub fn is_inductive(&self) -> bool {
        self.l_nh.is_some() || self.e_j_ghz.is_some()
    }
}

/// External bias point: static charge offset (Cooper pairs) and loop flux
/// (radians, `2*pi*Phi/Phi0`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bias {
    pub ng_ext: f64,
    pub phi_ext: f64,
}

/// Lumped-element circuit netlist.
#[derive(Debug, Clone)]
pub struct CircuitNetlist {
    pub n_nodes: usize,
    /// Index of the reference node.
    pub reference: usize,
    pub branches: Vec<Branch>,
    /// Indices of the designated closure branches, one per independent
    /// inductive loop. Empty means "choose defaults" (largest-inductance
    /// branch in each loop).
    pub closure: Vec<usize>,
}

/// Classification of one circuit mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Coupled only through capacitors and junctions; compact phase.
    ChargeLike,
    /// Has a linear-inductor term; extended phase.
    FluxLike,
    /// No kinetic (capacitive) term: invalid.
    Frozen,
    /// No potential term at all (no inductor, no junction): invalid.
    Free,
}

impl ModeKind {
    pub fn is_valid(self) -> bool {
        matches!(self, ModeKind::ChargeLike | ModeKind::FluxLike)
    }
}

/// Capacitance/inductance matrices and their energy-matrix counterparts.
#[derive(Debug, Clone)]
pub struct EnergyMatrices {
    /// Node capacitance matrix in fF (modes only, reference eliminated).
    pub c_matrix: DMatrix<f64>,
    /// Inverse-inductance matrix in 1/nH.
    pub l_inv: DMatrix<f64>,
    /// Charging-energy matrix in GHz: `(e^2/2) C^-1`.
    pub e_c: DMatrix<f64>,
    /// Inductive-energy matrix in GHz: `(Phi0/2pi)^2 L^-1`.
    pub e_l: DMatrix<f64>,
}

/// One junction cosine term `-E_J cos(sum_i s_i phi_i)`.
#[derive(Debug, Clone)]
pub struct JunctionTerm {
    /// Josephson energy in GHz.
    pub e_j: f64,
    /// Signed node-phase combination over mode indices, signs +-1.
    pub phase: Vec<(usize, i8)>,
}

/// Term list of the circuit Hamiltonian
/// `H = 4 n^T E_C n + 1/2 phi^T E_L phi - sum E_J cos(...) + H_ext`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub modes: Vec<ModeKind>,
    pub e_c: DMatrix<f64>,
    pub e_l: DMatrix<f64>,
    pub junctions: Vec<JunctionTerm>,
    /// Per-mode coefficient of `ng_ext * n_i` in `H_ext` (GHz): for each
    /// charge-like mode m this is `8 [E_C]_{i m}` summed over such modes.
    pub charge_bias_coeff: Vec<f64>,
    /// Per-mode coefficient of `phi_ext * phi_i` in `H_ext` (GHz): the
    /// closure-branch inductive energies `[E_L]_b` with loop orientation.
    pub flux_bias_coeff: Vec<f64>,
    pub bias: Bias,
}

impl CircuitNetlist {
    pub fn n_modes(&self) -> usize {
        self.n_nodes - 1
    }

    /// Map node index -> mode index (reference node maps to None).
    pub fn mode_of_node(&self, node: usize) -> Option<usize> {
        if node == self.reference {
            None
        } else if node < self.reference {
            Some(node)
        } else {
            Some(node - 1)
        }
    }

    /// Map mode index -> node index.
    pub fn node_of_mode(&self, mode: usize) -> usize {
        if mode < self.reference {
            mode
        } else {
            mode + 1
        }
    }

    /// Structural validation: connectivity, reference in range, positive
    /// element values, valid mode classification, and consistent closure
    /// declarations.
    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 2 {
            return Err(Error::InvalidNetlist("need at least two nodes".into()));
        }
        if self.reference >= self.n_nodes {
            return Err(Error::InvalidNetlist("reference node out of range".into()));
        }
        for (i, b) in self.branches.iter().enumerate() {
            if b.from >= self.n_nodes || b.to >= self.n_nodes || b.from == b.to {
                return Err(Error::InvalidNetlist(format!("branch {i} has bad endpoints")));
            }
            if !(b.c_ff > 0.0) {
                return Err(Error::InvalidNetlist(format!("branch {i}: capacitance must be > 0")));
            }
            if let Some(l) = b.l_nh {
                if !(l > 0.0) {
                    return Err(Error::InvalidNetlist(format!("branch {i}: inductance must be > 0")));
                }
            }
            if let Some(ej) = b.e_j_ghz {
                if !(ej > 0.0) {
                    return Err(Error::InvalidNetlist(format!("branch {i}: E_J must be > 0")));
                }
            }
        }
        // connectivity
        let mut uf = UnionFind::new(self.n_nodes);
        for b in &self.branches {
            uf.union(b.from, b.to);
        }
        let root = uf.find(self.reference);
        if (0..self.n_nodes).any(|n| uf.find(n) != root) {
            return Err(Error::InvalidNetlist("disconnected graph".into()));
        }
        // mode classification
        let kinds = classify_modes(self);
        if let Some(m) = kinds.iter().position(|k| !k.is_valid()) {
            return Err(Error::InvalidNetlist(format!(
                "mode {m} (node {}) is {:?}",
                self.node_of_mode(m),
                kinds[m]
            )));
        }
        // closure declarations must match the loop structure
        self.resolve_closure()?;
        Ok(())
    }

    /// Resolve closure branches: verify user-pinned ones, or pick the
    /// largest-inductance branch in each independent inductive loop.
    ///
    /// Loops are cycles in the subgraph of inductive branches (inductor or
    /// junction). Every independent loop must contain a linear inductor to
    /// serve as its closure branch.
    pub fn resolve_closure(&self) -> Result<Vec<usize>> {
        // Inductive edges: a branch carrying both an inductor and a junction
        // contributes two parallel edges (it is a loop on its own).
        let mut edges: Vec<(usize, bool)> = Vec::new(); // (branch, is_inductor_edge)
        for (i, b) in self.branches.iter().enumerate() {
            if b.e_j_ghz.is_some() {
                edges.push((i, false));
            }
            if b.l_nh.is_some() {
                edges.push((i, true));
            }
        }
        let cycle_dim = {
            let mut uf = UnionFind::new(self.n_nodes);
            let mut extra = 0usize;
            for &(i, _) in &edges {
                if !uf.union(self.branches[i].from, self.branches[i].to) {
                    extra += 1;
                }
            }
            extra
        };

        if !self.closure.is_empty() {
            if self.closure.len() != cycle_dim {
                return Err(Error::Configuration(format!(
                    "{} closure branches declared but circuit has {} independent inductive loops",
                    self.closure.len(),
                    cycle_dim
                )));
            }
            let mut uf = UnionFind::new(self.n_nodes);
            for &(i, is_l) in &edges {
                if is_l && self.closure.contains(&i) {
                    continue;
                }
                uf.union(self.branches[i].from, self.branches[i].to);
            }
            for &i in &self.closure {
                let b = self
                    .branches
                    .get(i)
                    .ok_or_else(|| Error::Configuration(format!("closure branch {i} out of range")))?;
                if b.l_nh.is_none() {
                    return Err(Error::Configuration(format!(
                        "closure branch {i} carries no linear inductor"
                    )));
                }
                if uf.find(b.from) != uf.find(b.to) {
                    return Err(Error::Configuration(format!(
                        "closure branch {i} does not lie on an inductive loop"
                    )));
                }
                uf.union(b.from, b.to);
            }
            return Ok(self.closure.clone());
        }

        // Default: grow a spanning forest adding junction edges first and
        // inductor edges in ascending L, so the largest inductors close the
        // loops.
        edges.sort_by(|&(a, la), &(b, lb)| {
            let ka = if la { self.branches[a].l_nh.unwrap() } else { f64::NEG_INFINITY };
            let kb = if lb { self.branches[b].l_nh.unwrap() } else { f64::NEG_INFINITY };
            ka.partial_cmp(&kb).unwrap()
        });
        let mut uf = UnionFind::new(self.n_nodes);
        let mut closure = Vec::new();
        for &(i, is_l) in &edges {
            let b = &self.branches[i];
            if !uf.union(b.from, b.to) {
                if !is_l {
                    return Err(Error::Configuration(
                        "inductive loop without a linear inductor cannot take a flux bias".into(),
                    ));
                }
                closure.push(i);
            }
        }
        closure.sort_unstable();
        debug_assert_eq!(closure.len(), cycle_dim);
        Ok(closure)
    }
}

/// Build the capacitance/inductance matrices and the charging/inductive
/// energy matrices.
///
/// Stencil: diagonal entries are sums of incident branch values, off-diagonal
/// entries are minus the connecting branch value; rows/columns of the
/// reference node are eliminated.
pub fn build_matrices(netlist: &CircuitNetlist) -> Result<EnergyMatrices> {
    let n = netlist.n_modes();
    let mut c = DMatrix::<f64>::zeros(n, n);
    let mut l_inv = DMatrix::<f64>::zeros(n, n);
    for b in &netlist.branches {
        let mf = netlist.mode_of_node(b.from);
        let mt = netlist.mode_of_node(b.to);
        if let Some(i) = mf {
            c[(i, i)] += b.c_ff;
        }
        if let Some(j) = mt {
            c[(j, j)] += b.c_ff;
        }
        if let (Some(i), Some(j)) = (mf, mt) {
            c[(i, j)] -= b.c_ff;
            c[(j, i)] -= b.c_ff;
        }
        if let Some(l) = b.l_nh {
            let v = 1.0 / l;
            if let Some(i) = mf {
                l_inv[(i, i)] += v;
            }
            if let Some(j) = mt {
                l_inv[(j, j)] += v;
            }
            if let (Some(i), Some(j)) = (mf, mt) {
                l_inv[(i, j)] -= v;
                l_inv[(j, i)] -= v;
            }
        }
    }
    let chol = c.clone().cholesky().ok_or(Error::DegenerateCapacitance)?;
    let c_inv = chol.inverse();
    let e_c = &c_inv * EC_PREFACTOR_GHZ_FF;
    let e_l = &l_inv * EL_PREFACTOR_GHZ_NH;
    Ok(EnergyMatrices { c_matrix: c, l_inv, e_c, e_l })
}

/// Label each mode: flux-like (linear-inductor term present), charge-like,
/// or the invalid Frozen (no capacitance) / Free (no potential) markers.
pub fn classify_modes(netlist: &CircuitNetlist) -> Vec<ModeKind> {
    let n = netlist.n_modes();
    let mut cap = vec![0.0f64; n];
    let mut ind = vec![0.0f64; n];
    let mut junc = vec![false; n];
    for b in &netlist.branches {
        for node in [b.from, b.to] {
            if let Some(m) = netlist.mode_of_node(node) {
                cap[m] += b.c_ff;
                if let Some(l) = b.l_nh {
                    ind[m] += 1.0 / l;
                }
                if b.e_j_ghz.is_some() {
                    junc[m] = true;
                }
            }
        }
    }
    (0..n)
        .map(|m| {
            if cap[m] <= 0.0 {
                ModeKind::Frozen
            } else if ind[m] > 0.0 {
                ModeKind::FluxLike
            } else if junc[m] {
                ModeKind::ChargeLike
            } else {
                ModeKind::Free
            }
        })
        .collect()
}

/// Construct the Hamiltonian term list at a given bias point.
///
/// The external charge bias couples through the charging-energy rows of the
/// charge-like modes (`8 [E_C]_{i m} ng_ext` on each `n_i`); the external
/// flux couples through the closure-branch inductive energy on the closure
/// branch's node phases. Constant bias terms (identity shifts) are dropped.
pub fn hamiltonian_spec(
    netlist: &CircuitNetlist,
    matrices: &EnergyMatrices,
    bias: Bias,
) -> Result<HamiltonianSpec> {
    let n = netlist.n_modes();
    let modes = classify_modes(netlist);
    if let Some(m) = modes.iter().position(|k| !k.is_valid()) {
        return Err(Error::InvalidNetlist(format!("mode {m} is {:?}", modes[m])));
    }
    let closure = netlist.resolve_closure()?;

    let mut junctions = Vec::new();
    for b in &netlist.branches {
        if let Some(e_j) = b.e_j_ghz {
            let mut phase = Vec::new();
            if let Some(i) = netlist.mode_of_node(b.from) {
                phase.push((i, 1i8));
            }
            if let Some(j) = netlist.mode_of_node(b.to) {
                phase.push((j, -1i8));
            }
            if phase.is_empty() {
                return Err(Error::InvalidNetlist("junction with both ends on reference".into()));
            }
            junctions.push(JunctionTerm { e_j, phase });
        }
    }

    let mut charge_bias_coeff = vec![0.0; n];
    for m in 0..n {
        if modes[m] == ModeKind::ChargeLike {
            for (i, coeff) in charge_bias_coeff.iter_mut().enumerate() {
                *coeff += 8.0 * matrices.e_c[(i, m)];
            }
        }
    }

    let mut flux_bias_coeff = vec![0.0; n];
    for &bi in &closure {
        let b = &netlist.branches[bi];
        let e_l_branch = EL_PREFACTOR_GHZ_NH
            / b.l_nh.ok_or_else(|| Error::Configuration("closure branch without inductor".into()))?;
        if let Some(j) = netlist.mode_of_node(b.to) {
            flux_bias_coeff[j] += e_l_branch;
        }
        if let Some(i) = netlist.mode_of_node(b.from) {
            flux_bias_coeff[i] -= e_l_branch;
        }
    }

    Ok(HamiltonianSpec {
        modes,
        e_c: matrices.e_c.clone(),
        e_l: matrices.e_l.clone(),
        junctions,
        charge_bias_coeff,
        flux_bias_coeff,
        bias,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    /// Returns false if x and y were already connected.
    fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        self.parent[rx] = ry;
        true
    }
}
