//! Lumped-element superconducting circuit design toolkit.
//!
//! The crate covers the full design loop for multi-mode superconducting
//! qubits built from capacitors, linear inductors, and Josephson junctions:
//!
//! - [`netlist`]: circuit description, capacitance/inductance energy
//!   matrices, mode classification, and the symbolic Hamiltonian term list
//!   including external charge and flux biases.
//! - [`basis`]: per-mode operator stencils (Cooper-pair charge basis,
//!   single-electron charge basis, harmonic-oscillator basis).
//! - [`quantize`]: Kronecker-product assembly of the full Hamiltonian and
//!   node operators as sparse matrices, plus the commutator construction of
//!   flux matrix elements for charge-like modes.
//! - [`eigen`]: sparse Hermitian lowest-k eigensolver (Lanczos with full
//!   reorthogonalization) with a deterministic phase convention.
//! - [`spectrum`]: transition frequencies, anharmonicities, matrix-element
//!   tables, bias sweeps with adiabatic state tracking, and single-mode
//!   reference qubits (Transmon, Fluxonium).
//! - [`coherence`]: golden-rule depolarization rates per noise channel,
//!   1/f dephasing, and composed T1/Tphi/T2 estimates.
//! - [`gate`]: rotating-frame simulation of charge-driven single-qubit
//!   gates with Hahn and DRAG-corrected pulses, fidelity/leakage metrics,
//!   and derivative-free calibration.
//! - [`readout`]: multi-level dispersive shifts, semiclassical cavity IQ
//!   trajectories, and inverse-transfer-function reset pulse synthesis.
//! - [`evolve`]: evolutionary search over circuit topologies and component
//!   values, gradient fine-tuning, and fabrication-resilience Monte Carlo.
//!
//! Units throughout: energies as linear frequencies in GHz, capacitance in
//! fF, inductance in nH, phase in radians, external flux in radians
//! (`phi_ext = 2*pi*Phi/Phi0`), external charge in Cooper pairs (2e).

pub mod basis;
pub mod coherence;
pub mod consts;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod gate;
pub mod netlist;
pub mod optim;
pub mod presets;
pub mod quantize;
pub mod readout;
pub mod sparse;
pub mod spectrum;

pub use error::{Error, Result};
