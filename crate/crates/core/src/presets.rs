//! Ready-made netlists: the three-mode reference device and single-mode
//! comparison qubits.

use crate::consts::{EC_PREFACTOR_GHZ_FF, EL_PREFACTOR_GHZ_NH};
use crate::netlist::{Branch, CircuitNetlist};
use crate::readout::ReadoutConfig;
use std::f64::consts::PI;

/// Three-island device with one charge-like and two flux-like modes sharing
/// an inductive loop. Operated at the flux sweet spot `phi_ext = pi` it has
/// a ~2.5 GHz qubit transition, near-unity charge matrix element for the
/// 0-1 transition, and strongly suppressed 1-2 drive leakage.
pub fn difluxmon() -> CircuitNetlist {
    CircuitNetlist {
        n_nodes: 4,
        reference: 0,
        branches: vec![
            Branch::capacitive(0, 1, 11.62).with_junction(2.5),
            Branch::capacitive(0, 2, 12.48),
            Branch::capacitive(0, 3, 15.31).with_inductor(35.21),
            Branch::capacitive(1, 2, 12.29),
            Branch::capacitive(1, 3, 10.27).with_inductor(32.82),
            Branch::capacitive(2, 3, 10.94).with_junction(6.85),
        ],
        closure: vec![2],
    }
}

/// Readout working point for [`difluxmon`]: a 2 pi x 6.99 GHz resonator
/// coupled with g = 2 pi x 87 MHz through the charge operator of the third
/// node (mode index 2), 100 ns sin^3 measurement pulse. `kappa` is left at
/// zero; set it from the computed dispersive shift (the reference working
/// point uses kappa = 9.03 chi_1) and calibrate the amplitude to the
/// desired mid-measurement photon number.
pub fn difluxmon_readout() -> ReadoutConfig {
    ReadoutConfig {
        omega_r: 2.0 * PI * 6.99,
        g: 2.0 * PI * 0.087,
        readout_mode: 2,
        kappa: 0.0,
        t_m: 100.0,
        amplitude: 2.0 * PI * 0.035,
        levels: 5,
        samples: 4096,
    }
}

/// Single-junction charge qubit with the given Josephson and charging
/// energies (GHz). The shunt capacitance is derived from `E_C`.
pub fn transmon(e_j_ghz: f64, e_c_ghz: f64) -> CircuitNetlist {
    let c_ff = EC_PREFACTOR_GHZ_FF / e_c_ghz;
    CircuitNetlist {
        n_nodes: 2,
        reference: 0,
        branches: vec![Branch::capacitive(0, 1, c_ff).with_junction(e_j_ghz)],
        closure: vec![],
    }
}

/// Junction shunted by a large linear inductor (energies in GHz). The
/// junction and inductor form parallel branches, so the single loop takes a
/// flux bias through the inductor branch.
pub fn fluxonium(e_j_ghz: f64, e_c_ghz: f64, e_l_ghz: f64) -> CircuitNetlist {
    let c_ff = EC_PREFACTOR_GHZ_FF / e_c_ghz;
    let l_nh = EL_PREFACTOR_GHZ_NH / e_l_ghz;
    // split the shunt capacitance between the two parallel branches; only
    // the node total enters the capacitance matrix
    CircuitNetlist {
        n_nodes: 2,
        reference: 0,
        branches: vec![
            Branch::capacitive(0, 1, 0.5 * c_ff).with_junction(e_j_ghz),
            Branch::capacitive(0, 1, 0.5 * c_ff).with_inductor(l_nh),
        ],
        closure: vec![1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_matrices, classify_modes, ModeKind};

    #[test]
    fn reference_device_is_valid() {
        difluxmon().validate().unwrap();
    }

    #[test]
    fn transmon_energies_roundtrip() {
        let net = transmon(12.0, 0.25);
        net.validate().unwrap();
        let m = build_matrices(&net).unwrap();
        assert!((m.e_c[(0, 0)] - 0.25).abs() < 1e-12);
        assert_eq!(classify_modes(&net), vec![ModeKind::ChargeLike]);
    }

    #[test]
    fn fluxonium_energies_roundtrip() {
        let net = fluxonium(4.0, 1.0, 0.9);
        net.validate().unwrap();
        let m = build_matrices(&net).unwrap();
        assert!((m.e_c[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((m.e_l[(0, 0)] - 0.9).abs() < 1e-12);
        assert_eq!(classify_modes(&net), vec![ModeKind::FluxLike]);
        assert_eq!(net.resolve_closure().unwrap(), vec![1]);
    }
}
