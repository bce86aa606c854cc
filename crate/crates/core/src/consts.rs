//! Physical constants (SI) and unit conversions for the GHz/fF/nH convention.

/// Electron charge [C].
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant [J s].
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = PLANCK_H / (2.0 * std::f64::consts::PI);
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/2e [Wb].
pub const PHI_0: f64 = PLANCK_H / (2.0 * E_CHARGE);
/// Reduced flux quantum Phi0/2pi [Wb].
pub const PHI_0_BAR: f64 = PHI_0 / (2.0 * std::f64::consts::PI);

/// Charging-energy scale in GHz for a capacitance in fF: `e^2/(2 C h)`.
///
/// `[E_C]_ij = EC_PREFACTOR_GHZ_FF * [C^-1]_ij` with `C^-1` in 1/fF.
pub const EC_PREFACTOR_GHZ_FF: f64 = E_CHARGE * E_CHARGE / (2.0 * PLANCK_H) * 1e15 / 1e9;

/// Inductive-energy scale in GHz for an inductance in nH: `(Phi0/2pi)^2/(L h)`.
pub const EL_PREFACTOR_GHZ_NH: f64 = PHI_0_BAR * PHI_0_BAR / PLANCK_H * 1e9 / 1e9;

/// Convert a linear frequency in GHz to an angular frequency in rad/s.
pub fn ghz_to_rad_s(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e9
}

/// Convert a linear frequency in GHz to an angular frequency in rad/ns.
pub fn ghz_to_rad_ns(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz
}
