//! CODATA 2018 physical constants in SI units.

/// Speed of light in vacuum (m/s), exact.
pub const C: f64 = 299_792_458.0;
/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability (H/m).
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Bundle of the constants, for callers that prefer passing a value around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub hbar: f64,
    pub eps0: f64,
    pub mu0: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            c: C,
            hbar: HBAR,
            eps0: EPS0,
            mu0: MU0,
        }
    }
}

/// Angular frequency (rad/s) of light with the given vacuum wavelength (m).
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / lambda
}

/// Vacuum wavelength (m) of light with the given angular frequency (rad/s).
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C / omega
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn light_speed_consistent_with_eps0_mu0() {
        let k = PhysicalConstants::default();
        let c = 1.0 / (k.eps0 * k.mu0).sqrt();
        assert!(((c - k.c) / k.c).abs() < 1e-9);
    }

    #[test]
    fn wavelength_roundtrip() {
        let lambda = 800e-9;
        let w = omega_from_wavelength(lambda);
        assert!((wavelength_from_omega(w) - lambda).abs() < 1e-22);
    }
}
