//! Physical constants and the single conversion point between energies and
//! angular frequencies.
//!
//! Internally time is in ps and energies enter Hamiltonians as angular
//! frequencies in rad/ps.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_9;

/// Bohr magneton in meV/T.
pub const MU_B_MEV_PER_T: f64 = 0.057_883;

/// e²/(4πε₀) in meV·nm.
pub const COULOMB_MEV_NM: f64 = 1_439.964_5;

/// Reduced Planck constant in J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Elementary charge in C (also J per eV).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Energy in meV to angular frequency in rad/ps.
#[inline]
pub fn mev_to_rad_per_ps(e: f64) -> f64 {
    e / HBAR_MEV_PS
}

/// Angular frequency in rad/ps to energy in meV.
#[inline]
pub fn rad_per_ps_to_mev(w: f64) -> f64 {
    w * HBAR_MEV_PS
}
