//! Phonon-assisted excitation of a neighbouring dot.
//!
//! Light resonant with dot B can excite the lower trion of dot A while an
//! LA phonon carries away the detuning Δ. The rate is
//! γ(Δ, t) = 2π J(Δ) Ω²(t)/Δ², with the deformation-potential spectral
//! density
//!
//! J(Δ) = Δ³/(16π³ ρ ħ c⁵) ∫ d²n |D(Δn/ħc)|²,
//! D(k) = ∫ dr [D_v |ψ_v|² − D_c |ψ_c|²] e^{−ik·r}.
//!
//! Electron and hole envelopes are anisotropic Gaussians whose Fourier
//! transforms are closed-form; the angular integral is done numerically.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::dot::{DotConfig, MaterialConstants};
use crate::dynamics::C64;
use crate::error::{invalid, Error, Result};
use crate::gate::PulsedDrive;
use crate::quadrature::sphere_integral;
use crate::units::{mev_to_rad_per_ps, ELEMENTARY_CHARGE, HBAR_J_S};

/// Gaussian envelope whose probability density |ψ|² has standard deviation
/// `sigma_xy_nm` in-plane and `sigma_z_nm` along the growth axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeWavefunction {
    pub sigma_xy_nm: f64,
    pub sigma_z_nm: f64,
    pub center_nm: [f64; 3],
}

impl EnvelopeWavefunction {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_xy_nm > 0.0 && self.sigma_z_nm > 0.0) {
            return Err(invalid("envelope", "widths must be > 0"));
        }
        Ok(())
    }

    /// |ψ(r)|², normalized to one.
    pub fn density(&self, r: [f64; 3]) -> f64 {
        let (sxy, sz) = (self.sigma_xy_nm, self.sigma_z_nm);
        let dx = r[0] - self.center_nm[0];
        let dy = r[1] - self.center_nm[1];
        let dz = r[2] - self.center_nm[2];
        let norm = (2.0 * std::f64::consts::PI).powf(1.5) * sxy * sxy * sz;
        (-(dx * dx + dy * dy) / (2.0 * sxy * sxy) - dz * dz / (2.0 * sz * sz)).exp() / norm
    }

    /// ∫ |ψ(r)|² e^{−ik·r} dr for k in 1/nm.
    pub fn fourier(&self, k: [f64; 3]) -> C64 {
        let (sxy, sz) = (self.sigma_xy_nm, self.sigma_z_nm);
        let kxy2 = k[0] * k[0] + k[1] * k[1];
        let mag = (-0.5 * (kxy2 * sxy * sxy + k[2] * k[2] * sz * sz)).exp();
        let phase =
            -(k[0] * self.center_nm[0] + k[1] * self.center_nm[1] + k[2] * self.center_nm[2]);
        C64::from_polar(mag, phase)
    }
}

/// Quadrature order used when none is configured.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;
/// Largest Gauss–Legendre order tried before giving up.
pub const MAX_QUADRATURE_ORDER: usize = 2048;
/// Relative change between successive orders accepted as converged.
pub const QUADRATURE_RTOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhononModel {
    pub material: MaterialConstants,
    pub electron: EnvelopeWavefunction,
    pub hole: EnvelopeWavefunction,
    /// Starting Gauss–Legendre order in cos θ (doubled until converged).
    pub quadrature_order: usize,
}

impl PhononModel {
    /// Envelopes with σ_xy = diameter/4 and σ_z = thickness/4, electron and
    /// hole displaced by ±d_eh/2 along the transverse field (x).
    pub fn from_dot(dot: &DotConfig, material: &MaterialConstants) -> Self {
        let env = |x: f64| EnvelopeWavefunction {
            sigma_xy_nm: dot.diameter_nm / 4.0,
            sigma_z_nm: dot.thickness_nm / 4.0,
            center_nm: [x, 0.0, 0.0],
        };
        Self {
            material: material.clone(),
            electron: env(0.5 * dot.d_eh_nm),
            hole: env(-0.5 * dot.d_eh_nm),
            quadrature_order: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.electron.validate()?;
        self.hole.validate()?;
        if self.quadrature_order < 16 {
            return Err(invalid("phonon.quadrature_order", "must be >= 16"));
        }
        Ok(())
    }

    /// Phonon wavenumber (1/nm) for an energy in meV.
    pub fn wavenumber(&self, delta_mev: f64) -> f64 {
        // ω [rad/ps] / c [nm/ps]; 1 m/s = 1e-3 nm/ps
        mev_to_rad_per_ps(delta_mev) / (self.material.sound_velocity_m_s * 1e-3)
    }
}

/// D(k) in eV for k in 1/nm.
pub fn form_factor(model: &PhononModel, k: [f64; 3]) -> C64 {
    model.hole.fourier(k) * model.material.d_v_ev
        - model.electron.fourier(k) * model.material.d_c_ev
}

/// ∫ d²n |D(kn)|² (eV²) at fixed |k|, doubling the order until converged.
fn angular_integral(model: &PhononModel, k: f64) -> Result<f64> {
    let eval = |order: usize| {
        sphere_integral(order, |n| {
            let kv = Vector3::new(n[0], n[1], n[2]) * k;
            form_factor(model, [kv.x, kv.y, kv.z]).norm_sqr()
        })
    };
    let mut order = model.quadrature_order.max(16);
    let mut prev = eval(order);
    let mut change = f64::NAN;
    while order * 2 <= MAX_QUADRATURE_ORDER {
        order *= 2;
        let next = eval(order);
        change = if next == 0.0 {
            0.0
        } else {
            ((next - prev) / next).abs()
        };
        if change < QUADRATURE_RTOL {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged { order, change })
}

/// Spectral density J(Δ) in 1/ps for Δ in meV.
pub fn spectral_density(model: &PhononModel, delta_mev: f64) -> Result<f64> {
    if !(delta_mev >= 0.0) {
        return Err(invalid("delta", "must be >= 0"));
    }
    if delta_mev == 0.0 {
        return Ok(0.0);
    }
    let k = model.wavenumber(delta_mev);
    let d2_ev2 = angular_integral(model, k)?;
    let omega = mev_to_rad_per_ps(delta_mev) * 1e12;
    let m = &model.material;
    let c = m.sound_velocity_m_s;
    let d2_j2 = d2_ev2 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE;
    let per_s = omega.powi(3) * d2_j2
        / (16.0 * std::f64::consts::PI.powi(3) * m.density_kg_m3 * HBAR_J_S * c.powi(5));
    Ok(per_s * 1e-12)
}

/// Probability of exciting the lower dot with phonon emission during one
/// pulse detuned by `e_s_mev` from it: 2π J(E_S) ∫Ω²dt / (E_S/ħ)².
pub fn phonon_error(model: &PhononModel, drive: &PulsedDrive, e_s_mev: f64) -> Result<f64> {
    if !(e_s_mev > 0.0) {
        return Err(invalid("e_s", "must be > 0"));
    }
    if drive.omega0 == 0.0 {
        return Ok(0.0);
    }
    let j = spectral_density(model, e_s_mev)?;
    let w = mev_to_rad_per_ps(e_s_mev);
    Ok(2.0 * std::f64::consts::PI * j * drive.rabi_squared_area() / (w * w))
}

/// Search interval for [`min_separation`] (meV).
pub const SEPARATION_RANGE_MEV: (f64, f64) = (0.5, 30.0);
const SEPARATION_GRID_MEV: f64 = 0.25;
const SEPARATION_TOL_MEV: f64 = 0.01;

/// Smallest E_S such that the phonon error stays within `budget` for every
/// larger separation in range, i.e. the budget crossing on the decreasing
/// branch beyond the peak of ε(E_S).
pub fn min_separation(model: &PhononModel, drive: &PulsedDrive, budget: f64) -> Result<f64> {
    let (lo, hi) = SEPARATION_RANGE_MEV;
    let n = ((hi - lo) / SEPARATION_GRID_MEV).round() as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect();
    let eps = grid
        .iter()
        .map(|e| phonon_error(model, drive, *e))
        .collect::<Result<Vec<_>>>()?;
    if eps[n] > budget {
        return Err(Error::BudgetUnattainable { budget, lo, hi });
    }
    let Some(last_above) = eps.iter().rposition(|e| *e > budget) else {
        return Ok(lo);
    };
    let (mut a, mut b) = (grid[last_above], grid[last_above + 1]);
    while b - a > SEPARATION_TOL_MEV {
        let m = 0.5 * (a + b);
        if phonon_error(model, drive, m)? > budget {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(b)
}

/// One row of a (Δ, J, ε) table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhononRow {
    pub delta_mev: f64,
    pub j_per_ps: f64,
    pub error: f64,
}

pub fn phonon_table(
    model: &PhononModel,
    drive: &PulsedDrive,
    deltas_mev: &[f64],
) -> Result<Vec<PhononRow>> {
    use rayon::prelude::*;
    deltas_mev
        .par_iter()
        .map(|&d| {
            let j = spectral_density(model, d)?;
            let error = if d > 0.0 && drive.omega0 > 0.0 {
                let w = mev_to_rad_per_ps(d);
                2.0 * std::f64::consts::PI * j * drive.rabi_squared_area() / (w * w)
            } else {
                0.0
            };
            Ok(PhononRow {
                delta_mev: d,
                j_per_ps: j,
                error,
            })
        })
        .collect()
}
