//! Quantum-dot level scheme and node layout.
//!
//! The qubit is the spin of a single resident electron. σ₊ light couples
//! |1/2⟩ to the trion |3/2⟩_T and σ₋ couples |−1/2⟩ to |−3/2⟩_T, so the two
//! photon energies are split by twice the exciton Zeeman energy.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::units::{COULOMB_MEV_NM, MU_B_MEV_PER_T};

/// Physical parameters of one dot. Energies in meV, lengths in nm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DotConfig {
    /// Zero-field trion transition energy.
    pub e_t_mev: f64,
    /// Exciton g-factor.
    pub g_x: f64,
    /// Electron g-factor.
    pub g_e: f64,
    /// Magnetic field along the growth axis (T).
    pub b_field_t: f64,
    /// Operating temperature (K) at which tuning sensitivity is evaluated.
    pub t_op_k: f64,
    pub diameter_nm: f64,
    pub thickness_nm: f64,
    /// Electron-hole separation induced by the transverse electric field.
    pub d_eh_nm: f64,
    /// Radiative lifetime (ps).
    pub t_rad_ps: f64,
    /// Excited hole levels above the hole ground state, from an atomistic
    /// calculation of a 16 nm × 4 nm GaAs/AlGaAs nanowire dot.
    pub hole_levels_mev: Vec<f64>,
    /// First excited electron level above the electron ground state.
    pub e_level1_mev: f64,
    /// Probability per fluorescence cycle of a |ΔJ| = 2 decay.
    pub p_forbidden: f64,
}

impl Default for DotConfig {
    fn default() -> Self {
        Self {
            e_t_mev: 1650.0,
            g_x: 2.0,
            g_e: -0.44,
            b_field_t: 1.0,
            t_op_k: 30.0,
            diameter_nm: 16.0,
            thickness_nm: 4.0,
            d_eh_nm: 5.0,
            t_rad_ps: 300.0,
            hole_levels_mev: vec![15.0, 24.0, 26.0, 30.0],
            e_level1_mev: 48.0,
            p_forbidden: 1e-3,
        }
    }
}

impl DotConfig {
    pub fn validate(&self) -> Result<()> {
        let energies = [self.e_t_mev, self.e_level1_mev];
        if energies
            .iter()
            .chain(&self.hole_levels_mev)
            .any(|e| !(*e >= 0.0))
        {
            return Err(invalid("dot", "energies must be >= 0"));
        }
        if !(self.thickness_nm > 0.0 && self.diameter_nm > self.thickness_nm) {
            return Err(invalid(
                "dot.diameter_nm",
                "flat dot required: diameter > thickness > 0",
            ));
        }
        if !(0.0..=1.0).contains(&self.p_forbidden) {
            return Err(invalid("dot.p_forbidden", "must lie in [0, 1]"));
        }
        if !(self.t_rad_ps > 0.0) {
            return Err(invalid("dot.t_rad_ps", "must be > 0"));
        }
        if !(self.t_op_k >= 0.0) || !(self.d_eh_nm >= 0.0) {
            return Err(invalid("dot", "temperature and d_eh must be >= 0"));
        }
        Ok(())
    }

    /// Exciton Zeeman energy g_X μ_B B (meV).
    pub fn zeeman_mev(&self) -> f64 {
        self.g_x * MU_B_MEV_PER_T * self.b_field_t
    }
}

/// Bulk constants of the dot material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConstants {
    pub name: String,
    /// Static dielectric constant.
    pub eps_r: f64,
    pub density_kg_m3: f64,
    /// Longitudinal sound velocity.
    pub sound_velocity_m_s: f64,
    /// Conduction-band deformation potential (eV).
    pub d_c_ev: f64,
    /// Valence-band deformation potential (eV).
    pub d_v_ev: f64,
    pub varshni_alpha_mev_k: f64,
    pub varshni_beta_k: f64,
}

impl MaterialConstants {
    /// GaAs. Deformation potentials follow the usual exciton-phonon
    /// literature values (D_c = −8.0 eV, D_v = 1.0 eV).
    pub fn gaas() -> Self {
        Self {
            name: "GaAs".into(),
            eps_r: 12.9,
            density_kg_m3: 5317.0,
            sound_velocity_m_s: 5110.0,
            d_c_ev: -8.0,
            d_v_ev: 1.0,
            varshni_alpha_mev_k: 0.5405,
            varshni_beta_k: 204.0,
        }
    }

    /// ZnSe, for comparison studies. Values are approximate literature
    /// numbers; the deformation potentials are notably smaller than GaAs.
    pub fn znse() -> Self {
        Self {
            name: "ZnSe".into(),
            eps_r: 9.1,
            density_kg_m3: 5270.0,
            sound_velocity_m_s: 4590.0,
            d_c_ev: -4.17,
            d_v_ev: 1.65,
            varshni_alpha_mev_k: 0.73,
            varshni_beta_k: 295.0,
        }
    }

    /// Looks up a preset by (case-insensitive) name.
    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "gaas" => Some(Self::gaas()),
            "znse" => Some(Self::znse()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density_kg_m3 > 0.0 && self.sound_velocity_m_s > 0.0 && self.eps_r > 0.0) {
            return Err(invalid(
                "material",
                "density, sound velocity and eps_r must be > 0",
            ));
        }
        if !(self.varshni_beta_k > 0.0) {
            return Err(invalid("material.varshni_beta_k", "must be > 0"));
        }
        Ok(())
    }
}

impl Default for MaterialConstants {
    fn default() -> Self {
        Self::gaas()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonEnergies {
    pub sigma_plus_mev: f64,
    pub sigma_minus_mev: f64,
}

impl PhotonEnergies {
    pub fn splitting_mev(&self) -> f64 {
        self.sigma_plus_mev - self.sigma_minus_mev
    }

    pub fn is_degenerate(&self) -> bool {
        self.sigma_plus_mev == self.sigma_minus_mev
    }
}

/// E_σ± = E_T ± g_X μ_B B.
pub fn photon_energies(cfg: &DotConfig) -> PhotonEnergies {
    let ez = cfg.zeeman_mev();
    PhotonEnergies {
        sigma_plus_mev: cfg.e_t_mev + ez,
        sigma_minus_mev: cfg.e_t_mev - ez,
    }
}

/// Varshni gap reduction αT²/(T+β) in meV.
pub fn varshni_shift(t_k: f64, mat: &MaterialConstants) -> f64 {
    let (a, b) = (mat.varshni_alpha_mev_k, mat.varshni_beta_k);
    a * t_k * t_k / (t_k + b)
}

/// d/dT of [`varshni_shift`] in meV/K.
pub fn varshni_slope(t_k: f64, mat: &MaterialConstants) -> f64 {
    let (a, b) = (mat.varshni_alpha_mev_k, mat.varshni_beta_k);
    a * t_k * (t_k + 2.0 * b) / ((t_k + b) * (t_k + b))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPrecision {
    /// Largest temperature error keeping the trion energy within target (mK).
    /// `None` when dE/dT vanishes (T_op = 0) and the bound is unlimited.
    pub delta_t_max_mk: Option<f64>,
    /// Largest field error keeping the Zeeman energy within target (mT).
    pub delta_b_max_mt: Option<f64>,
    pub operating_temperature_k: f64,
    pub target_uev: f64,
}

/// Temperature and field precision needed to hold an energy to `target_uev`.
pub fn control_precision(
    cfg: &DotConfig,
    mat: &MaterialConstants,
    target_uev: f64,
) -> ControlPrecision {
    let target_mev = target_uev * 1e-3;
    let slope_t = varshni_slope(cfg.t_op_k, mat);
    let slope_b = (cfg.g_x * MU_B_MEV_PER_T).abs();
    let bound = |slope: f64| {
        if slope > 0.0 {
            Some(target_mev / slope * 1e3)
        } else {
            None
        }
    };
    ControlPrecision {
        delta_t_max_mk: bound(slope_t),
        delta_b_max_mt: bound(slope_b),
        operating_temperature_k: cfg.t_op_k,
        target_uev,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DipoleGeometry {
    /// Point charges ±e separated by d_eh in each dot.
    FourCharge,
    /// Ideal point dipoles p = e·d_eh.
    PointDipole,
}

/// Interaction energy (meV) of two trion dipoles stacked a distance `r_nm`
/// apart along the growth axis, both pointing along the transverse field.
pub fn dipole_dipole_energy(
    d_eh_nm: f64,
    r_nm: f64,
    eps_r: f64,
    geometry: DipoleGeometry,
) -> Result<f64> {
    if !(r_nm > 0.0) {
        return Err(invalid("r", "dot separation must be > 0"));
    }
    if !(eps_r > 0.0) {
        return Err(invalid("eps_r", "must be > 0"));
    }
    let k = COULOMB_MEV_NM / eps_r;
    Ok(match geometry {
        DipoleGeometry::PointDipole => k * d_eh_nm * d_eh_nm / r_nm.powi(3),
        DipoleGeometry::FourCharge => {
            // like charges sit directly above each other; unlike ones are
            // offset by d_eh transversally
            let cross = (r_nm * r_nm + d_eh_nm * d_eh_nm).sqrt();
            k * (2.0 / r_nm - 2.0 / cross)
        }
    })
}

/// Spectral slots of the dots in one node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodePlan {
    pub e_w_mev: f64,
    pub e_s_mev: f64,
    /// Trion energies relative to the lowest dot (meV).
    pub slots_mev: Vec<f64>,
    pub n_qubits: usize,
}

const SLOT_EPS_MEV: f64 = 1e-6;

/// Packs trion energies at multiples of `e_s` strictly inside `[0, e_w)`.
pub fn addressing_plan(e_w_mev: f64, e_s_mev: f64) -> Result<NodePlan> {
    if !(e_w_mev > 0.0) {
        return Err(invalid("e_w", "must be > 0"));
    }
    if !(e_s_mev > 0.0) {
        return Err(invalid("e_s", "must be > 0"));
    }
    let n = 1 + ((e_w_mev - SLOT_EPS_MEV) / e_s_mev).floor().max(0.0) as usize;
    let slots = (0..n).map(|i| i as f64 * e_s_mev).collect();
    Ok(NodePlan {
        e_w_mev,
        e_s_mev,
        slots_mev: slots,
        n_qubits: n,
    })
}

impl NodePlan {
    pub fn validate(&self) -> Result<()> {
        if self.slots_mev.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: self.slots_mev.len(),
            });
        }
        let spaced = self
            .slots_mev
            .windows(2)
            .all(|w| w[1] - w[0] >= self.e_s_mev - 1e-12);
        let inside = self
            .slots_mev
            .iter()
            .all(|s| *s >= 0.0 && *s < self.e_w_mev);
        if !(spaced && inside) {
            return Err(invalid("node plan", "slot spacing or window violated"));
        }
        Ok(())
    }
}
