use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use qdot_core::dot::DipoleGeometry;
use qdot_core::gate::{DipoleShiftSign, GateOptions};
use qdot_core::{
    ChainConfig, DotConfig, LinkBudget, MaterialConstants, PhononModel, PulsedDrive, RamanConfig,
    ReadoutConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Material given either by preset name or by explicit constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialChoice {
    Preset(String),
    Custom(MaterialConstants),
}

impl Default for MaterialChoice {
    fn default() -> Self {
        MaterialChoice::Preset("GaAs".into())
    }
}

impl MaterialChoice {
    pub fn resolve(&self) -> Result<MaterialConstants, CliError> {
        match self {
            MaterialChoice::Preset(name) => MaterialConstants::preset(name)
                .ok_or_else(|| CliError::Validation(format!("unknown material preset `{name}`"))),
            MaterialChoice::Custom(m) => Ok(m.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    /// Dipole-dipole energy (meV); when absent it is calibrated.
    pub e_dd_mev: Option<f64>,
    pub target_phase_rad: f64,
    pub e_dd_range_mev: [f64; 2],
    pub sign: DipoleShiftSign,
    pub tol: f64,
    pub max_step_ps: f64,
}

impl Default for GateSection {
    fn default() -> Self {
        let o = GateOptions::default();
        Self {
            e_dd_mev: None,
            target_phase_rad: PI,
            e_dd_range_mev: [0.1, 10.0],
            sign: o.sign,
            tol: o.tol,
            max_step_ps: o.max_step_ps,
        }
    }
}

impl GateSection {
    pub fn options(&self) -> GateOptions {
        GateOptions {
            tol: self.tol,
            sign: self.sign,
            max_step_ps: self.max_step_ps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BellSection {
    /// Residual detuning between the two emitters (μeV).
    pub delta_e_uev: f64,
    /// Pure dephasing time (ps); no dephasing when absent.
    pub t_deph_ps: Option<f64>,
}

impl Default for BellSection {
    fn default() -> Self {
        Self {
            delta_e_uev: 0.2,
            t_deph_ps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhononSection {
    pub quadrature_order: usize,
    pub delta_grid_mev: Vec<f64>,
    /// Error budget for the minimum-separation search.
    pub budget: f64,
}

impl Default for PhononSection {
    fn default() -> Self {
        Self {
            quadrature_order: 32,
            delta_grid_mev: (1..=60).map(|i| 0.25 * i as f64).collect(),
            budget: 1.4e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NodeSection {
    /// Spectral window available to one node (meV).
    pub e_w_mev: f64,
    /// Trion spacing between dots of one node (meV).
    pub e_s_mev: f64,
    pub separation_nm: f64,
    pub geometry: DipoleGeometry,
    pub target_uev: f64,
}

impl Default for NodeSection {
    fn default() -> Self {
        Self {
            e_w_mev: 15.0,
            e_s_mev: 7.5,
            separation_nm: 10.0,
            geometry: DipoleGeometry::FourCharge,
            target_uev: 0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialsSection {
    pub link: usize,
    pub repeater: usize,
}

impl Default for TrialsSection {
    fn default() -> Self {
        Self {
            link: 100_000,
            repeater: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Not part of the experiment: excluded from snapshots and the hash.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub dot: DotConfig,
    pub material: MaterialChoice,
    pub drive: PulsedDrive,
    pub gate: GateSection,
    pub link: LinkBudget,
    pub bell: BellSection,
    pub readout: ReadoutConfig,
    pub chain: ChainConfig,
    pub phonon: PhononSection,
    pub node: NodeSection,
    pub raman: RamanConfig,
    pub trials: TrialsSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("results"),
            dot: DotConfig::default(),
            material: MaterialChoice::default(),
            drive: PulsedDrive::default(),
            gate: GateSection::default(),
            link: LinkBudget::default(),
            bell: BellSection::default(),
            readout: ReadoutConfig::default(),
            chain: ChainConfig::default(),
            phonon: PhononSection::default(),
            node: NodeSection::default(),
            raman: RamanConfig::default(),
            trials: TrialsSection::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads `path` (or the defaults), applies `key=value` overrides and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut value = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)
            .map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.dot.validate()?;
        self.phonon_model()?;
        self.drive.validate()?;
        self.link.validate()?;
        self.readout.validate()?;
        self.chain.validate()?;
        self.raman.validate()?;
        let [lo, hi] = self.gate.e_dd_range_mev;
        if !(lo >= 0.0 && hi > lo) {
            return Err(CliError::Validation(
                "gate.e_dd_range_mev must be increasing and >= 0".into(),
            ));
        }
        if let Some(e) = self.gate.e_dd_mev {
            if !(e >= 0.0) {
                return Err(CliError::Validation("gate.e_dd_mev must be >= 0".into()));
            }
        }
        if !(self.gate.tol > 0.0 && self.gate.tol <= 1e-3) {
            return Err(CliError::Validation(
                "gate.tol must lie in (0, 1e-3]".into(),
            ));
        }
        if !(self.phonon.budget > 0.0) {
            return Err(CliError::Validation("phonon.budget must be > 0".into()));
        }
        if self.phonon.delta_grid_mev.iter().any(|d| !(*d >= 0.0)) {
            return Err(CliError::Validation(
                "phonon.delta_grid_mev entries must be >= 0".into(),
            ));
        }
        if self.trials.link == 0 || self.trials.repeater == 0 {
            return Err(CliError::Validation("trials must be >= 1".into()));
        }
        qdot_core::dot::addressing_plan(self.node.e_w_mev, self.node.e_s_mev)?;
        Ok(())
    }

    pub fn material(&self) -> Result<MaterialConstants, CliError> {
        self.material.resolve()
    }

    pub fn phonon_model(&self) -> Result<PhononModel, CliError> {
        let mut m = PhononModel::from_dot(&self.dot, &self.material()?);
        m.quadrature_order = self.phonon.quadrature_order;
        m.validate()?;
        Ok(m)
    }

    /// SHA-256 of the canonical (key-sorted) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_value(self)
            .expect("config serializes")
            .to_string();
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Sets a dotted key. The value is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("override `{assignment}` is not key=value")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Validation(format!("bad override key `{key}`")));
    }
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Validation(format!("`{key}`: `{part}` is not a section")))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(format!("`{key}` does not name a field")))?;
    obj.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
        let cfg = ExperimentConfig::load(None, &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn overrides_nest_and_parse() {
        let cfg = ExperimentConfig::load(
            None,
            &[
                "dot.b_field_t=0.5".into(),
                "material=ZnSe".into(),
                "gate.sign=\"repulsive\"".into(),
                "seed=9".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.dot.b_field_t, 0.5);
        assert_eq!(cfg.material().unwrap().name, "ZnSe");
        assert_eq!(cfg.gate.sign, DipoleShiftSign::Repulsive);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::load(None, &["dot.colour=3".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["nonsense=1".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["seed".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["material=Unobtainium".into()]).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::load(None, &["readout.n_shots=0".into()]).is_err());
        assert!(ExperimentConfig::load(None, &["chain.n_links=12".into()]).is_err());
    }

    #[test]
    fn hash_ignores_key_order() {
        let a: ExperimentConfig =
            serde_json::from_str(r#"{"seed": 3, "dot": {"g_x": 2.1, "b_field_t": 0.8}}"#).unwrap();
        let b: ExperimentConfig =
            serde_json::from_str(r#"{"dot": {"b_field_t": 0.8, "g_x": 2.1}, "seed": 3}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig {
            seed: 4,
            ..a.clone()
        };
        assert_ne!(a.hash(), c.hash());
        let d = ExperimentConfig {
            output_dir: "elsewhere".into(),
            ..a.clone()
        };
        assert_eq!(a.hash(), d.hash());
    }
}
