//! Toolkit configuration: every model component plus calibration flags,
//! stored as TOML with unit-suffixed keys. Internal values are SI.

use std::collections::BTreeSet;
use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::locomotion::{FinRole, FishBody};
use crate::modal::{FlexibleFinGeometry, FluidProperties, ModalConfig, RigidPartGeometry};
use crate::motor::MotorSpec;
use crate::thrust::{FinAssembly, StreamingCoefficients};

/// Canonical fitted parameters shipped with the crate.
pub const CALIBRATED_PARAMS: &str = include_str!("../data/calibrated.params");

/// Current parameters-file format version.
pub const PARAMS_VERSION: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ToolkitConfig {
    pub motor: MotorSpec,
    pub rigid: RigidPartGeometry,
    pub fin: FlexibleFinGeometry,
    pub fluid: FluidProperties,
    pub modal: ModalConfig,
    pub streaming: StreamingCoefficients,
    pub body: FishBody,
    /// Dotted file keys whose values are placeholders rather than measured
    /// or fitted.
    pub uncalibrated: BTreeSet<String>,
}

const SECTIONS: [&str; 7] = ["motor", "rigid", "fin", "fluid", "modal", "streaming", "body"];

/// Scalar file keys and their factor to SI.
const SCALAR_KEYS: &[(&str, f64)] = &[
    ("motor.eccentric_mass_g", 1e-3),
    ("motor.eccentricity_mm", 1e-3),
    ("motor.rated_voltage_v", 1.0),
    ("motor.voltage_min_v", 1.0),
    ("motor.voltage_max_v", 1.0),
    ("rigid.rod_length_mm", 1e-3),
    ("rigid.rod_height_mm", 1e-3),
    ("rigid.rod_width_mm", 1e-3),
    ("rigid.housing_length_mm", 1e-3),
    ("rigid.cap_length_mm", 1e-3),
    ("rigid.housing_diameter_mm", 1e-3),
    ("rigid.rod_elastic_modulus_gpa", 1e9),
    ("rigid.rod_density_kg_per_m3", 1.0),
    ("rigid.rigid_part_mass_g", 1e-3),
    ("rigid.joint_stiffness_per_area_pa_per_m", 1.0),
    ("fin.fin_length_mm", 1e-3),
    ("fin.thickness_um", 1e-6),
    ("fin.clamped_width_mm", 1e-3),
    ("fin.elastic_modulus_gpa", 1e9),
    ("fin.density_kg_per_m3", 1.0),
    ("fin.poisson_ratio", 1.0),
    ("fluid.density_kg_per_m3", 1.0),
    ("fluid.dynamic_viscosity_pa_s", 1.0),
    ("modal.rod_mass_participation", 1.0),
    ("modal.fin_modal_mass_fraction", 1.0),
    ("modal.added_mass_coefficient", 1.0),
    ("modal.damping_ratio_x", 1.0),
    ("modal.damping_ratio_y", 1.0),
    ("modal.fin_damping_ratio", 1.0),
    ("modal.fin_root_extension_mm", 1e-3),
    ("streaming.velocity_coefficient_m2", 1.0),
    ("streaming.thrust_coefficient", 1.0),
    ("body.mass_g", 1e-3),
    ("body.body_length_mm", 1e-3),
    ("body.body_width_mm", 1e-3),
    ("body.added_mass_surge_g", 1e-3),
    ("body.added_mass_sway_g", 1e-3),
    ("body.yaw_inertia_kg_m2", 1.0),
    ("body.added_yaw_inertia_kg_m2", 1.0),
    ("body.drag_area_surge_m2", 1.0),
    ("body.drag_area_sway_m2", 1.0),
    ("body.yaw_drag_n_m_s2", 1.0),
    ("body.yaw_damping_speed_n_s2", 1.0),
    ("body.spin_up_tau_s", 1.0),
    ("body.fins.left_pectoral.x_mm", 1e-3),
    ("body.fins.left_pectoral.y_mm", 1e-3),
    ("body.fins.left_pectoral.direction_deg", std::f64::consts::PI / 180.0),
    ("body.fins.left_pectoral.thrust_mn", 1e-3),
    ("body.fins.right_pectoral.x_mm", 1e-3),
    ("body.fins.right_pectoral.y_mm", 1e-3),
    ("body.fins.right_pectoral.direction_deg", std::f64::consts::PI / 180.0),
    ("body.fins.right_pectoral.thrust_mn", 1e-3),
    ("body.fins.caudal.x_mm", 1e-3),
    ("body.fins.caudal.y_mm", 1e-3),
    ("body.fins.caudal.direction_deg", std::f64::consts::PI / 180.0),
    ("body.fins.caudal.thrust_mn", 1e-3),
];

const VOLTAGE_POINTS_KEY: &str = "motor.voltage_frequency_points_v_hz";

/// Keys that move both pectoral fins together, keeping them mirror images.
/// They are accepted by `get`/`set` but never written to files.
const ALIAS_KEYS: &[(&str, f64)] = &[("body.pectoral.x_mm", 1e-3), ("body.pectoral.y_mm", 1e-3)];

/// Defaults that are placeholders until fitted or measured.
const DEFAULT_UNCALIBRATED: &[&str] = &[
    "motor.eccentric_mass_g",
    "motor.eccentricity_mm",
    "rigid.rod_elastic_modulus_gpa",
    "rigid.rod_density_kg_per_m3",
    "rigid.rigid_part_mass_g",
    "rigid.joint_stiffness_per_area_pa_per_m",
    "fin.clamped_width_mm",
    "fin.elastic_modulus_gpa",
    "modal.added_mass_coefficient",
    "modal.damping_ratio_x",
    "modal.damping_ratio_y",
    "modal.fin_damping_ratio",
    "modal.fin_root_extension_mm",
    "streaming.velocity_coefficient_m2",
    "streaming.thrust_coefficient",
    "body.added_mass_surge_g",
    "body.added_mass_sway_g",
    "body.yaw_inertia_kg_m2",
    "body.added_yaw_inertia_kg_m2",
    "body.drag_area_surge_m2",
    "body.drag_area_sway_m2",
    "body.yaw_drag_n_m_s2",
    "body.yaw_damping_speed_n_s2",
    "body.fins.left_pectoral.x_mm",
    "body.fins.left_pectoral.y_mm",
    "body.fins.left_pectoral.thrust_mn",
    "body.fins.right_pectoral.x_mm",
    "body.fins.right_pectoral.y_mm",
    "body.fins.right_pectoral.thrust_mn",
    "body.fins.caudal.x_mm",
    "body.fins.caudal.thrust_mn",
];

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            motor: MotorSpec::default(),
            rigid: RigidPartGeometry::default(),
            fin: FlexibleFinGeometry::default(),
            fluid: FluidProperties::WATER,
            modal: ModalConfig::default(),
            streaming: StreamingCoefficients::default(),
            body: FishBody::default(),
            uncalibrated: DEFAULT_UNCALIBRATED.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn unknown_key(key: &str) -> Error {
    Error::Config(format!("unknown parameter key `{key}`"))
}

fn scale_of(key: &str) -> Option<f64> {
    SCALAR_KEYS
        .iter()
        .chain(ALIAS_KEYS)
        .find(|(k, _)| *k == key)
        .map(|(_, s)| *s)
}

fn fin_role(name: &str) -> Option<FinRole> {
    FinRole::ALL.into_iter().find(|r| r.name() == name)
}

impl ToolkitConfig {
    /// Defaults overlaid with [`CALIBRATED_PARAMS`].
    pub fn calibrated() -> Self {
        let mut cfg = Self::default();
        cfg.apply_params_str(CALIBRATED_PARAMS)
            .expect("shipped parameters file is valid");
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.motor.validate()?;
        self.rigid.validate()?;
        self.fin.validate()?;
        self.fluid.validate()?;
        self.modal.validate()?;
        self.streaming.validate()?;
        self.body.validate()
    }

    pub fn assembly(&self) -> FinAssembly<'_> {
        FinAssembly {
            motor: &self.motor,
            rigid: &self.rigid,
            fin: &self.fin,
            fluid: &self.fluid,
            modal: &self.modal,
            coeffs: &self.streaming,
        }
    }

    /// Every scalar key that appears in files.
    pub fn file_keys() -> impl Iterator<Item = &'static str> {
        SCALAR_KEYS.iter().map(|(k, _)| *k)
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        let (section, field) = key.split_once('.')?;
        Some(match (section, field) {
            ("motor", "eccentric_mass_g") => &mut self.motor.eccentric_mass,
            ("motor", "eccentricity_mm") => &mut self.motor.eccentricity,
            ("motor", "rated_voltage_v") => &mut self.motor.rated_voltage,
            ("motor", "voltage_min_v") => &mut self.motor.voltage_range.0,
            ("motor", "voltage_max_v") => &mut self.motor.voltage_range.1,
            ("rigid", "rod_length_mm") => &mut self.rigid.rod_length,
            ("rigid", "rod_height_mm") => &mut self.rigid.rod_height,
            ("rigid", "rod_width_mm") => &mut self.rigid.rod_width,
            ("rigid", "housing_length_mm") => &mut self.rigid.housing_length,
            ("rigid", "cap_length_mm") => &mut self.rigid.cap_length,
            ("rigid", "housing_diameter_mm") => &mut self.rigid.housing_diameter,
            ("rigid", "rod_elastic_modulus_gpa") => &mut self.rigid.rod_elastic_modulus,
            ("rigid", "rod_density_kg_per_m3") => &mut self.rigid.rod_density,
            ("rigid", "rigid_part_mass_g") => &mut self.rigid.rigid_part_mass,
            ("rigid", "joint_stiffness_per_area_pa_per_m") => &mut self.rigid.joint_stiffness_per_area,
            ("fin", "fin_length_mm") => &mut self.fin.fin_length,
            ("fin", "thickness_um") => &mut self.fin.thickness,
            ("fin", "clamped_width_mm") => &mut self.fin.clamped_width,
            ("fin", "elastic_modulus_gpa") => &mut self.fin.elastic_modulus,
            ("fin", "density_kg_per_m3") => &mut self.fin.density,
            ("fin", "poisson_ratio") => &mut self.fin.poisson_ratio,
            ("fluid", "density_kg_per_m3") => &mut self.fluid.density,
            ("fluid", "dynamic_viscosity_pa_s") => &mut self.fluid.dynamic_viscosity,
            ("modal", "rod_mass_participation") => &mut self.modal.rod_mass_participation,
            ("modal", "fin_modal_mass_fraction") => &mut self.modal.fin_modal_mass_fraction,
            ("modal", "added_mass_coefficient") => &mut self.modal.added_mass_coefficient,
            ("modal", "damping_ratio_x") => &mut self.modal.damping_ratio_x,
            ("modal", "damping_ratio_y") => &mut self.modal.damping_ratio_y,
            ("modal", "fin_damping_ratio") => &mut self.modal.fin_damping_ratio,
            ("modal", "fin_root_extension_mm") => &mut self.modal.fin_root_extension,
            ("streaming", "velocity_coefficient_m2") => &mut self.streaming.velocity,
            ("streaming", "thrust_coefficient") => &mut self.streaming.thrust,
            ("body", "mass_g") => &mut self.body.mass,
            ("body", "body_length_mm") => &mut self.body.body_length,
            ("body", "body_width_mm") => &mut self.body.body_width,
            ("body", "added_mass_surge_g") => &mut self.body.added_mass_surge,
            ("body", "added_mass_sway_g") => &mut self.body.added_mass_sway,
            ("body", "yaw_inertia_kg_m2") => &mut self.body.yaw_inertia,
            ("body", "added_yaw_inertia_kg_m2") => &mut self.body.added_yaw_inertia,
            ("body", "drag_area_surge_m2") => &mut self.body.drag_area_surge,
            ("body", "drag_area_sway_m2") => &mut self.body.drag_area_sway,
            ("body", "yaw_drag_n_m_s2") => &mut self.body.yaw_drag,
            ("body", "yaw_damping_speed_n_s2") => &mut self.body.yaw_damping_speed,
            ("body", "spin_up_tau_s") => &mut self.body.spin_up_tau,
            ("body", rest) => {
                let (role, attr) = rest.strip_prefix("fins.")?.split_once('.')?;
                let fin = self.body.fin_mut(fin_role(role)?);
                match attr {
                    "x_mm" => &mut fin.position.0,
                    "y_mm" => &mut fin.position.1,
                    "direction_deg" => &mut fin.thrust_direction,
                    "thrust_mn" => &mut fin.thrust_magnitude,
                    _ => return None,
                }
            }
            _ => return None,
        })
    }

    /// Value of a dotted file key, in the key's units.
    pub fn get(&self, key: &str) -> Result<f64> {
        let scale = scale_of(key).ok_or_else(|| unknown_key(key))?;
        let si = match key {
            "body.pectoral.x_mm" => self.body.fin(FinRole::LeftPectoral).position.0,
            "body.pectoral.y_mm" => self.body.fin(FinRole::LeftPectoral).position.1,
            _ => *self.clone().slot(key).ok_or_else(|| unknown_key(key))?,
        };
        Ok(si / scale)
    }

    /// Set a dotted file key, `value` in the key's units.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let scale = scale_of(key).ok_or_else(|| unknown_key(key))?;
        let si = value * scale;
        match key {
            "body.pectoral.x_mm" => {
                self.body.fin_mut(FinRole::LeftPectoral).position.0 = si;
                self.body.fin_mut(FinRole::RightPectoral).position.0 = si;
            }
            "body.pectoral.y_mm" => {
                self.body.fin_mut(FinRole::LeftPectoral).position.1 = si;
                self.body.fin_mut(FinRole::RightPectoral).position.1 = -si;
            }
            _ => *self.slot(key).ok_or_else(|| unknown_key(key))? = si,
        }
        if key == "fluid.density_kg_per_m3" {
            self.body.fluid_density = si;
        }
        Ok(())
    }

    /// Render the full configuration as TOML.
    pub fn to_table(&self) -> Table {
        let mut root = Table::new();
        for key in Self::file_keys() {
            let value = self.get(key).expect("registered key");
            insert_dotted(&mut root, key, Value::Float(value));
        }
        let points = self
            .motor
            .voltage_freq_points
            .iter()
            .map(|&(v, f)| Value::Array(vec![Value::Float(v), Value::Float(f)]))
            .collect();
        insert_dotted(&mut root, VOLTAGE_POINTS_KEY, Value::Array(points));
        for section in SECTIONS {
            let prefix = format!("{section}.");
            let flags: Vec<Value> = self
                .uncalibrated
                .iter()
                .filter_map(|k| k.strip_prefix(&prefix))
                .map(|k| Value::String(k.to_string()))
                .collect();
            insert_dotted(&mut root, &format!("{section}.uncalibrated"), Value::Array(flags));
        }
        root
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_table()).expect("config serializes")
    }

    /// Apply the keys present in `table` on top of `self`.
    ///
    /// Keys set by the table are treated as calibrated unless the table's
    /// own `uncalibrated` lists name them.
    pub fn apply_table(&mut self, table: &Table) -> Result<()> {
        let mut flat = Vec::new();
        flatten("", table, &mut flat)?;
        let mut flagged = BTreeSet::new();
        for (key, value) in flat {
            if let Some(section) = key.strip_suffix(".uncalibrated") {
                let list = value
                    .as_array()
                    .ok_or_else(|| Error::Config(format!("`{key}` must be an array of key names")))?;
                for item in list {
                    let name = item
                        .as_str()
                        .ok_or_else(|| Error::Config(format!("`{key}` entries must be strings")))?;
                    let full = format!("{section}.{name}");
                    if scale_of(&full).is_none() {
                        return Err(Error::Config(format!("`{key}` names unknown key `{name}`")));
                    }
                    flagged.insert(full);
                }
                continue;
            }
            if key == VOLTAGE_POINTS_KEY {
                self.motor.voltage_freq_points = parse_points(&value)?;
                continue;
            }
            if key == "version" {
                match value.as_integer() {
                    Some(PARAMS_VERSION) => continue,
                    _ => return Err(Error::Config(format!("unsupported parameters version {value}"))),
                }
            }
            let number = match value {
                Value::Float(f) => f,
                Value::Integer(i) => i as f64,
                other => return Err(Error::Config(format!("`{key}` must be a number, got {other}"))),
            };
            if !SCALAR_KEYS.iter().any(|(k, _)| *k == key) {
                return Err(unknown_key(&key));
            }
            self.set(&key, number)?;
            self.uncalibrated.remove(&key);
        }
        self.uncalibrated.extend(flagged);
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_toml_str(text, "config")?;
        Ok(cfg)
    }

    fn apply_toml_str(&mut self, text: &str, context: &str) -> Result<()> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?;
        self.apply_table(&table)?;
        self.validate()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_toml_str(&crate::io::read_to_string(path)?, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Overlay a parameters file.
    pub fn apply_params_file(&mut self, path: &Path) -> Result<()> {
        let text = crate::io::read_to_string(path)?;
        self.apply_toml_str(&text, &path.display().to_string())
    }

    pub fn apply_params_str(&mut self, text: &str) -> Result<()> {
        self.apply_toml_str(text, "parameters")
    }

    /// Parameters file holding only `keys`, with a version stamp.
    pub fn params_table(&self, keys: &[&str]) -> Result<Table> {
        let mut root = Table::new();
        root.insert("version".into(), Value::Integer(PARAMS_VERSION));
        let mut expanded = Vec::new();
        for key in keys {
            match *key {
                "body.pectoral.x_mm" => expanded.extend([
                    "body.fins.left_pectoral.x_mm",
                    "body.fins.right_pectoral.x_mm",
                ]),
                "body.pectoral.y_mm" => expanded.extend([
                    "body.fins.left_pectoral.y_mm",
                    "body.fins.right_pectoral.y_mm",
                ]),
                k => expanded.push(k),
            }
        }
        for key in expanded {
            insert_dotted(&mut root, key, Value::Float(self.get(key)?));
        }
        Ok(root)
    }
}

fn insert_dotted(root: &mut Table, key: &str, value: Value) {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("non-empty key");
    let mut table = root;
    for part in parts {
        table = table
            .entry(part)
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("section is a table");
    }
    table.insert(leaf.to_string(), value);
}

fn flatten(prefix: &str, table: &Table, out: &mut Vec<(String, Value)>) -> Result<()> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out)?,
            other => out.push((key, other.clone())),
        }
    }
    Ok(())
}

fn parse_points(value: &Value) -> Result<Vec<(f64, f64)>> {
    let bad = || Error::Config(format!("`{VOLTAGE_POINTS_KEY}` must be a list of [volts, hertz] pairs"));
    let num = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
    value
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|pair| match pair.as_array().map(|a| a.as_slice()) {
            Some([v, f]) => Ok((num(v).ok_or_else(bad)?, num(f).ok_or_else(bad)?)),
            _ => Err(bad()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_toml() {
        let mut cfg = ToolkitConfig::default();
        cfg.set("rigid.rod_length_mm", 12.5).unwrap();
        cfg.set("body.fins.caudal.thrust_mn", 4.25).unwrap();
        let back = ToolkitConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn units_are_converted() {
        let cfg = ToolkitConfig::from_toml_str("[rigid]\nrod_width_mm = 0.5\n").unwrap();
        assert!((cfg.rigid.rod_width - 0.5e-3).abs() < 1e-18);
        assert!((cfg.get("rigid.rod_width_mm").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_width_names_field() {
        let err = ToolkitConfig::from_toml_str("[rigid]\nrod_width_mm = 0\n").unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("rod_width"), "{err}");
    }

    #[test]
    fn unknown_key_is_config_error() {
        let err = ToolkitConfig::from_toml_str("[rigid]\nrod_colour = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        assert!(ToolkitConfig::default().get("nope").is_err());
    }

    #[test]
    fn every_default_flag_is_a_file_key() {
        let cfg = ToolkitConfig::default();
        for key in &cfg.uncalibrated {
            assert!(ToolkitConfig::file_keys().any(|k| k == key), "{key}");
        }
    }

    #[test]
    fn params_clear_flags() {
        let mut cfg = ToolkitConfig::default();
        assert!(cfg.uncalibrated.contains("rigid.joint_stiffness_per_area_pa_per_m"));
        cfg.apply_params_str("version = 1\n[rigid]\njoint_stiffness_per_area_pa_per_m = 2e8\n")
            .unwrap();
        assert!(!cfg.uncalibrated.contains("rigid.joint_stiffness_per_area_pa_per_m"));
        assert_eq!(cfg.rigid.joint_stiffness_per_area, 2e8);
        assert!(cfg.apply_params_str("version = 7\n").is_err());
    }

    #[test]
    fn pectoral_alias_keeps_symmetry() {
        let mut cfg = ToolkitConfig::default();
        cfg.set("body.pectoral.y_mm", 18.0).unwrap();
        cfg.set("body.pectoral.x_mm", -2.0).unwrap();
        assert_eq!(cfg.body.fin(FinRole::RightPectoral).position, (-2.0 * 1e-3, -(18.0 * 1e-3)));
        assert!((cfg.get("body.pectoral.y_mm").unwrap() - 18.0).abs() < 1e-12);
        let table = cfg.params_table(&["body.pectoral.y_mm"]).unwrap();
        assert!(table["body"]["fins"]["right_pectoral"]["y_mm"].as_float().unwrap() < 0.0);
    }

    #[test]
    fn shipped_params_load() {
        let cfg = ToolkitConfig::calibrated();
        assert!(!cfg.uncalibrated.contains("body.fins.caudal.thrust_mn"));
        assert!(cfg.uncalibrated.contains("motor.eccentric_mass_g"));
    }

    #[test]
    fn fluid_density_feeds_body() {
        let mut cfg = ToolkitConfig::default();
        cfg.set("fluid.density_kg_per_m3", 1025.0).unwrap();
        assert_eq!(cfg.body.fluid_density, 1025.0);
    }
}
