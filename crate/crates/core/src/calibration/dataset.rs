use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One reference measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    /// Model quantity to compare against, e.g. `motor_frequency`.
    pub quantity: String,
    /// Quantity-specific inputs with unit-suffixed keys.
    #[serde(default)]
    pub inputs: toml::Table,
    pub target: f64,
    pub unit: String,
    /// Acceptable relative error.
    pub tolerance: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDataset {
    pub name: String,
    pub citation: String,
    pub records: Vec<Record>,
}

impl ReferenceDataset {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("dataset.name", "must not be empty"));
        }
        if self.citation.trim().is_empty() {
            return Err(Error::validation(format!("{}.citation", self.name), "must not be empty"));
        }
        for (i, r) in self.records.iter().enumerate() {
            let field = |f: &str| format!("{}.records[{i}].{f}", self.name);
            if r.source.trim().is_empty() {
                return Err(Error::validation(field("source"), "every record needs a source citation"));
            }
            if !r.target.is_finite() {
                return Err(Error::validation(field("target"), "must be finite"));
            }
            if !(r.tolerance > 0.0) {
                return Err(Error::validation(field("tolerance"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let ds: Self = toml::from_str(text).map_err(|e| Error::Parse {
            context: "dataset".into(),
            message: e.to_string(),
        })?;
        ds.validate()?;
        Ok(ds)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&crate::io::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("dataset serializes")
    }
}

const BUNDLED: [(&str, &str); 6] = [
    ("voltage_frequency", include_str!("../../data/datasets/voltage_frequency.toml")),
    ("resonance_target", include_str!("../../data/datasets/resonance_target.toml")),
    ("thrust_ordering", include_str!("../../data/datasets/thrust_ordering.toml")),
    ("design_band", include_str!("../../data/datasets/design_band.toml")),
    ("locomotion_targets", include_str!("../../data/datasets/locomotion_targets.toml")),
    ("thrust_level", include_str!("../../data/datasets/thrust_level.toml")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

/// A dataset shipped with the crate.
pub fn bundled(name: &str) -> Result<ReferenceDataset> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no bundled dataset named `{name}`")))?;
    ReferenceDataset::from_toml_str(text)
}
