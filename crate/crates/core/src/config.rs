//! Run configuration shared by the command-line entry points and embedded in
//! every report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::Mode;
use crate::error::{Error, Result};
use crate::features::{short_hash, FeatureConfig};
use crate::forest::ForestConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Train on Home tasks only.
    HomeOnly,
    /// Train on Home and HomeLab tasks.
    BothDatasets,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::HomeOnly => "home_only",
            Condition::BothDatasets => "both_datasets",
        }
    }
}

impl std::str::FromStr for Condition {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "home_only" | "home" => Ok(Condition::HomeOnly),
            "both_datasets" | "both" => Ok(Condition::BothDatasets),
            other => Err(format!("unknown condition {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// Random forest trained per fold on the extracted features.
    Forest,
    /// Decisions of an external window-level model read from a file.
    ExternalWindows,
    /// Contact states of an external hand-object detector, used zero-shot.
    ExternalContacts,
}

impl ModelSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelSource::Forest => "forest",
            ModelSource::ExternalWindows => "external_windows",
            ModelSource::ExternalContacts => "external_contacts",
        }
    }
}

impl std::str::FromStr for ModelSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forest" => Ok(ModelSource::Forest),
            "external_windows" | "windows" => Ok(ModelSource::ExternalWindows),
            "external_contacts" | "contacts" => Ok(ModelSource::ExternalContacts),
            other => Err(format!("unknown model source {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub mode: Mode,
    pub condition: Condition,
    pub model_source: ModelSource,
    #[serde(default)]
    pub features: FeatureConfig,
    pub forest: ForestConfig,
    pub seed: u64,
    /// Window predictions file for `external_windows`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<PathBuf>,
    /// Where reports and the feature cache go. Not part of the fingerprint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Reuse a feature cache with a matching hash. Not part of the fingerprint.
    #[serde(default = "yes")]
    pub use_cache: bool,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn new(manifest: &Path, mode: Mode, condition: Condition, model_source: ModelSource) -> Self {
        RunConfig {
            manifest: manifest.to_path_buf(),
            mode,
            condition,
            model_source,
            features: FeatureConfig::default(),
            forest: ForestConfig::for_mode(mode),
            seed: 0,
            windows: None,
            output_dir: None,
            use_cache: true,
        }
    }

    /// The configuration with output-only fields cleared; this is what
    /// reports embed and what the hash covers.
    pub fn reproducible(&self) -> RunConfig {
        RunConfig {
            output_dir: None,
            use_cache: true,
            ..self.clone()
        }
    }

    pub fn hash(&self) -> String {
        short_hash(&serde_json::to_string(&self.reproducible()).expect("config serializes"))
    }

    /// Forest parameters with the run seed applied.
    pub fn forest_config(&self) -> ForestConfig {
        ForestConfig {
            seed: self.seed,
            ..self.forest.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        if self.model_source == ModelSource::ExternalWindows && self.windows.is_none() {
            return Err(Error::invalid("model source external_windows needs a windows file"));
        }
        if self.model_source == ModelSource::ExternalContacts && self.mode == Mode::Role {
            return Err(Error::invalid(
                "contact states carry no hand-role information; external_contacts supports interaction mode only",
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str, location: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::parse(location, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_fields() {
        let mut a = RunConfig::new(
            Path::new("m.json"),
            Mode::Interaction,
            Condition::HomeOnly,
            ModelSource::Forest,
        );
        let h = a.hash();
        a.output_dir = Some("elsewhere".into());
        a.use_cache = false;
        assert_eq!(a.hash(), h);
        a.seed = 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn json_round_trip() {
        let a = RunConfig::new(
            Path::new("m.json"),
            Mode::Role,
            Condition::BothDatasets,
            ModelSource::Forest,
        );
        assert_eq!(a.forest.class_weight_ratio, 20.0);
        let b = RunConfig::from_json(&a.to_json(), "cfg").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn contacts_in_role_mode_rejected() {
        let a = RunConfig::new(
            Path::new("m.json"),
            Mode::Role,
            Condition::HomeOnly,
            ModelSource::ExternalContacts,
        );
        assert!(a.validate().is_err());
        let w = RunConfig::new(
            Path::new("m.json"),
            Mode::Interaction,
            Condition::HomeOnly,
            ModelSource::ExternalWindows,
        );
        assert!(w.validate().is_err());
    }
}
