//! Run configuration: a TOML file with input, candidate selection, the
//! experiment grid, and model settings.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::alignment::ClusteringId;
use crate::clustering::Algorithm;
use crate::error::{Error, Result};
use crate::gcn::GcnConfig;
use crate::saturation::VariantTag;
use crate::synth::SynthConfig;
use crate::training::TrainConfig;

/// Where the input graph comes from: an N-Triples file or the synthetic
/// generator. Exactly one must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub path: Option<PathBuf>,
    pub synth: Option<SynthConfig>,
}

/// How the match-candidate set S is selected: by IRI prefix or an explicit
/// list. Exactly one must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectConfig {
    pub prefix: Option<String>,
    pub list: Option<Vec<String>>,
}

fn default_khop() -> usize {
    3
}

fn default_thresholds() -> Vec<usize> {
    vec![10]
}

fn default_xi() -> f64 {
    crate::clustering::DEFAULT_XI
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub input: InputConfig,
    #[serde(default)]
    pub select: SelectConfig,
    pub variants: Vec<VariantTag>,
    pub clusterings: Vec<ClusteringId>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    /// Undirected neighborhood radius kept around the candidates; three
    /// hops is the receptive field of the three-layer encoder.
    #[serde(default = "default_khop")]
    pub khop: usize,
    #[serde(default = "default_xi")]
    pub optics_xi: f64,
    /// Minimum OPTICS cluster size; by default the active gold-cluster
    /// size threshold is used.
    #[serde(default)]
    pub optics_min_size: Option<usize>,
    #[serde(default)]
    pub gcn: GcnConfig,
    /// Per-cell training settings; the `seed` field is ignored in favor of
    /// seeds derived from the run seed and the cell coordinates.
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let config_err = |m: String| Err(Error::Config(m));
        match (&self.input.path, &self.input.synth) {
            (Some(_), Some(_)) => return config_err("input has both a path and a synth table".into()),
            (None, None) => return config_err("input needs either a path or a synth table".into()),
            _ => {}
        }
        if self.select.prefix.is_some() && self.select.list.is_some() {
            return config_err("select has both a prefix and a list".into());
        }
        if self.select.prefix.is_none() && self.select.list.is_none() && self.input.synth.is_none()
        {
            return config_err("select needs a prefix or a list for file input".into());
        }
        if self.variants.is_empty() {
            return config_err("at least one variant is required".into());
        }
        if self.clusterings.is_empty() {
            return config_err("at least one gold clustering is required".into());
        }
        if self.algorithms.is_empty() {
            return config_err("at least one clustering algorithm is required".into());
        }
        if self.thresholds.is_empty() {
            return config_err("at least one size threshold is required".into());
        }
        for &t in &self.thresholds {
            if ![10, 20, 50].contains(&t) {
                return config_err(format!("threshold {t} not in {{10, 20, 50}}"));
            }
        }
        let unique: BTreeSet<_> = self.variants.iter().collect();
        if unique.len() != self.variants.len() {
            return config_err("duplicate variants".into());
        }
        self.gcn.validate()?;
        if let Some(synth) = &self.input.synth {
            synth.validate()?;
        }
        Ok(())
    }

    /// A config for synthetic-default runs, used by examples and tests.
    pub fn synthetic_default(out: PathBuf) -> Self {
        RunConfig {
            seed: 42,
            out,
            input: InputConfig {
                path: None,
                synth: Some(SynthConfig::default()),
            },
            select: SelectConfig::default(),
            variants: vec![VariantTag::G0, VariantTag::G5],
            clusterings: vec![ClusteringId::C0],
            thresholds: vec![10],
            algorithms: vec![Algorithm::Ward, Algorithm::Single, Algorithm::Optics],
            khop: 3,
            optics_xi: crate::clustering::DEFAULT_XI,
            optics_min_size: None,
            gcn: GcnConfig::default(),
            train: TrainConfig::default(),
        }
    }

    /// Candidate prefix, defaulting to the synthetic namespace when the
    /// input is generated.
    pub fn selection(&self) -> SelectConfig {
        if self.select.prefix.is_none() && self.select.list.is_none() {
            SelectConfig {
                prefix: Some(crate::synth::RELATIONSHIP_PREFIX.to_string()),
                list: None,
            }
        } else {
            self.select.clone()
        }
    }
}

/// Parses and validates a TOML run configuration.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let config: RunConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

/// Stable sub-seed for one pipeline purpose (fold splitting, one cell's
/// training), derived from the run seed and a tag path.
pub fn derive_seed(master: u64, tags: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    for tag in tags {
        hasher.update([0u8]);
        hasher.update(tag.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let config = RunConfig::synthetic_default(PathBuf::from("out/x"));
        let text = toml::to_string(&config).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(back.variants, config.variants);
        assert_eq!(back.thresholds, config.thresholds);
    }

    #[test]
    fn validation_rejects_bad_grids() {
        let mut config = RunConfig::synthetic_default(PathBuf::from("out/x"));
        config.thresholds = vec![15];
        assert!(config.validate().is_err());
        let mut config = RunConfig::synthetic_default(PathBuf::from("out/x"));
        config.variants.clear();
        assert!(config.validate().is_err());
        let mut config = RunConfig::synthetic_default(PathBuf::from("out/x"));
        config.input.path = Some(PathBuf::from("x.nt"));
        assert!(config.validate().is_err());
    }

    #[test]
    fn derived_seeds_differ_by_tag() {
        let a = derive_seed(7, &["folds", "c0"]);
        let b = derive_seed(7, &["folds", "c1"]);
        let c = derive_seed(8, &["folds", "c0"]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, &["folds", "c0"]));
    }

    #[test]
    fn minimal_file_input_config_parses() {
        let text = r#"
            seed = 1
            out = "runs/demo"
            variants = ["g0"]
            clusterings = ["c0"]
            algorithms = ["single"]

            [input]
            path = "graph.nt"

            [select]
            prefix = "http://x/rel/"
        "#;
        let config: RunConfig = toml::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.khop, 3);
        assert_eq!(config.thresholds, vec![10]);
    }
}
