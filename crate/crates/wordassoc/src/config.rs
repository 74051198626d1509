//! Run configuration (TOML). Relative paths resolve against the directory
//! holding the config file.
//!
//! ```toml
//! out = "out"
//! specs = ["gender.toml", "religion.toml"]
//!
//! [data]
//! norms = "norms.tsv"
//! format = "trial"
//! vocabulary = "vocab.txt"
//! valence = "valence.tsv"
//! emotions = "nrc.tsv"
//!
//! [spread]
//! retention = 0.5
//!
//! [normalization]
//! emotions = "l1"
//!
//! [streams]
//! pairs = [["feminine", "forceful"]]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use wordassoc_core::{Approach, CostMode, Norm, SpreadParams};

use crate::error::{Error, Result};
use crate::ingest::NormFormat;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    #[serde(default = "yes")]
    pub cache: bool,
    #[serde(default)]
    pub specs: Vec<PathBuf>,
    pub data: DataConfig,
    #[serde(default)]
    pub spread: SpreadOverrides,
    #[serde(default)]
    pub normalization: NormConfig,
    #[serde(default)]
    pub streams: StreamConfig,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub norms: PathBuf,
    #[serde(default = "default_format")]
    pub format: String,
    pub vocabulary: Option<PathBuf>,
    pub valence: Option<PathBuf>,
    pub emotions: Option<PathBuf>,
    #[serde(default = "default_min_weight")]
    pub min_weight: u64,
}

fn default_format() -> String {
    "trial".into()
}

fn default_min_weight() -> u64 {
    2
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadOverrides {
    pub retention: Option<f64>,
    pub steps: Option<u32>,
    pub initial_activation: Option<f64>,
}

impl SpreadOverrides {
    /// Fills unset fields from the defaults for a network with `nodes`
    /// nodes and the given exact diameter. Returns the params and whether
    /// the step count was derived.
    pub fn resolve(&self, nodes: usize, diameter: u32) -> Result<(SpreadParams, bool)> {
        let derived = self.steps.is_none();
        let params = SpreadParams::new(
            self.retention.unwrap_or(SpreadParams::DEFAULT_RETENTION),
            self.steps.unwrap_or(2 * diameter.max(1)),
            self.initial_activation.unwrap_or(nodes as f64),
        )?;
        Ok((params, derived))
    }

    pub fn validate(&self) -> Result<()> {
        // Unset fields take valid placeholders, so only overrides can fail.
        self.resolve(1, 1)
            .map(|_| ())
            .map_err(|e| Error::Config(format!("spread: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub stereotypes: Norm,
    pub valence: Norm,
    pub emotions: Norm,
    /// Also report emotions under the other norm.
    pub emotion_variants: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            stereotypes: Norm::L2,
            valence: Norm::L2,
            emotions: Norm::L1,
            emotion_variants: true,
        }
    }
}

impl NormConfig {
    /// Norms to report for an approach, primary first.
    pub fn for_approach(&self, approach: Approach) -> Vec<Norm> {
        match approach {
            Approach::Stereotypes => vec![self.stereotypes],
            Approach::Valence => vec![self.valence],
            Approach::Emotions if self.emotion_variants => {
                let other = if self.emotions == Norm::L1 { Norm::L2 } else { Norm::L1 };
                vec![self.emotions, other]
            }
            Approach::Emotions => vec![self.emotions],
        }
    }

    pub fn override_all(&mut self, norm: Norm) {
        self.stereotypes = norm;
        self.valence = norm;
        self.emotions = norm;
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreamConfig {
    pub pairs: Vec<(String, String)>,
    pub cost_mode: CostMode,
    pub max_paths: usize,
}

impl Default for StreamConfig {
    fn default() -> Self {
        StreamConfig {
            pairs: Vec::new(),
            cost_mode: CostMode::InverseWeight,
            max_paths: wordassoc_core::stream::DEFAULT_MAX_PATHS,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.out = base.join(&cfg.out);
        cfg.specs = cfg.specs.iter().map(|p| base.join(p)).collect();
        let d = &mut cfg.data;
        d.norms = base.join(&d.norms);
        for p in [&mut d.vocabulary, &mut d.valence, &mut d.emotions].into_iter().flatten() {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn norm_format(&self) -> Result<NormFormat> {
        self.data.format.parse().map_err(Error::Config)
    }

    /// Checks what can be checked before any data is read.
    pub fn validate(&self) -> Result<()> {
        self.norm_format()?;
        if self.data.min_weight == 0 {
            return Err(Error::Config("data.min_weight must be at least 1".into()));
        }
        let d = &self.data;
        let inputs = std::iter::once(&d.norms)
            .chain(&self.specs)
            .chain([&d.vocabulary, &d.valence, &d.emotions].into_iter().flatten());
        for path in inputs {
            if !path.is_file() {
                return Err(Error::Config(format!("input not found: {}", path.display())));
            }
        }
        self.spread.validate()?;
        if self.streams.max_paths == 0 {
            return Err(Error::Config("streams.max_paths must be at least 1".into()));
        }
        if self.out.exists() && !self.out.is_dir() {
            return Err(Error::Config(format!("output path {} is not a directory", self.out.display())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_standard_setup() {
        let cfg = RunConfig::parse("out = \"o\"\n[data]\nnorms = \"n.tsv\"\n", Path::new("/base")).unwrap();
        assert_eq!(cfg.out, PathBuf::from("/base/o"));
        assert_eq!(cfg.data.norms, PathBuf::from("/base/n.tsv"));
        assert_eq!(cfg.data.min_weight, 2);
        assert!(cfg.cache);
        assert_eq!(cfg.normalization.for_approach(Approach::Stereotypes), vec![Norm::L2]);
        assert_eq!(cfg.normalization.for_approach(Approach::Emotions), vec![Norm::L1, Norm::L2]);
        let (params, derived) = cfg.spread.resolve(100, 7).unwrap();
        assert!(derived);
        assert_eq!((params.retention, params.steps, params.initial_activation), (0.5, 14, 100.0));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("out = \"o\"\ncolour = 1\n[data]\nnorms = \"n\"\n", Path::new(".")).is_err());
        let cfg = RunConfig::parse("out = \"o\"\n[data]\nnorms = \"n\"\n[spread]\nretention = 1.5\n", Path::new(".")).unwrap();
        assert!(matches!(cfg.spread.validate(), Err(Error::Config(_))));
        assert!(RunConfig::parse("out = \"o\"\n[data]\nnorms = \"n\"\n[normalization]\nemotions = \"l3\"\n", Path::new(".")).is_err());
    }
}
