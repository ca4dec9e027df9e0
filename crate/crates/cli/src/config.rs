//! Run configuration: one TOML file drives every stage. Unknown keys are
//! fatal. The effective config (after CLI overrides) is stored in the
//! output directory and hashed; later stages verify the hash before
//! trusting earlier outputs.

use anyhow::{bail, Context, Result};
use patval::corpus::{CorpusFormat, IpcLevel, LabelPolicy};
use patval::indicators::{EmbeddingSource, FieldConfig};
use patval::models::{
    BoostParams, FamilyParams, ForestParams, LogisticParams, MlpParams, ModelSpec,
};
use patval::screening::{GridEntry, SelectionPolicy};
use patval::seed;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub corpus: CorpusSection,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub labels: LabelSection,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub screening: ScreeningSection,
    #[serde(default)]
    pub attribution: AttributionSection,
    #[serde(default)]
    pub grid: GridSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub path: PathBuf,
    pub format: CorpusFormat,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSection {
    pub focal_field: String,
    pub ipc_level: IpcLevel,
    /// "lexical-fallback", or a path to a unit-vector embedding file.
    pub embedding_file: Option<PathBuf>,
}

impl Default for FieldSection {
    fn default() -> Self {
        FieldSection {
            focal_field: "H01L".to_string(),
            ipc_level: IpcLevel::Subclass,
            embedding_file: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelSection {
    pub nvp_lifetime_years: u32,
}

impl Default for LabelSection {
    fn default() -> Self {
        LabelSection {
            nvp_lifetime_years: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvSection {
    pub k: usize,
    pub resample: bool,
    pub ece_bins: usize,
    pub threshold: f64,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            k: 10,
            resample: true,
            ece_bins: 10,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScreeningSection {
    pub f1_floor: f64,
    pub selection_policy: SelectionPolicy,
}

impl Default for ScreeningSection {
    fn default() -> Self {
        ScreeningSection {
            f1_floor: 0.9,
            selection_policy: SelectionPolicy::MinEce,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AttributionSection {
    /// "exact" or "sampled".
    pub mode: AttributionMode,
    pub n_permutations: usize,
    pub background_size: usize,
    /// Rows to attribute; absent means every labeled row.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_sample: Option<usize>,
    /// Feature-count cap for exact mode.
    pub max_exact_features: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributionMode {
    Exact,
    Sampled,
}

impl Default for AttributionSection {
    fn default() -> Self {
        AttributionSection {
            mode: AttributionMode::Sampled,
            n_permutations: 30,
            background_size: 100,
            instance_sample: Some(300),
            max_exact_features: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// "default16" ships four variants per family; "explicit" uses
    /// `models`.
    pub preset: GridPreset,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<GridModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPreset {
    Default16,
    Explicit,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            preset: GridPreset::Default16,
            models: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridModel {
    pub id: String,
    #[serde(flatten)]
    pub params: FamilyParams,
}

// Hand-rolled: the TOML deserializer cannot drive a flattened internally
// tagged enum, so the table goes through a JSON value first. Unknown keys
// stay fatal via a reserialize-and-compare check (the tagged enum would
// otherwise swallow them).
impl<'de> serde::Deserialize<'de> for GridModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let mut value = serde_json::Value::deserialize(d)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| D::Error::custom("grid model must be a table"))?;
        let id = match obj.remove("id") {
            Some(serde_json::Value::String(s)) => s,
            _ => return Err(D::Error::custom("grid model needs a string `id`")),
        };
        let params: FamilyParams =
            serde_json::from_value(serde_json::Value::Object(obj.clone()))
                .map_err(|e| D::Error::custom(format!("grid model {id}: {e}")))?;
        let known = serde_json::to_value(&params)
            .map_err(|e| D::Error::custom(format!("grid model {id}: {e}")))?;
        let known = known.as_object().expect("tagged enum serializes to a map");
        for key in obj.keys() {
            if !known.contains_key(key) {
                return Err(D::Error::custom(format!(
                    "grid model {id}: unknown field `{key}`"
                )));
            }
        }
        Ok(GridModel { id, params })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cv.k < 2 {
            bail!("cv.k must be at least 2");
        }
        if self.cv.ece_bins == 0 {
            bail!("cv.ece_bins must be at least 1");
        }
        if !(self.cv.threshold > 0.0 && self.cv.threshold < 1.0) {
            bail!("cv.threshold must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.screening.f1_floor) {
            bail!("screening.f1_floor must lie in [0, 1]");
        }
        if self.attribution.n_permutations == 0 || self.attribution.background_size == 0 {
            bail!("attribution budgets must be positive");
        }
        self.field_config().validate()?;
        if self.grid.preset == GridPreset::Explicit && self.grid.models.is_empty() {
            bail!("grid.preset = \"explicit\" requires at least one [[grid.models]] entry");
        }
        if self.grid.preset == GridPreset::Default16 && !self.grid.models.is_empty() {
            bail!("grid.models entries require grid.preset = \"explicit\"");
        }
        for model in &self.grid.models {
            ModelSpec {
                seed: 0,
                params: model.params.clone(),
            }
            .validate()?;
        }
        Ok(())
    }

    pub fn field_config(&self) -> FieldConfig {
        FieldConfig {
            focal_field: self.field.focal_field.clone(),
            ipc_level: self.field.ipc_level,
            embedding_source: match &self.field.embedding_file {
                Some(path) => EmbeddingSource::ExternalFile { path: path.clone() },
                None => EmbeddingSource::LexicalFallback,
            },
        }
    }

    pub fn label_policy(&self) -> LabelPolicy {
        LabelPolicy {
            nvp_lifetime_years: self.labels.nvp_lifetime_years,
        }
    }

    /// The model grid with per-entry seeds derived from the run seed.
    pub fn grid_entries(&self) -> Vec<GridEntry> {
        let models: Vec<GridModel> = match self.grid.preset {
            GridPreset::Explicit => self.grid.models.clone(),
            GridPreset::Default16 => default16(),
        };
        models
            .into_iter()
            .map(|m| GridEntry {
                spec: ModelSpec {
                    seed: seed::derive(self.seed, &format!("grid/{}", m.id)),
                    params: m.params,
                },
                id: m.id,
            })
            .collect()
    }

    /// Canonical TOML for storage: the output directory is run-location
    /// metadata and is stripped so reruns into different directories stay
    /// byte-identical.
    pub fn canonical_toml(&self) -> Result<String> {
        let mut stored = self.clone();
        stored.output_dir = None;
        toml::to_string(&stored).context("serializing effective config")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Four variants per family, mirroring the published grid's shape: forest
/// tree/depth variants, ridge/elastic-net regressions, node/dropout
/// network variants, and estimator-count boosters.
fn default16() -> Vec<GridModel> {
    let rf = |n_trees, max_depth| {
        FamilyParams::Rf(ForestParams {
            n_trees,
            max_depth,
            min_leaf: 1,
            features_per_split: None,
        })
    };
    let lr = |alpha, lambda, epochs, learning_rate| {
        FamilyParams::Lr(LogisticParams {
            alpha,
            lambda,
            epochs,
            learning_rate,
        })
    };
    let nn = |hidden, dropout| {
        FamilyParams::Nn(MlpParams {
            hidden,
            dropout,
            epochs: 60,
            learning_rate: 0.005,
            batch_size: 32,
        })
    };
    let gbt = |n_estimators, max_depth| {
        FamilyParams::Gbt(BoostParams {
            n_estimators,
            max_depth,
            learning_rate: 0.3,
            l1: 0.0,
            l2: 1.0,
            min_split_gain: 0.0,
        })
    };
    vec![
        GridModel { id: "rf1".into(), params: rf(50, 20) },
        GridModel { id: "rf2".into(), params: rf(50, 15) },
        GridModel { id: "rf3".into(), params: rf(40, 10) },
        GridModel { id: "rf4".into(), params: rf(20, 10) },
        GridModel { id: "lr1".into(), params: lr(0.0, 0.0081, 36, 0.5) },
        GridModel { id: "lr2".into(), params: lr(0.0, 0.0081, 36, 0.1) },
        GridModel { id: "lr3".into(), params: lr(0.5, 0.0062, 32, 0.5) },
        GridModel { id: "lr4".into(), params: lr(0.5, 0.0047, 33, 0.5) },
        GridModel { id: "nn1".into(), params: nn(100, 0.1) },
        GridModel { id: "nn2".into(), params: nn(100, 0.0) },
        GridModel { id: "nn3".into(), params: nn(50, 0.4) },
        GridModel { id: "nn4".into(), params: nn(100, 0.4) },
        GridModel { id: "gbt1".into(), params: gbt(75, 6) },
        GridModel { id: "gbt2".into(), params: gbt(61, 6) },
        GridModel { id: "gbt3".into(), params: gbt(61, 4) },
        GridModel { id: "gbt4".into(), params: gbt(54, 6) },
    ]
}
