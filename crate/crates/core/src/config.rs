//! Flat TOML run configuration. Every key is optional except the input paths.
//!
//! ```toml
//! dataset = "books.jsonl"
//! taxonomy = "taxonomy.json"
//! output_dir = "run"
//! lambda1 = "adaptive"   # or a number in [0, 1]
//! label_network = false  # per-label affine head instead of the label graph
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embeddings::stable_hash;
use crate::error::{Error, Result};
use crate::hierarchy::{LambdaRule, DEFAULT_LAMBDA1, DEFAULT_LAMBDA2};
use crate::model::{HeadKind, PathDims};
use crate::review_filter::{FilterConfig, VocabConfig};
use crate::training::{LambdaSetting, OptimizerKind, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerName {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dataset: PathBuf,
    pub taxonomy: PathBuf,
    pub output_dir: PathBuf,
    /// Precomputed document vectors (TSV); the hashing encoder is used when absent.
    pub document_embeddings: Option<PathBuf>,
    /// Static word vectors for genre names; hashed label words are used when absent.
    pub word_vectors: Option<PathBuf>,
    pub hash_dim: usize,
    /// Label embedding width when no word-vector file is given.
    pub label_dim: usize,

    pub preprocess: bool,
    pub filter_reviews: bool,
    pub filter_floor: f64,
    pub min_blurb_tokens: usize,
    pub min_review_tokens: usize,
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub window: usize,
    pub psi1: f64,
    pub psi2: f64,

    pub gcn1: usize,
    pub gcn2: usize,
    pub hidden: usize,
    /// Width of the Level-2 path outputs and refined label embeddings.
    pub output_dim: usize,
    pub label_gcn1: usize,
    pub label_gcn2: usize,

    pub seed: u64,
    pub split_seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub patience: usize,
    pub optimizer: OptimizerName,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,

    pub lambda1: LambdaSetting,
    pub lambda2: LambdaSetting,
    pub lambda1_default: f64,
    pub lambda2_default: f64,
    pub lambda_both_short: f64,
    pub decision_threshold: f64,

    /// Label co-occurrence network; false gives a per-label affine head.
    pub label_network: bool,
    /// Genre-aware word features at Level-2; false zeroes the word rows.
    pub word_features: bool,
    /// Train the label embedding offsets; false freezes them at zero.
    pub learn_label_offsets: bool,
    /// Fiction/non-fiction gate; false trains one flat head over all genres.
    pub hierarchy: bool,
}

impl Default for Config {
    fn default() -> Self {
        let filter = FilterConfig::default();
        let vocab = VocabConfig::default();
        let train = TrainConfig::default();
        let rule = LambdaRule::default();
        Self {
            dataset: PathBuf::from("books.jsonl"),
            taxonomy: PathBuf::from("taxonomy.json"),
            output_dir: PathBuf::from("higemine-out"),
            document_embeddings: None,
            word_vectors: None,
            hash_dim: 64,
            label_dim: 64,
            preprocess: true,
            filter_reviews: filter.enabled,
            filter_floor: filter.floor,
            min_blurb_tokens: rule.min_blurb_tokens,
            min_review_tokens: rule.min_review_tokens,
            min_df: vocab.min_df,
            max_df_ratio: vocab.max_df_ratio,
            window: 20,
            psi1: 0.1,
            psi2: 0.9,
            gcn1: 256,
            gcn2: 128,
            hidden: 128,
            output_dim: 64,
            label_gcn1: 128,
            label_gcn2: 64,
            seed: train.seed,
            split_seed: 7,
            learning_rate: train.learning_rate,
            epochs: train.epochs,
            patience: train.patience,
            optimizer: OptimizerName::Adam,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            lambda1: LambdaSetting::Adaptive,
            lambda2: LambdaSetting::Adaptive,
            lambda1_default: DEFAULT_LAMBDA1,
            lambda2_default: DEFAULT_LAMBDA2,
            lambda_both_short: rule.both_short,
            decision_threshold: 0.5,
            label_network: true,
            word_features: true,
            learn_label_offsets: true,
            hierarchy: true,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(format!("{name} = {v} must lie in [0, 1]")))
    }
}

fn positive(name: &str, v: usize) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive")))
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are taken relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.taxonomy);
        fix(&mut self.output_dir);
        if let Some(p) = &mut self.document_embeddings {
            fix(p);
        }
        if let Some(p) = &mut self.word_vectors {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        unit("filter_floor", self.filter_floor)?;
        unit("max_df_ratio", self.max_df_ratio)?;
        unit("psi1", self.psi1)?;
        unit("psi2", self.psi2)?;
        if self.psi1 > self.psi2 {
            return Err(Error::config(format!(
                "psi1 = {} exceeds psi2 = {}",
                self.psi1, self.psi2
            )));
        }
        unit("lambda1_default", self.lambda1_default)?;
        unit("lambda2_default", self.lambda2_default)?;
        unit("lambda_both_short", self.lambda_both_short)?;
        unit("decision_threshold", self.decision_threshold)?;
        if self.window < 2 {
            return Err(Error::config("window must be at least 2"));
        }
        for (n, v) in [
            ("hash_dim", self.hash_dim),
            ("label_dim", self.label_dim),
            ("gcn1", self.gcn1),
            ("gcn2", self.gcn2),
            ("hidden", self.hidden),
            ("output_dim", self.output_dim),
            ("label_gcn1", self.label_gcn1),
            ("label_gcn2", self.label_gcn2),
            ("min_df", self.min_df),
        ] {
            positive(n, v)?;
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) || self.adam_eps <= 0.0 {
            return Err(Error::config("adam betas must lie in [0, 1) and eps must be positive"));
        }
        self.train_config().validate()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            seed: self.seed,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            optimizer: match self.optimizer {
                OptimizerName::Sgd => OptimizerKind::Sgd,
                OptimizerName::Adam => OptimizerKind::Adam {
                    beta1: self.adam_beta1,
                    beta2: self.adam_beta2,
                    eps: self.adam_eps,
                },
            },
            patience: self.patience,
        }
    }

    pub fn filter_config(&self) -> FilterConfig {
        FilterConfig {
            floor: self.filter_floor,
            min_blurb_tokens: self.min_blurb_tokens,
            enabled: self.filter_reviews,
        }
    }

    pub fn vocab_config(&self) -> VocabConfig {
        VocabConfig {
            min_df: self.min_df,
            max_df_ratio: self.max_df_ratio,
        }
    }

    pub fn lambda_rule(&self) -> LambdaRule {
        LambdaRule {
            min_blurb_tokens: self.min_blurb_tokens,
            min_review_tokens: self.min_review_tokens,
            both_short: self.lambda_both_short,
        }
    }

    pub fn path_dims(&self, input: usize, output: usize) -> PathDims {
        PathDims {
            input,
            gcn1: self.gcn1,
            gcn2: self.gcn2,
            hidden: self.hidden,
            output,
        }
    }

    pub fn head_kind(&self) -> HeadKind {
        if self.label_network {
            HeadKind::Network
        } else {
            HeadKind::Linear
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Stable hash of every setting that shapes the trained models. Paths
    /// are excluded so a moved run directory keeps its hash.
    pub fn model_hash(&self) -> u64 {
        let mut c = self.clone();
        c.dataset = PathBuf::new();
        c.taxonomy = PathBuf::new();
        c.output_dir = PathBuf::new();
        c.document_embeddings = c.document_embeddings.map(|_| PathBuf::new());
        c.word_vectors = c.word_vectors.map(|_| PathBuf::new());
        let text = serde_json::to_string(&c).expect("config serialises");
        stable_hash(&text, 0)
    }
}
