//! End-to-end run: data preparation, training of all heads, evaluation on
//! the test split and the artifacts written to the output directory.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, CheckpointMeta};
use crate::config::Config;
use crate::corpus::{
    load_dataset, preprocess_text, split_dataset, tokenize, BookRecord, Branch, DatasetSplit, Taxonomy,
};
use crate::embeddings::{
    fixed_projection, load_word_vectors, EmbeddingProvider, HashingEncoder, PrecomputedProvider, WordVectors,
};
use crate::error::{Error, Result};
use crate::hierarchy::{resolve_lambdas, FeaturePair, HeadCounters, Heads, Level1Head, Level2Head, Predictor};
use crate::labelgraph::{
    branch_samples, compute_branch_cooccurrence, compute_cooccurrence, flat_samples, genre_word_embeddings,
    hashed_label_embeddings, label_static_embeddings, threshold_cooccurrence, LabelGraph,
};
use crate::metrics::{BinaryMetrics, MultiLabelMetrics};
use crate::model::{DualGraph, Level1Model, Level2Dims, Level2Model};
use crate::review_filter::{build_vocabulary, filter_reviews, FilterResult, FilterSidecar};
use crate::sparse::{normalize_adjacency, DenseMatrix, SparseMatrix};
use crate::textgraph::{build_text_graph, GraphKind, GraphStats, TextGraph};
use crate::training::{train_level1, train_level2, Level1Data, Level2Data, TrainReport};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn stage<T>(name: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| e.in_stage(name))
}

/// Label space of one Level-2 head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    Branch(Branch),
    Flat,
}

impl Scope {
    pub fn name(self) -> &'static str {
        match self {
            Scope::Branch(Branch::Fiction) => "fiction",
            Scope::Branch(Branch::Nonfiction) => "nonfiction",
            Scope::Flat => "flat",
        }
    }

    fn seed_offset(self) -> u64 {
        match self {
            Scope::Branch(Branch::Fiction) => 1,
            Scope::Branch(Branch::Nonfiction) => 2,
            Scope::Flat => 3,
        }
    }

    pub fn checkpoint_name(self) -> String {
        format!("level2-{}.ckpt", self.name())
    }
}

pub const LEVEL1_CHECKPOINT: &str = "level1.ckpt";

/// Document rows of each split, in dataset order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRows {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Everything derived from the data before any model is trained.
pub struct Prepared {
    pub config: Config,
    pub taxonomy: Taxonomy,
    /// Books after preprocessing, in dataset order; row `r` of every graph is `books[r]`.
    pub books: Vec<BookRecord>,
    pub split: DatasetSplit,
    pub rows: SplitRows,
    pub filtered: HashMap<String, FilterResult>,
    pub vocab: Vec<String>,
    pub blurb_graph: TextGraph,
    pub review_graph: TextGraph,
    pub blurb_adj: SparseMatrix,
    pub review_adj: SparseMatrix,
    /// `n_docs × j` frozen document vectors.
    pub blurb_doc: DenseMatrix,
    pub review_doc: DenseMatrix,
    /// `(blurb, consolidated review)` token counts per book.
    pub token_counts: Vec<(usize, usize)>,
    pub lambdas1: Vec<f64>,
    pub lambdas2: Vec<f64>,
    pub word_vectors: Option<WordVectors>,
}

fn make_provider(cfg: &Config) -> Result<Box<dyn EmbeddingProvider>> {
    Ok(match &cfg.document_embeddings {
        Some(p) => Box::new(PrecomputedProvider::load(p)?),
        None => Box::new(HashingEncoder::new(cfg.hash_dim)?),
    })
}

fn rows_of(ids: &[String], index: &HashMap<&str, usize>) -> Vec<usize> {
    ids.iter().map(|id| index[id.as_str()]).collect()
}

fn embed_rows(provider: &dyn EmbeddingProvider, items: &[(String, &str)]) -> Result<DenseMatrix> {
    let dim = provider.dim();
    let mut out = DenseMatrix::zeros(items.len(), dim);
    for (r, (key, text)) in items.iter().enumerate() {
        if text.trim().is_empty() {
            continue;
        }
        let v = provider.embed_document(key, text)?;
        if v.len() != dim {
            return Err(Error::shape(format!(
                "vector for `{key}` has width {}, expected {dim}",
                v.len()
            )));
        }
        out.row_mut(r).copy_from_slice(&v);
    }
    Ok(out)
}

/// Places `doc_rows` above `token_rows`.
fn stack(doc_rows: &DenseMatrix, token_rows: &DenseMatrix) -> Result<DenseMatrix> {
    if doc_rows.cols() != token_rows.cols() {
        return Err(Error::shape(format!(
            "document features have width {}, token features {}",
            doc_rows.cols(),
            token_rows.cols()
        )));
    }
    let mut data = doc_rows.as_slice().to_vec();
    data.extend_from_slice(token_rows.as_slice());
    DenseMatrix::from_vec(doc_rows.rows() + token_rows.rows(), doc_rows.cols(), data)
}

impl Prepared {
    pub fn new(config: Config) -> Result<Self> {
        config.validate()?;
        let (taxonomy, mut books) = stage("load", || {
            let taxonomy = Taxonomy::load(&config.taxonomy)?;
            let books = load_dataset(&config.dataset, &taxonomy)?;
            Ok((taxonomy, books))
        })?;
        if config.preprocess {
            stage("preprocess", || {
                for b in &mut books {
                    b.blurb = preprocess_text(&b.blurb);
                    for r in &mut b.reviews {
                        *r = preprocess_text(r);
                    }
                }
                Ok(())
            })?;
        }
        let split = stage("split", || split_dataset(&books, config.split_seed))?;
        let index: HashMap<&str, usize> = books.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect();
        let rows = SplitRows {
            train: rows_of(&split.train, &index),
            val: rows_of(&split.val, &index),
            test: rows_of(&split.test, &index),
        };

        let provider = stage("embeddings", || make_provider(&config))?;
        let filter_cfg = config.filter_config();
        let filtered = stage("filter", || {
            books
                .iter()
                .map(|b| {
                    Ok((
                        b.id.clone(),
                        filter_reviews(&b.blurb, &b.reviews, provider.as_ref(), &filter_cfg)?,
                    ))
                })
                .collect::<Result<HashMap<_, _>>>()
        })?;
        let vocab = stage("vocab", || build_vocabulary(&books, &filtered, &config.vocab_config()))?;

        let blurb_tokens: Vec<(String, Vec<String>)> =
            books.iter().map(|b| (b.id.clone(), tokenize(&b.blurb))).collect();
        let review_tokens: Vec<(String, Vec<String>)> = books
            .iter()
            .map(|b| (b.id.clone(), tokenize(&filtered[&b.id].consolidated)))
            .collect();
        let token_counts: Vec<(usize, usize)> = blurb_tokens
            .iter()
            .zip(&review_tokens)
            .map(|((_, b), (_, r))| (b.len(), r.len()))
            .collect();
        let (blurb_graph, review_graph, blurb_adj, review_adj) = stage("graphs", || {
            let bg = build_text_graph(&blurb_tokens, &vocab, config.window, GraphKind::Blurb)?;
            let rg = build_text_graph(&review_tokens, &vocab, config.window, GraphKind::Review)?;
            let ba = normalize_adjacency(&bg.adjacency)?;
            let ra = normalize_adjacency(&rg.adjacency)?;
            Ok((bg, rg, ba, ra))
        })?;

        let (blurb_doc, review_doc, word_vectors) = stage("embeddings", || {
            let blurbs: Vec<(String, &str)> = books
                .iter()
                .map(|b| (format!("{}#blurb", b.id), b.blurb.as_str()))
                .collect();
            let reviews: Vec<(String, &str)> = books
                .iter()
                .map(|b| (format!("{}#review", b.id), filtered[&b.id].consolidated.as_str()))
                .collect();
            let wv = match &config.word_vectors {
                Some(p) => Some(load_word_vectors(p)?),
                None => None,
            };
            Ok((
                embed_rows(provider.as_ref(), &blurbs)?,
                embed_rows(provider.as_ref(), &reviews)?,
                wv,
            ))
        })?;

        let rule = config.lambda_rule();
        let lambdas1 = resolve_lambdas(config.lambda1, &token_counts, config.lambda1_default, &rule);
        let lambdas2 = resolve_lambdas(config.lambda2, &token_counts, config.lambda2_default, &rule);
        Ok(Self {
            config,
            taxonomy,
            books,
            split,
            rows,
            filtered,
            vocab,
            blurb_graph,
            review_graph,
            blurb_adj,
            review_adj,
            blurb_doc,
            review_doc,
            token_counts,
            lambdas1,
            lambdas2,
            word_vectors,
        })
    }

    pub fn n_docs(&self) -> usize {
        self.books.len()
    }

    pub fn level1_truth(&self) -> Vec<Branch> {
        self.books.iter().map(|b| b.level1).collect()
    }

    pub fn sidecars(&self) -> Vec<FilterSidecar> {
        self.books
            .iter()
            .map(|b| FilterSidecar::new(&b.id, &self.filtered[&b.id]))
            .collect()
    }

    pub fn graph_stats(&self) -> (GraphStats, GraphStats) {
        (self.blurb_graph.stats(), self.review_graph.stats())
    }

    fn dual<'a>(&'a self, f: &'a FeaturePair) -> DualGraph<'a> {
        DualGraph {
            blurb_adj: &self.blurb_adj,
            review_adj: &self.review_adj,
            blurb_features: &f.blurb,
            review_features: &f.review,
            n_docs: self.n_docs(),
        }
    }

    /// Document vectors on the document rows, zeros on the token rows.
    pub fn level1_features(&self) -> Result<FeaturePair> {
        let zeros = DenseMatrix::zeros(self.vocab.len(), self.blurb_doc.cols());
        Ok(FeaturePair {
            blurb: stack(&self.blurb_doc, &zeros)?,
            review: stack(&self.review_doc, &zeros)?,
        })
    }

    fn train_books(&self) -> Vec<BookRecord> {
        self.rows.train.iter().map(|&r| self.books[r].clone()).collect()
    }

    pub fn level2_setup(&self, scope: Scope) -> Result<Level2Setup> {
        let cfg = &self.config;
        let train_books = self.train_books();
        let genres = match scope {
            Scope::Branch(b) => self.taxonomy.genres(b).to_vec(),
            Scope::Flat => self.taxonomy.all_genres(),
        };
        let cooc = match scope {
            Scope::Branch(b) => compute_branch_cooccurrence(&train_books, b)?,
            Scope::Flat => {
                let sets: Vec<Vec<bool>> = train_books.iter().map(|b| b.flat_labels(&self.taxonomy)).collect();
                compute_cooccurrence(&sets, genres.len())?
            }
        };
        let label_graph = threshold_cooccurrence(&cooc, cfg.psi1, cfg.psi2, genres.clone())?;
        let label_adj = normalize_adjacency(&label_graph.adjacency)?;
        let static_labels = match &self.word_vectors {
            Some(wv) => label_static_embeddings(&genres, wv, wv.dim).0,
            None => hashed_label_embeddings(&genres, cfg.label_dim, cfg.seed),
        };
        let e = static_labels.cols();
        let samples = match scope {
            Scope::Branch(b) => branch_samples(&train_books, &self.filtered, b),
            Scope::Flat => flat_samples(&train_books, &self.filtered, &self.taxonomy),
        };
        let word_rows = if cfg.word_features {
            genre_word_embeddings(&samples, &self.vocab, &static_labels)?.embeddings
        } else {
            DenseMatrix::zeros(self.vocab.len(), e)
        };
        let j = self.blurb_doc.cols();
        let (blurb_doc, review_doc) = if j == e {
            (self.blurb_doc.clone(), self.review_doc.clone())
        } else {
            let proj = fixed_projection(j, e, cfg.seed);
            (self.blurb_doc.matmul(&proj)?, self.review_doc.matmul(&proj)?)
        };
        let features = FeaturePair {
            blurb: stack(&blurb_doc, &word_rows)?,
            review: stack(&review_doc, &word_rows)?,
        };
        let k = genres.len();
        let mut targets = DenseMatrix::zeros(self.n_docs(), k);
        for (r, b) in self.books.iter().enumerate() {
            let labels = match scope {
                Scope::Branch(br) if b.level1 == br => b.level2.clone(),
                Scope::Branch(_) => continue,
                Scope::Flat => b.flat_labels(&self.taxonomy),
            };
            for (c, on) in labels.into_iter().enumerate() {
                if on {
                    targets.set(r, c, 1.0);
                }
            }
        }
        let dims = Level2Dims {
            path: cfg.path_dims(e, cfg.output_dim),
            labels: k,
            label_dim: e,
            label_gcn1: cfg.label_gcn1,
            label_gcn2: cfg.label_gcn2,
            head: cfg.head_kind(),
            learn_label_offsets: cfg.learn_label_offsets,
        };
        Ok(Level2Setup {
            scope,
            genres,
            label_graph,
            label_adj,
            static_labels,
            features,
            targets,
            dims,
        })
    }
}

/// Inputs of one Level-2 head derived from the training split.
#[derive(Debug, Clone)]
pub struct Level2Setup {
    pub scope: Scope,
    pub genres: Vec<String>,
    pub label_graph: LabelGraph,
    /// Normalised label adjacency.
    pub label_adj: SparseMatrix,
    pub static_labels: DenseMatrix,
    pub features: FeaturePair,
    pub targets: DenseMatrix,
    pub dims: Level2Dims,
}

pub struct TrainedLevel1 {
    pub model: Level1Model,
    pub features: FeaturePair,
    pub report: Option<TrainReport>,
}

pub struct TrainedLevel2 {
    pub setup: Level2Setup,
    pub model: Level2Model,
    pub report: Option<TrainReport>,
}

/// Which heads to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSelection {
    Level1,
    Level2(Branch),
    All,
}

#[derive(Default)]
pub struct TrainedModels {
    pub level1: Option<TrainedLevel1>,
    pub level2: Vec<TrainedLevel2>,
}

impl TrainedModels {
    pub fn reports(&self) -> Vec<&TrainReport> {
        self.level1
            .iter()
            .filter_map(|t| t.report.as_ref())
            .chain(self.level2.iter().filter_map(|t| t.report.as_ref()))
            .collect()
    }

    pub fn level2_for(&self, scope: Scope) -> Option<&TrainedLevel2> {
        self.level2.iter().find(|t| t.setup.scope == scope)
    }
}

impl Prepared {
    pub fn level1_data<'a>(&'a self, features: &'a FeaturePair, targets: &'a [f64]) -> Level1Data<'a> {
        Level1Data {
            graph: self.dual(features),
            targets,
            train_rows: &self.rows.train,
            val_rows: &self.rows.val,
            lambdas: &self.lambdas1,
        }
    }

    pub fn level1_targets(&self) -> Vec<f64> {
        self.books.iter().map(|b| b.level1.as_target()).collect()
    }

    pub fn level2_data<'a>(&'a self, setup: &'a Level2Setup, truth: &'a [Branch]) -> Level2Data<'a> {
        Level2Data {
            graph: self.dual(&setup.features),
            label_adj: &setup.label_adj,
            targets: &setup.targets,
            level1_truth: truth,
            branch: match setup.scope {
                Scope::Branch(b) => Some(b),
                Scope::Flat => None,
            },
            train_rows: &self.rows.train,
            val_rows: &self.rows.val,
            lambdas: &self.lambdas2,
        }
    }

    pub fn train_level1(&self) -> Result<TrainedLevel1> {
        stage("train-level1", || {
            let features = self.level1_features()?;
            let targets = self.level1_targets();
            let dims = self.config.path_dims(self.blurb_doc.cols(), 1);
            let data = self.level1_data(&features, &targets);
            let (model, report) = train_level1(dims, &data, &self.config.train_config())?;
            Ok(TrainedLevel1 {
                model,
                features,
                report: Some(report),
            })
        })
    }

    pub fn train_level2(&self, scope: Scope) -> Result<TrainedLevel2> {
        let name = match scope {
            Scope::Branch(Branch::Fiction) => "train-level2-fiction",
            Scope::Branch(Branch::Nonfiction) => "train-level2-nonfiction",
            Scope::Flat => "train-level2-flat",
        };
        stage(name, || {
            let setup = self.level2_setup(scope)?;
            let mut tc = self.config.train_config();
            tc.seed = tc.seed.wrapping_add(scope.seed_offset());
            let model = Level2Model::new(setup.dims, setup.static_labels.clone(), tc.seed)?;
            let truth = self.level1_truth();
            let data = self.level2_data(&setup, &truth);
            let (model, report) = train_level2(model, &data, &tc, self.config.decision_threshold)?;
            Ok(TrainedLevel2 {
                setup,
                model,
                report: Some(report),
            })
        })
    }

    /// Trains the selected heads. With the hierarchy disabled only the flat
    /// head exists and the selection must be `All`.
    pub fn train(&self, which: LevelSelection) -> Result<TrainedModels> {
        let mut out = TrainedModels::default();
        if !self.config.hierarchy {
            if which != LevelSelection::All {
                return Err(Error::config("with hierarchy = false only `--level all` is available"));
            }
            out.level2.push(self.train_level2(Scope::Flat)?);
            return Ok(out);
        }
        if matches!(which, LevelSelection::Level1 | LevelSelection::All) {
            out.level1 = Some(self.train_level1()?);
        }
        for b in Branch::ALL {
            if matches!(which, LevelSelection::All) || which == LevelSelection::Level2(b) {
                out.level2.push(self.train_level2(Scope::Branch(b))?);
            }
        }
        Ok(out)
    }

    fn expected_scopes(&self) -> Vec<Scope> {
        if self.config.hierarchy {
            Branch::ALL.iter().map(|&b| Scope::Branch(b)).collect()
        } else {
            vec![Scope::Flat]
        }
    }

    /// Writes one checkpoint per trained head and records the paths in the reports.
    pub fn save_models(&self, models: &mut TrainedModels, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let hash = self.config.model_hash();
        let mut written = Vec::new();
        if let Some(l1) = &mut models.level1 {
            let path = dir.join(LEVEL1_CHECKPOINT);
            Checkpoint::from_model(&l1.model, CheckpointMeta::Level1 { dims: l1.model.dims }, hash).save(&path)?;
            if let Some(r) = &mut l1.report {
                r.checkpoint = Some(path.display().to_string());
            }
            written.push(path);
        }
        for l2 in &mut models.level2 {
            let path = dir.join(l2.setup.scope.checkpoint_name());
            let meta = CheckpointMeta::Level2 {
                dims: l2.model.dims,
                genres: l2.setup.genres.clone(),
            };
            Checkpoint::from_model(&l2.model, meta, hash).save(&path)?;
            if let Some(r) = &mut l2.report {
                r.checkpoint = Some(path.display().to_string());
            }
            written.push(path);
        }
        Ok(written)
    }

    /// Loads every head this configuration needs from `dir`.
    pub fn load_models(&self, dir: &Path) -> Result<TrainedModels> {
        let hash = self.config.model_hash();
        let read = |path: PathBuf| -> Result<Checkpoint> {
            if !path.exists() {
                return Err(Error::data(format!(
                    "missing checkpoint {}; run `train` first",
                    path.display()
                )));
            }
            let ck = Checkpoint::load(&path)?;
            if ck.config_hash != hash {
                return Err(Error::config(format!(
                    "checkpoint {} was trained with a different configuration",
                    path.display()
                )));
            }
            Ok(ck)
        };
        let mut out = TrainedModels::default();
        if self.config.hierarchy {
            out.level1 = Some(TrainedLevel1 {
                model: read(dir.join(LEVEL1_CHECKPOINT))?.level1_model()?,
                features: self.level1_features()?,
                report: None,
            });
        }
        for scope in self.expected_scopes() {
            let (model, _) = read(dir.join(scope.checkpoint_name()))?.level2_model()?;
            out.level2.push(TrainedLevel2 {
                setup: self.level2_setup(scope)?,
                model,
                report: None,
            });
        }
        Ok(out)
    }

    /// Assembles a predictor; every head the configuration needs must be present.
    pub fn predictor(&self, models: TrainedModels) -> Result<Predictor> {
        let mut by_scope: HashMap<Scope, Level2Head> = models
            .level2
            .into_iter()
            .map(|t| {
                (
                    t.setup.scope,
                    Level2Head {
                        genres: t.setup.genres,
                        model: t.model,
                        features: t.setup.features,
                        label_adj: t.setup.label_adj,
                    },
                )
            })
            .collect();
        let mut take = |s: Scope| {
            by_scope
                .remove(&s)
                .ok_or_else(|| Error::data(format!("the {} head is not trained", s.name())))
        };
        let heads = if self.config.hierarchy {
            let l1 = models
                .level1
                .ok_or_else(|| Error::data("the level-1 head is not trained"))?;
            Heads::Hierarchical {
                level1: Level1Head {
                    model: l1.model,
                    features: l1.features,
                },
                fiction: take(Scope::Branch(Branch::Fiction))?,
                nonfiction: take(Scope::Branch(Branch::Nonfiction))?,
            }
        } else {
            Heads::Flat(take(Scope::Flat)?)
        };
        Ok(Predictor {
            blurb_adj: self.blurb_adj.clone(),
            review_adj: self.review_adj.clone(),
            n_docs: self.n_docs(),
            doc_index: self.books.iter().enumerate().map(|(i, b)| (b.id.clone(), i)).collect(),
            lambdas1: self.lambdas1.clone(),
            lambdas2: self.lambdas2.clone(),
            heads,
            decision_threshold: self.config.decision_threshold,
            counters: HeadCounters::default(),
        })
    }

    /// Scores the predictor on `rows`.
    pub fn evaluate(&self, predictor: &Predictor, rows: &[usize]) -> Result<MetricReport> {
        let ids: Vec<String> = rows.iter().map(|&r| self.books[r].id.clone()).collect();
        let preds = predictor.predict(&ids)?;
        let books: Vec<&BookRecord> = rows.iter().map(|&r| &self.books[r]).collect();
        let mut level2 = BTreeMap::new();
        let mut level1 = None;
        let (mut routed_fiction, mut routed_nonfiction) = (0, 0);
        if self.config.hierarchy {
            let pred: Vec<bool> = preds
                .iter()
                .map(|p| p.level1.as_ref().is_some_and(|d| d.branch == Branch::Nonfiction))
                .collect();
            routed_nonfiction = pred.iter().filter(|&&b| b).count();
            routed_fiction = pred.len() - routed_nonfiction;
            let truth: Vec<bool> = books.iter().map(|b| b.level1 == Branch::Nonfiction).collect();
            level1 = Some(BinaryMetrics::compute(&pred, &truth)?);
            for branch in Branch::ALL {
                let k = self.taxonomy.len(branch);
                let (mut p, mut t) = (Vec::new(), Vec::new());
                for (pr, b) in preds.iter().zip(&books).filter(|(_, b)| b.level1 == branch) {
                    let routed_here = pr.level1.as_ref().is_some_and(|d| d.branch == branch);
                    p.push(if routed_here {
                        pr.decisions.clone()
                    } else {
                        vec![false; k]
                    });
                    t.push(b.level2.clone());
                }
                level2.insert(branch.name().to_string(), MultiLabelMetrics::compute(&p, &t)?);
            }
        } else {
            let kf = self.taxonomy.len(Branch::Fiction);
            for branch in Branch::ALL {
                let cols = match branch {
                    Branch::Fiction => 0..kf,
                    Branch::Nonfiction => kf..kf + self.taxonomy.len(Branch::Nonfiction),
                };
                let (mut p, mut t) = (Vec::new(), Vec::new());
                for (pr, b) in preds.iter().zip(&books).filter(|(_, b)| b.level1 == branch) {
                    p.push(pr.decisions[cols.clone()].to_vec());
                    t.push(b.level2.clone());
                }
                level2.insert(branch.name().to_string(), MultiLabelMetrics::compute(&p, &t)?);
            }
            let p: Vec<Vec<bool>> = preds.iter().map(|p| p.decisions.clone()).collect();
            let t: Vec<Vec<bool>> = books.iter().map(|b| b.flat_labels(&self.taxonomy)).collect();
            level2.insert("flat".to_string(), MultiLabelMetrics::compute(&p, &t)?);
        }
        Ok(MetricReport {
            schema_version: REPORT_SCHEMA_VERSION,
            mode: if self.config.hierarchy { "hierarchical" } else { "flat" }.to_string(),
            config_hash: format!("{:016x}", self.config.model_hash()),
            level1,
            level2,
            counts: ReportCounts {
                train: self.rows.train.len(),
                val: self.rows.val.len(),
                evaluated: rows.len(),
                routed_fiction,
                routed_nonfiction,
            },
            conventions: Conventions::default(),
            decision_threshold: self.config.decision_threshold,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCounts {
    pub train: usize,
    pub val: usize,
    pub evaluated: usize,
    pub routed_fiction: usize,
    pub routed_nonfiction: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub f1_without_support: String,
    pub balanced_accuracy_micro: String,
    pub misrouted_books: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            f1_without_support: "a label absent from both prediction and truth scores 0".into(),
            balanced_accuracy_micro: "computed from TP/TN/FP/FN pooled over all labels".into(),
            misrouted_books: "a book routed to the other branch counts as predicting no genre of its own branch".into(),
        }
    }
}

/// Versioned evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: u32,
    pub mode: String,
    pub config_hash: String,
    /// Absent when the hierarchy is disabled.
    pub level1: Option<BinaryMetrics>,
    /// Keyed by branch name; flat runs add a `flat` entry over all genres.
    pub level2: BTreeMap<String, MultiLabelMetrics>,
    pub counts: ReportCounts,
    pub conventions: Conventions,
    pub decision_threshold: f64,
}

impl MetricReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub const FILTER_SIDECAR: &str = "filter.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const TRAIN_REPORTS_FILE: &str = "train_reports.json";

pub fn write_sidecars(prepared: &Prepared, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for s in prepared.sidecars() {
        serde_json::to_writer(&mut f, &s)?;
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

pub fn write_train_reports(models: &TrainedModels, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&models.reports())?)?;
    Ok(())
}

pub struct PipelineOutput {
    pub report: MetricReport,
    pub train_reports: Vec<TrainReport>,
    /// Every file written, in write order.
    pub artifacts: Vec<PathBuf>,
}

/// Full run: prepare, train every head, evaluate on the test split and write
/// sidecars, checkpoints, training reports and the metric report.
pub fn run_pipeline(config: Config) -> Result<PipelineOutput> {
    let prepared = Prepared::new(config)?;
    let dir = prepared.config.output_dir.clone();
    let mut artifacts = Vec::new();
    stage("write", || {
        fs::create_dir_all(&dir)?;
        let p = dir.join(FILTER_SIDECAR);
        write_sidecars(&prepared, &p)?;
        artifacts.push(p);
        Ok(())
    })?;
    let mut models = prepared.train(LevelSelection::All)?;
    stage("write", || {
        artifacts.extend(prepared.save_models(&mut models, &dir)?);
        let p = dir.join(TRAIN_REPORTS_FILE);
        write_train_reports(&models, &p)?;
        artifacts.push(p);
        Ok(())
    })?;
    let train_reports: Vec<TrainReport> = models.reports().into_iter().cloned().collect();
    let report = stage("evaluate", || {
        let predictor = prepared.predictor(models)?;
        prepared.evaluate(&predictor, &prepared.rows.test)
    })?;
    stage("write", || {
        let p = dir.join(METRICS_FILE);
        fs::write(&p, report.to_json()?)?;
        artifacts.push(p);
        Ok(())
    })?;
    Ok(PipelineOutput {
        report,
        train_reports,
        artifacts,
    })
}
