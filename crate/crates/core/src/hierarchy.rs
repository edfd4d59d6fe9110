//! Inference-time routing: per-book fusion weights, the fiction/non-fiction
//! gate and Level-2 label decisions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::corpus::Branch;
use crate::error::{Error, Result};
use crate::model::{sigmoid, DualGraph, Level1Model, Level2Model};
use crate::sparse::{DenseMatrix, SparseMatrix};
use crate::training::{decide_labels, LambdaSetting};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRule {
    /// Blurbs with fewer tokens rely on reviews only.
    pub min_blurb_tokens: usize,
    /// Consolidated reviews with fewer tokens leave the blurb alone.
    pub min_review_tokens: usize,
    pub both_short: f64,
}

impl Default for LambdaRule {
    fn default() -> Self {
        Self {
            min_blurb_tokens: 20,
            min_review_tokens: 20,
            both_short: 0.5,
        }
    }
}

pub const DEFAULT_LAMBDA1: f64 = 0.3;
pub const DEFAULT_LAMBDA2: f64 = 0.7;

/// Blurb weight for one book given its token counts.
pub fn adaptive_lambda(blurb_tokens: usize, review_tokens: usize, empirical: f64, rule: &LambdaRule) -> f64 {
    let blurb_short = blurb_tokens < rule.min_blurb_tokens;
    let review_short = review_tokens < rule.min_review_tokens;
    match (blurb_short, review_short) {
        (true, true) => rule.both_short,
        (true, false) => 0.0,
        (false, true) => 1.0,
        (false, false) => empirical,
    }
}

/// Per-document weights. Fixed settings apply to every document regardless of length.
pub fn resolve_lambdas(
    setting: LambdaSetting,
    token_counts: &[(usize, usize)],
    empirical: f64,
    rule: &LambdaRule,
) -> Vec<f64> {
    match setting {
        LambdaSetting::Fixed(v) => vec![v; token_counts.len()],
        LambdaSetting::Adaptive => token_counts
            .iter()
            .map(|&(b, r)| adaptive_lambda(b, r, empirical, rule))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level1Decision {
    pub branch: Branch,
    /// Probability of non-fiction.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    /// Absent when the hierarchy is disabled.
    pub level1: Option<Level1Decision>,
    pub genres: Vec<String>,
    pub probabilities: Vec<f64>,
    pub decisions: Vec<bool>,
    pub lambdas_used: (f64, f64),
}

impl Prediction {
    pub fn predicted_genres(&self) -> Vec<&str> {
        self.genres
            .iter()
            .zip(&self.decisions)
            .filter(|(_, &d)| d)
            .map(|(g, _)| g.as_str())
            .collect()
    }
}

/// Node features of one graph pair for a given model.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePair {
    pub blurb: DenseMatrix,
    pub review: DenseMatrix,
}

pub struct Level1Head {
    pub model: Level1Model,
    pub features: FeaturePair,
}

pub struct Level2Head {
    pub genres: Vec<String>,
    pub model: Level2Model,
    pub features: FeaturePair,
    /// Normalised label adjacency.
    pub label_adj: SparseMatrix,
}

pub enum Heads {
    Hierarchical {
        level1: Level1Head,
        fiction: Level2Head,
        nonfiction: Level2Head,
    },
    Flat(Level2Head),
}

/// Number of books whose Level-2 scores each head produced.
#[derive(Debug, Default)]
pub struct HeadCounters {
    pub fiction: AtomicUsize,
    pub nonfiction: AtomicUsize,
    pub flat: AtomicUsize,
}

impl HeadCounters {
    pub fn snapshot(&self) -> (usize, usize, usize) {
        (
            self.fiction.load(Ordering::Relaxed),
            self.nonfiction.load(Ordering::Relaxed),
            self.flat.load(Ordering::Relaxed),
        )
    }
}

/// Trained heads over one transductive graph pair.
pub struct Predictor {
    pub blurb_adj: SparseMatrix,
    pub review_adj: SparseMatrix,
    pub n_docs: usize,
    pub doc_index: HashMap<String, usize>,
    pub lambdas1: Vec<f64>,
    pub lambdas2: Vec<f64>,
    pub heads: Heads,
    pub decision_threshold: f64,
    pub counters: HeadCounters,
}

impl Predictor {
    fn graph<'a>(&'a self, f: &'a FeaturePair) -> DualGraph<'a> {
        DualGraph {
            blurb_adj: &self.blurb_adj,
            review_adj: &self.review_adj,
            blurb_features: &f.blurb,
            review_features: &f.review,
            n_docs: self.n_docs,
        }
    }

    fn row_of(&self, id: &str) -> Result<usize> {
        self.doc_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::data(format!("book `{id}` has no document row in the graph")))
    }

    /// Non-fiction logits for every document, `None` in flat mode.
    pub fn level1_logits(&self) -> Result<Option<Vec<f64>>> {
        match &self.heads {
            Heads::Hierarchical { level1, .. } => Ok(Some(
                level1.model.forward(&self.graph(&level1.features), &self.lambdas1)?,
            )),
            Heads::Flat(_) => Ok(None),
        }
    }

    fn head_logits(&self, head: &Level2Head) -> Result<DenseMatrix> {
        head.model
            .forward(&self.graph(&head.features), &head.label_adj, &self.lambdas2)
    }

    fn assemble(
        &self,
        id: &str,
        row: usize,
        head: &Level2Head,
        logits: &DenseMatrix,
        l1: Option<Level1Decision>,
    ) -> Prediction {
        let scores = logits.row(row);
        Prediction {
            id: id.to_string(),
            level1: l1,
            genres: head.genres.clone(),
            probabilities: scores.iter().map(|&x| sigmoid(x)).collect(),
            decisions: decide_labels(scores, self.decision_threshold),
            lambdas_used: (self.lambdas1[row], self.lambdas2[row]),
        }
    }

    /// Predictions for the given books. Each book is scored by exactly one
    /// Level-2 head; a head no book is routed to is never run.
    pub fn predict(&self, ids: &[String]) -> Result<Vec<Prediction>> {
        let rows = ids.iter().map(|id| self.row_of(id)).collect::<Result<Vec<_>>>()?;
        match &self.heads {
            Heads::Flat(head) => {
                let logits = self.head_logits(head)?;
                self.counters.flat.fetch_add(rows.len(), Ordering::Relaxed);
                Ok(ids
                    .iter()
                    .zip(&rows)
                    .map(|(id, &r)| self.assemble(id, r, head, &logits, None))
                    .collect())
            }
            Heads::Hierarchical {
                fiction, nonfiction, ..
            } => {
                let l1 = self.level1_logits()?.expect("hierarchical heads have a level-1 model");
                let decisions: Vec<Level1Decision> = rows
                    .iter()
                    .map(|&r| {
                        let p = sigmoid(l1[r]);
                        Level1Decision {
                            branch: if p >= 0.5 { Branch::Nonfiction } else { Branch::Fiction },
                            probability: p,
                        }
                    })
                    .collect();
                let mut cached: [Option<DenseMatrix>; 2] = [None, None];
                let mut out = Vec::with_capacity(ids.len());
                for ((id, &r), d) in ids.iter().zip(&rows).zip(decisions) {
                    let (slot, head, counter) = match d.branch {
                        Branch::Fiction => (0, fiction, &self.counters.fiction),
                        Branch::Nonfiction => (1, nonfiction, &self.counters.nonfiction),
                    };
                    if cached[slot].is_none() {
                        cached[slot] = Some(self.head_logits(head)?);
                    }
                    counter.fetch_add(1, Ordering::Relaxed);
                    let logits = cached[slot].as_ref().expect("filled above");
                    out.push(self.assemble(id, r, head, logits, Some(d)));
                }
                Ok(out)
            }
        }
    }
}
