//! Heterogeneous document–token graphs.
//!
//! Nodes are the documents followed by the vocabulary tokens. Document–token
//! edges carry TF-IDF weights, token–token edges carry positive PMI from
//! sliding-window co-occurrence, and document–document pairs are unconnected.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Blurb,
    Review,
}

#[derive(Debug, Clone)]
pub struct TextGraph {
    pub adjacency: SparseMatrix,
    pub doc_index: HashMap<String, usize>,
    pub token_index: BTreeMap<String, usize>,
    pub kind: GraphKind,
    n_docs: usize,
}

impl TextGraph {
    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_tokens(&self) -> usize {
        self.token_index.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_docs + self.token_index.len()
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats::of(self)
    }
}

fn vocab_lookup(vocab: &[String]) -> HashMap<&str, usize> {
    vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect()
}

/// `docs × vocab` TF-IDF with raw counts and smoothed idf
/// `ln((1 + n) / (1 + df)) + 1`. Tokens outside `vocab` are ignored.
pub fn compute_tfidf(docs: &[Vec<String>], vocab: &[String]) -> Result<SparseMatrix> {
    if vocab.is_empty() {
        return Err(Error::data("tf-idf needs a non-empty vocabulary"));
    }
    let lookup = vocab_lookup(vocab);
    let counts: Vec<BTreeMap<usize, usize>> = docs
        .iter()
        .map(|d| {
            let mut c = BTreeMap::new();
            for t in d {
                if let Some(&j) = lookup.get(t.as_str()) {
                    *c.entry(j).or_default() += 1;
                }
            }
            c
        })
        .collect();
    let mut df = vec![0usize; vocab.len()];
    for c in &counts {
        for &j in c.keys() {
            df[j] += 1;
        }
    }
    let n = docs.len() as f64;
    let idf: Vec<f64> = df.iter().map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0).collect();
    let mut triplets = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        for (&j, &tf) in c {
            triplets.push((i, j, tf as f64 * idf[j]));
        }
    }
    SparseMatrix::from_triplets(docs.len(), vocab.len(), triplets)
}

/// Window co-occurrence counts over vocabulary-filtered token sequences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindowCounts {
    pub windows: usize,
    pub token: Vec<usize>,
    /// Unordered pairs keyed `(lo, hi)`.
    pub pair: BTreeMap<(usize, usize), usize>,
}

/// Slides a stride-1 window over each document; a document shorter than the
/// window contributes one window, a document with no vocabulary tokens none.
/// Each token and each unordered pair counts at most once per window.
pub fn count_windows(docs: &[Vec<String>], vocab: &[String], window: usize) -> WindowCounts {
    let lookup = vocab_lookup(vocab);
    let mut counts = WindowCounts {
        token: vec![0; vocab.len()],
        ..WindowCounts::default()
    };
    for d in docs {
        let seq: Vec<usize> = d.iter().filter_map(|t| lookup.get(t.as_str()).copied()).collect();
        if seq.is_empty() {
            continue;
        }
        let spans: Vec<&[usize]> = if seq.len() <= window {
            vec![&seq[..]]
        } else {
            seq.windows(window).collect()
        };
        for span in spans {
            counts.windows += 1;
            let distinct: BTreeSet<usize> = span.iter().copied().collect();
            for &a in &distinct {
                counts.token[a] += 1;
            }
            let distinct: Vec<usize> = distinct.into_iter().collect();
            for (x, &a) in distinct.iter().enumerate() {
                for &b in &distinct[x + 1..] {
                    *counts.pair.entry((a, b)).or_default() += 1;
                }
            }
        }
    }
    counts
}

/// Positive PMI between two tokens from window counts, `max(ln(p_ab / (p_a p_b)), 0)`.
pub fn ppmi_from_counts(pair: usize, a: usize, b: usize, windows: usize) -> f64 {
    let w = windows as f64;
    let p_ab = pair as f64 / w;
    let p_a = a as f64 / w;
    let p_b = b as f64 / w;
    (p_ab / (p_a * p_b)).ln().max(0.0)
}

/// Symmetric `vocab × vocab` positive-PMI matrix; zero weights are not stored.
pub fn compute_ppmi(docs: &[Vec<String>], vocab: &[String], window: usize) -> Result<SparseMatrix> {
    if window < 2 {
        return Err(Error::config(format!("window must be at least 2, got {window}")));
    }
    let counts = count_windows(docs, vocab, window);
    let mut triplets = Vec::new();
    for (&(a, b), &c) in &counts.pair {
        let w = ppmi_from_counts(c, counts.token[a], counts.token[b], counts.windows);
        if w > 0.0 {
            triplets.push((a, b, w));
            triplets.push((b, a, w));
        }
    }
    SparseMatrix::from_triplets(vocab.len(), vocab.len(), triplets)?.with_symmetric_flag()
}

/// Assembles the full `(n_docs + m)²` adjacency. Documents take rows
/// `0..n_docs` in input order, tokens follow in vocabulary order.
pub fn build_text_graph(
    docs: &[(String, Vec<String>)],
    vocab: &[String],
    window: usize,
    kind: GraphKind,
) -> Result<TextGraph> {
    let n_docs = docs.len();
    let mut doc_index = HashMap::with_capacity(n_docs);
    for (i, (id, _)) in docs.iter().enumerate() {
        if doc_index.insert(id.clone(), i).is_some() {
            return Err(Error::data(format!("duplicate document id `{id}`")));
        }
    }
    let token_lists: Vec<Vec<String>> = docs.iter().map(|(_, t)| t.clone()).collect();
    let tfidf = compute_tfidf(&token_lists, vocab)?;
    let ppmi = compute_ppmi(&token_lists, vocab, window)?;

    let mut triplets = Vec::with_capacity(2 * tfidf.nnz() + ppmi.nnz());
    for (d, t, w) in tfidf.iter() {
        triplets.push((d, n_docs + t, w));
        triplets.push((n_docs + t, d, w));
    }
    for (a, b, w) in ppmi.iter() {
        triplets.push((n_docs + a, n_docs + b, w));
    }
    let n = n_docs + vocab.len();
    let adjacency = SparseMatrix::from_triplets(n, n, triplets)?.with_symmetric_flag()?;
    let token_index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), n_docs + i)).collect();
    Ok(TextGraph {
        adjacency,
        doc_index,
        token_index,
        kind,
        n_docs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub kind: GraphKind,
    pub nodes: usize,
    pub doc_nodes: usize,
    pub token_nodes: usize,
    /// Undirected edge counts (each mirrored pair counted once).
    pub doc_token_edges: usize,
    pub token_token_edges: usize,
    pub isolated_tokens: usize,
    pub tfidf_histogram: Histogram,
    pub ppmi_histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        if values.is_empty() {
            return Self {
                min: 0.0,
                max: 0.0,
                counts: vec![0; bins],
            };
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins];
        let width = (max - min) / bins as f64;
        for &v in values {
            let b = if width > 0.0 {
                (((v - min) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        Self { min, max, counts }
    }
}

impl GraphStats {
    const BINS: usize = 10;

    fn of(g: &TextGraph) -> Self {
        let n_docs = g.n_docs;
        let mut tfidf = Vec::new();
        let mut ppmi = Vec::new();
        let mut degree = vec![0usize; g.n_nodes()];
        for (r, c, v) in g.adjacency.iter() {
            degree[r] += 1;
            if r < c {
                if r < n_docs {
                    tfidf.push(v);
                } else {
                    ppmi.push(v);
                }
            }
        }
        Self {
            kind: g.kind,
            nodes: g.n_nodes(),
            doc_nodes: n_docs,
            token_nodes: g.n_tokens(),
            doc_token_edges: tfidf.len(),
            token_token_edges: ppmi.len(),
            isolated_tokens: degree[n_docs..].iter().filter(|&&d| d == 0).count(),
            tfidf_histogram: Histogram::new(&tfidf, Self::BINS),
            ppmi_histogram: Histogram::new(&ppmi, Self::BINS),
        }
    }
}
