//! Genre-level structure for the multi-label models: the thresholded label
//! co-occurrence graph, label embeddings, and genre-aware word features.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, BookRecord, Branch, Taxonomy};
use crate::embeddings::{hashed_word_vector, WordVectors};
use crate::error::{Error, Result};
use crate::review_filter::FilterResult;
use crate::sparse::{DenseMatrix, SparseMatrix};

/// Directed genre graph; entry `(i, j)` weighs `P(genre i | genre j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelGraph {
    pub adjacency: SparseMatrix,
    pub labels: Vec<String>,
    pub psi1: f64,
    pub psi2: f64,
}

/// Conditional co-occurrence `M[i][j] = count(i ∧ j) / count(j)` over label
/// sets of width `k`. The diagonal is zero; columns of absent labels are zero.
pub fn compute_cooccurrence(label_sets: &[Vec<bool>], k: usize) -> Result<DenseMatrix> {
    if label_sets.is_empty() {
        return Err(Error::data("co-occurrence needs at least one training book"));
    }
    let mut single = vec![0usize; k];
    let mut joint = vec![0usize; k * k];
    for (n, set) in label_sets.iter().enumerate() {
        if set.len() != k {
            return Err(Error::shape(format!(
                "label set {n} has width {}, expected {k}",
                set.len()
            )));
        }
        let on: Vec<usize> = (0..k).filter(|&i| set[i]).collect();
        for &j in &on {
            single[j] += 1;
            for &i in &on {
                joint[i * k + j] += 1;
            }
        }
    }
    let mut m = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i != j && single[j] > 0 {
                m.set(i, j, joint[i * k + j] as f64 / single[j] as f64);
            }
        }
    }
    Ok(m)
}

/// Co-occurrence over the training books of one branch.
pub fn compute_branch_cooccurrence(train_books: &[BookRecord], branch: Branch) -> Result<DenseMatrix> {
    let sets: Vec<Vec<bool>> = train_books
        .iter()
        .filter(|b| b.level1 == branch)
        .map(|b| b.level2.clone())
        .collect();
    let Some(k) = sets.first().map(Vec::len) else {
        return Err(Error::data(format!("no {branch} books in the training split")));
    };
    compute_cooccurrence(&sets, k)
}

/// Drops weights below `psi1`, snaps weights at or above `psi2` to 1 and
/// keeps the rest as they are. Zero weights are never stored.
pub fn threshold_cooccurrence(m: &DenseMatrix, psi1: f64, psi2: f64, labels: Vec<String>) -> Result<LabelGraph> {
    if !(0.0..=1.0).contains(&psi1) || !(0.0..=1.0).contains(&psi2) || psi1 > psi2 {
        return Err(Error::config(format!(
            "need 0 <= psi1 <= psi2 <= 1, got psi1={psi1}, psi2={psi2}"
        )));
    }
    if m.rows() != m.cols() || m.rows() != labels.len() {
        return Err(Error::shape(format!(
            "co-occurrence {:?} for {} labels",
            m.shape(),
            labels.len()
        )));
    }
    let mut triplets = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if v == 0.0 || v < psi1 {
                continue;
            }
            triplets.push((i, j, if v >= psi2 { 1.0 } else { v }));
        }
    }
    Ok(LabelGraph {
        adjacency: SparseMatrix::from_triplets(m.rows(), m.cols(), triplets)?,
        labels,
        psi1,
        psi2,
    })
}

/// Words of a genre name used to look up its static vector.
fn label_words(label: &str) -> Vec<String> {
    let words = tokenize(label);
    if words.is_empty() {
        vec![label.trim().to_lowercase()]
    } else {
        words
    }
}

/// Static label embeddings: the mean of the word vectors of each genre name.
///
/// Words without a vector contribute zeros to the mean. Returns the matrix and
/// a warning per missing word or fully unknown label.
pub fn label_static_embeddings(labels: &[String], vectors: &WordVectors, dim: usize) -> (DenseMatrix, Vec<String>) {
    let mut out = DenseMatrix::zeros(labels.len(), dim);
    let mut warnings = Vec::new();
    for (r, label) in labels.iter().enumerate() {
        let words = label_words(label);
        let mut found = 0;
        let row = out.row_mut(r);
        for w in &words {
            match vectors.get(w) {
                Some(v) if v.len() == dim => {
                    found += 1;
                    for (o, x) in row.iter_mut().zip(v) {
                        *o += x;
                    }
                }
                _ => warnings.push(format!("no vector for word `{w}` of label `{label}`")),
            }
        }
        let n = words.len() as f64;
        row.iter_mut().for_each(|o| *o /= n);
        if found == 0 {
            warnings.push(format!("label `{label}` has no known words; using a zero row"));
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    (out, warnings)
}

/// Static label embeddings built from [`hashed_word_vector`]s of the label words.
pub fn hashed_label_embeddings(labels: &[String], dim: usize, seed: u64) -> DenseMatrix {
    let mut vectors = WordVectors {
        dim,
        ..WordVectors::default()
    };
    for label in labels {
        for w in label_words(label) {
            let v = hashed_word_vector(&w, dim, seed);
            vectors.vectors.insert(w, v);
        }
    }
    label_static_embeddings(labels, &vectors, dim).0
}

/// Static embeddings plus the trainable offset; the model sees their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelEmbeddings {
    pub static_part: DenseMatrix,
    pub learnable: DenseMatrix,
}

impl LabelEmbeddings {
    /// Learnable part starts at zero.
    pub fn new(static_part: DenseMatrix) -> Self {
        let (k, e) = static_part.shape();
        Self {
            static_part,
            learnable: DenseMatrix::zeros(k, e),
        }
    }

    pub fn combined(&self) -> DenseMatrix {
        self.static_part
            .add(&self.learnable)
            .expect("label embedding parts share a shape")
    }
}

/// Tokens of one training book and its labels in the head's label space.
#[derive(Debug, Clone)]
pub struct GenreSample {
    pub blurb_tokens: Vec<String>,
    pub review_tokens: Vec<String>,
    pub labels: Vec<bool>,
}

pub fn branch_samples(
    train_books: &[BookRecord],
    filtered: &HashMap<String, FilterResult>,
    branch: Branch,
) -> Vec<GenreSample> {
    train_books
        .iter()
        .filter(|b| b.level1 == branch)
        .map(|b| sample(b, filtered, b.level2.clone()))
        .collect()
}

pub fn flat_samples(
    train_books: &[BookRecord],
    filtered: &HashMap<String, FilterResult>,
    taxonomy: &Taxonomy,
) -> Vec<GenreSample> {
    train_books
        .iter()
        .map(|b| sample(b, filtered, b.flat_labels(taxonomy)))
        .collect()
}

fn sample(b: &BookRecord, filtered: &HashMap<String, FilterResult>, labels: Vec<bool>) -> GenreSample {
    GenreSample {
        blurb_tokens: tokenize(&b.blurb),
        review_tokens: filtered
            .get(&b.id)
            .map(|f| tokenize(&f.consolidated))
            .unwrap_or_default(),
        labels,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenreWordEmbeddings {
    /// `m × k'` normalised genre profile per word.
    pub frequencies: DenseMatrix,
    /// `m × e` word features, `frequencies · X_e`.
    pub embeddings: DenseMatrix,
}

/// Raw per-genre word counts (blurb plus consolidated review) for every vocabulary token.
pub fn raw_genre_frequencies(samples: &[GenreSample], vocab: &[String], k: usize) -> Result<DenseMatrix> {
    let lookup: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut gamma = DenseMatrix::zeros(vocab.len(), k);
    for s in samples {
        if s.labels.len() != k {
            return Err(Error::shape(format!("label width {} != {k}", s.labels.len())));
        }
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for t in s.blurb_tokens.iter().chain(&s.review_tokens) {
            if let Some(&i) = lookup.get(t.as_str()) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        for (j, _) in s.labels.iter().enumerate().filter(|(_, &on)| on) {
            for (&i, &c) in &counts {
                gamma.set(i, j, gamma.get(i, j) + c);
            }
        }
    }
    Ok(gamma)
}

/// Replaces each row by the absolute z-score of its entries. Rows with zero
/// spread become zero.
pub fn abs_zscore_rows(gamma: &mut DenseMatrix) {
    let k = gamma.cols() as f64;
    for r in 0..gamma.rows() {
        let row = gamma.row_mut(r);
        let mean = row.iter().sum::<f64>() / k;
        let std = (row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt();
        for v in row.iter_mut() {
            *v = if std > 0.0 { ((*v - mean) / std).abs() } else { 0.0 };
        }
    }
}

pub fn genre_word_embeddings(
    samples: &[GenreSample],
    vocab: &[String],
    static_labels: &DenseMatrix,
) -> Result<GenreWordEmbeddings> {
    let k = static_labels.rows();
    if vocab.is_empty() || k == 0 {
        return Err(Error::data("genre word embeddings need a vocabulary and labels"));
    }
    let mut gamma = raw_genre_frequencies(samples, vocab, k)?;
    abs_zscore_rows(&mut gamma);
    let embeddings = gamma.matmul(static_labels)?;
    Ok(GenreWordEmbeddings {
        frequencies: gamma,
        embeddings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("g{i}")).collect()
    }

    #[test]
    fn conditional_probability_fixture() {
        // label 1 appears twice, together with label 0 once
        let sets = vec![
            vec![true, true],
            vec![false, true],
            vec![true, false],
            vec![true, false],
        ];
        let m = compute_cooccurrence(&sets, 2).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 1.0 / 3.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn implied_label_has_probability_one() {
        let sets = vec![
            vec![true, true, false],
            vec![true, false, false],
            vec![true, true, false],
        ];
        let m = compute_cooccurrence(&sets, 3).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(2, 0), 0.0);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn empty_training_set_is_error() {
        assert!(compute_cooccurrence(&[], 3).is_err());
    }

    #[test]
    fn threshold_rule() {
        let m = DenseMatrix::from_rows(&[[0.0, 0.05, 0.5], [0.95, 0.0, 1.0], [0.0, 0.2, 0.0]]).unwrap();
        let g = threshold_cooccurrence(&m, 0.1, 0.9, names(3)).unwrap();
        assert_eq!(g.adjacency.get(0, 1), 0.0);
        assert_eq!(g.adjacency.get(0, 2), 0.5);
        assert_eq!(g.adjacency.get(1, 0), 1.0);
        assert_eq!(g.adjacency.get(2, 1), 0.2);
        assert_eq!(g.adjacency.nnz(), 4);

        let pass = threshold_cooccurrence(&m, 0.0, 1.0, names(3)).unwrap();
        assert_eq!(pass.adjacency.to_dense(), m);
        assert!(threshold_cooccurrence(&m, 0.5, 0.4, names(3)).is_err());
    }

    #[test]
    fn static_embeddings_average_words() {
        let mut wv = WordVectors {
            dim: 2,
            ..WordVectors::default()
        };
        wv.vectors.insert("history".into(), vec![1.0, 2.0]);
        wv.vectors.insert("science".into(), vec![1.0, 0.0]);
        wv.vectors.insert("fiction".into(), vec![0.0, 4.0]);
        let labels = vec!["History".to_string(), "Science Fiction".into(), "Zzz".into()];
        let (x, warnings) = label_static_embeddings(&labels, &wv, 2);
        assert_eq!(x.row(0), &[1.0, 2.0]);
        assert_eq!(x.row(1), &[0.5, 2.0]);
        assert_eq!(x.row(2), &[0.0, 0.0]);
        assert_eq!(warnings.len(), 2);
    }

    #[test]
    fn zscore_two_genres() {
        let mut g = DenseMatrix::from_rows(&[[3.0, 1.0], [2.0, 2.0], [0.0, 0.0]]).unwrap();
        abs_zscore_rows(&mut g);
        assert_eq!(g.row(0), &[1.0, 1.0]);
        assert_eq!(g.row(1), &[0.0, 0.0]);
        assert_eq!(g.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn word_features_project_onto_labels() {
        let samples = vec![
            GenreSample {
                blurb_tokens: vec!["dragon".into(), "dragon".into()],
                review_tokens: vec!["dragon".into(), "tea".into()],
                labels: vec![true, false],
            },
            GenreSample {
                blurb_tokens: vec!["dragon".into(), "tea".into()],
                review_tokens: vec![],
                labels: vec![false, true],
            },
        ];
        let vocab = vec!["dragon".to_string(), "tea".into(), "unused".into()];
        let xe = DenseMatrix::from_rows(&[[1.0, 0.0, 2.0], [0.0, 1.0, 3.0]]).unwrap();
        let out = genre_word_embeddings(&samples, &vocab, &xe).unwrap();
        // dragon: raw (3, 1) -> |z| = (1, 1) -> e1 + e2
        assert_eq!(out.embeddings.row(0), &[1.0, 1.0, 5.0]);
        // tea: raw (1, 1) -> zero spread
        assert_eq!(out.embeddings.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(out.embeddings.row(2), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn combined_label_embeddings_start_static() {
        let xe = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let mut le = LabelEmbeddings::new(xe.clone());
        assert_eq!(le.combined(), xe);
        le.learnable.set(0, 1, 0.5);
        assert_eq!(le.combined().row(0), &[1.0, 2.5]);
    }
}
