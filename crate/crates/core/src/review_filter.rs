//! Blurb-anchored review filtering and vocabulary extraction.
//!
//! Each review is compared to the book's blurb in embedding space. Reviews
//! whose cosine similarity reaches the per-book threshold
//! `max(floor, mean similarity)` are kept and joined into one consolidated
//! review. Books whose blurb is too short to anchor anything keep all reviews.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, BookRecord};
use crate::embeddings::EmbeddingProvider;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Lower bound on the per-book threshold.
    pub floor: f64,
    /// Blurbs with fewer tokens than this bypass filtering.
    pub min_blurb_tokens: usize,
    /// When false every review is kept (reported as a bypass).
    pub enabled: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            floor: 0.35,
            min_blurb_tokens: 20,
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub kept_indices: Vec<usize>,
    /// Blurb/review cosine similarity per review; empty on bypass.
    pub similarities: Vec<f64>,
    pub consolidated: String,
    /// `None` on bypass.
    pub threshold_used: Option<f64>,
    pub bypass: bool,
}

/// JSONL record written by the `filter` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSidecar {
    pub id: String,
    pub kept: Vec<usize>,
    pub similarities: Vec<f64>,
    pub threshold: Option<f64>,
    pub bypass: bool,
}

impl FilterSidecar {
    pub fn new(id: &str, r: &FilterResult) -> Self {
        Self {
            id: id.to_string(),
            kept: r.kept_indices.clone(),
            similarities: r.similarities.clone(),
            threshold: r.threshold_used,
            bypass: r.bypass,
        }
    }
}

/// `u·v / (‖u‖‖v‖)`, or 0 when either vector is all zeros.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::shape(format!(
            "cosine of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Applies the keep rule to precomputed similarities.
///
/// Returns the kept indices and the threshold `max(floor, mean)`. When nothing
/// reaches the threshold the single most similar review (first on ties) is kept.
pub fn select_by_similarity(similarities: &[f64], floor: f64) -> (Vec<usize>, f64) {
    if similarities.is_empty() {
        return (Vec::new(), floor);
    }
    let mean = similarities.iter().sum::<f64>() / similarities.len() as f64;
    let threshold = floor.max(mean);
    let mut kept: Vec<usize> = similarities
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= threshold)
        .map(|(i, _)| i)
        .collect();
    if kept.is_empty() {
        let best = similarities
            .iter()
            .enumerate()
            .fold(0, |best, (i, &d)| if d > similarities[best] { i } else { best });
        kept.push(best);
    }
    (kept, threshold)
}

fn consolidate(reviews: &[String], kept: &[usize]) -> String {
    kept.iter().map(|&i| reviews[i].as_str()).collect::<Vec<_>>().join(" ")
}

pub fn filter_reviews(
    blurb: &str,
    reviews: &[String],
    provider: &dyn EmbeddingProvider,
    cfg: &FilterConfig,
) -> Result<FilterResult> {
    if !cfg.enabled || tokenize(blurb).len() < cfg.min_blurb_tokens {
        let kept: Vec<usize> = (0..reviews.len()).collect();
        return Ok(FilterResult {
            consolidated: consolidate(reviews, &kept),
            kept_indices: kept,
            similarities: Vec::new(),
            threshold_used: None,
            bypass: true,
        });
    }
    let anchor = provider.embed(blurb)?;
    let similarities = reviews
        .iter()
        .map(|r| cosine_similarity(&anchor, &provider.embed(r)?))
        .collect::<Result<Vec<_>>>()?;
    let (kept, threshold) = select_by_similarity(&similarities, cfg.floor);
    Ok(FilterResult {
        consolidated: consolidate(reviews, &kept),
        kept_indices: kept,
        similarities,
        threshold_used: Some(threshold),
        bypass: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabConfig {
    pub min_df: usize,
    pub max_df_ratio: f64,
}

impl Default for VocabConfig {
    fn default() -> Self {
        Self {
            min_df: 2,
            max_df_ratio: 0.9,
        }
    }
}

/// Sorted vocabulary over all books. Each book is one document made of its
/// blurb and its consolidated review; document frequency must lie in
/// `[min_df, max_df_ratio · n]`.
pub fn build_vocabulary(
    books: &[BookRecord],
    filtered: &HashMap<String, FilterResult>,
    cfg: &VocabConfig,
) -> Result<Vec<String>> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for book in books {
        let review = filtered
            .get(&book.id)
            .ok_or_else(|| Error::data(format!("no filter result for book `{}`", book.id)))?;
        let tokens: BTreeSet<String> = tokenize(&book.blurb)
            .into_iter()
            .chain(tokenize(&review.consolidated))
            .collect();
        for t in tokens {
            *df.entry(t).or_default() += 1;
        }
    }
    let ceiling = cfg.max_df_ratio * books.len() as f64;
    let vocab: Vec<String> = df
        .into_iter()
        .filter(|&(_, d)| d >= cfg.min_df && d as f64 <= ceiling)
        .map(|(t, _)| t)
        .collect();
    if vocab.is_empty() {
        return Err(Error::data("vocabulary is empty after document-frequency filtering"));
    }
    Ok(vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Branch;
    use crate::embeddings::HashingEncoder;

    fn book(id: &str, blurb: &str) -> BookRecord {
        BookRecord {
            id: id.into(),
            blurb: blurb.into(),
            reviews: vec![],
            level1: Branch::Fiction,
            level2: vec![true],
        }
    }

    fn no_reviews(books: &[BookRecord]) -> HashMap<String, FilterResult> {
        books
            .iter()
            .map(|b| {
                (
                    b.id.clone(),
                    FilterResult {
                        kept_indices: vec![],
                        similarities: vec![],
                        consolidated: String::new(),
                        threshold_used: None,
                        bypass: true,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine_similarity(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn mean_threshold_rule() {
        let (kept, psi) = select_by_similarity(&[0.9, 0.5, 0.1], 0.0);
        assert_eq!(psi, 0.5);
        assert_eq!(kept, vec![0, 1]);
    }

    #[test]
    fn floor_overrides_mean_and_falls_back_to_best() {
        let (kept, psi) = select_by_similarity(&[0.2, 0.3, 0.1], 0.8);
        assert_eq!(psi, 0.8);
        assert_eq!(kept, vec![1]);
    }

    #[test]
    fn short_blurb_bypasses() {
        let enc = HashingEncoder::new(16).unwrap();
        let reviews = vec!["one review".to_string(), "another one".to_string()];
        let r = filter_reviews("dragon castle king", &reviews, &enc, &FilterConfig::default()).unwrap();
        assert!(r.bypass);
        assert_eq!(r.kept_indices, vec![0, 1]);
        assert_eq!(r.consolidated, "one review another one");
    }

    #[test]
    fn identical_reviews_all_kept() {
        let enc = HashingEncoder::new(64).unwrap();
        let blurb = "wizard tower spell dragon quest kingdom magic sword";
        let reviews = vec![blurb.to_string(); 3];
        let cfg = FilterConfig {
            min_blurb_tokens: 3,
            ..FilterConfig::default()
        };
        let r = filter_reviews(blurb, &reviews, &enc, &cfg).unwrap();
        assert!(!r.bypass);
        assert_eq!(r.kept_indices, vec![0, 1, 2]);
        for d in &r.similarities {
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vocabulary_single_book() {
        let books = vec![book("a", "dragon castle")];
        let cfg = VocabConfig {
            min_df: 1,
            max_df_ratio: 1.0,
        };
        assert_eq!(
            build_vocabulary(&books, &no_reviews(&books), &cfg).unwrap(),
            vec!["castle", "dragon"]
        );
    }

    #[test]
    fn vocabulary_ceiling_excludes_ubiquitous_token() {
        let books: Vec<_> = (0..10)
            .map(|i| book(&format!("b{i}"), &format!("common unique{i}")))
            .collect();
        let cfg = VocabConfig {
            min_df: 1,
            max_df_ratio: 0.9,
        };
        let vocab = build_vocabulary(&books, &no_reviews(&books), &cfg).unwrap();
        assert!(!vocab.contains(&"common".to_string()));
        assert_eq!(vocab.len(), 10);
    }

    #[test]
    fn empty_vocabulary_is_error() {
        let books = vec![book("a", "the of and")];
        assert!(build_vocabulary(&books, &no_reviews(&books), &VocabConfig::default()).is_err());
    }
}
