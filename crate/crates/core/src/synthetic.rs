//! Seeded synthetic corpora with a known token-to-label mapping.
//!
//! Every genre owns a handful of signature tokens and every branch a few
//! marker tokens; the remaining words are shared filler. In the separable
//! corpus each book's blurb and on-topic reviews carry the signatures of all
//! its genres. In the noisy corpus the signal of each genre reaches the
//! reviews with probability 0.7 and the blurb with probability 0.55,
//! independently, and each text may carry the signature of one genre the
//! book does not have. Every book also gets one off-topic review.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{write_dataset, BookRecord, Branch, Taxonomy};
use crate::error::{Error, Result};

const FICTION_GENRES: [&str; 8] = [
    "Space Opera",
    "Cozy Mystery",
    "Epic Fantasy",
    "Gothic Horror",
    "Romance",
    "Cyberpunk",
    "Western",
    "Satire",
];
const NONFICTION_GENRES: [&str; 8] = [
    "Military History",
    "Home Cooking",
    "Personal Finance",
    "Marine Biology",
    "Philosophy",
    "Travel",
    "Memoir",
    "Astronomy",
];

const SIGNATURES_PER_GENRE: usize = 5;
const MARKERS_PER_BRANCH: usize = 4;
const FILLERS: usize = 60;
const BLURB_LEN: usize = 26;
const REVIEW_LEN: usize = 24;
const REVIEWS_PER_BOOK: usize = 3;
/// Chance that a noisy text carries the signature of one genre the book lacks.
const DECOY_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusKind {
    Separable,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticConfig {
    pub books: usize,
    pub genres_per_branch: usize,
    pub seed: u64,
    pub kind: CorpusKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub taxonomy: Taxonomy,
    pub books: Vec<BookRecord>,
}

fn branch_prefix(branch: Branch) -> &'static str {
    match branch {
        Branch::Fiction => "fic",
        Branch::Nonfiction => "non",
    }
}

/// Tokens that identify genre `genre` of `branch`.
pub fn signature_tokens(branch: Branch, genre: usize) -> Vec<String> {
    (0..SIGNATURES_PER_GENRE)
        .map(|j| format!("{}{genre}sig{j}", branch_prefix(branch)))
        .collect()
}

/// Tokens that identify `branch` regardless of genre.
pub fn marker_tokens(branch: Branch) -> Vec<String> {
    (0..MARKERS_PER_BRANCH)
        .map(|j| format!("{}mark{j}", branch_prefix(branch)))
        .collect()
}

fn filler(rng: &mut ChaCha8Rng) -> String {
    format!("filler{}", rng.gen_range(0..FILLERS))
}

fn pick(rng: &mut ChaCha8Rng, pool: &[String], n: usize, out: &mut Vec<String>) {
    for _ in 0..n {
        out.push(pool.choose(rng).expect("non-empty pool").clone());
    }
}

/// Pads with filler to `len`, shuffles and renders as a sentence.
fn render(rng: &mut ChaCha8Rng, mut words: Vec<String>, len: usize) -> String {
    while words.len() < len {
        words.push(filler(rng));
    }
    words.shuffle(rng);
    let mut text = words.join(" ");
    text.push('.');
    text
}

/// Signals carried by one text: genres whose signatures appear, decoy genres
/// and whether the branch markers appear.
struct Signal {
    genres: Vec<usize>,
    decoys: Vec<usize>,
    markers: bool,
}

fn text_with(rng: &mut ChaCha8Rng, branch: Branch, s: &Signal, per_genre: usize, len: usize) -> String {
    let mut words = Vec::new();
    for &g in s.genres.iter().chain(&s.decoys) {
        pick(rng, &signature_tokens(branch, g), per_genre, &mut words);
    }
    if s.markers {
        pick(rng, &marker_tokens(branch), 2, &mut words);
    }
    render(rng, words, len)
}

impl SyntheticCorpus {
    pub fn generate(cfg: &SyntheticConfig) -> Result<Self> {
        let k = cfg.genres_per_branch;
        if !(2..=FICTION_GENRES.len()).contains(&k) {
            return Err(Error::config(format!(
                "genres_per_branch must lie in 2..={}, got {k}",
                FICTION_GENRES.len()
            )));
        }
        if cfg.books < 10 {
            return Err(Error::config("a synthetic corpus needs at least 10 books"));
        }
        let taxonomy = Taxonomy::new(
            FICTION_GENRES[..k].iter().map(|s| s.to_string()).collect(),
            NONFICTION_GENRES[..k].iter().map(|s| s.to_string()).collect(),
        )?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut books = Vec::with_capacity(cfg.books);
        for i in 0..cfg.books {
            let branch = if i % 2 == 0 {
                Branch::Fiction
            } else {
                Branch::Nonfiction
            };
            let n_labels = if rng.gen_bool(0.35) { 2 } else { 1 };
            let mut all: Vec<usize> = (0..k).collect();
            all.shuffle(&mut rng);
            let genres: Vec<usize> = all[..n_labels].to_vec();
            let others: Vec<usize> = all[n_labels..].to_vec();

            let (blurb_sig, review_sig) = match cfg.kind {
                CorpusKind::Separable => {
                    let s = || Signal {
                        genres: genres.clone(),
                        decoys: Vec::new(),
                        markers: true,
                    };
                    (s(), s())
                }
                CorpusKind::Noisy => {
                    let mut draw = |p_genre: f64, p_marker: f64| Signal {
                        genres: genres.iter().copied().filter(|_| rng.gen_bool(p_genre)).collect(),
                        decoys: if rng.gen_bool(DECOY_RATE) {
                            others.choose(&mut rng).copied().into_iter().collect()
                        } else {
                            Vec::new()
                        },
                        markers: rng.gen_bool(p_marker),
                    };
                    let review = draw(0.7, 0.8);
                    let blurb = draw(0.55, 0.6);
                    (blurb, review)
                }
            };

            let blurb = text_with(&mut rng, branch, &blurb_sig, 3, BLURB_LEN);
            let mut reviews: Vec<String> = (0..REVIEWS_PER_BOOK)
                .map(|_| text_with(&mut rng, branch, &review_sig, 3, REVIEW_LEN))
                .collect();
            let off_topic = render(&mut rng, Vec::new(), REVIEW_LEN);
            let at = rng.gen_range(0..=reviews.len());
            reviews.insert(at, off_topic);

            let mut level2 = vec![false; k];
            for &g in &genres {
                level2[g] = true;
            }
            books.push(BookRecord {
                id: format!("book{i:04}"),
                blurb,
                reviews,
                level1: branch,
                level2,
            });
        }
        Ok(Self { taxonomy, books })
    }

    /// Writes `books.jsonl` and `taxonomy.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let dataset = dir.join("books.jsonl");
        let taxonomy = dir.join("taxonomy.json");
        write_dataset(fs::File::create(&dataset)?, &self.books, &self.taxonomy)?;
        fs::write(&taxonomy, serde_json::to_string_pretty(&self.taxonomy)?)?;
        Ok((dataset, taxonomy))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_dataset, tokenize};

    fn cfg(kind: CorpusKind) -> SyntheticConfig {
        SyntheticConfig {
            books: 20,
            genres_per_branch: 3,
            seed: 5,
            kind,
        }
    }

    #[test]
    fn separable_blurbs_carry_every_label() {
        let c = SyntheticCorpus::generate(&cfg(CorpusKind::Separable)).unwrap();
        for b in &c.books {
            let toks = tokenize(&b.blurb);
            assert!(toks.len() >= 20);
            for (g, &on) in b.level2.iter().enumerate() {
                let sig = signature_tokens(b.level1, g);
                assert_eq!(toks.iter().any(|t| sig.contains(t)), on, "{} genre {g}", b.id);
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = SyntheticCorpus::generate(&cfg(CorpusKind::Noisy)).unwrap();
        let b = SyntheticCorpus::generate(&cfg(CorpusKind::Noisy)).unwrap();
        assert_eq!(a, b);
        let c = SyntheticCorpus::generate(&SyntheticConfig {
            seed: 6,
            ..cfg(CorpusKind::Noisy)
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn written_files_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let c = SyntheticCorpus::generate(&cfg(CorpusKind::Separable)).unwrap();
        let (d, t) = c.write(dir.path()).unwrap();
        let tax = Taxonomy::load(&t).unwrap();
        assert_eq!(tax, c.taxonomy);
        assert_eq!(load_dataset(&d, &tax).unwrap(), c.books);
    }
}
