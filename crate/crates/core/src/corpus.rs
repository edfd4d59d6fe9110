//! Book records, the genre taxonomy, text cleanup and dataset splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarse label. Doubles as the name of a Level-2 branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Fiction,
    Nonfiction,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Fiction, Branch::Nonfiction];

    /// Binary target used by the Level-1 classifier (nonfiction = 1).
    pub fn as_target(self) -> f64 {
        match self {
            Branch::Fiction => 0.0,
            Branch::Nonfiction => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Fiction => "fiction",
            Branch::Nonfiction => "nonfiction",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fiction" => Ok(Branch::Fiction),
            "nonfiction" => Ok(Branch::Nonfiction),
            other => Err(Error::data(format!("unknown level1 label `{other}`"))),
        }
    }
}

/// Ordered genre names per branch; list order is the label-vector order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    fiction: Vec<String>,
    nonfiction: Vec<String>,
}

impl Taxonomy {
    pub fn new(fiction: Vec<String>, nonfiction: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for name in fiction.iter().chain(&nonfiction) {
            if !seen.insert(name.as_str()) {
                return Err(Error::data(format!("genre `{name}` listed twice in taxonomy")));
            }
        }
        if fiction.is_empty() || nonfiction.is_empty() {
            return Err(Error::data("taxonomy branches must be non-empty"));
        }
        Ok(Self { fiction, nonfiction })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let raw: Taxonomy = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        Self::new(raw.fiction, raw.nonfiction)
    }

    pub fn genres(&self, branch: Branch) -> &[String] {
        match branch {
            Branch::Fiction => &self.fiction,
            Branch::Nonfiction => &self.nonfiction,
        }
    }

    pub fn len(&self, branch: Branch) -> usize {
        self.genres(branch).len()
    }

    /// Fiction genres followed by non-fiction genres; the label space of the flat model.
    pub fn all_genres(&self) -> Vec<String> {
        self.fiction.iter().chain(&self.nonfiction).cloned().collect()
    }

    pub fn index_of(&self, branch: Branch, genre: &str) -> Option<usize> {
        self.genres(branch).iter().position(|g| g == genre)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookRecord {
    pub id: String,
    pub blurb: String,
    pub reviews: Vec<String>,
    pub level1: Branch,
    /// Indicator vector over `taxonomy.genres(level1)`.
    pub level2: Vec<bool>,
}

impl BookRecord {
    /// Label vector over the flat label space (fiction block, then non-fiction block).
    pub fn flat_labels(&self, taxonomy: &Taxonomy) -> Vec<bool> {
        let mut out = vec![false; taxonomy.len(Branch::Fiction) + taxonomy.len(Branch::Nonfiction)];
        let offset = match self.level1 {
            Branch::Fiction => 0,
            Branch::Nonfiction => taxonomy.len(Branch::Fiction),
        };
        out[offset..offset + self.level2.len()].copy_from_slice(&self.level2);
        out
    }
}

/// On-disk JSONL line.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BookLine {
    id: String,
    blurb: String,
    reviews: Vec<String>,
    level1: Branch,
    level2: Vec<String>,
}

fn book_from_line(line: BookLine, taxonomy: &Taxonomy) -> std::result::Result<BookRecord, String> {
    let branch = line.level1;
    let mut level2 = vec![false; taxonomy.len(branch)];
    for genre in &line.level2 {
        match taxonomy.index_of(branch, genre) {
            Some(i) => level2[i] = true,
            None => {
                return Err(format!(
                    "book `{}`: genre `{genre}` is not in the {branch} branch",
                    line.id
                ))
            }
        }
    }
    if !level2.iter().any(|&b| b) {
        return Err(format!("book `{}` has no level2 genre", line.id));
    }
    Ok(BookRecord {
        id: line.id,
        blurb: line.blurb,
        reviews: line.reviews,
        level1: branch,
        level2,
    })
}

/// Reads a JSONL dataset, validating every line against `taxonomy`.
///
/// Blank lines are skipped. Errors carry the 1-based line number.
pub fn load_dataset(path: impl AsRef<Path>, taxonomy: &Taxonomy) -> Result<Vec<BookRecord>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut books = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let raw: BookLine = serde_json::from_str(&line).map_err(|e| parse_err(format!("malformed JSON: {e}")))?;
        let book = book_from_line(raw, taxonomy).map_err(parse_err)?;
        if !ids.insert(book.id.clone()) {
            return Err(parse_err(format!("duplicate id `{}`", book.id)));
        }
        books.push(book);
    }
    Ok(books)
}

/// Writes books in the same JSONL schema `load_dataset` reads.
pub fn write_dataset<W: Write>(mut out: W, books: &[BookRecord], taxonomy: &Taxonomy) -> Result<()> {
    for b in books {
        let genres = taxonomy.genres(b.level1);
        let line = BookLine {
            id: b.id.clone(),
            blurb: b.blurb.clone(),
            reviews: b.reviews.clone(),
            level1: b.level1,
            level2: b
                .level2
                .iter()
                .zip(genres)
                .filter(|(on, _)| **on)
                .map(|(_, g)| g.clone())
                .collect(),
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // pictographs, emoticons, transport, flags, skin tones
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2B00..=0x2BFF   // arrows and stars
        | 0x2300..=0x23FF   // misc technical (watch, hourglass, media keys)
        | 0xFE00..=0xFE0F   // variation selectors
        | 0x200D            // zero-width joiner
        | 0x20E3            // keycap
        | 0xE0020..=0xE007F // tag sequences
    )
}

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").expect("valid url regex"))
}

/// Longest run of one character kept by [`preprocess_text`].
pub const MAX_REPEAT: usize = 3;

/// Removes emojis and URLs, caps character runs at three and normalises whitespace.
///
/// Emojis go first so that a pictograph inside a link cannot split it.
pub fn preprocess_text(raw: &str) -> String {
    let no_emoji: String = raw.chars().filter(|&c| !is_emoji(c)).collect();
    let no_url = url_pattern().replace_all(&no_emoji, " ");

    let mut collapsed = String::with_capacity(no_url.len());
    let mut prev = None;
    let mut run = 0;
    for c in no_url.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= MAX_REPEAT {
            collapsed.push(c);
        }
    }
    collapsed.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        include_str!("../data/stopwords.txt")
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Lowercases, splits on non-alphanumeric characters and drops stopwords and
/// single-character tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| t.chars().count() >= 2 && !is_stopword(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

/// Splits `n` items in `sizes` proportions across strata using the
/// largest-remainder rule, ties broken by stratum order.
fn apportion(total: usize, strata: &[usize]) -> Vec<usize> {
    let n: usize = strata.iter().sum();
    if n == 0 {
        return vec![0; strata.len()];
    }
    let mut alloc: Vec<usize> = strata.iter().map(|&s| total * s / n).collect();
    let mut rest: Vec<(usize, usize)> = strata.iter().enumerate().map(|(i, &s)| (i, (total * s) % n)).collect();
    rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut missing = total - alloc.iter().sum::<usize>();
    for (i, _) in rest {
        if missing == 0 {
            break;
        }
        if alloc[i] < strata[i] {
            alloc[i] += 1;
            missing -= 1;
        }
    }
    alloc
}

/// Deterministic 7:1:2 split stratified by the Level-1 label.
///
/// Split sizes are `floor(0.7n)`, `floor(0.1n)` and the remainder. Each split
/// lists ids in dataset order.
pub fn split_dataset(books: &[BookRecord], seed: u64) -> Result<DatasetSplit> {
    let n = books.len();
    if n < 10 {
        return Err(Error::data(format!("need at least 10 books to split, got {n}")));
    }
    let n_train = n * 7 / 10;
    let n_val = n / 10;

    let mut strata: BTreeMap<Branch, Vec<usize>> = BTreeMap::new();
    for (i, b) in books.iter().enumerate() {
        strata.entry(b.level1).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for members in strata.values_mut() {
        members.shuffle(&mut rng);
    }
    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let train_alloc = apportion(n_train, &sizes);
    let remaining: Vec<usize> = sizes.iter().zip(&train_alloc).map(|(s, t)| s - t).collect();
    let val_alloc = apportion(n_val, &remaining);

    let mut bucket = vec![2u8; n];
    for (k, members) in strata.values().enumerate() {
        for &i in &members[..train_alloc[k]] {
            bucket[i] = 0;
        }
        for &i in &members[train_alloc[k]..train_alloc[k] + val_alloc[k]] {
            bucket[i] = 1;
        }
    }
    let pick = |which: u8| {
        books
            .iter()
            .zip(&bucket)
            .filter(|(_, &b)| b == which)
            .map(|(book, _)| book.id.clone())
            .collect::<Vec<_>>()
    };
    Ok(DatasetSplit {
        train: pick(0),
        val: pick(1),
        test: pick(2),
    })
}
