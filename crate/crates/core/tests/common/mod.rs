#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use higemine::config::Config;
use higemine::corpus::Branch;
use higemine::labelgraph::{compute_cooccurrence, threshold_cooccurrence};
use higemine::model::{DualGraph, HeadKind, Level2Dims, Parameters, PathDims};
use higemine::sparse::{normalize_adjacency, DenseMatrix, SparseMatrix};
use higemine::synthetic::{CorpusKind, SyntheticConfig, SyntheticCorpus};
use higemine::tape::Gradients;
use higemine::textgraph::{build_text_graph, GraphKind};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

pub fn toks(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

pub const VOCAB: [&str; 5] = ["atlas", "bramble", "cinder", "delta", "ember"];

/// Three documents over five tokens, one graph per modality, normalised.
pub struct TinyGraphs {
    pub blurb_adj: SparseMatrix,
    pub review_adj: SparseMatrix,
    pub blurb_x: DenseMatrix,
    pub review_x: DenseMatrix,
    pub n_docs: usize,
}

impl TinyGraphs {
    pub fn new(width: usize, seed: u64) -> Self {
        let vocab = toks(&VOCAB);
        let blurbs = vec![
            ("d0".to_string(), toks(&["atlas", "bramble", "cinder", "atlas"])),
            ("d1".to_string(), toks(&["bramble", "delta"])),
            ("d2".to_string(), toks(&["cinder", "ember", "atlas", "delta", "ember"])),
        ];
        let reviews = vec![
            ("d0".to_string(), toks(&["ember", "delta", "atlas"])),
            ("d1".to_string(), toks(&["cinder", "cinder", "bramble", "ember"])),
            ("d2".to_string(), toks(&["atlas", "bramble"])),
        ];
        let b = build_text_graph(&blurbs, &vocab, 3, GraphKind::Blurb).unwrap();
        let r = build_text_graph(&reviews, &vocab, 3, GraphKind::Review).unwrap();
        let mut g = rng(seed);
        Self {
            blurb_adj: normalize_adjacency(&b.adjacency).unwrap(),
            review_adj: normalize_adjacency(&r.adjacency).unwrap(),
            blurb_x: random_matrix(8, width, &mut g),
            review_x: random_matrix(8, width, &mut g),
            n_docs: 3,
        }
    }

    pub fn dual(&self) -> DualGraph<'_> {
        DualGraph {
            blurb_adj: &self.blurb_adj,
            review_adj: &self.review_adj,
            blurb_features: &self.blurb_x,
            review_features: &self.review_x,
            n_docs: self.n_docs,
        }
    }
}

pub fn path_dims(input: usize, output: usize) -> PathDims {
    PathDims {
        input,
        gcn1: 4,
        gcn2: 3,
        hidden: 3,
        output,
    }
}

pub fn level2_dims(head: HeadKind, learn_label_offsets: bool) -> Level2Dims {
    Level2Dims {
        path: path_dims(4, 3),
        labels: 3,
        label_dim: 4,
        label_gcn1: 3,
        label_gcn2: 2,
        head,
        learn_label_offsets,
    }
}

/// Normalised graph over three labels from a small co-occurrence fixture.
pub fn label_adj3() -> SparseMatrix {
    let sets = vec![
        vec![true, true, false],
        vec![true, false, false],
        vec![false, true, true],
        vec![true, true, true],
    ];
    let m = compute_cooccurrence(&sets, 3).unwrap();
    let names = toks(&["x", "y", "z"]);
    let g = threshold_cooccurrence(&m, 0.1, 0.9, names).unwrap();
    normalize_adjacency(&g.adjacency).unwrap()
}

/// Outcome of a finite-difference sweep over every trainable entry.
#[derive(Debug)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst: String,
    pub checked: usize,
    /// Entries whose one-sided differences disagree, i.e. a ReLU input lies
    /// within `eps` of zero and central differences are meaningless there.
    pub kinks: Vec<String>,
}

/// Compares analytic gradients with central differences. The relative error
/// is `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check<M: Parameters + Clone>(
    model: &M,
    grads: &Gradients,
    eps: f64,
    loss: impl Fn(&M) -> f64,
) -> GradCheck {
    let mut out = GradCheck {
        max_rel_error: 0.0,
        worst: String::new(),
        checked: 0,
        kinks: Vec::new(),
    };
    let base = loss(model);
    let names: Vec<String> = model
        .tensors()
        .into_iter()
        .map(|(n, _)| n)
        .filter(|n| model.is_trainable(n))
        .collect();
    for name in names {
        let param = model.tensors().into_iter().find(|(n, _)| *n == name).unwrap().1;
        let analytic = grads.get_or_zeros(param);
        let len = param.as_slice().len();
        for i in 0..len {
            let eval = |delta: f64| {
                let mut m = model.clone();
                let mut ts = m.tensors_mut();
                let t = &mut ts.iter_mut().find(|(n, _)| *n == name).unwrap().1;
                t.as_mut_slice()[i] += delta;
                drop(ts);
                loss(&m)
            };
            let (up, down) = (eval(eps), eval(-eps));
            let numeric = (up - down) / (2.0 * eps);
            let (fwd, bwd) = ((up - base) / eps, (base - down) / eps);
            if (fwd - bwd).abs() > (0.1 * fwd.abs().max(bwd.abs())).max(1e-5) {
                out.kinks.push(format!("{name}[{i}]"));
            }
            let a = analytic.as_slice()[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            if rel > out.max_rel_error {
                out.max_rel_error = rel;
                out.worst = format!("{name}[{i}] analytic {a:e} numeric {numeric:e}");
            }
            out.checked += 1;
        }
    }
    out
}

pub fn bits(m: &DenseMatrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}

/// Small-dimension config over a synthetic corpus written into `dir`.
pub fn synthetic_config(dir: &Path, books: usize, seed: u64, kind: CorpusKind) -> Config {
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        books,
        genres_per_branch: 3,
        seed,
        kind,
    })
    .unwrap();
    let (dataset, taxonomy) = corpus.write(dir).unwrap();
    Config {
        dataset,
        taxonomy,
        output_dir: dir.join("out"),
        hash_dim: 16,
        label_dim: 16,
        gcn1: 32,
        gcn2: 16,
        hidden: 16,
        output_dim: 16,
        label_gcn1: 16,
        label_gcn2: 16,
        learning_rate: 0.01,
        epochs: 40,
        patience: 0,
        seed,
        split_seed: seed,
        ..Config::default()
    }
}

pub fn branches() -> [Branch; 2] {
    Branch::ALL
}

// Brute-force references. They recount everything cell by cell and share no
// code with the library beyond the input types.

pub fn oracle_tfidf(docs: &[Vec<String>], vocab: &[String]) -> Vec<Vec<f64>> {
    let n = docs.len() as f64;
    let mut out = vec![vec![0.0; vocab.len()]; docs.len()];
    for (j, term) in vocab.iter().enumerate() {
        let df = docs.iter().filter(|d| d.contains(term)).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
        for (i, d) in docs.iter().enumerate() {
            let tf = d.iter().filter(|t| *t == term).count();
            if tf > 0 {
                out[i][j] = tf as f64 * idf;
            }
        }
    }
    out
}

pub fn oracle_ppmi(docs: &[Vec<String>], vocab: &[String], window: usize) -> Vec<Vec<f64>> {
    let mut windows: Vec<Vec<String>> = Vec::new();
    for d in docs {
        let kept: Vec<String> = d.iter().filter(|t| vocab.contains(t)).cloned().collect();
        if kept.is_empty() {
            continue;
        }
        if kept.len() <= window {
            windows.push(kept);
        } else {
            for start in 0..=kept.len() - window {
                windows.push(kept[start..start + window].to_vec());
            }
        }
    }
    let w = windows.len() as f64;
    let m = vocab.len();
    let mut out = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in 0..m {
            if a == b {
                continue;
            }
            let ca = windows.iter().filter(|s| s.contains(&vocab[a])).count();
            let cb = windows.iter().filter(|s| s.contains(&vocab[b])).count();
            let cab = windows
                .iter()
                .filter(|s| s.contains(&vocab[a]) && s.contains(&vocab[b]))
                .count();
            if cab == 0 {
                continue;
            }
            let pmi = ((cab as f64 / w) / ((ca as f64 / w) * (cb as f64 / w))).ln();
            if pmi > 0.0 {
                out[a][b] = pmi;
            }
        }
    }
    out
}

pub fn oracle_normalize(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut with_loops = a.to_vec();
    for (i, row) in with_loops.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let deg: Vec<f64> = with_loops.iter().map(|r| r.iter().sum()).collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if with_loops[i][j] != 0.0 {
                out[i][j] = with_loops[i][j] / (deg[i] * deg[j]).sqrt();
            }
        }
    }
    out
}

/// `(f1 micro, f1 macro, ba micro, ba macro, hamming)` counted cell by cell.
pub fn oracle_metrics(pred: &[Vec<bool>], truth: &[Vec<bool>]) -> (f64, f64, f64, f64, f64) {
    let n = pred.len();
    let k = pred[0].len();
    let count = |j: Option<usize>, p: bool, t: bool| -> usize {
        let mut c = 0;
        for i in 0..n {
            for jj in 0..k {
                if j.is_some_and(|j| j != jj) {
                    continue;
                }
                if pred[i][jj] == p && truth[i][jj] == t {
                    c += 1;
                }
            }
        }
        c
    };
    let f1 = |tp: usize, fp: usize, fn_: usize| {
        if 2 * tp + fp + fn_ == 0 {
            0.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    let ba = |tp: usize, fp: usize, tn: usize, fn_: usize| -> Option<f64> {
        let sens = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
        let spec = (tn + fp > 0).then(|| tn as f64 / (tn + fp) as f64);
        match (sens, spec) {
            (Some(a), Some(b)) => Some((a + b) / 2.0),
            (Some(a), None) | (None, Some(a)) => Some(a),
            (None, None) => None,
        }
    };
    let all = |p, t| count(None, p, t);
    let f1_micro = f1(all(true, true), all(true, false), all(false, true));
    let ba_micro = ba(all(true, true), all(true, false), all(false, false), all(false, true)).unwrap_or(0.0);
    let mut f1_sum = 0.0;
    let mut ba_sum = 0.0;
    let mut ba_n = 0;
    for j in 0..k {
        let c = |p, t| count(Some(j), p, t);
        f1_sum += f1(c(true, true), c(true, false), c(false, true));
        if let Some(v) = ba(c(true, true), c(true, false), c(false, false), c(false, true)) {
            ba_sum += v;
            ba_n += 1;
        }
    }
    let wrong = all(true, false) + all(false, true);
    (
        f1_micro,
        f1_sum / k as f64,
        ba_micro,
        if ba_n == 0 { 0.0 } else { ba_sum / ba_n as f64 },
        wrong as f64 / (n * k) as f64,
    )
}

pub fn random_bool_matrix(rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<bool>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_bool(p)).collect())
        .collect()
}

#[derive(serde::Deserialize)]
pub struct GraphFixture {
    pub window: usize,
    pub vocab: Vec<String>,
    pub docs: Vec<Vec<String>>,
}

/// Every shipped graph fixture with its file name.
pub fn graph_fixtures() -> Vec<(String, GraphFixture)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/graphs");
    let mut out: Vec<(String, GraphFixture)> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let f = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
            (p.file_name().unwrap().to_string_lossy().into_owned(), f)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Random symmetric non-negative `n × n` adjacency, roughly half the pairs connected.
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            if rng.gen_bool(0.5) {
                let w = rng.gen_range(0.0..3.0);
                a[i][j] = w;
                a[j][i] = w;
            }
        }
    }
    a
}

pub fn dense_rows(a: &[Vec<f64>]) -> DenseMatrix {
    DenseMatrix::from_rows(a).unwrap()
}
