//! GCN layers, the dual-path graph unit, the label network and the two
//! classifier heads built from them.
//!
//! Every forward pass is recorded on a [`Tape`], so the same code serves
//! inference and training.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelgraph::LabelEmbeddings;
use crate::sparse::{DenseMatrix, SparseMatrix};
use crate::tape::{Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let bound = (6.0 / (rows + cols).max(1) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..bound)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("finite init")
}

/// Affine map `x·W + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: DenseMatrix,
    /// Single row.
    pub bias: DenseMatrix,
}

impl Affine {
    pub fn new(input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            weight: glorot(input, output, rng),
            bias: DenseMatrix::zeros(1, output),
        }
    }

    fn tensors(&self, prefix: &str) -> Vec<(String, &DenseMatrix)> {
        vec![
            (format!("{prefix}.weight"), &self.weight),
            (format!("{prefix}.bias"), &self.bias),
        ]
    }

    fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut DenseMatrix)> {
        vec![
            (format!("{prefix}.weight"), &mut self.weight),
            (format!("{prefix}.bias"), &mut self.bias),
        ]
    }
}

/// One graph convolution `σ(Â·X·W + θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnLayerParams {
    pub weight: DenseMatrix,
    pub bias: DenseMatrix,
    pub activation: Activation,
}

impl GcnLayerParams {
    pub fn new(input: usize, output: usize, activation: Activation, rng: &mut ChaCha8Rng) -> Self {
        Self {
            weight: glorot(input, output, rng),
            bias: DenseMatrix::zeros(1, output),
            activation,
        }
    }

    fn tensors(&self, prefix: &str) -> Vec<(String, &DenseMatrix)> {
        vec![
            (format!("{prefix}.weight"), &self.weight),
            (format!("{prefix}.bias"), &self.bias),
        ]
    }

    fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut DenseMatrix)> {
        vec![
            (format!("{prefix}.weight"), &mut self.weight),
            (format!("{prefix}.bias"), &mut self.bias),
        ]
    }
}

/// Widths of one graph path: node features, the two GCN layers, the hidden
/// dense layer and the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDims {
    pub input: usize,
    pub gcn1: usize,
    pub gcn2: usize,
    pub hidden: usize,
    pub output: usize,
}

impl PathDims {
    /// Width of `[X | h1 | h2]` fed to the dense head.
    pub fn concat_width(&self) -> usize {
        self.input + self.gcn1 + self.gcn2
    }
}

/// Two GCN layers followed by a two-layer dense head.
#[derive(Debug, Clone, PartialEq)]
pub struct PathParams {
    pub gcn1: GcnLayerParams,
    pub gcn2: GcnLayerParams,
    pub dense1: Affine,
    pub dense2: Affine,
}

impl PathParams {
    pub fn new(d: &PathDims, rng: &mut ChaCha8Rng) -> Self {
        Self {
            gcn1: GcnLayerParams::new(d.input, d.gcn1, Activation::Relu, rng),
            gcn2: GcnLayerParams::new(d.gcn1, d.gcn2, Activation::Relu, rng),
            dense1: Affine::new(d.concat_width(), d.hidden, rng),
            dense2: Affine::new(d.hidden, d.output, rng),
        }
    }

    fn tensors(&self, prefix: &str) -> Vec<(String, &DenseMatrix)> {
        let mut v = self.gcn1.tensors(&format!("{prefix}.gcn1"));
        v.extend(self.gcn2.tensors(&format!("{prefix}.gcn2")));
        v.extend(self.dense1.tensors(&format!("{prefix}.dense1")));
        v.extend(self.dense2.tensors(&format!("{prefix}.dense2")));
        v
    }

    fn tensors_mut(&mut self, prefix: &str) -> Vec<(String, &mut DenseMatrix)> {
        let mut v = self.gcn1.tensors_mut(&format!("{prefix}.gcn1"));
        v.extend(self.gcn2.tensors_mut(&format!("{prefix}.gcn2")));
        v.extend(self.dense1.tensors_mut(&format!("{prefix}.dense1")));
        v.extend(self.dense2.tensors_mut(&format!("{prefix}.dense2")));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelNetDims {
    /// Label embedding width.
    pub input: usize,
    pub gcn1: usize,
    pub gcn2: usize,
    /// Must equal the path output width.
    pub output: usize,
}

/// Two GCN layers over the label graph and a dense projection of `[X_c | h1 | h2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelNetParams {
    pub gcn1: GcnLayerParams,
    pub gcn2: GcnLayerParams,
    pub dense: Affine,
}

impl LabelNetParams {
    pub fn new(d: &LabelNetDims, rng: &mut ChaCha8Rng) -> Self {
        Self {
            gcn1: GcnLayerParams::new(d.input, d.gcn1, Activation::Relu, rng),
            gcn2: GcnLayerParams::new(d.gcn1, d.gcn2, Activation::Relu, rng),
            dense: Affine::new(d.input + d.gcn1 + d.gcn2, d.output, rng),
        }
    }
}

pub fn record_affine<'a>(tape: &mut Tape<'a>, x: Var, p: &'a Affine) -> Result<Var> {
    let w = tape.param(&p.weight);
    let xw = tape.matmul(x, w)?;
    let b = tape.param(&p.bias);
    tape.add_bias(xw, b)
}

pub fn record_gcn_layer<'a>(
    tape: &mut Tape<'a>,
    a_hat: &'a SparseMatrix,
    x: Var,
    p: &'a GcnLayerParams,
) -> Result<Var> {
    let ax = tape.spmm(a_hat, x)?;
    let w = tape.param(&p.weight);
    let axw = tape.matmul(ax, w)?;
    let b = tape.param(&p.bias);
    let z = tape.add_bias(axw, b)?;
    Ok(match p.activation {
        Activation::Relu => tape.relu(z),
        Activation::Identity => z,
    })
}

/// Two GCN layers, concatenation with the input features, truncation to the
/// first `n_docs` rows, then `dense2(relu(dense1(·)))`. Output is raw scores.
pub fn record_graph_unit<'a>(
    tape: &mut Tape<'a>,
    a_hat: &'a SparseMatrix,
    x1: Var,
    n_docs: usize,
    p: &'a PathParams,
) -> Result<Var> {
    let h1 = record_gcn_layer(tape, a_hat, x1, &p.gcn1)?;
    let h2 = record_gcn_layer(tape, a_hat, h1, &p.gcn2)?;
    // Truncating each block before concatenation equals truncating the concatenation.
    let parts = [
        tape.top_rows(x1, n_docs)?,
        tape.top_rows(h1, n_docs)?,
        tape.top_rows(h2, n_docs)?,
    ];
    let x2 = tape.concat(&parts)?;
    let d1 = record_affine(tape, x2, &p.dense1)?;
    let d1 = tape.relu(d1);
    record_affine(tape, d1, &p.dense2)
}

pub fn record_label_network<'a>(
    tape: &mut Tape<'a>,
    a_c: &'a SparseMatrix,
    x_c: Var,
    p: &'a LabelNetParams,
) -> Result<Var> {
    let h1 = record_gcn_layer(tape, a_c, x_c, &p.gcn1)?;
    let h2 = record_gcn_layer(tape, a_c, h1, &p.gcn2)?;
    let cat = tape.concat(&[x_c, h1, h2])?;
    record_affine(tape, cat, &p.dense)
}

pub fn gcn_layer(a_hat: &SparseMatrix, x: &DenseMatrix, p: &GcnLayerParams) -> Result<DenseMatrix> {
    let mut tape = Tape::new();
    let xv = tape.input(x.clone());
    let out = record_gcn_layer(&mut tape, a_hat, xv, p)?;
    Ok(tape.value(out).clone())
}

pub fn graph_unit(a_hat: &SparseMatrix, x1: &DenseMatrix, n_docs: usize, p: &PathParams) -> Result<DenseMatrix> {
    let mut tape = Tape::new();
    let xv = tape.input(x1.clone());
    let out = record_graph_unit(&mut tape, a_hat, xv, n_docs, p)?;
    Ok(tape.value(out).clone())
}

pub fn label_network(a_c: &SparseMatrix, x_c: &DenseMatrix, p: &LabelNetParams) -> Result<DenseMatrix> {
    let mut tape = Tape::new();
    let xv = tape.input(x_c.clone());
    let out = record_label_network(&mut tape, a_c, xv, p)?;
    Ok(tape.value(out).clone())
}

/// Normalised blurb and review graphs with their node features. Documents
/// occupy the first `n_docs` rows of both graphs, in the same order.
#[derive(Debug, Clone, Copy)]
pub struct DualGraph<'a> {
    pub blurb_adj: &'a SparseMatrix,
    pub review_adj: &'a SparseMatrix,
    pub blurb_features: &'a DenseMatrix,
    pub review_features: &'a DenseMatrix,
    pub n_docs: usize,
}

impl DualGraph<'_> {
    fn check(&self, input_width: usize) -> Result<()> {
        for (name, adj, feat) in [
            ("blurb", self.blurb_adj, self.blurb_features),
            ("review", self.review_adj, self.review_features),
        ] {
            if adj.rows() != feat.rows() || feat.cols() != input_width || self.n_docs > feat.rows() {
                return Err(Error::shape(format!(
                    "{name} graph {}x{} with features {:?}, expected width {input_width} and at least {} rows",
                    adj.rows(),
                    adj.cols(),
                    feat.shape(),
                    self.n_docs
                )));
            }
        }
        Ok(())
    }
}

fn check_lambdas(lambdas: &[f64], n_docs: usize) -> Result<()> {
    if lambdas.len() != n_docs {
        return Err(Error::shape(format!(
            "{} fusion weights for {n_docs} documents",
            lambdas.len()
        )));
    }
    if let Some(l) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::config(format!("fusion weight {l} outside [0, 1]")));
    }
    Ok(())
}

/// Named tensors of a model in a fixed order, used by the optimiser and checkpoints.
pub trait Parameters {
    fn tensors(&self) -> Vec<(String, &DenseMatrix)>;
    fn tensors_mut(&mut self) -> Vec<(String, &mut DenseMatrix)>;

    /// Whether the optimiser may change this tensor.
    fn is_trainable(&self, _name: &str) -> bool {
        true
    }

    fn parameter_count(&self) -> usize {
        self.tensors()
            .iter()
            .filter(|(n, _)| self.is_trainable(n))
            .map(|(_, t)| t.rows() * t.cols())
            .sum()
    }
}

/// Recorded Level-1 forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Level1Trace {
    pub blurb_scores: Var,
    pub review_scores: Var,
    /// `n_docs × 1` fused logits.
    pub logits: Var,
}

/// Binary fiction/non-fiction classifier: one path per graph, fused by λ1.
#[derive(Debug, Clone, PartialEq)]
pub struct Level1Model {
    pub dims: PathDims,
    pub blurb: PathParams,
    pub review: PathParams,
}

impl Level1Model {
    pub fn new(dims: PathDims, seed: u64) -> Result<Self> {
        if dims.output != 1 {
            return Err(Error::config("level-1 paths must produce one score per document"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            dims,
            blurb: PathParams::new(&dims, &mut rng),
            review: PathParams::new(&dims, &mut rng),
        })
    }

    pub fn record<'a>(&'a self, tape: &mut Tape<'a>, g: &DualGraph<'a>, lambdas: &[f64]) -> Result<Level1Trace> {
        g.check(self.dims.input)?;
        check_lambdas(lambdas, g.n_docs)?;
        let xb = tape.input(g.blurb_features.clone());
        let xp = tape.input(g.review_features.clone());
        let zb = record_graph_unit(tape, g.blurb_adj, xb, g.n_docs, &self.blurb)?;
        let zp = record_graph_unit(tape, g.review_adj, xp, g.n_docs, &self.review)?;
        let logits = tape.mix(zb, zp, lambdas)?;
        Ok(Level1Trace {
            blurb_scores: zb,
            review_scores: zp,
            logits,
        })
    }

    /// Fused logit per document; apply a sigmoid for P(non-fiction).
    pub fn forward(&self, g: &DualGraph<'_>, lambdas: &[f64]) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let trace = self.record(&mut tape, g, lambdas)?;
        Ok(tape.value(trace.logits).as_slice().to_vec())
    }
}

impl Parameters for Level1Model {
    fn tensors(&self) -> Vec<(String, &DenseMatrix)> {
        let mut v = self.blurb.tensors("blurb");
        v.extend(self.review.tensors("review"));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut DenseMatrix)> {
        let mut v = self.blurb.tensors_mut("blurb");
        v.extend(self.review.tensors_mut("review"));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    /// Label co-occurrence network fused by dot products.
    Network,
    /// Per-label affine scores on the path outputs (label graph disabled).
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelHead {
    Network(LabelNetParams),
    Linear(Affine),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level2Dims {
    pub path: PathDims,
    pub labels: usize,
    pub label_dim: usize,
    pub label_gcn1: usize,
    pub label_gcn2: usize,
    pub head: HeadKind,
    /// Whether the learnable label offsets are trained.
    pub learn_label_offsets: bool,
}

/// Recorded Level-2 forward pass.
#[derive(Debug, Clone, Copy)]
pub struct Level2Trace {
    pub blurb_scores: Var,
    pub review_scores: Var,
    /// `n_docs × k'` fused logits; sigmoid gives genre probabilities.
    pub logits: Var,
}

/// Multi-label genre classifier for one branch (or the whole taxonomy in flat mode).
#[derive(Debug, Clone, PartialEq)]
pub struct Level2Model {
    pub dims: Level2Dims,
    pub blurb: PathParams,
    pub review: PathParams,
    pub head: LabelHead,
    pub label_embeddings: LabelEmbeddings,
}

impl Level2Model {
    pub fn new(dims: Level2Dims, static_labels: DenseMatrix, seed: u64) -> Result<Self> {
        if static_labels.shape() != (dims.labels, dims.label_dim) {
            return Err(Error::shape(format!(
                "static label embeddings {:?}, expected {}x{}",
                static_labels.shape(),
                dims.labels,
                dims.label_dim
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blurb = PathParams::new(&dims.path, &mut rng);
        let review = PathParams::new(&dims.path, &mut rng);
        let head = match dims.head {
            HeadKind::Network => LabelHead::Network(LabelNetParams::new(
                &LabelNetDims {
                    input: dims.label_dim,
                    gcn1: dims.label_gcn1,
                    gcn2: dims.label_gcn2,
                    output: dims.path.output,
                },
                &mut rng,
            )),
            HeadKind::Linear => LabelHead::Linear(Affine::new(dims.path.output, dims.labels, &mut rng)),
        };
        Ok(Self {
            dims,
            blurb,
            review,
            head,
            label_embeddings: LabelEmbeddings::new(static_labels),
        })
    }

    pub fn record<'a>(
        &'a self,
        tape: &mut Tape<'a>,
        g: &DualGraph<'a>,
        label_adj: &'a SparseMatrix,
        lambdas: &[f64],
    ) -> Result<Level2Trace> {
        g.check(self.dims.path.input)?;
        check_lambdas(lambdas, g.n_docs)?;
        let xb = tape.input(g.blurb_features.clone());
        let xp = tape.input(g.review_features.clone());
        let hb = record_graph_unit(tape, g.blurb_adj, xb, g.n_docs, &self.blurb)?;
        let hp = record_graph_unit(tape, g.review_adj, xp, g.n_docs, &self.review)?;
        let (zb, zp) = match &self.head {
            LabelHead::Network(p) => {
                if label_adj.rows() != self.dims.labels || label_adj.cols() != self.dims.labels {
                    return Err(Error::shape(format!(
                        "label graph {}x{} for {} labels",
                        label_adj.rows(),
                        label_adj.cols(),
                        self.dims.labels
                    )));
                }
                let xe = tape.input(self.label_embeddings.static_part.clone());
                let xc = if self.dims.learn_label_offsets {
                    let xl = tape.param(&self.label_embeddings.learnable);
                    tape.add(xe, xl)?
                } else {
                    xe
                };
                let refined = record_label_network(tape, label_adj, xc, p)?;
                (tape.matmul_t(hb, refined)?, tape.matmul_t(hp, refined)?)
            }
            LabelHead::Linear(p) => (record_affine(tape, hb, p)?, record_affine(tape, hp, p)?),
        };
        let logits = tape.mix(zb, zp, lambdas)?;
        Ok(Level2Trace {
            blurb_scores: zb,
            review_scores: zp,
            logits,
        })
    }

    /// `n_docs × k'` logits.
    pub fn forward(&self, g: &DualGraph<'_>, label_adj: &SparseMatrix, lambdas: &[f64]) -> Result<DenseMatrix> {
        let mut tape = Tape::new();
        let trace = self.record(&mut tape, g, label_adj, lambdas)?;
        Ok(tape.value(trace.logits).clone())
    }
}

impl Parameters for Level2Model {
    fn tensors(&self) -> Vec<(String, &DenseMatrix)> {
        let mut v = self.blurb.tensors("blurb");
        v.extend(self.review.tensors("review"));
        match &self.head {
            LabelHead::Network(p) => {
                v.extend(p.gcn1.tensors("label.gcn1"));
                v.extend(p.gcn2.tensors("label.gcn2"));
                v.extend(p.dense.tensors("label.dense"));
            }
            LabelHead::Linear(p) => v.extend(p.tensors("label.linear")),
        }
        v.push(("label.static".into(), &self.label_embeddings.static_part));
        v.push(("label.learnable".into(), &self.label_embeddings.learnable));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut DenseMatrix)> {
        let mut v = self.blurb.tensors_mut("blurb");
        v.extend(self.review.tensors_mut("review"));
        match &mut self.head {
            LabelHead::Network(p) => {
                v.extend(p.gcn1.tensors_mut("label.gcn1"));
                v.extend(p.gcn2.tensors_mut("label.gcn2"));
                v.extend(p.dense.tensors_mut("label.dense"));
            }
            LabelHead::Linear(p) => v.extend(p.tensors_mut("label.linear")),
        }
        v.push(("label.static".into(), &mut self.label_embeddings.static_part));
        v.push(("label.learnable".into(), &mut self.label_embeddings.learnable));
        v
    }

    fn is_trainable(&self, name: &str) -> bool {
        match name {
            "label.static" => false,
            "label.learnable" => self.dims.learn_label_offsets && matches!(self.head, LabelHead::Network(_)),
            _ => true,
        }
    }
}

/// Element-wise logistic function, stable for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn identity_gcn_layer_returns_input() {
        let x = DenseMatrix::from_rows(&[[1.0, -2.0], [0.5, 3.0], [0.0, 1.0]]).unwrap();
        let p = GcnLayerParams {
            weight: DenseMatrix::identity(2),
            bias: DenseMatrix::zeros(1, 2),
            activation: Activation::Identity,
        };
        assert_eq!(gcn_layer(&SparseMatrix::identity(3), &x, &p).unwrap(), x);
    }

    #[test]
    fn relu_of_bias_on_zero_input() {
        let p = GcnLayerParams {
            weight: DenseMatrix::filled(3, 2, 0.7),
            bias: DenseMatrix::from_rows(&[[1.0, -1.0]]).unwrap(),
            activation: Activation::Relu,
        };
        let a = SparseMatrix::from_triplets(4, 4, vec![(0, 1, 0.5), (1, 0, 0.5), (2, 2, 1.0)]).unwrap();
        let out = gcn_layer(&a, &DenseMatrix::zeros(4, 3), &p).unwrap();
        for r in 0..4 {
            assert_eq!(out.row(r), &[1.0, 0.0]);
        }
    }

    #[test]
    fn gcn_shape_mismatch() {
        let p = GcnLayerParams::new(3, 2, Activation::Relu, &mut small_rng());
        assert!(gcn_layer(&SparseMatrix::identity(2), &DenseMatrix::zeros(2, 4), &p).is_err());
    }

    #[test]
    fn graph_unit_concat_width() {
        let dims = PathDims {
            input: 3,
            gcn1: 4,
            gcn2: 2,
            hidden: 5,
            output: 1,
        };
        assert_eq!(dims.concat_width(), 9);
        let p = PathParams::new(&dims, &mut small_rng());
        assert_eq!(p.dense1.weight.rows(), 9);
        let out = graph_unit(&SparseMatrix::identity(5), &DenseMatrix::filled(5, 3, 0.1), 2, &p).unwrap();
        assert_eq!(out.shape(), (2, 1));
    }

    #[test]
    fn word_rows_activate_through_document_neighbours() {
        let dims = PathDims {
            input: 2,
            gcn1: 3,
            gcn2: 2,
            hidden: 2,
            output: 1,
        };
        let p = PathParams::new(&dims, &mut small_rng());
        // doc 0 connected to token 1; token row starts at zero
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let a = crate::sparse::normalize_adjacency(&a).unwrap();
        let x = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        let ax = crate::sparse::spmm(&a, &x).unwrap();
        assert!(ax.row(1).iter().any(|&v| v != 0.0));
        assert!(graph_unit(&a, &x, 1, &p).unwrap().is_finite());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) == 0.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn level1_requires_scalar_output() {
        let dims = PathDims {
            input: 2,
            gcn1: 2,
            gcn2: 2,
            hidden: 2,
            output: 3,
        };
        assert!(Level1Model::new(dims, 0).is_err());
    }

    #[test]
    fn label_offsets_trainability() {
        let dims = Level2Dims {
            path: PathDims {
                input: 2,
                gcn1: 2,
                gcn2: 2,
                hidden: 2,
                output: 2,
            },
            labels: 3,
            label_dim: 2,
            label_gcn1: 2,
            label_gcn2: 2,
            head: HeadKind::Network,
            learn_label_offsets: false,
        };
        let m = Level2Model::new(dims, DenseMatrix::zeros(3, 2), 1).unwrap();
        assert!(!m.is_trainable("label.learnable"));
        assert!(!m.is_trainable("label.static"));
        assert!(m.is_trainable("blurb.gcn1.weight"));
    }
}
