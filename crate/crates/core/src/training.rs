//! Losses, optimisers and the full-batch training loops for both levels.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::Branch;
use crate::error::{Error, Result};
use crate::metrics::{binary_confusion, f1_scores};
use crate::model::{sigmoid, DualGraph, Level1Model, Level2Model, Parameters, PathDims};
use crate::sparse::{DenseMatrix, SparseMatrix};
use crate::tape::{Gradients, Tape};

const PROB_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy on probabilities clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(probs: &[f64], targets: &[f64]) -> Result<f64> {
    if probs.len() != targets.len() {
        return Err(Error::shape(format!(
            "{} probabilities vs {} targets",
            probs.len(),
            targets.len()
        )));
    }
    if probs.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = probs
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / probs.len() as f64)
}

/// Stable per-element BCE on a logit.
pub fn bce_logit_term(x: f64, y: f64) -> f64 {
    x.max(0.0) - x * y + (-x.abs()).exp().ln_1p()
}

/// Weighted mean of [`bce_logit_term`] and its gradient with respect to each
/// logit. Zero-weight elements are skipped entirely, so their logits and
/// targets cannot influence either output. A zero total weight gives loss 0.
pub fn bce_with_logits(logits: &[f64], targets: &[f64], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != targets.len() || logits.len() != weights.len() {
        return Err(Error::shape(format!(
            "{} logits, {} targets, {} weights",
            logits.len(),
            targets.len(),
            weights.len()
        )));
    }
    let total_weight: f64 = weights.iter().filter(|&&w| w != 0.0).sum();
    let mut grad = vec![0.0; logits.len()];
    if total_weight == 0.0 {
        return Ok((0.0, grad));
    }
    let mut loss = 0.0;
    for i in 0..logits.len() {
        let w = weights[i];
        if w == 0.0 {
            continue;
        }
        loss += w * bce_logit_term(logits[i], targets[i]);
        grad[i] = w * (sigmoid(logits[i]) - targets[i]) / total_weight;
    }
    Ok((loss / total_weight, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment estimates for the trainable tensors, in parameter order.
#[derive(Debug, Clone, Default)]
pub struct OptimizerState {
    pub step: u64,
    m: Vec<DenseMatrix>,
    v: Vec<DenseMatrix>,
}

/// One update of every tensor in `params` from the matching entry of `grads`.
pub fn optimizer_step(
    params: &mut [&mut DenseMatrix],
    grads: &[DenseMatrix],
    state: &mut OptimizerState,
    kind: OptimizerKind,
    lr: f64,
) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::shape(format!(
            "{} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() {
            return Err(Error::shape(format!(
                "parameter {i} is {:?}, gradient is {:?}",
                p.shape(),
                g.shape()
            )));
        }
        if !g.is_finite() {
            return Err(Error::numeric(format!("non-finite gradient for parameter {i}")));
        }
    }
    state.step += 1;
    match kind {
        OptimizerKind::Sgd => {
            for (p, g) in params.iter_mut().zip(grads) {
                for (pv, gv) in p.as_mut_slice().iter_mut().zip(g.as_slice()) {
                    *pv -= lr * gv;
                }
            }
        }
        OptimizerKind::Adam { beta1, beta2, eps } => {
            if state.m.is_empty() {
                state.m = grads.iter().map(|g| DenseMatrix::zeros(g.rows(), g.cols())).collect();
                state.v = state.m.clone();
            }
            let t = state.step as i32;
            let c1 = 1.0 - beta1.powi(t);
            let c2 = 1.0 - beta2.powi(t);
            for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                let m = state.m[i].as_mut_slice();
                let v = state.v[i].as_mut_slice();
                for (j, (pv, &gv)) in p.as_mut_slice().iter_mut().zip(g.as_slice()).enumerate() {
                    m[j] = beta1 * m[j] + (1.0 - beta1) * gv;
                    v[j] = beta2 * v[j] + (1.0 - beta2) * gv * gv;
                    let m_hat = m[j] / c1;
                    let v_hat = v[j] / c2;
                    *pv -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
    Ok(())
}

/// Fusion weight setting: a fixed value, or chosen per book from input lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSetting {
    Adaptive,
    Fixed(f64),
}

impl Serialize for LambdaSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LambdaSetting::Adaptive => s.serialize_str("adaptive"),
            LambdaSetting::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for LambdaSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if (0.0..=1.0).contains(&v) => Ok(LambdaSetting::Fixed(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("lambda {v} outside [0, 1]"))),
            Raw::Text(t) if t == "adaptive" => Ok(LambdaSetting::Adaptive),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "lambda must be a number in [0, 1] or \"adaptive\", got `{t}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub lambda1: LambdaSetting,
    pub lambda2: LambdaSetting,
    pub optimizer: OptimizerKind,
    /// Epochs without validation improvement before stopping; 0 disables
    /// early stopping and keeps the final parameters.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 200,
            seed: 42,
            lambda1: LambdaSetting::Adaptive,
            lambda2: LambdaSetting::Adaptive,
            optimizer: OptimizerKind::default(),
            patience: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!(
                "learning rate {} must be >= 0",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be positive"));
        }
        for l in [self.lambda1, self.lambda2] {
            if let LambdaSetting::Fixed(v) = l {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::config(format!("lambda {v} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub model: String,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (1-based).
    pub best_epoch: usize,
    pub best_val_metric: Option<f64>,
    pub stopped_early: bool,
    pub checkpoint: Option<String>,
    pub wall_time_secs: f64,
}

impl TrainReport {
    pub fn initial_loss(&self) -> Option<f64> {
        self.epochs.first().map(|e| e.train_loss)
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_loss)
    }

    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }
}

/// Gradients of the trainable tensors, in `tensors()` order.
pub fn trainable_gradients<M: Parameters>(model: &M, grads: &Gradients) -> Vec<DenseMatrix> {
    model
        .tensors()
        .into_iter()
        .filter(|(n, _)| model.is_trainable(n))
        .map(|(_, t)| grads.get_or_zeros(t))
        .collect()
}

fn apply_step<M: Parameters>(
    model: &mut M,
    grads: &[DenseMatrix],
    state: &mut OptimizerState,
    cfg: &TrainConfig,
) -> Result<()> {
    let names: Vec<String> = model.tensors().into_iter().map(|(n, _)| n).collect();
    let trainable: Vec<bool> = names.iter().map(|n| model.is_trainable(n)).collect();
    let mut params: Vec<&mut DenseMatrix> = model
        .tensors_mut()
        .into_iter()
        .zip(trainable)
        .filter(|(_, t)| *t)
        .map(|((_, p), _)| p)
        .collect();
    optimizer_step(&mut params, grads, state, cfg.optimizer, cfg.learning_rate)
}

/// Full-batch loop shared by both levels. `loss_and_grads` evaluates the
/// training objective, `validate` scores a model on held-out rows.
fn fit<M, F, V>(
    name: &str,
    mut model: M,
    cfg: &TrainConfig,
    mut loss_and_grads: F,
    validate: Option<V>,
) -> Result<(M, TrainReport)>
where
    M: Parameters + Clone,
    F: FnMut(&M) -> Result<(f64, Vec<DenseMatrix>)>,
    V: Fn(&M) -> Result<f64>,
{
    cfg.validate()?;
    let start = Instant::now();
    let mut state = OptimizerState::default();
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, M)> = None;
    let mut stopped_early = false;
    for epoch in 1..=cfg.epochs {
        let (loss, grads) = loss_and_grads(&model)?;
        if !loss.is_finite() {
            return Err(Error::numeric(format!("{name}: loss became {loss} at epoch {epoch}")));
        }
        apply_step(&mut model, &grads, &mut state, cfg).map_err(|e| match e {
            Error::Numeric(m) => Error::numeric(format!("{name}: {m} at epoch {epoch}")),
            other => other,
        })?;
        let val_metric = match &validate {
            Some(v) => Some(v(&model)?),
            None => None,
        };
        log::debug!("{name} epoch {epoch}: loss {loss:.6} val {val_metric:?}");
        epochs.push(EpochRecord {
            epoch,
            train_loss: loss,
            val_metric,
        });
        if cfg.patience == 0 {
            continue;
        }
        if let Some(m) = val_metric {
            // ties move the kept epoch forward; small validation sets plateau often
            match &best {
                Some((b, _, _)) if m < *b => {}
                _ => best = Some((m, epoch, model.clone())),
            }
            let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
            if epoch - best_epoch >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }
    let last = epochs.len();
    let (model, best_epoch, best_val_metric) = match best {
        Some((m, e, kept)) => (kept, e, Some(m)),
        None => (model, last, epochs.last().and_then(|e| e.val_metric)),
    };
    Ok((
        model,
        TrainReport {
            model: name.to_string(),
            epochs,
            best_epoch,
            best_val_metric,
            stopped_early,
            checkpoint: None,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Inputs of the Level-1 objective. `targets[r]` is 1 for non-fiction.
#[derive(Debug, Clone, Copy)]
pub struct Level1Data<'a> {
    pub graph: DualGraph<'a>,
    pub targets: &'a [f64],
    pub train_rows: &'a [usize],
    pub val_rows: &'a [usize],
    pub lambdas: &'a [f64],
}

fn row_mask(n: usize, rows: &[usize]) -> Result<Vec<f64>> {
    let mut w = vec![0.0; n];
    for &r in rows {
        if r >= n {
            return Err(Error::shape(format!("row {r} outside {n} documents")));
        }
        w[r] = 1.0;
    }
    Ok(w)
}

/// Training loss and parameter gradients of a Level-1 model.
pub fn level1_loss_and_grads(model: &Level1Model, data: &Level1Data<'_>) -> Result<(f64, Gradients)> {
    let n = data.graph.n_docs;
    if data.targets.len() != n {
        return Err(Error::shape(format!(
            "{} targets for {n} documents",
            data.targets.len()
        )));
    }
    let weights = row_mask(n, data.train_rows)?;
    let mut tape = Tape::new();
    let trace = model.record(&mut tape, &data.graph, data.lambdas)?;
    let logits = tape.value(trace.logits).as_slice().to_vec();
    let (loss, dlogits) = bce_with_logits(&logits, data.targets, &weights)?;
    let grads = tape.backward(trace.logits, &DenseMatrix::column(&dlogits))?;
    Ok((loss, grads))
}

/// F1 of the non-fiction decision on the given rows.
pub fn level1_f1(model: &Level1Model, data: &Level1Data<'_>, rows: &[usize]) -> Result<f64> {
    let logits = model.forward(&data.graph, data.lambdas)?;
    let pred: Vec<bool> = rows.iter().map(|&r| logits[r] >= 0.0).collect();
    let truth: Vec<bool> = rows.iter().map(|&r| data.targets[r] >= 0.5).collect();
    Ok(binary_confusion(&pred, &truth)?.f1())
}

pub fn train_level1(dims: PathDims, data: &Level1Data<'_>, cfg: &TrainConfig) -> Result<(Level1Model, TrainReport)> {
    let model = Level1Model::new(dims, cfg.seed)?;
    let validate = (!data.val_rows.is_empty()).then_some(|m: &Level1Model| level1_f1(m, data, data.val_rows));
    fit(
        "level1",
        model,
        cfg,
        |m| {
            let (loss, g) = level1_loss_and_grads(m, data)?;
            Ok((loss, trainable_gradients(m, &g)))
        },
        validate,
    )
}

/// Inputs of one Level-2 objective. `targets` holds one row per document;
/// rows of documents outside `branch` are ignored.
#[derive(Debug, Clone, Copy)]
pub struct Level2Data<'a> {
    pub graph: DualGraph<'a>,
    pub label_adj: &'a SparseMatrix,
    pub targets: &'a DenseMatrix,
    /// True Level-1 label of every document.
    pub level1_truth: &'a [Branch],
    /// Branch served by this head; `None` trains a flat head on every document.
    pub branch: Option<Branch>,
    pub train_rows: &'a [usize],
    pub val_rows: &'a [usize],
    pub lambdas: &'a [f64],
}

impl Level2Data<'_> {
    fn in_branch(&self, r: usize) -> bool {
        self.branch.is_none_or(|b| self.level1_truth[r] == b)
    }

    /// Per-document loss weight: 1 for training rows whose true Level-1 label
    /// matches the branch, otherwise 0.
    pub fn row_weights(&self) -> Result<Vec<f64>> {
        let n = self.graph.n_docs;
        if self.level1_truth.len() != n {
            return Err(Error::shape(format!(
                "{} level-1 labels for {n} documents",
                self.level1_truth.len()
            )));
        }
        let mut w = row_mask(n, self.train_rows)?;
        for (r, w) in w.iter_mut().enumerate() {
            if !self.in_branch(r) {
                *w = 0.0;
            }
        }
        Ok(w)
    }

    /// Rows of `rows` that belong to the branch.
    pub fn branch_rows(&self, rows: &[usize]) -> Vec<usize> {
        rows.iter().copied().filter(|&r| self.in_branch(r)).collect()
    }
}

/// Gated training loss and parameter gradients of a Level-2 model.
pub fn level2_loss_and_grads(model: &Level2Model, data: &Level2Data<'_>) -> Result<(f64, Gradients)> {
    let n = data.graph.n_docs;
    let k = model.dims.labels;
    if data.targets.shape() != (n, k) {
        return Err(Error::shape(format!(
            "targets {:?}, expected {n}x{k}",
            data.targets.shape()
        )));
    }
    let row_w = data.row_weights()?;
    let weights: Vec<f64> = row_w.iter().flat_map(|&w| std::iter::repeat_n(w, k)).collect();
    let mut tape = Tape::new();
    let trace = model.record(&mut tape, &data.graph, data.label_adj, data.lambdas)?;
    let logits = tape.value(trace.logits).as_slice().to_vec();
    let (loss, dlogits) = bce_with_logits(&logits, data.targets.as_slice(), &weights)?;
    let upstream = DenseMatrix::from_vec(n, k, dlogits)?;
    let grads = tape.backward(trace.logits, &upstream)?;
    Ok((loss, grads))
}

/// Multi-label decisions from logits: probability ≥ `threshold`, with the
/// highest-scoring label forced on when nothing clears it.
pub fn decide_labels(logits: &[f64], threshold: f64) -> Vec<bool> {
    let mut out: Vec<bool> = logits.iter().map(|&x| sigmoid(x) >= threshold).collect();
    if !out.iter().any(|&b| b) {
        if let Some(best) = argmax(logits) {
            out[best] = true;
        }
    }
    out
}

pub(crate) fn argmax(v: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if best.is_none_or(|b| x > v[b]) {
            best = Some(i);
        }
    }
    best
}

/// `(micro, macro)` F1 on the branch's documents among `rows`.
pub fn level2_f1(model: &Level2Model, data: &Level2Data<'_>, rows: &[usize], threshold: f64) -> Result<(f64, f64)> {
    let logits = model.forward(&data.graph, data.label_adj, data.lambdas)?;
    let rows = data.branch_rows(rows);
    let pred: Vec<Vec<bool>> = rows.iter().map(|&r| decide_labels(logits.row(r), threshold)).collect();
    let truth: Vec<Vec<bool>> = rows
        .iter()
        .map(|&r| data.targets.row(r).iter().map(|&v| v >= 0.5).collect())
        .collect();
    f1_scores(&pred, &truth)
}

/// Trains `model` (freshly initialised by the caller) on the gated objective.
/// Validation uses macro-F1 on the branch's validation rows.
pub fn train_level2(
    model: Level2Model,
    data: &Level2Data<'_>,
    cfg: &TrainConfig,
    decision_threshold: f64,
) -> Result<(Level2Model, TrainReport)> {
    let name = match data.branch {
        Some(b) => format!("level2-{b}"),
        None => "level2-flat".to_string(),
    };
    let has_val = !data.branch_rows(data.val_rows).is_empty();
    let validate = has_val
        .then_some(|m: &Level2Model| level2_f1(m, data, data.val_rows, decision_threshold).map(|(_, macro_)| macro_));
    fit(
        &name,
        model,
        cfg,
        |m| {
            let (loss, g) = level2_loss_and_grads(m, data)?;
            Ok((loss, trainable_gradients(m, &g)))
        },
        validate,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_fixtures() {
        assert!(bce_loss(&[1.0, 0.0], &[1.0, 0.0]).unwrap() < 1e-6);
        assert!((bce_loss(&[0.5, 0.5], &[1.0, 0.0]).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let l = bce_loss(&[0.9, 0.1], &[1.0, 0.0]).unwrap();
        assert!((l - (-(0.9f64).ln())).abs() < 1e-12);
        assert!((l - 0.1054).abs() < 1e-4);
        assert!(bce_loss(&[0.5], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn logit_loss_is_stable() {
        assert!((bce_logit_term(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_logit_term(100.0, 1.0) < 1e-6);
        assert!(bce_logit_term(-800.0, 0.0).is_finite());
        let naive = |x: f64, y: f64| -(y * sigmoid(x).ln() + (1.0 - y) * (1.0 - sigmoid(x)).ln());
        for x in [-3.0, -0.2, 0.7, 4.0] {
            assert!((bce_logit_term(x, 1.0) - naive(x, 1.0)).abs() < 1e-12);
            assert!((bce_logit_term(x, 0.0) - naive(x, 0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_weight_is_ignored() {
        let (a, ga) = bce_with_logits(&[0.3, 5.0], &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        let (b, gb) = bce_with_logits(&[0.3, -9.0], &[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(ga[0].to_bits(), gb[0].to_bits());
        assert_eq!(ga[1].to_bits(), 0.0f64.to_bits());
        assert_eq!(gb[1].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn sgd_arithmetic() {
        let mut p = DenseMatrix::filled(1, 1, 1.0);
        let g = DenseMatrix::filled(1, 1, 2.0);
        let mut st = OptimizerState::default();
        optimizer_step(&mut [&mut p], &[g], &mut st, OptimizerKind::Sgd, 0.1).unwrap();
        assert!((p.get(0, 0) - 0.8).abs() < 1e-15);

        let mut q = DenseMatrix::filled(2, 2, 3.0);
        optimizer_step(
            &mut [&mut q],
            &[DenseMatrix::zeros(2, 2)],
            &mut st,
            OptimizerKind::Sgd,
            0.1,
        )
        .unwrap();
        assert_eq!(q, DenseMatrix::filled(2, 2, 3.0));
    }

    #[test]
    fn adam_first_step_has_lr_magnitude() {
        for scale in [1.0, 1e-3, 250.0] {
            let mut p = DenseMatrix::zeros(2, 3);
            let g = DenseMatrix::filled(2, 3, scale);
            let mut st = OptimizerState::default();
            optimizer_step(&mut [&mut p], &[g], &mut st, OptimizerKind::default(), 0.01).unwrap();
            for v in p.as_slice() {
                assert!((v + 0.01).abs() < 1e-7, "scale {scale}: {v}");
            }
        }
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut p = DenseMatrix::zeros(1, 1);
        let g = DenseMatrix::from_rows(&[vec![0.0]]).unwrap().map(|_| f64::NAN);
        let mut st = OptimizerState::default();
        let err = optimizer_step(&mut [&mut p], &[g], &mut st, OptimizerKind::Sgd, 0.1).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn argmax_fallback_sets_one_label() {
        assert_eq!(decide_labels(&[-3.0, -1.0, -2.0], 0.5), vec![false, true, false]);
        assert_eq!(decide_labels(&[1.0, -1.0, 2.0], 0.5), vec![true, false, true]);
    }

    #[test]
    fn lambda_setting_parses() {
        #[derive(Deserialize)]
        struct W {
            l: LambdaSetting,
        }
        let w: W = toml::from_str("l = \"adaptive\"").unwrap();
        assert_eq!(w.l, LambdaSetting::Adaptive);
        let w: W = toml::from_str("l = 0.25").unwrap();
        assert_eq!(w.l, LambdaSetting::Fixed(0.25));
        assert!(toml::from_str::<W>("l = 1.5").is_err());
        assert!(toml::from_str::<W>("l = \"sometimes\"").is_err());
    }
}
