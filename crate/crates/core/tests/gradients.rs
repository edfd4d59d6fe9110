mod common;

use common::*;
use higemine::corpus::Branch;
use higemine::model::{HeadKind, Level1Model, Level2Model, Parameters};
use higemine::sparse::DenseMatrix;
use higemine::training::{level1_loss_and_grads, level2_loss_and_grads, Level1Data, Level2Data};

const EPS: f64 = 1e-4;
const TOL: f64 = 1e-4;

fn level1_case(seed: u64, lambdas: [f64; 3]) {
    let g = TinyGraphs::new(4, seed);
    let model = Level1Model::new(path_dims(4, 1), seed).unwrap();
    let targets = [1.0, 0.0, 1.0];
    let data = Level1Data {
        graph: g.dual(),
        targets: &targets,
        train_rows: &[0, 1, 2],
        val_rows: &[],
        lambdas: &lambdas,
    };
    let (_, grads) = level1_loss_and_grads(&model, &data).unwrap();
    let c = gradient_check(&model, &grads, EPS, |m| level1_loss_and_grads(m, &data).unwrap().0);
    assert_eq!(c.checked, model.parameter_count());
    assert!(c.kinks.is_empty(), "seed {seed} straddles a kink: {:?}", c.kinks);
    assert!(c.max_rel_error < TOL, "seed {seed}: {c:?}");
}

#[test]
fn level1_gradients_match_finite_differences() {
    for seed in 0..3 {
        level1_case(seed, [0.3, 0.3, 0.3]);
    }
    level1_case(9, [0.0, 1.0, 0.5]);
}

fn level2_case(head: HeadKind, offsets: bool, seed: u64) {
    let g = TinyGraphs::new(4, seed);
    let dims = level2_dims(head, offsets);
    let mut model = Level2Model::new(dims, random_matrix(3, 4, &mut rng(seed + 100)), seed).unwrap();
    if offsets {
        model.label_embeddings.learnable = random_matrix(3, 4, &mut rng(seed + 200)).map(|v| 0.1 * v);
    }
    let adj = label_adj3();
    let targets = DenseMatrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]]).unwrap();
    let truth = [Branch::Fiction, Branch::Nonfiction, Branch::Fiction];
    let lambdas = [0.7, 0.7, 0.2];
    let data = Level2Data {
        graph: g.dual(),
        label_adj: &adj,
        targets: &targets,
        level1_truth: &truth,
        branch: Some(Branch::Fiction),
        train_rows: &[0, 1, 2],
        val_rows: &[],
        lambdas: &lambdas,
    };
    let (_, grads) = level2_loss_and_grads(&model, &data).unwrap();
    let c = gradient_check(&model, &grads, EPS, |m| level2_loss_and_grads(m, &data).unwrap().0);
    assert_eq!(c.checked, model.parameter_count());
    assert!(
        c.kinks.is_empty(),
        "{head:?} seed {seed} straddles a kink: {:?}",
        c.kinks
    );
    assert!(c.max_rel_error < TOL, "{head:?} offsets={offsets} seed {seed}: {c:?}");
}

#[test]
fn level2_network_head_gradients() {
    // Seed 0 puts a ReLU input within 1e-4 of zero, where central
    // differences straddle the kink.
    for seed in 1..=3 {
        level2_case(HeadKind::Network, true, seed);
    }
}

#[test]
fn level2_frozen_offsets_gradients() {
    level2_case(HeadKind::Network, false, 4);
}

#[test]
fn level2_linear_head_gradients() {
    level2_case(HeadKind::Linear, false, 5);
}

#[test]
fn frozen_offsets_are_not_trainable() {
    let model = Level2Model::new(level2_dims(HeadKind::Network, false), DenseMatrix::zeros(3, 4), 0).unwrap();
    assert!(!model.is_trainable("label.learnable"));
    assert!(!model.is_trainable("label.static"));
    let with = Level2Model::new(level2_dims(HeadKind::Network, true), DenseMatrix::zeros(3, 4), 0).unwrap();
    assert_eq!(with.parameter_count(), model.parameter_count() + 12);
}
