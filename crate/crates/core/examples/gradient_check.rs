//! Compare backpropagated gradients of the branch classifier with central
//! differences on a toy graph.

use higemine::corpus::tokenize;
use higemine::embeddings::hashed_word_vector;
use higemine::model::{DualGraph, Level1Model, Parameters, PathDims};
use higemine::sparse::{normalize_adjacency, DenseMatrix};
use higemine::textgraph::{build_text_graph, GraphKind, TextGraph};
use higemine::training::{level1_loss_and_grads, Level1Data};

const EPS: f64 = 1e-4;

fn graph(texts: &[&str], kind: GraphKind) -> higemine::Result<(TextGraph, DenseMatrix)> {
    let docs: Vec<(String, Vec<String>)> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("b{i}"), tokenize(t)))
        .collect();
    let mut vocab: Vec<String> = docs.iter().flat_map(|(_, t)| t.clone()).collect();
    vocab.sort();
    vocab.dedup();
    let g = build_text_graph(&docs, &vocab, 3, kind)?;
    let mut names: Vec<String> = docs.iter().map(|(id, _)| id.clone()).collect();
    names.extend(vocab);
    let rows: Vec<Vec<f64>> = names.iter().map(|n| hashed_word_vector(n, 4, 1)).collect();
    Ok((g, DenseMatrix::from_rows(&rows)?))
}

fn main() -> higemine::Result<()> {
    let (bg, bx) = graph(
        &[
            "space pirates raid a moon",
            "history of the moon landing",
            "pirates of the old sea",
        ],
        GraphKind::Blurb,
    )?;
    let (rg, rx) = graph(
        &["fun pirates romp", "solid history", "sea pirates again"],
        GraphKind::Review,
    )?;
    let (ba, ra) = (normalize_adjacency(&bg.adjacency)?, normalize_adjacency(&rg.adjacency)?);
    let graph = DualGraph {
        blurb_adj: &ba,
        review_adj: &ra,
        blurb_features: &bx,
        review_features: &rx,
        n_docs: 3,
    };
    let model = Level1Model::new(
        PathDims {
            input: 4,
            gcn1: 4,
            gcn2: 3,
            hidden: 3,
            output: 1,
        },
        2,
    )?;
    let data = Level1Data {
        graph,
        targets: &[0.0, 1.0, 0.0],
        train_rows: &[0, 1, 2],
        val_rows: &[],
        lambdas: &[0.3; 3],
    };
    let (loss, grads) = level1_loss_and_grads(&model, &data)?;
    println!("loss {loss:.6}, {} parameters", model.parameter_count());

    let names: Vec<String> = model.tensors().into_iter().map(|(n, _)| n).collect();
    let mut worst: f64 = 0.0;
    for name in names {
        let analytic = grads.get_or_zeros(model.tensors().into_iter().find(|(n, _)| *n == name).unwrap().1);
        for i in 0..analytic.as_slice().len() {
            let shifted = |d: f64| -> higemine::Result<f64> {
                let mut m = model.clone();
                for (n, t) in m.tensors_mut() {
                    if n == name {
                        t.as_mut_slice()[i] += d;
                    }
                }
                Ok(level1_loss_and_grads(&m, &data)?.0)
            };
            let numeric = (shifted(EPS)? - shifted(-EPS)?) / (2.0 * EPS);
            let a = analytic.as_slice()[i];
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
        }
        println!("{name:<24} checked");
    }
    println!("max relative error {worst:.2e}");
    Ok(())
}
