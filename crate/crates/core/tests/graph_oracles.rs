mod common;

use common::*;
use higemine::sparse::{normalize_adjacency, spmm, spmm_transposed, DenseMatrix, SparseMatrix};
use higemine::textgraph::{compute_ppmi, compute_tfidf};
use proptest::prelude::*;

#[test]
fn fixtures_are_small() {
    let fixtures = graph_fixtures();
    assert!(fixtures.len() >= 4);
    for (name, f) in &fixtures {
        assert!(f.docs.len() <= 5, "{name}");
        assert!(f.docs.iter().all(|d| d.len() <= 10), "{name}");
    }
}

#[test]
fn tfidf_matches_brute_force_exactly() {
    for (name, f) in graph_fixtures() {
        let got = compute_tfidf(&f.docs, &f.vocab).unwrap().to_dense();
        assert_eq!(got, dense_rows(&oracle_tfidf(&f.docs, &f.vocab)), "{name}");
    }
}

#[test]
fn ppmi_matches_brute_force_exactly() {
    for (name, f) in graph_fixtures() {
        let got = compute_ppmi(&f.docs, &f.vocab, f.window).unwrap();
        assert!(got.is_symmetric(), "{name}");
        assert_eq!(
            got.to_dense(),
            dense_rows(&oracle_ppmi(&f.docs, &f.vocab, f.window)),
            "{name}"
        );
    }
}

#[test]
fn ppmi_known_value() {
    // Two windows {a, b} and {b, c}: p(a, b) = 1/2, p(a) = 1/2, p(b) = 1,
    // so PMI(a, b) = ln 1 = 0 and nothing is stored.
    let docs = vec![toks(&["a", "b", "c"])];
    let m = compute_ppmi(&docs, &toks(&["a", "b", "c"]), 2).unwrap();
    assert_eq!(m.nnz(), 0);
    // {a, b}, {c, d}: p(a, b) = 1/2 against 1/4 → ln 2.
    let docs = vec![toks(&["a", "b"]), toks(&["c", "d"])];
    let m = compute_ppmi(&docs, &toks(&["a", "b", "c", "d"]), 2).unwrap();
    assert_eq!(m.get(0, 1), 2f64.ln());
    assert_eq!(m.get(0, 2), 0.0);
}

#[test]
fn normalisation_matches_dense_oracle() {
    for seed in 0..100 {
        let a = random_symmetric(6, &mut rng(seed));
        let got = normalize_adjacency(&SparseMatrix::from_dense(&dense_rows(&a))).unwrap();
        let want = dense_rows(&oracle_normalize(&a));
        assert!(got.to_dense().max_abs_diff(&want) <= 1e-12, "seed {seed}");
        assert!(got.is_symmetric());
    }
}

#[test]
fn normalised_isolated_node_keeps_unit_loop() {
    let a = SparseMatrix::zeros(3, 3);
    assert_eq!(normalize_adjacency(&a).unwrap().to_dense(), DenseMatrix::identity(3));
}

#[test]
fn matrix_market_round_trip() {
    let a = random_symmetric(6, &mut rng(3));
    let s = SparseMatrix::from_dense(&dense_rows(&a));
    let back = SparseMatrix::from_matrix_market(&s.to_matrix_market()).unwrap();
    assert_eq!(back.to_dense(), s.to_dense());
}

fn dense_strategy(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(prop_oneof![Just(0.0), -5.0..5.0f64], rows * cols)
        .prop_map(move |v| DenseMatrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #[test]
    fn spmm_agrees_with_dense(a in dense_strategy(5, 4), x in dense_strategy(4, 3), g in dense_strategy(5, 3)) {
        let s = SparseMatrix::from_dense(&a);
        prop_assert!(spmm(&s, &x).unwrap().max_abs_diff(&a.matmul(&x).unwrap()) <= 1e-12);
        let t = spmm_transposed(&s, &g).unwrap();
        prop_assert!(t.max_abs_diff(&a.transpose().matmul(&g).unwrap()) <= 1e-12);
    }
}
