//! Build a document/token graph and inspect its edges.

use higemine::corpus::tokenize;
use higemine::sparse::normalize_adjacency;
use higemine::textgraph::{build_text_graph, GraphKind};

fn main() -> higemine::Result<()> {
    let texts = [
        ("d1", "dragons guard the ancient castle gold"),
        ("d2", "the castle siege lasted a winter"),
        ("d3", "ancient recipes for winter bread"),
    ];
    let docs: Vec<(String, Vec<String>)> = texts.iter().map(|(id, t)| (id.to_string(), tokenize(t))).collect();
    let mut vocab: Vec<String> = docs.iter().flat_map(|(_, t)| t.clone()).collect();
    vocab.sort();
    vocab.dedup();

    let g = build_text_graph(&docs, &vocab, 3, GraphKind::Blurb)?;
    println!("{}", serde_json::to_string_pretty(&g.stats())?);
    for (a, b, w) in g.adjacency.iter().filter(|&(a, b, _)| a < b) {
        println!("{a:>2} - {b:>2}  {w:.4}");
    }
    let norm = normalize_adjacency(&g.adjacency)?;
    println!("normalised nnz {} (self loops added)", norm.nnz());
    Ok(())
}
