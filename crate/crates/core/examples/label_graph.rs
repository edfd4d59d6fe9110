//! Genre co-occurrence network from training label sets.

use higemine::labelgraph::{compute_cooccurrence, threshold_cooccurrence};

fn main() -> higemine::Result<()> {
    let labels: Vec<String> = ["fantasy", "romance", "mystery", "horror"].map(String::from).to_vec();
    let sets = vec![
        vec![true, true, false, false],
        vec![true, false, false, false],
        vec![false, false, true, true],
        vec![false, true, true, false],
        vec![true, true, false, false],
    ];
    let m = compute_cooccurrence(&sets, labels.len())?;
    println!("P(row | column):");
    for (i, label) in labels.iter().enumerate() {
        println!(
            "{label:>8} {:?}",
            m.row(i).iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>()
        );
    }
    let g = threshold_cooccurrence(&m, 0.3, 0.6, labels)?;
    println!("edges kept at psi1={} psi2={}:", g.psi1, g.psi2);
    for (i, j, w) in g.adjacency.iter() {
        println!("  {} -> {}  {w:.2}", g.labels[j], g.labels[i]);
    }
    Ok(())
}
