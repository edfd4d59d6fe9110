//! Multi-label and binary metrics on a hand-made prediction table.

use higemine::metrics::{BinaryMetrics, MultiLabelMetrics};

fn main() -> higemine::Result<()> {
    let truth = vec![
        vec![true, false, true],
        vec![false, true, false],
        vec![true, true, false],
        vec![false, false, true],
    ];
    let pred = vec![
        vec![true, false, false],
        vec![false, true, true],
        vec![true, true, false],
        vec![true, false, true],
    ];
    println!(
        "{}",
        serde_json::to_string_pretty(&MultiLabelMetrics::compute(&pred, &truth)?)?
    );

    let branch_truth = [true, false, false, true, true];
    let branch_pred = [true, false, true, true, false];
    println!(
        "{}",
        serde_json::to_string_pretty(&BinaryMetrics::compute(&branch_pred, &branch_truth)?)?
    );
    Ok(())
}
