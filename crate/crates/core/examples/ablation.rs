//! Switch model components off one at a time and compare test scores.

use higemine::config::Config;
use higemine::pipeline::run_pipeline;
use higemine::synthetic::{CorpusKind, SyntheticConfig, SyntheticCorpus};
use higemine::training::LambdaSetting;

fn main() -> higemine::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        books: 200,
        genres_per_branch: 4,
        seed: 3,
        kind: CorpusKind::Noisy,
    })?;
    let (dataset, taxonomy) = corpus.write(dir.path())?;
    let base = Config {
        dataset,
        taxonomy,
        output_dir: dir.path().join("out"),
        hash_dim: 16,
        label_dim: 16,
        gcn1: 32,
        gcn2: 16,
        hidden: 16,
        output_dim: 16,
        label_gcn1: 16,
        label_gcn2: 16,
        learning_rate: 1e-3,
        epochs: 200,
        patience: 0,
        ..Config::default()
    };
    let fixed = |v: f64| Config {
        lambda1: LambdaSetting::Fixed(v),
        lambda2: LambdaSetting::Fixed(v),
        ..base.clone()
    };
    let variants = [
        ("full", base.clone()),
        ("blurb only", fixed(1.0)),
        ("reviews only", fixed(0.0)),
        (
            "no label network",
            Config {
                label_network: false,
                ..base.clone()
            },
        ),
        (
            "no word features",
            Config {
                word_features: false,
                ..base.clone()
            },
        ),
        (
            "frozen label offsets",
            Config {
                learn_label_offsets: false,
                ..base.clone()
            },
        ),
        (
            "unfiltered reviews",
            Config {
                filter_reviews: false,
                ..base.clone()
            },
        ),
        (
            "flat",
            Config {
                hierarchy: false,
                ..base.clone()
            },
        ),
    ];
    println!("{:<22} {:>8} {:>10} {:>10}", "variant", "L1 F1", "fic F1", "nonfic F1");
    for (name, cfg) in variants {
        let r = run_pipeline(cfg)?.report;
        let l1 = r.level1.map(|m| format!("{:.3}", m.f1)).unwrap_or_else(|| "-".into());
        println!(
            "{name:<22} {l1:>8} {:>10.3} {:>10.3}",
            r.level2["fiction"].f1_micro, r.level2["nonfiction"].f1_micro
        );
    }
    Ok(())
}
