//! Train only the fiction / non-fiction classifier on a generated corpus.

use higemine::config::Config;
use higemine::pipeline::Prepared;
use higemine::synthetic::{CorpusKind, SyntheticConfig, SyntheticCorpus};
use higemine::training::level1_f1;

fn main() -> higemine::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus = SyntheticCorpus::generate(&SyntheticConfig {
        books: 120,
        genres_per_branch: 3,
        seed: 5,
        kind: CorpusKind::Noisy,
    })?;
    let (dataset, taxonomy) = corpus.write(dir.path())?;
    let cfg = Config {
        dataset,
        taxonomy,
        output_dir: dir.path().join("out"),
        hash_dim: 16,
        gcn1: 32,
        gcn2: 16,
        hidden: 16,
        learning_rate: 0.01,
        epochs: 150,
        patience: 30,
        ..Config::default()
    };
    let p = Prepared::new(cfg)?;
    let trained = p.train_level1()?;
    let r = trained.report.as_ref().expect("freshly trained");
    println!(
        "{} epochs, best {} (val F1 {:?}), loss {:.4} -> {:.4}",
        r.epochs.len(),
        r.best_epoch,
        r.best_val_metric,
        r.initial_loss().unwrap_or(f64::NAN),
        r.final_loss().unwrap_or(f64::NAN)
    );
    let targets = p.level1_targets();
    let data = p.level1_data(&trained.features, &targets);
    println!("test F1 {:.3}", level1_f1(&trained.model, &data, &p.rows.test)?);
    Ok(())
}
