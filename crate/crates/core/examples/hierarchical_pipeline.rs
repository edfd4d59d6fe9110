//! End to end on the bundled fixture: train both levels, save and reload
//! checkpoints, route a few books and print the test-split report.

use std::path::Path;

use higemine::config::Config;
use higemine::pipeline::{LevelSelection, Prepared};

fn main() -> higemine::Result<()> {
    let mut cfg = Config::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/small/config.toml"))?;
    let out = tempfile::tempdir()?;
    cfg.output_dir = out.path().to_path_buf();

    let p = Prepared::new(cfg)?;
    let mut models = p.train(LevelSelection::All)?;
    for path in p.save_models(&mut models, out.path())? {
        println!("saved {}", path.display());
    }

    let predictor = p.predictor(p.load_models(out.path())?)?;
    let ids: Vec<String> = p.rows.test.iter().take(4).map(|&i| p.books[i].id.clone()).collect();
    for pred in predictor.predict(&ids)? {
        let branch = pred.level1.as_ref().map(|d| d.branch.name()).unwrap_or("-");
        println!("{:<10} {:<11} {:?}", pred.id, branch, pred.predicted_genres());
    }
    let report = p.evaluate(&predictor, &p.rows.test)?;
    println!("{}", report.to_json()?);
    Ok(())
}
