//! Command-line front end. Every subcommand reads the same TOML config.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::Value;

use higemine::config::Config;
use higemine::corpus::Branch;
use higemine::pipeline::{
    write_sidecars, write_train_reports, LevelSelection, Prepared, FILTER_SIDECAR, METRICS_FILE, TRAIN_REPORTS_FILE,
};
use higemine::{Error, Result};

#[derive(Parser)]
#[command(name = "higemine", version, about = "Hierarchical book-genre classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train heads and write checkpoints plus training reports.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        level: Level,
    },
    /// Predict genres for books already present in the dataset.
    Predict {
        #[arg(long)]
        config: PathBuf,
        /// JSON object, or JSONL with one object per line; each needs an `id`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Run review filtering and write the per-book sidecar.
    Filter {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score trained checkpoints on the test split.
    Eval {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print graph statistics and write both adjacencies as Matrix Market.
    GraphStats {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    #[value(name = "1")]
    One,
    #[value(name = "2f")]
    Fiction,
    #[value(name = "2nf")]
    Nonfiction,
    All,
}

impl From<Level> for LevelSelection {
    fn from(l: Level) -> Self {
        match l {
            Level::One => LevelSelection::Level1,
            Level::Fiction => LevelSelection::Level2(Branch::Fiction),
            Level::Nonfiction => LevelSelection::Level2(Branch::Nonfiction),
            Level::All => LevelSelection::All,
        }
    }
}

fn prepare(config: &Path) -> Result<Prepared> {
    let cfg = Config::load(config)?;
    fs::create_dir_all(&cfg.output_dir)?;
    Prepared::new(cfg)
}

/// Book ids from a JSON object or a JSONL file. Bare strings are taken as ids.
fn read_ids(path: &Path) -> Result<(Vec<String>, bool)> {
    let text = fs::read_to_string(path)?;
    let id_of = |v: &Value, line: usize| -> Result<String> {
        match v {
            Value::String(s) => Ok(s.clone()),
            Value::Object(m) => match m.get("id") {
                Some(Value::String(s)) => Ok(s.clone()),
                _ => Err(Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    message: "entry has no string `id`".into(),
                }),
            },
            _ => Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: "expected an object or a string".into(),
            }),
        }
    };
    if let Ok(v) = serde_json::from_str::<Value>(&text) {
        return match &v {
            Value::Array(items) => Ok((items.iter().map(|x| id_of(x, 1)).collect::<Result<_>>()?, true)),
            _ => Ok((vec![id_of(&v, 1)?], false)),
        };
    }
    let mut ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        ids.push(id_of(&v, i + 1)?);
    }
    Ok((ids, true))
}

fn run(cli: Cli) -> Result<()> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Train { config, level } => {
            let prepared = prepare(&config)?;
            let mut models = prepared.train(level.into())?;
            let dir = prepared.config.output_dir.clone();
            for p in prepared.save_models(&mut models, &dir)? {
                info!("wrote {}", p.display());
            }
            write_train_reports(&models, &dir.join(TRAIN_REPORTS_FILE))?;
            writeln!(stdout, "{}", serde_json::to_string_pretty(&models.reports())?)?;
        }
        Command::Predict { config, input } => {
            let (ids, batch) = read_ids(&input)?;
            let prepared = prepare(&config)?;
            let models = prepared.load_models(&prepared.config.output_dir)?;
            let preds = prepared.predictor(models)?.predict(&ids)?;
            let out = if batch {
                serde_json::to_string_pretty(&preds)?
            } else {
                serde_json::to_string_pretty(&preds[0])?
            };
            writeln!(stdout, "{out}")?;
        }
        Command::Filter { config } => {
            let prepared = prepare(&config)?;
            let path = prepared.config.output_dir.join(FILTER_SIDECAR);
            write_sidecars(&prepared, &path)?;
            writeln!(stdout, "{}", path.display())?;
        }
        Command::Eval { config } => {
            let prepared = prepare(&config)?;
            let models = prepared.load_models(&prepared.config.output_dir)?;
            let predictor = prepared.predictor(models)?;
            let report = prepared.evaluate(&predictor, &prepared.rows.test)?;
            let json = report.to_json()?;
            fs::write(prepared.config.output_dir.join(METRICS_FILE), &json)?;
            writeln!(stdout, "{json}")?;
        }
        Command::GraphStats { config } => {
            let prepared = prepare(&config)?;
            let dir = &prepared.config.output_dir;
            fs::write(
                dir.join("blurb_graph.mtx"),
                prepared.blurb_graph.adjacency.to_matrix_market(),
            )?;
            fs::write(
                dir.join("review_graph.mtx"),
                prepared.review_graph.adjacency.to_matrix_market(),
            )?;
            let (b, r) = prepared.graph_stats();
            writeln!(stdout, "{}", serde_json::to_string_pretty(&[b, r])?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("higemine: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
