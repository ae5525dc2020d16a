use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use elicit_core::classify::{read_examples_path, train, ModelArtifact};
use elicit_core::index::{load_corpus_dir, SnippetIndex};
use elicit_core::session::{system_clock, SessionConfig};
use elicit_gateway::config::FileConfig;
use elicit_gateway::harness::{replay_transcript, LatencyStats};
use elicit_gateway::offline::run_offline_extraction;
use elicit_gateway::transcript::read_transcript_path;
use elicit_gateway::{load_pipeline, router, AppState};

#[derive(Parser)]
#[command(name = "elicit", version, about = "Requirements elicitation assistant")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a snippet index from a directory of .txt and .md files.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the classifier from a `label,text` CSV file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated label set. Defaults to the labels in the data.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Use the built-in requirement label set.
        #[arg(long, conflicts_with = "labels")]
        default_labels: bool,
        #[arg(long)]
        no_bigrams: bool,
        #[arg(long)]
        no_generative: bool,
    },
    /// Report accuracy and per-label precision, recall and F1.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Find repository snippets relevant to a written document.
    Extract {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here; the summary still goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON report instead of the summary.
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 10)]
        top_n: usize,
    },
    /// Feed a transcript through the API and report per-utterance latency.
    Replay {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        transcript: PathBuf,
        /// 1 replays in real time, 2 twice as fast, 0 without pauses.
        #[arg(long, default_value_t = 0.0)]
        speed: f64,
        /// Keep the session log in this directory.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn required(flag: Option<PathBuf>, from_file: &Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    match flag.or_else(|| from_file.clone()) {
        Some(p) => Ok(p),
        None => bail!("--{name} is required (or set `{name}` in the config file)"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let session_config: SessionConfig = file.session;
    session_config.validate()?;

    match cli.command {
        Command::Index { corpus, out } => {
            let docs = load_corpus_dir(&corpus)?;
            if docs.is_empty() {
                bail!("no .txt or .md files under {}", corpus.display());
            }
            let index = SnippetIndex::ingest_corpus(docs.iter().map(|(id, t)| (id.as_str(), t.as_str())))?;
            index.save(&out)?;
            println!(
                "indexed {} documents into {} snippets -> {}",
                docs.len(),
                index.n_snippets(),
                out.display()
            );
        }
        Command::Train {
            data,
            out,
            lambda,
            epochs,
            seed,
            labels,
            default_labels,
            no_bigrams,
            no_generative,
        } => {
            let mut config = file.train.clone();
            if let Some(l) = lambda {
                config.hyper.lambda = l;
            }
            if let Some(e) = epochs {
                config.hyper.epochs = e;
            }
            if let Some(s) = seed {
                config.hyper.seed = s;
            }
            if let Some(l) = labels {
                config.labels = l;
            }
            if default_labels {
                config = config.with_default_labels();
            }
            if no_bigrams {
                config.features.bigrams = false;
            }
            if no_generative {
                config.features.generative = false;
            }
            let examples = read_examples_path(&data)?;
            let model = train(&examples, &config)?;
            model.save(&out)?;
            let metrics = model.evaluate(&examples)?;
            println!(
                "trained on {} examples, labels [{}], training accuracy {:.3} -> {}",
                examples.len(),
                model.labels().join(", "),
                metrics.accuracy,
                out.display()
            );
        }
        Command::Eval { model, data } => {
            let model = ModelArtifact::load(&model)?;
            let examples = read_examples_path(&data)?;
            let m = model.evaluate(&examples)?;
            println!("examples  {}", examples.len());
            println!("accuracy  {:.4}", m.accuracy);
            println!("macro F1  {:.4}", m.macro_f1);
            println!("\n{:<16} {:>9} {:>9} {:>9} {:>8}", "label", "precision", "recall", "f1", "support");
            for (label, l) in &m.per_label {
                println!(
                    "{:<16} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                    label, l.precision, l.recall, l.f1, l.support
                );
            }
        }
        Command::Extract {
            index,
            model,
            input,
            out,
            json,
            top_n,
        } => {
            let index = required(index, &file.index, "index")?;
            let model = required(model, &file.model, "model")?;
            let pipeline = load_pipeline(&index, &model)?;
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let report = run_offline_extraction(&pipeline, &text, &session_config);
            if let Some(out) = &out {
                std::fs::write(out, report.to_json())
                    .with_context(|| format!("cannot write {}", out.display()))?;
            }
            if json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.render_summary(&pipeline, top_n));
            }
        }
        Command::Replay {
            index,
            model,
            transcript,
            speed,
            log_dir,
        } => {
            let index = required(index, &file.index, "index")?;
            let model = required(model, &file.model, "model")?;
            let pipeline = Arc::new(load_pipeline(&index, &model)?);
            let utterances = read_transcript_path(&transcript)?;
            let state = app_state(pipeline, session_config, log_dir.as_deref())?;
            let app = router(state);
            let runtime = tokio::runtime::Runtime::new()?;
            let outcome = runtime.block_on(replay_transcript(&app, &utterances, speed))?;
            let stats = LatencyStats::from_durations(&outcome.latencies);
            println!("session   {}", outcome.session_id);
            println!("utterances {}  events {}", outcome.utterances, outcome.events);
            println!(
                "latency   median {:.2} ms  p99 {:.2} ms  max {:.2} ms",
                stats.median_ms, stats.p99_ms, stats.max_ms
            );
        }
        Command::Serve {
            index,
            model,
            host,
            port,
            log_dir,
        } => {
            let index = required(index, &file.index, "index")?;
            let model = required(model, &file.model, "model")?;
            let pipeline = Arc::new(load_pipeline(&index, &model)?);
            let log_dir = log_dir.or(file.serve.log_dir.clone());
            let state = app_state(pipeline, session_config, log_dir.as_deref())?;
            let addr = format!(
                "{}:{}",
                host.unwrap_or(file.serve.host.clone()),
                port.unwrap_or(file.serve.port)
            );
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&addr)
                    .await
                    .with_context(|| format!("cannot bind {addr}"))?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}

fn app_state(
    pipeline: Arc<elicit_core::session::Pipeline>,
    config: SessionConfig,
    log_dir: Option<&Path>,
) -> anyhow::Result<AppState> {
    Ok(match log_dir {
        Some(dir) => AppState::with_log_dir(pipeline, config, system_clock(), dir)?,
        None => AppState::new(pipeline, config, system_clock()),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
