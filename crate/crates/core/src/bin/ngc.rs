use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ngc::runner::{self, CHECKPOINT_DIR, OUTPUT_DIR_ENV};
use ngc::{Result, RunConfig};

#[derive(Parser)]
#[command(name = "ngc", version, about = "Train and evaluate neural generative coding models")]
struct Cli {
    /// JSON run configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Checkpoint directory (default: <output dir>/checkpoint).
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for batch-parallel settling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and fit its latent prior.
    Train,
    /// Test BCE, Monte-Carlo log p(x) and sparsity.
    Eval,
    /// Write a grid of decoded prior samples.
    Sample {
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Right-half pattern completion on the test set.
    Complete,
    /// Linear probe on latents versus raw pixels.
    Classify,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    cfg.validate()?;
    let env = std::env::var(OUTPUT_DIR_ENV).ok();
    let out = runner::resolve_output_dir(&cfg, env.as_deref())?;
    let ckpt = cli.checkpoint.clone().unwrap_or_else(|| out.join(CHECKPOINT_DIR));
    let ckpt: &Path = &ckpt;
    let json = match cli.command {
        Command::Train => serde_json::to_string_pretty(&runner::cmd_train(&cfg, &out, Some(ckpt))?)?,
        Command::Eval => serde_json::to_string_pretty(&runner::cmd_eval(&cfg, ckpt, &out)?)?,
        Command::Sample { n } => {
            let path = runner::cmd_sample(&cfg, ckpt, &out, n)?;
            serde_json::to_string_pretty(&serde_json::json!({ "samples": path }))?
        }
        Command::Complete => serde_json::to_string_pretty(&runner::cmd_complete(&cfg, ckpt, &out)?)?,
        Command::Classify => serde_json::to_string_pretty(&runner::cmd_classify(&cfg, ckpt, &out)?)?,
    };
    println!("{json}");
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
