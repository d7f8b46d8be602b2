//! Briefly trains a model, fits the mixture prior to its top-layer latents,
//! estimates test log-likelihood and writes a grid of prior samples.
//!
//! cargo run --release --example prior_sampling -- [out.pgm]

use std::path::PathBuf;

use ngc::data::write_pgm_grid;
use ngc::eval::monte_carlo_log_px;
use ngc::runner::{fit_prior, grid_shape, load_test_data, load_train_data, sample_means};
use ngc::train::{infer_latents_batched, train, TrainOptions};
use ngc::{GncnParams, RunConfig};

fn desk(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-desk").join(name)
}

fn main() -> ngc::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ngc_samples.pgm"));
    let mut cfg = RunConfig::default();
    cfg.optimizer.epochs = 1;
    cfg.data.train_limit = Some(2000);
    cfg.data.test_limit = Some(500);
    cfg.data.n_val = 0;
    cfg.gmm.n_components = 10;
    cfg.data.train_images = Some(desk("train-images-idx3-ubyte"));
    cfg.data.test_images = Some(desk("t10k-images-idx3-ubyte"));

    let (train_set, _) = load_train_data(&cfg)?;
    let test = load_test_data(&cfg)?;
    let mut params = GncnParams::new(cfg.model.clone())?;
    train(&mut params, train_set.x.view(), None, &TrainOptions::from_config(&cfg), |_, _| Ok(()))?;

    let latents = infer_latents_batched(&params, train_set.x.view(), cfg.model.settle_steps, 1)?;
    let gmm = fit_prior(&cfg, latents.view())?;
    println!("prior: {} components over {} dimensions", gmm.n_components(), gmm.dim());
    let est = monte_carlo_log_px(&params, &gmm, test.x.view(), 500, cfg.seed)?;
    println!("test log p(x) ~ {:.2} +/- {:.2} nats (500 samples)", est.mean, est.stderr);

    let means = sample_means(&params, &gmm, 64, cfg.seed)?;
    let (rows, cols) = grid_shape(64);
    write_pgm_grid(means.view(), rows, cols, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
