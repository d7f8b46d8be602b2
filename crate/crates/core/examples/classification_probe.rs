//! Fits the same linear softmax probe on top-layer latents and on raw
//! pixels and reports both test errors.
//!
//! cargo run --release --example classification_probe

use std::path::PathBuf;

use ngc::runner::{classify, load_test_data, load_train_data};
use ngc::train::{train, TrainOptions};
use ngc::{GncnParams, RunConfig};

fn desk(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-desk").join(name)
}

fn main() -> ngc::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.optimizer.epochs = 2;
    cfg.data.train_limit = Some(2000);
    cfg.data.n_val = 0;
    cfg.data.train_images = Some(desk("train-images-idx3-ubyte"));
    cfg.data.train_labels = Some(desk("train-labels-idx1-ubyte"));
    cfg.data.test_images = Some(desk("t10k-images-idx3-ubyte"));
    cfg.data.test_labels = Some(desk("t10k-labels-idx1-ubyte"));

    let (train_set, _) = load_train_data(&cfg)?;
    let test = load_test_data(&cfg)?;
    let untrained = GncnParams::new(cfg.model.clone())?;
    let before = classify(&untrained, &train_set, &test, &cfg)?;
    let mut params = untrained.clone();
    train(&mut params, train_set.x.view(), None, &TrainOptions::from_config(&cfg), |_, _| Ok(()))?;
    let after = classify(&params, &train_set, &test, &cfg)?;
    println!("raw pixels:          {:.1}% error", after.pixel_err);
    println!("untrained latents:   {:.1}% error", before.latent_err);
    println!("trained latents:     {:.1}% error", after.latent_err);
    Ok(())
}
