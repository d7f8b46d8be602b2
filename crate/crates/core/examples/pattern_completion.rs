//! Hides the right half of test digits and fills it in by settling, then
//! compares against filling with the training pixel means.
//!
//! cargo run --release --example pattern_completion

use std::path::PathBuf;

use ndarray::Axis;
use ngc::data::MaskSpec;
use ngc::eval::masked_mse;
use ngc::runner::{complete_batched, load_test_data, load_train_data, mean_fill};
use ngc::train::{train, TrainOptions};
use ngc::{GncnParams, RunConfig};

fn desk(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-desk").join(name)
}

fn main() -> ngc::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.optimizer.epochs = 2;
    cfg.data.train_limit = Some(2000);
    cfg.data.test_limit = Some(500);
    cfg.data.n_val = 0;
    cfg.data.train_images = Some(desk("train-images-idx3-ubyte"));
    cfg.data.test_images = Some(desk("t10k-images-idx3-ubyte"));

    let (train_set, _) = load_train_data(&cfg)?;
    let test = load_test_data(&cfg)?;
    let mut params = GncnParams::new(cfg.model.clone())?;
    train(&mut params, train_set.x.view(), None, &TrainOptions::from_config(&cfg), |_, _| Ok(()))?;

    let mask = MaskSpec::right_half(test.dim(), test.len())?;
    let completed = complete_batched(&params, test.x.view(), mask.m.view())?;
    let means = train_set.x.mean_axis(Axis(1)).expect("non-empty training set");
    let baseline = mean_fill(test.x.view(), mask.m.view(), &means);
    println!("settled completion M-MSE {:.3}", masked_mse(test.x.view(), completed.view(), mask.m.view())?);
    println!("mean-fill baseline M-MSE {:.3}", masked_mse(test.x.view(), baseline.view(), mask.m.view())?);
    Ok(())
}
