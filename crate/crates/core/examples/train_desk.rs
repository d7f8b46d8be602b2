//! Trains the default three-latent-layer model on the bundled MNIST subset
//! and logs BCE per epoch.
//!
//! cargo run --release --example train_desk -- [epochs] [train_limit]

use std::path::PathBuf;

use ngc::runner::{load_test_data, load_train_data};
use ngc::train::{reconstruction_bce, train, TrainOptions};
use ngc::{GncnParams, RunConfig};

fn desk(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-desk").join(name)
}

fn main() -> ngc::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("numeric argument"));
    let mut cfg = RunConfig::default();
    cfg.optimizer.epochs = args.next().unwrap_or(3);
    cfg.data.train_limit = args.next();
    cfg.data.n_val = 0;
    cfg.data.train_images = Some(desk("train-images-idx3-ubyte"));
    cfg.data.test_images = Some(desk("t10k-images-idx3-ubyte"));

    let (train_set, _) = load_train_data(&cfg)?;
    let test = load_test_data(&cfg)?;
    let mut params = GncnParams::new(cfg.model.clone())?;
    println!("{} training records, {} synapses", train_set.len(), params.synapse_count());
    println!("epoch 0: test BCE {:.2}", reconstruction_bce(&params, test.x.view(), 1)?);
    train(&mut params, train_set.x.view(), None, &TrainOptions::from_config(&cfg), |rec, p| {
        let test_bce = reconstruction_bce(p, test.x.view(), 1)?;
        println!(
            "epoch {}: train BCE {:.2}, test BCE {test_bce:.2} ({:.1} s)",
            rec.epoch, rec.train_bce, rec.wall_seconds
        );
        Ok(())
    })?;
    Ok(())
}
