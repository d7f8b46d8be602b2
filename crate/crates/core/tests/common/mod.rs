//! Tiny on-disk datasets and configs shared by the integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ndarray::Array2;
use ngc::config::{DataConfig, ModelConfig, RunConfig};
use ngc::data::{encode_idx, IdxTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes `images` (`n` records of `side x side` bytes) and `labels` as IDX
/// files named `<stem>-images` / `<stem>-labels` in `dir`.
pub fn write_idx(dir: &Path, stem: &str, side: usize, images: &[Vec<u8>], labels: &[u8]) -> (PathBuf, PathBuf) {
    let img = IdxTensor {
        dims: vec![images.len(), side, side],
        data: images.concat(),
    };
    let lab = IdxTensor {
        dims: vec![labels.len()],
        data: labels.to_vec(),
    };
    let ip = dir.join(format!("{stem}-images"));
    let lp = dir.join(format!("{stem}-labels"));
    std::fs::write(&ip, encode_idx(&img)).unwrap();
    std::fs::write(&lp, encode_idx(&lab)).unwrap();
    (ip, lp)
}

/// Random 4x4 binary images with balanced random labels over `classes`.
pub fn random_images(n: usize, classes: u8, seed: u64) -> (Vec<Vec<u8>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = (0..n)
        .map(|_| (0..16).map(|_| if rng.random::<bool>() { 255 } else { 0 }).collect())
        .collect();
    let labels = (0..n).map(|i| (i % classes as usize) as u8).collect();
    (images, labels)
}

/// A small model for 4x4 images.
pub fn tiny_model() -> ModelConfig {
    ModelConfig {
        layer_sizes: vec![16, 12, 12, 4],
        group_sizes: vec![2, 2, 2],
        settle_steps: 20,
        ..Default::default()
    }
}

/// Config for a train/test pair written with [`write_idx`].
pub fn tiny_config(dir: &Path, train_stem: &str, test_stem: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig {
        model: tiny_model(),
        data: DataConfig {
            train_images: Some(dir.join(format!("{train_stem}-images"))),
            train_labels: Some(dir.join(format!("{train_stem}-labels"))),
            test_images: Some(dir.join(format!("{test_stem}-images"))),
            test_labels: Some(dir.join(format!("{test_stem}-labels"))),
            n_val: 0,
            ..Default::default()
        },
        output_dir: Some(out.to_path_buf()),
        ..Default::default()
    };
    cfg.optimizer.epochs = 2;
    cfg.optimizer.batch_size = 8;
    cfg.gmm.n_components = 2;
    cfg.gmm.em_iters = 10;
    cfg.eval.mc_samples = 50;
    cfg.eval.maxent_epochs = 20;
    cfg
}

/// Pixel matrix (`16 x n`, values 0/1) of byte images.
pub fn as_matrix(images: &[Vec<u8>]) -> Array2<f64> {
    Array2::from_shape_fn((images[0].len(), images.len()), |(i, j)| if images[j][i] >= 128 { 1.0 } else { 0.0 })
}
