//! Measures how lateral competition changes the fraction of active units
//! per layer for the same weights and inputs.
//!
//! cargo run --release --example lateral_sparsity

use ndarray::Array2;
use ngc::config::ModelConfig;
use ngc::eval::sparsity_levels;
use ngc::model::{build_group_mask, settle, GncnParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rho(params: &GncnParams, x: &Array2<f64>) -> ngc::Result<Vec<f64>> {
    let s = settle(params, x.view(), params.config.settle_steps)?;
    Ok(sparsity_levels(&s.z[1..], 1e-6))
}

fn main() -> ngc::Result<()> {
    let cfg = ModelConfig {
        layer_sizes: vec![100, 60, 60, 20],
        group_sizes: vec![6, 6, 5],
        alpha_h: 0.5,
        settle_steps: 100,
        beta: 0.1,
        ..Default::default()
    };
    println!("top-layer group mask for groups of 5 (first 10 units):");
    let mask = build_group_mask(20, 5)?;
    for row in mask.rows().into_iter().take(10) {
        println!("  {}", row.iter().take(10).map(|v| if *v == 1.0 { '#' } else { '.' }).collect::<String>());
    }

    let with = GncnParams::new(cfg)?;
    let mut without = with.clone();
    without.disable_lateral();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Array2::from_shape_fn((100, 200), |_| if rng.random::<f64>() < 0.2 { 1.0 } else { 0.0 });
    println!("active fraction per layer with lateral terms:    {:.3?}", rho(&with, &x)?);
    println!("active fraction per layer without lateral terms: {:.3?}", rho(&without, &x)?);
    Ok(())
}
