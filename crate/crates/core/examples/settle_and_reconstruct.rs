//! Settles a freshly initialised model on a few random binary patterns and
//! prints the reconstruction error and total discrepancy along the way.
//! Untrained error weights are random and the corrections wander; with `E`
//! tied to `W^T` the reconstruction improves from the first step. Leak and
//! lateral terms are not part of the discrepancy, so it need not rise.
//!
//! cargo run --release --example settle_and_reconstruct

use ndarray::Array2;
use ngc::config::ModelConfig;
use ngc::eval::bce;
use ngc::model::{settle, settle_observed, total_discrepancy, GncnParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn trace(label: &str, params: &GncnParams, x: &Array2<f64>) -> ngc::Result<()> {
    println!("{label}\n  step  bce      discrepancy");
    settle_observed(params, x.view(), params.config.settle_steps, |step, state| {
        if step % 10 == 0 {
            let b = bce(x.view(), state.reconstruction().view(), params.config.p_eps).unwrap();
            let psi = total_discrepancy(params, state, x.view()).unwrap();
            println!("  {step:4}  {b:7.4}  {psi:9.4}");
        }
    })?;
    Ok(())
}

fn main() -> ngc::Result<()> {
    let random = GncnParams::new(ModelConfig {
        layer_sizes: vec![64, 32, 32, 10],
        group_sizes: vec![4, 4, 5],
        ..Default::default()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let x = Array2::from_shape_fn((64, 8), |_| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 });
    trace("random error weights", &random, &x)?;
    let mut tied = random.clone();
    tied.tie_error_weights();
    trace("error weights tied to W^T", &tied, &x)?;

    // `settle` runs the same loop without the observer; the input stays clamped.
    let settled = settle(&tied, x.view(), tied.config.settle_steps)?;
    assert_eq!(settled.z[0], x);
    println!("top-layer latents: {:?}", settled.top().dim());
    Ok(())
}
