//! Compares the analytic gradients of the total discrepancy with central
//! finite differences on a small smooth model.
//!
//! cargo run --release --example gradient_check

use ndarray::Array2;
use ngc::config::{ModelConfig, PrecisionMode};
use ngc::model::{full_gradients, predict_means, total_discrepancy, GncnParams, InferenceState};
use ngc::Activation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

fn psi(params: &GncnParams, state: &InferenceState, x: &Array2<f64>) -> f64 {
    let mut s = state.clone();
    predict_means(params, &mut s).unwrap();
    total_discrepancy(params, &s, x.view()).unwrap()
}

fn main() -> ngc::Result<()> {
    let params = GncnParams::new(ModelConfig {
        layer_sizes: vec![6, 5, 4, 3],
        group_sizes: vec![1, 1, 1],
        act_hidden: Activation::Tanh,
        precision_mode: PrecisionMode::Full,
        init_std: 0.5,
        ..Default::default()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Array2::from_shape_fn((6, 3), |_| if rng.random::<bool>() { 1.0 } else { 0.0 });
    let mut state = InferenceState::initial(&params, x.view())?;
    for l in 1..=3 {
        state.z[l] = Array2::from_shape_fn(state.z[l].dim(), |_| rng.random_range(-1.0..1.0));
    }
    predict_means(&params, &mut state)?;
    let g = full_gradients(&params, &state, x.view())?;

    for l in 0..3 {
        let mut worst = 0.0f64;
        for idx in ndarray::indices(params.w(l).dim()) {
            let (mut plus, mut minus) = (params.clone(), params.clone());
            plus.w_mut(l)[idx] += STEP;
            minus.w_mut(l)[idx] -= STEP;
            let fd = (psi(&plus, &state, &x) - psi(&minus, &state, &x)) / (2.0 * STEP);
            worst = worst.max((fd - g.w[l][idx]).abs() / fd.abs().max(g.w[l][idx].abs()).max(1e-6));
        }
        println!("W{l}: max relative error {worst:.2e}");
    }
    for l in 1..=3 {
        let mut worst = 0.0f64;
        for idx in ndarray::indices(state.z[l].dim()) {
            let (mut plus, mut minus) = (state.clone(), state.clone());
            plus.z[l][idx] += STEP;
            minus.z[l][idx] -= STEP;
            let fd = (psi(&params, &plus, &x) - psi(&params, &minus, &x)) / (2.0 * STEP);
            let a = g.z[l - 1][idx];
            worst = worst.max((fd - a).abs() / fd.abs().max(a.abs()).max(1e-6));
        }
        println!("z{l}: max relative error {worst:.2e}");
    }
    Ok(())
}
