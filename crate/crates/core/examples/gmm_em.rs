//! Fits a two-component Gaussian mixture by EM to synthetic 2-D clusters
//! and prints the recovered parameters and the log-likelihood trace.
//!
//! cargo run --release --example gmm_em

use ndarray::Array2;
use ngc::{fit_em, EmOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> ngc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let noise = Normal::new(0.0, 0.5).expect("valid normal");
    let data = Array2::from_shape_fn((2, 400), |(i, j)| {
        let centre = if j < 300 { [-2.0, 0.0] } else { [3.0, 1.0] };
        centre[i] + noise.sample(&mut rng)
    });
    let (gmm, report) = fit_em(data.view(), EmOptions::new(2, 1))?;
    println!("{} EM iterations, {} re-seeded components", report.iterations, report.reseeded);
    if let (Some(first), Some(last)) = (report.log_likelihoods.first(), report.log_likelihoods.last()) {
        println!("mean log-likelihood {first:.4} -> {last:.4}");
    }
    for k in 0..gmm.n_components() {
        println!(
            "component {k}: weight {:.3}, mean {:.3?}",
            gmm.weights[k],
            gmm.means.row(k).to_vec()
        );
    }
    let draws = gmm.sample(5, 2)?;
    println!("five draws:\n{draws:.3}");
    Ok(())
}
