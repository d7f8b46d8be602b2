//! Acceptance suite. Prints one `PASS` / `FAIL` / `SKIP` line per criterion.
//! Failures are reported in the output; set `NGC_ACCEPTANCE_STRICT=1` to make
//! any failure exit non-zero.
//!
//! `NGC_ACCEPTANCE=1,2,6` restricts the run to the listed criteria.
//! `NGC_FULL_MNIST=<dir>` points criterion 10 at the full MNIST IDX files.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ngc::config::{CovarianceKind, DataConfig, ModelConfig, PrecisionMode, RunConfig};
use ngc::data::MaskSpec;
use ngc::eval::{bce, masked_mse, monte_carlo_log_px, sparsity_levels};
use ngc::gmm::{fit_em, EmOptions, GmmParams};
use ngc::model::{
    apply_updates, complete_pattern, full_gradients, max_column_norm_deviation, predict_means, settle,
    settle_observed, total_discrepancy, GncnParams, InferenceState,
};
use ngc::runner::{classify, complete_batched, load_test_data, load_train_data, mean_fill};
use ngc::train::{reconstruction_bce, settled_outputs, train, TrainOptions};
use ngc::Activation;

struct Outcome {
    pass: Option<bool>,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass: Some(pass), detail: detail.into() }
    }

    fn skip(detail: impl Into<String>) -> Self {
        Self { pass: None, detail: detail.into() }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| scale * rng.sample::<f64, _>(StandardNormal))
}

fn binary(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| if rng.random::<f64>() < 0.5 { 1.0 } else { 0.0 })
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let a = gaussian(rng, n, n, 0.3);
    a.dot(&a.t()) + Array2::<f64>::eye(n) * 0.5
}

/// A small random model with full precision matrices and smooth
/// activations.
fn smooth_instance(rng: &mut ChaCha8Rng) -> (GncnParams, Array2<f64>, InferenceState) {
    let sizes: Vec<usize> = (0..4).map(|_| rng.random_range(2..=8)).collect();
    let batch = rng.random_range(1..=4);
    let hidden = [Activation::Tanh, Activation::Softplus, Activation::Logistic][rng.random_range(0..3)];
    let cfg = ModelConfig {
        layer_sizes: sizes.clone(),
        group_sizes: vec![1; 3],
        act_hidden: hidden,
        precision_mode: PrecisionMode::Full,
        ..Default::default()
    };
    let w = (0..3).map(|l| gaussian(rng, sizes[l], sizes[l + 1], 0.5)).collect();
    let e = (1..=3).map(|l| gaussian(rng, sizes[l], sizes[l - 1], 0.5)).collect();
    let p = (1..3).map(|l| random_spd(rng, sizes[l])).collect();
    let v = (1..=3).map(|l| Array2::zeros((sizes[l], sizes[l]))).collect();
    let params = GncnParams::from_parts(cfg, w, e, p, v).expect("valid instance");
    let x = binary(rng, sizes[0], batch);
    let mut state = InferenceState::initial(&params, x.view()).unwrap();
    for l in 1..=3 {
        state.z[l] = gaussian(rng, sizes[l], batch, 1.0);
    }
    predict_means(&params, &mut state).unwrap();
    (params, x, state)
}

fn psi_at(params: &GncnParams, state: &InferenceState, x: &Array2<f64>) -> f64 {
    let mut s = state.clone();
    predict_means(params, &mut s).unwrap();
    total_discrepancy(params, &s, x.view()).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

const FD_STEP: f64 = 1e-5;

fn c1_gradient_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for seed in 0..50 {
        let (params, x, state) = smooth_instance(&mut rng(1000 + seed));
        let g = full_gradients(&params, &state, x.view()).unwrap();
        let depth = params.depth();
        for l in 0..depth {
            for idx in ndarray::indices(params.w(l).dim()) {
                let mut plus = params.clone();
                plus.w_mut(l)[idx] += FD_STEP;
                let mut minus = params.clone();
                minus.w_mut(l)[idx] -= FD_STEP;
                let fd = (psi_at(&plus, &state, &x) - psi_at(&minus, &state, &x)) / (2.0 * FD_STEP);
                worst = worst.max(rel_err(g.w[l][idx], fd));
                checked += 1;
            }
        }
        for l in 1..depth {
            for idx in ndarray::indices(params.p(l).dim()) {
                let mut plus = params.clone();
                plus.p_mut(l)[idx] += FD_STEP;
                let mut minus = params.clone();
                minus.p_mut(l)[idx] -= FD_STEP;
                let fd = (psi_at(&plus, &state, &x) - psi_at(&minus, &state, &x)) / (2.0 * FD_STEP);
                worst = worst.max(rel_err(g.p[l - 1][idx], fd));
                checked += 1;
            }
        }
        for l in 1..=depth {
            for idx in ndarray::indices(state.z[l].dim()) {
                let mut plus = state.clone();
                plus.z[l][idx] += FD_STEP;
                let mut minus = state.clone();
                minus.z[l][idx] -= FD_STEP;
                let fd = (psi_at(&params, &plus, &x) - psi_at(&params, &minus, &x)) / (2.0 * FD_STEP);
                worst = worst.max(rel_err(g.z[l - 1][idx], fd));
                checked += 1;
            }
        }
    }
    Outcome::check(
        worst <= 1e-5,
        format!("50 instances, {checked} partials, max relative error {worst:.2e} (limit 1e-5)"),
    )
}

fn c2_hebbian_identity() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let (params, x, _) = smooth_instance(&mut rng(1000 + seed));
        let state = settle(&params, x.view(), 5).unwrap();
        let exact = full_gradients(&params, &state, x.view()).unwrap();
        let batch = state.batch_size() as f64;
        for l in 1..params.depth() {
            // the local rule is the batch average of the per-record gradient
            let local = state.err[l].dot(&params.config.act_hidden.apply(state.z[l + 1].view()).t()) / batch;
            let diff = (&local * batch - &exact.w[l]).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            worst = worst.max(diff);
        }
    }
    Outcome::check(worst <= 1e-10, format!("max |B*dW - dpsi/dW| = {worst:.2e} (limit 1e-10)"))
}

/// Instances where the settled trajectory never lowers the objective. The
/// hidden activation of instance `i` is `hidden[i % hidden.len()]`.
fn monotone_settling_count(hidden: &[Activation]) -> usize {
    let mut monotone = 0;
    for seed in 0..100u64 {
        let mut r = rng(2000 + seed);
        let sizes: Vec<usize> = vec![r.random_range(8..=20), r.random_range(4..=12), r.random_range(4..=12), r.random_range(2..=6)];
        let cfg = ModelConfig {
            layer_sizes: sizes.clone(),
            group_sizes: vec![1; 3],
            gamma: 0.0,
            beta: 0.02,
            settle_steps: 30,
            precision_mode: PrecisionMode::Identity,
            act_hidden: hidden[seed as usize % hidden.len()],
            seed,
            ..Default::default()
        };
        let mut params = GncnParams::new(cfg).unwrap();
        params.disable_lateral();
        params.tie_error_weights();
        let x = binary(&mut r, sizes[0], 4);
        let mut psis = Vec::new();
        settle_observed(&params, x.view(), 30, |_, s| psis.push(total_discrepancy(&params, s, x.view()).unwrap())).unwrap();
        if psis.windows(2).all(|w| w[1] >= w[0]) {
            monotone += 1;
        }
    }
    monotone
}

fn c3_settling_progress() -> Outcome {
    // With tied E the error-driven step is the exact gradient only when the
    // hidden activation has no flat region; rectified units below zero still
    // move, so ReLU models are reported but not held to the bound.
    let monotone = monotone_settling_count(&[Activation::Identity, Activation::Tanh, Activation::Softplus]);
    let relu = monotone_settling_count(&[Activation::Relu]);
    Outcome::check(
        monotone >= 95,
        format!("{monotone}/100 smooth-activation instances non-decreasing over 30 iterations (need 95); relu instances {relu}/100"),
    )
}

fn c4_normalisation_and_clamping() -> Outcome {
    let mut worst_norm = 0.0f64;
    let mut clamp_failures = 0;
    for case in 0..1000u64 {
        let mut r = rng(3000 + case);
        let sizes: Vec<usize> = vec![r.random_range(2..=16), 2 * r.random_range(1..=6), r.random_range(1..=6)];
        let mode = [PrecisionMode::Identity, PrecisionMode::Diagonal, PrecisionMode::Full][r.random_range(0..3)];
        let cfg = ModelConfig {
            layer_sizes: sizes.clone(),
            group_sizes: vec![2, 1],
            settle_steps: r.random_range(1..=8),
            beta: r.random_range(0.01..0.2),
            precision_mode: mode,
            seed: case,
            ..Default::default()
        };
        let mut params = GncnParams::new(cfg).unwrap();
        let batch = r.random_range(1..=5);
        let x = binary(&mut r, sizes[0], batch);
        let steps = params.config.settle_steps;
        let state = settle(&params, x.view(), steps).unwrap();
        if state.z[0] != x {
            clamp_failures += 1;
        }
        let mask = binary(&mut r, sizes[0], batch);
        let done = complete_pattern(&params, x.view(), mask.view(), steps).unwrap();
        for (idx, &m) in mask.indexed_iter() {
            if m != 0.0 && done[idx].to_bits() != x[idx].to_bits() {
                clamp_failures += 1;
            }
        }
        apply_updates(&mut params, &state, r.random_range(0.001..0.5), 0.01).unwrap();
        for l in 0..params.depth() {
            worst_norm = worst_norm.max(max_column_norm_deviation(params.w(l)));
            worst_norm = worst_norm.max(max_column_norm_deviation(params.e(l + 1)));
        }
    }
    Outcome::check(
        worst_norm <= 1e-9 && clamp_failures == 0,
        format!("1000 cases: max |column norm - 1| = {worst_norm:.2e}, clamp violations = {clamp_failures}"),
    )
}

fn c5_em() -> Outcome {
    let mut worst_drop = 0.0f64;
    let mut reseeded = 0usize;
    for case in 0..100u64 {
        let mut r = rng(4000 + case);
        let d = r.random_range(1..=4);
        let k = r.random_range(1..=5);
        let n = r.random_range(k * 10..=200);
        let centres = gaussian(&mut r, d, k, 3.0);
        let data = Array2::from_shape_fn((d, n), |(i, j)| centres[[i, j % k]] + r.sample::<f64, _>(StandardNormal));
        let kind = if case % 2 == 0 { CovarianceKind::Full } else { CovarianceKind::Diagonal };
        let opts = EmOptions { max_iters: 60, tol: 0.0, kind, ..EmOptions::new(k, case) };
        let (_, report) = fit_em(data.view(), opts).unwrap();
        reseeded += report.reseeded;
        for w in report.log_likelihoods.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    let data = ndarray::array![[0.0, 2.0, 5.0, -1.0, 3.5], [1.0, 0.5, -2.0, 4.0, 0.0]];
    let (g, _) = fit_em(data.view(), EmOptions::new(1, 0)).unwrap();
    let mean = data.mean_axis(Axis(1)).unwrap();
    let centred = &data - &mean.view().insert_axis(Axis(1));
    let cov = centred.dot(&centred.t()) / data.ncols() as f64;
    let closed = (&g.means.row(0) - &mean).iter().chain((&g.covs[0] - &cov).iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    Outcome::check(
        worst_drop <= 1e-9 && closed <= 1e-8,
        format!(
            "100 datasets: max log-likelihood drop {worst_drop:.2e} (tol 1e-9), {reseeded} re-seeds; single-component error {closed:.2e} (tol 1e-8)"
        ),
    )
}

/// Softplus hidden units and zero top weights make every decoded mean
/// `sigmoid(ln 2 * rowsum(W0))`, whatever the sampled latent.
fn constant_decoder() -> (GncnParams, Array1<f64>) {
    let sizes = vec![6, 4, 3];
    let cfg = ModelConfig {
        layer_sizes: sizes.clone(),
        group_sizes: vec![1, 1],
        act_hidden: Activation::Softplus,
        ..Default::default()
    };
    let w0 = gaussian(&mut rng(5), 6, 4, 1.0);
    let w = vec![w0.clone(), Array2::zeros((4, 3))];
    let e = vec![Array2::zeros((4, 6)), Array2::zeros((3, 4))];
    let p = vec![Array2::eye(4)];
    let v = vec![Array2::zeros((4, 4)), Array2::zeros((3, 3))];
    let params = GncnParams::from_parts(cfg, w, e, p, v).unwrap();
    let means = w0.sum_axis(Axis(1)).mapv(|s| ngc::activation::logistic(2f64.ln() * s));
    (params, means)
}

fn isotropic_prior(dim: usize, components: usize, rng: &mut ChaCha8Rng) -> GmmParams {
    GmmParams {
        weights: Array1::from_elem(components, 1.0 / components as f64),
        means: gaussian(rng, components, dim, 1.0),
        covs: vec![Array2::eye(dim); components],
        kind: CovarianceKind::Full,
        var_floor: 1e-6,
    }
}

fn bernoulli_ll(x: ArrayView2<'_, f64>, m: &Array1<f64>) -> Array1<f64> {
    x.axis_iter(Axis(1))
        .map(|c| c.iter().zip(m).map(|(&v, &p)| v * p.ln() + (1.0 - v) * (1.0 - p).ln()).sum())
        .collect()
}

fn c6_estimator() -> Outcome {
    let (params, means) = constant_decoder();
    let gmm = isotropic_prior(3, 2, &mut rng(6));
    let x = binary(&mut rng(7), 6, 9);
    let exact = bernoulli_ll(x.view(), &means).sum() / 9.0;
    let mut worst_const = 0.0f64;
    for n in [1, 7, 5000] {
        let est = monte_carlo_log_px(&params, &gmm, x.view(), n, 11).unwrap();
        worst_const = worst_const.max((est.mean - exact).abs());
    }

    // 4-pixel model with a scalar latent: the exact marginal is a 1-D
    // integral, done by dense trapezoid quadrature per mixture component.
    let cfg = ModelConfig {
        layer_sizes: vec![4, 3, 1],
        group_sizes: vec![1, 1],
        act_hidden: Activation::Tanh,
        ..Default::default()
    };
    let mut r = rng(8);
    let w = vec![gaussian(&mut r, 4, 3, 1.5), gaussian(&mut r, 3, 1, 1.0)];
    let e = vec![Array2::zeros((3, 4)), Array2::zeros((1, 3))];
    let p = vec![Array2::eye(3)];
    let v = vec![Array2::zeros((3, 3)), Array2::zeros((1, 1))];
    let toy = GncnParams::from_parts(cfg, w, e, p, v).unwrap();
    let prior = GmmParams {
        weights: ndarray::array![0.3, 0.7],
        means: ndarray::array![[-1.0], [1.5]],
        covs: vec![ndarray::array![[0.5]], ndarray::array![[1.2]]],
        kind: CovarianceKind::Full,
        var_floor: 1e-6,
    };
    let patterns = Array2::from_shape_fn((4, 16), |(i, j)| ((j >> i) & 1) as f64);
    let grid = 40_001;
    let z = Array1::linspace(-12.0, 12.0, grid);
    let dz = 24.0 / (grid - 1) as f64;
    let decoded = ngc::model::ancestral_decode(&toy, z.view().insert_axis(Axis(0))).unwrap();
    let density: Array1<f64> = z.iter().map(|&v| prior.log_density(ndarray::array![v].view()).unwrap().exp()).collect();
    let mut worst_toy = 0.0f64;
    let est = ngc::eval::per_record_log_px(
        ngc::model::ancestral_decode(&toy, prior.sample(5000, 21).unwrap().view()).unwrap().view(),
        patterns.view(),
        toy.config.p_eps,
    )
    .unwrap();
    for j in 0..16 {
        let xj = patterns.column(j);
        let mut integral = 0.0;
        for (t, col) in decoded.axis_iter(Axis(1)).enumerate() {
            let lik: f64 = xj.iter().zip(col).map(|(&v, &m)| if v == 1.0 { m } else { 1.0 - m }).product();
            let wgt = if t == 0 || t == grid - 1 { 0.5 } else { 1.0 };
            integral += wgt * lik * density[t] * dz;
        }
        worst_toy = worst_toy.max((est[j] - integral.ln()).abs());
    }
    Outcome::check(
        worst_const <= 1e-10 && worst_toy <= 0.05,
        format!("constant decoder max error {worst_const:.2e} (tol 1e-10); 4-pixel toy max |estimate - exact| = {worst_toy:.4} nats over 16 patterns (tol 0.05)"),
    )
}

// ---------------------------------------------------------------- desk scale

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn desk_config(seed: u64) -> RunConfig {
    let dir = workspace_root().join("data/mnist-desk");
    RunConfig {
        data: DataConfig {
            train_images: Some(dir.join("train-images-idx3-ubyte")),
            train_labels: Some(dir.join("train-labels-idx1-ubyte")),
            test_images: Some(dir.join("t10k-images-idx3-ubyte")),
            test_labels: Some(dir.join("t10k-labels-idx1-ubyte")),
            n_val: 0,
            ..Default::default()
        },
        optimizer: ngc::config::OptimizerConfig { epochs: 10, ..Default::default() },
        ..Default::default()
    }
    .with_seed(seed)
}

struct DeskRun {
    params: GncnParams,
    initial_test_bce: f64,
    test_bce: f64,
    rho: Vec<f64>,
    seconds: f64,
}

fn train_desk(seed: u64, lateral: bool) -> DeskRun {
    let mut cfg = desk_config(seed);
    if !lateral {
        cfg.model.alpha_e = 0.0;
        cfg.model.alpha_h = 0.0;
    }
    let (train_set, _) = load_train_data(&cfg).expect("desk training data");
    let test = load_test_data(&cfg).expect("desk test data");
    let start = Instant::now();
    let mut params = GncnParams::new(cfg.model.clone()).unwrap();
    let initial_test_bce = reconstruction_bce(&params, test.x.view(), 1).unwrap();
    let opts = TrainOptions::from_config(&cfg);
    train(&mut params, train_set.x.view(), None, &opts, |rec, _| {
        eprintln!("    seed {seed} lateral {lateral} epoch {} train BCE {:.2}", rec.epoch, rec.train_bce);
        Ok(())
    })
    .unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let mut outputs = settled_outputs(&params, test.x.view(), params.config.settle_steps, 1).unwrap();
    let recon = outputs.remove(0);
    let test_bce = bce(test.x.view(), recon.view(), params.config.p_eps).unwrap();
    let rho = sparsity_levels(&outputs, cfg.eval.sparsity_eps);
    eprintln!("    seed {seed} lateral {lateral}: test BCE {test_bce:.2}, rho {rho:.3?}, {seconds:.0}s");
    DeskRun { params, initial_test_bce, test_bce, rho, seconds }
}

const SEEDS: [u64; 3] = [1234, 1235, 1236];

fn desk_runs(lateral: bool) -> &'static Vec<DeskRun> {
    static ON: OnceLock<Vec<DeskRun>> = OnceLock::new();
    static OFF: OnceLock<Vec<DeskRun>> = OnceLock::new();
    let cell = if lateral { &ON } else { &OFF };
    cell.get_or_init(|| SEEDS.iter().map(|&s| train_desk(s, lateral)).collect())
}

fn desk_available() -> bool {
    workspace_root().join("data/mnist-desk/train-images-idx3-ubyte").exists()
}

fn c7_desk_learning() -> Outcome {
    if !desk_available() {
        return Outcome::check(false, "desk MNIST subset missing under data/mnist-desk");
    }
    let run = &desk_runs(true)[0];
    let drop = run.initial_test_bce - run.test_bce;
    Outcome::check(
        run.test_bce <= 100.0 && drop >= 50.0 && run.seconds <= 1800.0,
        format!(
            "test BCE {:.2} (limit 100), epoch-0 BCE {:.2}, improvement {:.2} (need 50), training {:.0}s (limit 1800)",
            run.test_bce, run.initial_test_bce, drop, run.seconds
        ),
    )
}

fn c8_sparsity() -> Outcome {
    if !desk_available() {
        return Outcome::check(false, "desk MNIST subset missing under data/mnist-desk");
    }
    let on = desk_runs(true);
    let off = desk_runs(false);
    let rho = &on[0].rho;
    let top = rho.len() - 1;
    let bounded = rho.iter().all(|&r| r <= 0.35) && rho[top] <= rho[0];
    let higher = on.iter().zip(off).all(|(a, b)| b.rho[top] > a.rho[top]);
    let tops_on: Vec<String> = on.iter().map(|r| format!("{:.3}", r.rho[top])).collect();
    let tops_off: Vec<String> = off.iter().map(|r| format!("{:.3}", r.rho[top])).collect();
    Outcome::check(
        bounded && higher,
        format!(
            "rho {rho:.3?} (each <= 0.35, top <= first); top-layer rho lateral on [{}] vs off [{}]",
            tops_on.join(", "),
            tops_off.join(", ")
        ),
    )
}

fn c9_probes() -> Outcome {
    if !desk_available() {
        return Outcome::check(false, "desk MNIST subset missing under data/mnist-desk");
    }
    let runs = desk_runs(true);
    let cfg = desk_config(SEEDS[0]);
    let (train_set, _) = load_train_data(&cfg).unwrap();
    let test = load_test_data(&cfg).unwrap();
    let probe = classify(&runs[0].params, &train_set, &test, &cfg).unwrap();
    let margin = probe.pixel_err - probe.latent_err;

    let mask = MaskSpec::right_half(test.dim(), test.len()).unwrap();
    let pixel_means = train_set.x.mean_axis(Axis(1)).unwrap();
    let baseline = masked_mse(test.x.view(), mean_fill(test.x.view(), mask.m.view(), &pixel_means).view(), mask.m.view()).unwrap();
    let mut completions = Vec::new();
    for run in runs {
        let done = complete_batched(&run.params, test.x.view(), mask.m.view()).unwrap();
        completions.push(masked_mse(test.x.view(), done.view(), mask.m.view()).unwrap());
    }
    let completion_ok = completions.iter().all(|&m| m < baseline);
    let shown: Vec<String> = completions.iter().map(|m| format!("{m:.2}")).collect();
    Outcome::check(
        margin >= 2.0 && completion_ok,
        format!(
            "Err latents {:.2}% vs pixels {:.2}% (margin {margin:.2}, need 2); M-MSE [{}] vs mean-fill {baseline:.2}",
            probe.latent_err,
            probe.pixel_err,
            shown.join(", ")
        ),
    )
}

fn c10_full_mnist() -> Outcome {
    let Some(dir) = std::env::var_os("NGC_FULL_MNIST").map(PathBuf::from) else {
        return Outcome::skip("full MNIST not available (set NGC_FULL_MNIST to a directory with the four IDX files)");
    };
    let mut cfg = desk_config(SEEDS[0]);
    cfg.data.train_images = Some(dir.join("train-images-idx3-ubyte"));
    cfg.data.train_labels = Some(dir.join("train-labels-idx1-ubyte"));
    cfg.data.test_images = Some(dir.join("t10k-images-idx3-ubyte"));
    cfg.data.test_labels = Some(dir.join("t10k-labels-idx1-ubyte"));
    cfg.optimizer.epochs = 1;
    let (train_set, _) = match load_train_data(&cfg) {
        Ok(d) => d,
        Err(e) => return Outcome::check(false, format!("cannot load full MNIST: {e}")),
    };
    let test = load_test_data(&cfg).unwrap();
    let mut params = GncnParams::new(cfg.model.clone()).unwrap();
    train(&mut params, train_set.x.view(), None, &TrainOptions::from_config(&cfg), |_, _| Ok(())).unwrap();
    let b = reconstruction_bce(&params, test.x.view(), 1).unwrap();
    Outcome::check(b <= 82.0, format!("test BCE after one pass {b:.2} (limit 82)"))
}

fn selected() -> Option<Vec<u32>> {
    std::env::var("NGC_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').filter_map(|t| t.trim().parse().ok()).collect())
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        (1, "gradient oracle", c1_gradient_oracle),
        (2, "hebbian rule identity", c2_hebbian_identity),
        (3, "settling progress", c3_settling_progress),
        (4, "normalisation and clamping", c4_normalisation_and_clamping),
        (5, "em monotonicity", c5_em),
        (6, "estimator exactness", c6_estimator),
        (7, "desk-scale learning", c7_desk_learning),
        (8, "sparsity emergence", c8_sparsity),
        (9, "downstream probes", c9_probes),
        (10, "full mnist stretch", c10_full_mnist),
    ];
    let only = selected();
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let status = match outcome.pass {
            Some(true) => "PASS",
            Some(false) => {
                failed += 1;
                "FAIL"
            }
            None => "SKIP",
        };
        println!(
            "criterion {id:>2} {status} {name}: {} [{:.1}s]",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        if std::env::var_os("NGC_ACCEPTANCE_STRICT").is_some_and(|v| v != "0") {
            std::process::exit(1);
        }
    }
}
