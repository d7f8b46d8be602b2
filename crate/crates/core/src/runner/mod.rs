//! The experiment commands behind the `ngc` binary. Every command writes
//! only below its output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::{load_split, split_train_val, write_pgm_grid, DatasetSplit, MaskSpec};
use crate::error::{NgcError, Result};
use crate::eval::{
    bce, classification_error, masked_mse, maxent_fit, monte_carlo_log_px, sparsity_levels, MaxentOptions,
    MetricReport, ReportMeta,
};
use crate::gmm::{fit_em, EmOptions, GmmParams};
use crate::model::{complete_pattern, load_checkpoint, save_checkpoint, GncnParams};
use crate::train::{
    infer_latents_batched, settled_outputs, train, TrainOptions, SETTLE_CHUNK,
    TRAIN_CSV_HEADER,
};

/// Environment variable consulted when the config has no `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "NGC_OUTPUT_DIR";
pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const CHECKPOINT_DIR: &str = "checkpoint";

/// The config's `output_dir`, else `env_value` (normally `NGC_OUTPUT_DIR`).
pub fn resolve_output_dir(cfg: &RunConfig, env_value: Option<&str>) -> Result<PathBuf> {
    cfg.output_dir
        .clone()
        .or_else(|| env_value.filter(|v| !v.is_empty()).map(PathBuf::from))
        .ok_or_else(|| NgcError::Config(format!("no output directory: set output_dir or {OUTPUT_DIR_ENV}")))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| NgcError::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| NgcError::io(path, e))
}

fn meta(cfg: &RunConfig, command: &str, n_samples: Option<usize>) -> ReportMeta {
    ReportMeta {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        n_samples,
        command: command.into(),
    }
}

/// Training records (after `train_limit`) split into `(train, val)`.
pub fn load_train_data(cfg: &RunConfig) -> Result<(DatasetSplit, DatasetSplit)> {
    let images = crate::data::dataset::require_path(&cfg.data.train_images, "train_images")?;
    let mut all = load_split(images, cfg.data.train_labels.as_deref(), cfg.data.threshold)?;
    if let Some(n) = cfg.data.train_limit {
        all = all.take(n);
    }
    split_train_val(&all, cfg.data.n_val, cfg.seed)
}

pub fn load_test_data(cfg: &RunConfig) -> Result<DatasetSplit> {
    let images = crate::data::dataset::require_path(&cfg.data.test_images, "test_images")?;
    let mut test = load_split(images, cfg.data.test_labels.as_deref(), cfg.data.threshold)?;
    if let Some(n) = cfg.data.test_limit {
        test = test.take(n);
    }
    Ok(test)
}

fn check_dim(params: &GncnParams, data: &DatasetSplit) -> Result<()> {
    if data.dim() != params.config.input_dim() {
        return Err(NgcError::Shape(format!(
            "data has {} pixels, model expects {}",
            data.dim(),
            params.config.input_dim()
        )));
    }
    Ok(())
}

/// Fits the mixture prior to the columns of `latents`.
pub fn fit_prior(cfg: &RunConfig, latents: ArrayView2<'_, f64>) -> Result<GmmParams> {
    let opts = EmOptions {
        n_components: cfg.gmm.n_components,
        max_iters: cfg.gmm.em_iters,
        tol: cfg.gmm.tol,
        kind: cfg.gmm.covariance,
        var_floor: cfg.gmm.var_floor,
        seed: cfg.seed,
    };
    Ok(fit_em(latents, opts)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub config_hash: String,
    pub seed: u64,
    pub epochs: usize,
    /// Validation BCE of the initial parameters.
    pub initial_val_bce: Option<f64>,
    pub final_val_bce: Option<f64>,
    pub final_train_bce: Option<f64>,
    pub gmm_components: usize,
    pub wall_seconds: f64,
    pub checkpoint: PathBuf,
}

/// Trains a model, logging one CSV row per epoch, then saves the
/// checkpoint and the mixture prior fitted to the training latents.
/// `checkpoint` defaults to `<out>/checkpoint`.
pub fn cmd_train(cfg: &RunConfig, out: &Path, checkpoint: Option<&Path>) -> Result<TrainSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let (train_set, val_set) = load_train_data(cfg)?;
    if train_set.is_empty() {
        return Err(NgcError::Data("training set is empty".into()));
    }
    ensure_dir(out)?;
    write_text(&out.join("config.json"), &cfg.to_json())?;
    let ckpt = checkpoint.map(Path::to_path_buf).unwrap_or_else(|| out.join(CHECKPOINT_DIR));

    let mut params = GncnParams::new(cfg.model.clone())?;
    check_dim(&params, &train_set)?;
    let opts = TrainOptions::from_config(cfg);
    let val = (!val_set.is_empty()).then(|| val_set.x.view());
    let initial_val_bce = match val {
        Some(v) => Some(crate::train::reconstruction_bce(&params, v, cfg.threads)?),
        None => None,
    };
    log::info!("initial validation BCE {initial_val_bce:?}");

    let log_path = out.join(TRAIN_LOG_FILE);
    let mut csv = fs::File::create(&log_path).map_err(|e| NgcError::io(&log_path, e))?;
    writeln!(csv, "{TRAIN_CSV_HEADER}").map_err(|e| NgcError::io(&log_path, e))?;
    let records = train(&mut params, train_set.x.view(), val, &opts, |rec, _| {
        log::info!("{}", rec.csv_row());
        writeln!(csv, "{}", rec.csv_row()).map_err(|e| NgcError::io(&log_path, e))
    })?;

    save_checkpoint(&ckpt, &params, opts.epochs)?;
    let latents = infer_latents_batched(&params, train_set.x.view(), cfg.model.settle_steps, cfg.threads)?;
    let gmm = fit_prior(cfg, latents.view())?;
    gmm.save(&ckpt)?;

    let summary = TrainSummary {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        epochs: opts.epochs,
        initial_val_bce,
        final_val_bce: records.last().and_then(|r| r.val_bce),
        final_train_bce: records.last().map(|r| r.train_bce),
        gmm_components: gmm.n_components(),
        wall_seconds: start.elapsed().as_secs_f64(),
        checkpoint: ckpt,
    };
    write_text(&out.join("train_summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

fn load_model(checkpoint: &Path) -> Result<GncnParams> {
    Ok(load_checkpoint(checkpoint)?.0)
}

/// Test BCE, Monte-Carlo `log p(x)` under the mixture prior and per-layer
/// sparsity, written to `<out>/eval/`.
pub fn cmd_eval(cfg: &RunConfig, checkpoint: &Path, out: &Path) -> Result<MetricReport> {
    cfg.validate()?;
    let params = load_model(checkpoint)?;
    let gmm = GmmParams::load(checkpoint)?;
    let test = load_test_data(cfg)?;
    check_dim(&params, &test)?;
    let report = evaluate(&params, &gmm, test.x.view(), cfg)?;
    report.write(&out.join("eval"), &meta(cfg, "eval", Some(cfg.eval.mc_samples)))?;
    Ok(report)
}

/// The metrics of [`cmd_eval`] for an in-memory model.
pub fn evaluate(params: &GncnParams, gmm: &GmmParams, x: ArrayView2<'_, f64>, cfg: &RunConfig) -> Result<MetricReport> {
    let steps = params.config.settle_steps;
    let mut layers = settled_outputs(params, x, steps, cfg.threads)?;
    let recon = layers.remove(0);
    let test_bce = bce(x, recon.view(), params.config.p_eps)?;
    let log_px = monte_carlo_log_px(params, gmm, x, cfg.eval.mc_samples, cfg.seed)?;
    let report = MetricReport {
        bce: Some(test_bce),
        log_px: Some(log_px.mean),
        log_px_stderr: Some(log_px.stderr),
        mmse: None,
        err_pct: None,
        rho: sparsity_levels(&layers, cfg.eval.sparsity_eps),
    };
    let finite = [report.bce, report.log_px, report.log_px_stderr]
        .iter()
        .flatten()
        .chain(report.rho.iter())
        .all(|v| v.is_finite());
    if !finite {
        return Err(NgcError::NonFinite("evaluation metrics".into()));
    }
    Ok(report)
}

/// Smallest near-square grid holding `n` tiles.
pub fn grid_shape(n: usize) -> (usize, usize) {
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    (n.div_ceil(cols).max(1), cols)
}

/// Draws `n` prior samples, decodes them to Bernoulli means and writes the
/// grid to `<out>/samples.pgm`.
pub fn cmd_sample(cfg: &RunConfig, checkpoint: &Path, out: &Path, n: usize) -> Result<PathBuf> {
    cfg.validate()?;
    if n == 0 {
        return Err(NgcError::Config("number of samples must be >= 1".into()));
    }
    let params = load_model(checkpoint)?;
    let gmm = GmmParams::load(checkpoint)?;
    let means = sample_means(&params, &gmm, n, cfg.seed)?;
    ensure_dir(out)?;
    let path = out.join("samples.pgm");
    let (rows, cols) = grid_shape(n);
    write_pgm_grid(means.view(), rows, cols, &path)?;
    Ok(path)
}

/// Prior samples decoded to Bernoulli means, `D x n`.
pub fn sample_means(params: &GncnParams, gmm: &GmmParams, n: usize, seed: u64) -> Result<Array2<f64>> {
    let z = gmm.sample(n, seed)?;
    crate::model::ancestral_decode(params, z.view())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub mmse: f64,
    /// Hidden pixels filled with the training-set pixel means.
    pub mean_fill_mmse: f64,
    pub records: usize,
}

/// Completes `x` under `mask` in memory-bounded chunks.
pub fn complete_batched(params: &GncnParams, x: ArrayView2<'_, f64>, mask: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let steps = params.config.settle_steps;
    let mut out = Array2::zeros(x.dim());
    for a in (0..x.ncols()).step_by(SETTLE_CHUNK) {
        let b = (a + SETTLE_CHUNK).min(x.ncols());
        let done = complete_pattern(params, x.slice(s![.., a..b]), mask.slice(s![.., a..b]), steps)?;
        out.slice_mut(s![.., a..b]).assign(&done);
    }
    Ok(out)
}

/// Fills hidden pixels with `pixel_means`, keeps observed ones.
pub fn mean_fill(x: ArrayView2<'_, f64>, mask: ArrayView2<'_, f64>, pixel_means: &Array1<f64>) -> Array2<f64> {
    let mut out = x.to_owned();
    for ((i, j), v) in out.indexed_iter_mut() {
        if mask[[i, j]] == 0.0 {
            *v = pixel_means[i];
        }
    }
    out
}

/// Pattern completion of the test set, with the mean-fill baseline; writes
/// before/after grids and metrics to `<out>/complete/`.
pub fn cmd_complete(cfg: &RunConfig, checkpoint: &Path, out: &Path) -> Result<CompletionReport> {
    cfg.validate()?;
    let params = load_model(checkpoint)?;
    let test = load_test_data(cfg)?;
    check_dim(&params, &test)?;
    let (train_set, _) = load_train_data(cfg)?;
    let mask = MaskSpec::from_kind(cfg.eval.mask, test.dim(), test.len())?;
    let completed = complete_batched(&params, test.x.view(), mask.m.view())?;
    let pixel_means = train_set.x.mean_axis(Axis(1)).ok_or_else(|| NgcError::Data("training set is empty".into()))?;
    let baseline = mean_fill(test.x.view(), mask.m.view(), &pixel_means);
    let report = CompletionReport {
        mmse: masked_mse(test.x.view(), completed.view(), mask.m.view())?,
        mean_fill_mmse: masked_mse(test.x.view(), baseline.view(), mask.m.view())?,
        records: test.len(),
    };
    let dir = out.join("complete");
    ensure_dir(&dir)?;
    let shown = test.len().min(cfg.eval.n_samples_grid.max(1));
    let (rows, cols) = grid_shape(shown);
    write_pgm_grid(test.x.slice(s![.., ..shown]), rows, cols, &dir.join("original.pgm"))?;
    write_pgm_grid(mask.apply(test.x.view()).slice(s![.., ..shown]), rows, cols, &dir.join("masked.pgm"))?;
    write_pgm_grid(completed.slice(s![.., ..shown]), rows, cols, &dir.join("completed.pgm"))?;
    let metrics = MetricReport {
        mmse: Some(report.mmse),
        ..Default::default()
    };
    metrics.write(&dir, &meta(cfg, "complete", None))?;
    write_text(&dir.join("completion.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    /// Test error of the probe on top-layer latents, percent.
    pub latent_err: f64,
    /// Test error of the same probe on raw pixels, percent.
    pub pixel_err: f64,
}

pub fn maxent_options(cfg: &RunConfig) -> MaxentOptions {
    MaxentOptions {
        epochs: cfg.eval.maxent_epochs,
        lr: cfg.eval.maxent_lr,
        batch_size: cfg.eval.maxent_batch,
        seed: cfg.seed,
        ..Default::default()
    }
}

/// Probe test error (percent) for given train/test features.
pub fn probe_error(
    train_features: ArrayView2<'_, f64>,
    train_labels: ArrayView2<'_, f64>,
    test_features: ArrayView2<'_, f64>,
    test_labels: ArrayView2<'_, f64>,
    opts: MaxentOptions,
) -> Result<f64> {
    let probe = maxent_fit(train_features, train_labels, opts)?;
    classification_error(test_labels, probe.predict_proba(test_features).view())
}

/// Fits the linear probe on training latents and on raw pixels and reports
/// both test errors (also written to `<out>/classify/`).
pub fn cmd_classify(cfg: &RunConfig, checkpoint: &Path, out: &Path) -> Result<ClassifyReport> {
    cfg.validate()?;
    let params = load_model(checkpoint)?;
    let (train_set, _) = load_train_data(cfg)?;
    let test = load_test_data(cfg)?;
    check_dim(&params, &test)?;
    let report = classify(&params, &train_set, &test, cfg)?;
    let dir = out.join("classify");
    let metrics = MetricReport {
        err_pct: Some(report.latent_err),
        ..Default::default()
    };
    metrics.write(&dir, &meta(cfg, "classify", None))?;
    write_text(&dir.join("classify.json"), &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

/// The two probes of [`cmd_classify`] for an in-memory model.
pub fn classify(params: &GncnParams, train_set: &DatasetSplit, test: &DatasetSplit, cfg: &RunConfig) -> Result<ClassifyReport> {
    let ytr = train_set.y.as_ref().ok_or_else(|| NgcError::LabelsMissing("training set".into()))?;
    let yte = test.y.as_ref().ok_or_else(|| NgcError::LabelsMissing("test set".into()))?;
    if ytr.nrows() != yte.nrows() {
        return Err(NgcError::Data(format!(
            "train labels have {} classes, test labels {}",
            ytr.nrows(),
            yte.nrows()
        )));
    }
    let steps = params.config.settle_steps;
    let ztr = infer_latents_batched(params, train_set.x.view(), steps, cfg.threads)?;
    let zte = infer_latents_batched(params, test.x.view(), steps, cfg.threads)?;
    let opts = maxent_options(cfg);
    Ok(ClassifyReport {
        latent_err: probe_error(ztr.view(), ytr.view(), zte.view(), yte.view(), opts)?,
        pixel_err: probe_error(train_set.x.view(), ytr.view(), test.x.view(), yte.view(), opts)?,
    })
}
