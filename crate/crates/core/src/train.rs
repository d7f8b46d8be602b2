//! The alternating training loop: settle each mini-batch, then apply the
//! local parameter updates.

use std::time::Instant;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::data::minibatch_indices;
use crate::error::{NgcError, Result};
use crate::eval::bce;
use crate::model::{apply_updates, settle, GncnParams, InferenceState};

/// Records processed per chunk when settling a whole dataset.
pub const SETTLE_CHUNK: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub eta_w: f64,
    pub eta_p: f64,
    pub seed: u64,
    pub threads: usize,
}

impl TrainOptions {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            epochs: cfg.optimizer.epochs,
            batch_size: cfg.optimizer.batch_size,
            eta_w: cfg.optimizer.eta_w,
            eta_p: cfg.optimizer.precision_rate(),
            seed: cfg.seed,
            threads: cfg.threads,
        }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean reconstruction BCE of the mini-batches, measured after settling
    /// and before each update.
    pub train_bce: f64,
    pub val_bce: Option<f64>,
    pub wall_seconds: f64,
}

pub const TRAIN_CSV_HEADER: &str = "epoch,train_bce,val_bce,wall_seconds";

impl EpochRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.epoch,
            self.train_bce,
            self.val_bce.map(|v| v.to_string()).unwrap_or_default(),
            self.wall_seconds
        )
    }
}

fn chunk_bounds(n: usize) -> Vec<(usize, usize)> {
    (0..n).step_by(SETTLE_CHUNK).map(|a| (a, (a + SETTLE_CHUNK).min(n))).collect()
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| NgcError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Settles `x` in chunks and applies `extract` to every settled chunk.
/// Output `k` of every chunk is concatenated along the record axis. With
/// `threads > 1` chunks settle in parallel; records never interact, so the
/// chunking only bounds memory.
pub fn settle_map<F>(
    params: &GncnParams,
    x: ArrayView2<'_, f64>,
    steps: usize,
    threads: usize,
    extract: F,
) -> Result<Vec<Array2<f64>>>
where
    F: Fn(&InferenceState) -> Vec<Array2<f64>> + Sync,
{
    let bounds = chunk_bounds(x.ncols());
    let run = |&(a, b): &(usize, usize)| -> Result<Vec<Array2<f64>>> {
        let state = settle(params, x.slice(s![.., a..b]), steps)?;
        Ok(extract(&state))
    };
    let parts: Vec<Result<Vec<Array2<f64>>>> = if threads <= 1 {
        bounds.iter().map(run).collect()
    } else {
        with_threads(threads, || bounds.par_iter().map(run).collect())?
    };
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    if parts.is_empty() {
        return Ok(extract(&InferenceState::initial(params, x)?));
    }
    (0..parts[0].len())
        .map(|k| {
            let views: Vec<_> = parts.iter().map(|p| p[k].view()).collect();
            concatenate(Axis(1), &views).map_err(|e| NgcError::Shape(e.to_string()))
        })
        .collect()
}

/// Top-layer latents of every record.
pub fn infer_latents_batched(params: &GncnParams, x: ArrayView2<'_, f64>, steps: usize, threads: usize) -> Result<Array2<f64>> {
    Ok(settle_map(params, x, steps, threads, |s| vec![s.top().clone()])?.remove(0))
}

/// Settled reconstructions of every record.
pub fn reconstruct_batched(params: &GncnParams, x: ArrayView2<'_, f64>, steps: usize, threads: usize) -> Result<Array2<f64>> {
    Ok(settle_map(params, x, steps, threads, |s| vec![s.reconstruction().clone()])?.remove(0))
}

/// Reconstruction followed by the latent layers `z[1..=L]`, from one
/// settling pass.
pub fn settled_outputs(params: &GncnParams, x: ArrayView2<'_, f64>, steps: usize, threads: usize) -> Result<Vec<Array2<f64>>> {
    settle_map(params, x, steps, threads, |s| {
        let mut out = vec![s.reconstruction().clone()];
        out.extend(s.z[1..].iter().cloned());
        out
    })
}

/// Reconstruction BCE of `x` after settling.
pub fn reconstruction_bce(params: &GncnParams, x: ArrayView2<'_, f64>, threads: usize) -> Result<f64> {
    let recon = reconstruct_batched(params, x, params.config.settle_steps, threads)?;
    bce(x, recon.view(), params.config.p_eps)
}

/// One pass over `x` in seeded mini-batches. Returns the mean pre-update
/// reconstruction BCE.
pub fn train_epoch(params: &mut GncnParams, x: ArrayView2<'_, f64>, opts: &TrainOptions, epoch: usize) -> Result<f64> {
    let steps = params.config.settle_steps;
    let p_eps = params.config.p_eps;
    let mut total = 0.0;
    let batches = minibatch_indices(x.ncols(), opts.batch_size, opts.seed, epoch)?;
    for idx in &batches {
        let xb = x.select(Axis(1), idx);
        let state = settle(params, xb.view(), steps)?;
        let b = bce(xb.view(), state.reconstruction().view(), p_eps)?;
        if !b.is_finite() {
            return Err(NgcError::NonFinite(format!("training BCE in epoch {epoch}")));
        }
        total += b;
        apply_updates(params, &state, opts.eta_w, opts.eta_p)?;
        if params.named_tensors().iter().any(|(_, t)| t.iter().any(|v| !v.is_finite())) {
            return Err(NgcError::NonFinite(format!("parameters after an update in epoch {epoch}")));
        }
    }
    Ok(total / batches.len().max(1) as f64)
}

/// Runs `opts.epochs` epochs, calling `on_epoch` after each one (epochs are
/// numbered from 1).
pub fn train<F>(
    params: &mut GncnParams,
    x: ArrayView2<'_, f64>,
    val: Option<ArrayView2<'_, f64>>,
    opts: &TrainOptions,
    mut on_epoch: F,
) -> Result<Vec<EpochRecord>>
where
    F: FnMut(&EpochRecord, &GncnParams) -> Result<()>,
{
    let mut log = Vec::with_capacity(opts.epochs);
    for epoch in 1..=opts.epochs {
        let start = Instant::now();
        let train_bce = train_epoch(params, x, opts, epoch)?;
        let val_bce = match val {
            Some(v) if v.ncols() > 0 => Some(reconstruction_bce(params, v, opts.threads)?),
            _ => None,
        };
        if let Some(v) = val_bce {
            if !v.is_finite() {
                return Err(NgcError::NonFinite(format!("validation BCE in epoch {epoch}")));
            }
        }
        let rec = EpochRecord {
            epoch,
            train_bce,
            val_bce,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        on_epoch(&rec, params)?;
        log.push(rec);
    }
    Ok(log)
}
