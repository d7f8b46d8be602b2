use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use crate::error::{NgcError, Result};
use crate::gmm::GmmParams;
use crate::model::{ancestral_decode, GncnParams};

fn same_shape(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, what: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(NgcError::Shape(format!("{what}: {:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Negative Bernoulli log-likelihood in nats: summed over dimensions,
/// averaged over records (columns). Predictions are clipped to
/// `[p_eps, 1 - p_eps]`.
pub fn bce(x: ArrayView2<'_, f64>, x_hat: ArrayView2<'_, f64>, p_eps: f64) -> Result<f64> {
    same_shape(x, x_hat, "bce")?;
    let mut acc = 0.0;
    Zip::from(x).and(x_hat).for_each(|&xv, &p| {
        let p = p.clamp(p_eps, 1.0 - p_eps);
        acc += xv * p.ln() + (1.0 - xv) * (1.0 - p).ln();
    });
    Ok(-acc / x.ncols() as f64)
}

/// Squared error over the hidden coordinates (`mask == 0`), summed per
/// record and averaged over records.
pub fn masked_mse(x: ArrayView2<'_, f64>, x_hat: ArrayView2<'_, f64>, mask: ArrayView2<'_, f64>) -> Result<f64> {
    same_shape(x, x_hat, "masked_mse")?;
    same_shape(x, mask, "masked_mse mask")?;
    let mut acc = 0.0;
    Zip::from(x).and(x_hat).and(mask).for_each(|&a, &b, &m| {
        if m == 0.0 {
            acc += (b - a) * (b - a);
        }
    });
    Ok(acc / x.ncols() as f64)
}

/// Fraction of units with `z > eps`, per layer.
pub fn sparsity_levels(layers: &[Array2<f64>], eps: f64) -> Vec<f64> {
    layers
        .iter()
        .map(|z| {
            if z.is_empty() {
                0.0
            } else {
                z.iter().filter(|&&v| v > eps).count() as f64 / z.len() as f64
            }
        })
        .collect()
}

/// Row index of the largest entry of each column; ties go to the lowest
/// index.
pub fn argmax_columns(m: ArrayView2<'_, f64>) -> Vec<usize> {
    m.axis_iter(Axis(1))
        .map(|col| {
            let mut best = 0;
            for (i, &v) in col.iter().enumerate() {
                if v > col[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Percentage of columns whose argmax differs between targets and
/// predictions.
pub fn classification_error(y: ArrayView2<'_, f64>, y_hat: ArrayView2<'_, f64>) -> Result<f64> {
    same_shape(y, y_hat, "classification_error")?;
    if y.ncols() == 0 {
        return Err(NgcError::Data("no records to classify".into()));
    }
    let hits = argmax_columns(y)
        .into_iter()
        .zip(argmax_columns(y_hat))
        .filter(|(a, b)| a == b)
        .count();
    Ok(100.0 * (1.0 - hits as f64 / y.ncols() as f64))
}

/// Mean and standard error of a per-record estimate, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPxEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// `log p(x) ≈ logsumexp_n [log Bern(x; means_n)] - log N` for each column
/// of `x`, with `means` the `D x N` Bernoulli means of the prior samples.
pub fn per_record_log_px(means: ArrayView2<'_, f64>, x: ArrayView2<'_, f64>, p_eps: f64) -> Result<Array1<f64>> {
    if means.nrows() != x.nrows() {
        return Err(NgcError::Shape(format!(
            "decoded means have {} rows, data {}",
            means.nrows(),
            x.nrows()
        )));
    }
    let n = means.ncols();
    if n == 0 {
        return Err(NgcError::Data("need at least one prior sample".into()));
    }
    let clipped = means.mapv(|v| v.clamp(p_eps, 1.0 - p_eps));
    let log_on = clipped.mapv(f64::ln);
    let log_off = clipped.mapv(|v| (1.0 - v).ln());
    // log Bern(x; m) = x·(log m - log(1-m)) + sum log(1-m)
    let diff = &log_on - &log_off;
    let base = log_off.sum_axis(Axis(0));
    let log_n = (n as f64).ln();
    let mut out = Array1::zeros(x.ncols());
    const CHUNK: usize = 256;
    for start in (0..x.ncols()).step_by(CHUNK) {
        let end = (start + CHUNK).min(x.ncols());
        let xs = x.slice(ndarray::s![.., start..end]);
        let ll = xs.t().dot(&diff) + &base.view().insert_axis(Axis(0));
        for (r, row) in ll.axis_iter(Axis(0)).enumerate() {
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = row.iter().map(|&v| (v - max).exp()).sum();
            out[start + r] = max + s.ln() - log_n;
        }
    }
    Ok(out)
}

pub fn summarize(values: &Array1<f64>) -> LogPxEstimate {
    let n = values.len() as f64;
    let mean = values.sum() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    LogPxEstimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Monte-Carlo marginal likelihood: draw `n_samples` top latents from the
/// prior, decode each once to Bernoulli means, then average the per-record
/// estimate over `x`. The standard error is taken across records.
pub fn monte_carlo_log_px(
    params: &GncnParams,
    gmm: &GmmParams,
    x: ArrayView2<'_, f64>,
    n_samples: usize,
    seed: u64,
) -> Result<LogPxEstimate> {
    let z = gmm.sample(n_samples, seed)?;
    let means = ancestral_decode(params, z.view())?;
    let per = per_record_log_px(means.view(), x, params.config.p_eps)?;
    Ok(summarize(&per))
}
