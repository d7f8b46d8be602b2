//! Settling inference: iterative prediction, error computation and state
//! correction with the input clamped at the bottom layer.

use ndarray::{Array2, ArrayView2, Zip};

use crate::config::PrecisionMode;
use crate::error::{NgcError, Result};
use crate::model::params::GncnParams;

/// Per-batch settling state. All matrices hold one record per column.
///
/// `z` has `L + 1` entries (`z[0]` is the sensory layer); `mu` and `err`
/// have `L` entries because the top layer has no prediction from above.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceState {
    pub z: Vec<Array2<f64>>,
    pub mu: Vec<Array2<f64>>,
    pub err: Vec<Array2<f64>>,
}

impl InferenceState {
    /// `z[0] = x`, every latent layer at zero, means and errors empty.
    pub fn initial(params: &GncnParams, x: ArrayView2<'_, f64>) -> Result<Self> {
        let sizes = &params.config.layer_sizes;
        if x.nrows() != sizes[0] {
            return Err(NgcError::Shape(format!(
                "input has {} rows, model expects {}",
                x.nrows(),
                sizes[0]
            )));
        }
        let batch = x.ncols();
        let mut z = vec![x.to_owned()];
        z.extend(sizes[1..].iter().map(|&j| Array2::zeros((j, batch))));
        let mu = sizes[..sizes.len() - 1]
            .iter()
            .map(|&j| Array2::zeros((j, batch)))
            .collect::<Vec<_>>();
        let err = mu.clone();
        Ok(Self { z, mu, err })
    }

    pub fn batch_size(&self) -> usize {
        self.z[0].ncols()
    }

    pub fn depth(&self) -> usize {
        self.z.len() - 1
    }

    /// Top-layer state `z[L]`.
    pub fn top(&self) -> &Array2<f64> {
        &self.z[self.depth()]
    }

    /// Bernoulli mean of the sensory layer.
    pub fn reconstruction(&self) -> &Array2<f64> {
        &self.mu[0]
    }

    fn check(&self, params: &GncnParams) -> Result<()> {
        let sizes = &params.config.layer_sizes;
        let batch = self.batch_size();
        let ok = self.z.len() == sizes.len()
            && self.mu.len() == sizes.len() - 1
            && self.err.len() == sizes.len() - 1
            && self.z.iter().zip(sizes).all(|(m, &j)| m.dim() == (j, batch))
            && self.mu.iter().zip(sizes).all(|(m, &j)| m.dim() == (j, batch))
            && self.err.iter().zip(sizes).all(|(m, &j)| m.dim() == (j, batch));
        if ok {
            Ok(())
        } else {
            Err(NgcError::Shape("inference state does not match model layout".into()))
        }
    }
}

/// Top-down mean of layer `l` from the state of layer `l + 1`.
pub(crate) fn layer_mean(params: &GncnParams, l: usize, above: ArrayView2<'_, f64>) -> Array2<f64> {
    let cfg = &params.config;
    let h = params.w(l).dot(&cfg.act_hidden.apply(above));
    if l == 0 {
        let (lo, hi) = (cfg.p_eps, 1.0 - cfg.p_eps);
        h.mapv(|v| cfg.act_out.eval(v).clamp(lo, hi))
    } else {
        h
    }
}

/// Recomputes every `mu[l] = g(W[l] · phi(z[l+1]))`.
pub fn predict_means(params: &GncnParams, state: &mut InferenceState) -> Result<()> {
    state.check(params)?;
    for l in 0..params.depth() {
        state.mu[l] = layer_mean(params, l, state.z[l + 1].view());
    }
    Ok(())
}

/// Precision-weighted residual `P · r` for latent layer `l`.
pub(crate) fn precision_times(params: &GncnParams, l: usize, r: Array2<f64>) -> Array2<f64> {
    match params.config.precision_mode {
        PrecisionMode::Identity => r,
        PrecisionMode::Diagonal => {
            let p = params.p(l);
            let mut out = r;
            for (i, mut row) in out.rows_mut().into_iter().enumerate() {
                let d = p[[i, i]];
                row.mapv_inplace(|v| v * d);
            }
            out
        }
        PrecisionMode::Full => params.p(l).dot(&r),
    }
}

/// Fills `err[0] = z[0] - mu[0]` and `err[l] = P[l] · (z[l] - mu[l])`.
///
/// The sensory error is the simplified form the dynamics use; see
/// [`raw_bernoulli_error`] for the likelihood derivative itself.
pub fn compute_error_neurons(params: &GncnParams, state: &mut InferenceState) -> Result<()> {
    state.check(params)?;
    state.err[0] = &state.z[0] - &state.mu[0];
    for l in 1..params.depth() {
        let r = &state.z[l] - &state.mu[l];
        state.err[l] = precision_times(params, l, r);
    }
    Ok(())
}

/// `x / mu - (1 - x) / (1 - mu)`, the derivative of the Bernoulli
/// log-likelihood with respect to its mean. `mu` is clipped to
/// `[p_eps, 1 - p_eps]` first.
pub fn raw_bernoulli_error(x: ArrayView2<'_, f64>, mu: ArrayView2<'_, f64>, p_eps: f64) -> Array2<f64> {
    let mut out = Array2::zeros(x.dim());
    Zip::from(&mut out).and(x).and(mu).for_each(|o, &xv, &m| {
        let m = m.clamp(p_eps, 1.0 - p_eps);
        *o = xv / m - (1.0 - xv) / (1.0 - m);
    });
    out
}

/// One correction of every latent layer from the current errors:
///
/// `z[l] += beta * (-gamma z[l] + E[l] err[l-1] - err[l] - V[l] phi(z[l]))`
///
/// with the `-err[l]` term absent at the top. `z[0]` is never touched here;
/// `clamp_input` is accepted for symmetry with the completion path.
pub fn state_update_step(params: &GncnParams, state: &mut InferenceState, clamp_input: bool) -> Result<()> {
    let _ = clamp_input;
    state.check(params)?;
    let cfg = &params.config;
    let depth = params.depth();
    let mut next = Vec::with_capacity(depth);
    for l in 1..=depth {
        let z = &state.z[l];
        let mut dz = params.e(l).dot(&state.err[l - 1]);
        if l < depth {
            dz -= &state.err[l];
        }
        dz -= &params.v(l).dot(&cfg.act_hidden.apply(z.view()));
        Zip::from(&mut dz).and(z).for_each(|d, &zv| *d = zv + cfg.beta * (*d - cfg.gamma * zv));
        next.push(dz);
    }
    for (l, z) in next.into_iter().enumerate() {
        state.z[l + 1] = z;
    }
    Ok(())
}

fn refresh(params: &GncnParams, state: &mut InferenceState) -> Result<()> {
    predict_means(params, state)?;
    compute_error_neurons(params, state)
}

/// Clamps `x`, then runs `steps` rounds of state correction followed by
/// fresh predictions and errors.
pub fn settle(params: &GncnParams, x: ArrayView2<'_, f64>, steps: usize) -> Result<InferenceState> {
    settle_observed(params, x, steps, |_, _| {})
}

/// [`settle`] with a callback invoked on the initial state (iteration 0) and
/// after every iteration.
pub fn settle_observed<F>(
    params: &GncnParams,
    x: ArrayView2<'_, f64>,
    steps: usize,
    mut observe: F,
) -> Result<InferenceState>
where
    F: FnMut(usize, &InferenceState),
{
    let mut state = InferenceState::initial(params, x)?;
    refresh(params, &mut state)?;
    observe(0, &state);
    for t in 1..=steps {
        state_update_step(params, &mut state, true)?;
        refresh(params, &mut state)?;
        observe(t, &state);
    }
    Ok(state)
}

/// Settles and returns the top-layer state.
pub fn infer_latents(params: &GncnParams, x: ArrayView2<'_, f64>, steps: usize) -> Result<Array2<f64>> {
    let depth = params.depth();
    Ok(settle(params, x, steps)?.z.swap_remove(depth))
}

/// Deterministic top-down pass through the means only.
pub fn ancestral_decode(params: &GncnParams, z_top: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let depth = params.depth();
    let top = params.config.top_dim();
    if z_top.nrows() != top {
        return Err(NgcError::Shape(format!(
            "top latent has {} rows, model expects {top}",
            z_top.nrows()
        )));
    }
    let mut current = z_top.to_owned();
    for l in (0..depth).rev() {
        current = layer_mean(params, l, current.view());
    }
    Ok(current)
}

/// Fills the coordinates where `mask == 0` by treating the sensory layer
/// as a partially free state that follows its own output error:
///
/// `z0 = x ⊙ m + (z0 - beta * e0) ⊙ (1 - m)`
///
/// `mask` is either `D x B` or a single `D x 1` column shared by the batch.
/// Coordinates with `mask == 1` are returned bit-identical to `x`.
pub fn complete_pattern(
    params: &GncnParams,
    x: ArrayView2<'_, f64>,
    mask: ArrayView2<'_, f64>,
    steps: usize,
) -> Result<Array2<f64>> {
    let (d, b) = x.dim();
    if mask.nrows() != d || (mask.ncols() != b && mask.ncols() != 1) {
        return Err(NgcError::Shape(format!(
            "mask {:?} does not fit input {:?}",
            mask.dim(),
            x.dim()
        )));
    }
    let mask = mask.broadcast((d, b)).expect("shape checked above");
    let beta = params.config.beta;
    let mut start = x.to_owned();
    Zip::from(&mut start).and(&mask).for_each(|v, &m| {
        if m == 0.0 {
            *v = 0.0;
        }
    });
    let mut state = InferenceState::initial(params, start.view())?;
    refresh(params, &mut state)?;
    for _ in 0..steps {
        state_update_step(params, &mut state, false)?;
        Zip::from(&mut state.z[0])
            .and(&state.err[0])
            .and(&mask)
            .and(x)
            .for_each(|z, &e, &m, &xv| {
                *z = if m != 0.0 { xv } else { *z - beta * e };
            });
        refresh(params, &mut state)?;
    }
    Ok(state.z.swap_remove(0))
}
