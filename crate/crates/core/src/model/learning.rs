//! Local parameter updates applied after a settling episode. Every delta is
//! an outer product of activities and errors that sit next to the synapse;
//! all deltas are averaged over the batch.

use ndarray::Array2;

use crate::config::PrecisionMode;
use crate::error::Result;
use crate::linalg::{project_spd, spd_inverse};
use crate::model::inference::InferenceState;
use crate::model::params::{normalize_weight_columns, GncnParams};

/// `dW[l] = err[l] · phi(z[l+1])^T / B` for `l in 0..L`.
pub fn forward_weight_deltas(params: &GncnParams, state: &InferenceState) -> Vec<Array2<f64>> {
    let phi = params.config.act_hidden;
    let batch = state.batch_size() as f64;
    (0..params.depth())
        .map(|l| state.err[l].dot(&phi.apply(state.z[l + 1].view()).t()) / batch)
        .collect()
}

/// `dE[l] = lambda · phi(z[l]) · err[l-1]^T / B` for `l in 1..=L` (entry
/// `l - 1` of the returned vector).
pub fn error_weight_deltas(params: &GncnParams, state: &InferenceState) -> Vec<Array2<f64>> {
    let cfg = &params.config;
    let batch = state.batch_size() as f64;
    (1..=params.depth())
        .map(|l| cfg.act_hidden.apply(state.z[l].view()).dot(&state.err[l - 1].t()) * (cfg.lambda_e / batch))
        .collect()
}

/// `dP[l] = 1/2 Sigma[l] - 1/2 mean_b r r^T` with `Sigma = P^{-1}` and
/// `r = z[l] - mu[l]`, for `l in 1..L` (entry `l - 1`). Diagonal mode keeps
/// only the diagonal.
pub fn precision_deltas(params: &GncnParams, state: &InferenceState) -> Result<Vec<Array2<f64>>> {
    let batch = state.batch_size() as f64;
    let mode = params.config.precision_mode;
    let mut out = Vec::new();
    for l in 1..params.depth() {
        let r = &state.z[l] - &state.mu[l];
        let sigma = spd_inverse(params.p(l).view())?;
        let mut delta = sigma * 0.5 - r.dot(&r.t()) * (0.5 / batch);
        if mode == PrecisionMode::Diagonal {
            let d = delta.diag().to_owned();
            delta = Array2::from_diag(&d);
        }
        out.push(delta);
    }
    Ok(out)
}

/// Ascent step on every forward matrix followed by column normalisation.
pub fn update_forward_weights(params: &mut GncnParams, state: &InferenceState, eta: f64) {
    for (l, delta) in forward_weight_deltas(params, state).into_iter().enumerate() {
        let w = params.w_mut(l);
        w.scaled_add(eta, &delta);
        normalize_weight_columns(w);
    }
}

/// Ascent step on every error matrix followed by column normalisation.
pub fn update_error_weights(params: &mut GncnParams, state: &InferenceState, eta: f64) {
    for (i, delta) in error_weight_deltas(params, state).into_iter().enumerate() {
        let e = params.e_mut(i + 1);
        e.scaled_add(eta, &delta);
        normalize_weight_columns(e);
    }
}

/// Ascent step on each precision, then symmetrise and floor the spectrum at
/// `eig_floor`. A no-op in identity mode.
pub fn update_precisions(params: &mut GncnParams, state: &InferenceState, eta: f64) -> Result<()> {
    if params.config.precision_mode == PrecisionMode::Identity {
        return Ok(());
    }
    let floor = params.config.eig_floor;
    for (i, delta) in precision_deltas(params, state)?.into_iter().enumerate() {
        let p = params.p_mut(i + 1);
        p.scaled_add(eta, &delta);
        *p = project_spd(p, floor);
    }
    Ok(())
}

/// All parameter updates for one settled batch. Deltas are evaluated at the
/// same settled state before any matrix changes.
pub fn apply_updates(params: &mut GncnParams, state: &InferenceState, eta_w: f64, eta_p: f64) -> Result<()> {
    let dw = forward_weight_deltas(params, state);
    let de = error_weight_deltas(params, state);
    let dp = if params.config.precision_mode == PrecisionMode::Identity {
        Vec::new()
    } else {
        precision_deltas(params, state)?
    };
    for (l, delta) in dw.into_iter().enumerate() {
        let w = params.w_mut(l);
        w.scaled_add(eta_w, &delta);
        normalize_weight_columns(w);
    }
    for (i, delta) in de.into_iter().enumerate() {
        let e = params.e_mut(i + 1);
        e.scaled_add(eta_w, &delta);
        normalize_weight_columns(e);
    }
    let floor = params.config.eig_floor;
    for (i, delta) in dp.into_iter().enumerate() {
        let p = params.p_mut(i + 1);
        p.scaled_add(eta_p, &delta);
        *p = project_spd(p, floor);
    }
    Ok(())
}
