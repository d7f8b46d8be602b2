//! The complete-data log-likelihood ("total discrepancy") and its exact
//! gradients. The gradients are a verification oracle for the local rules;
//! training never uses them.

use ndarray::{Array2, ArrayView2, Zip};

use crate::error::{NgcError, Result};
use crate::linalg::{log_det, spd_inverse, symmetrize};
use crate::model::inference::InferenceState;
use crate::model::params::GncnParams;

/// Bernoulli log-likelihood of `x` under means `mu`, summed over all entries.
pub fn bernoulli_log_likelihood(x: ArrayView2<'_, f64>, mu: ArrayView2<'_, f64>) -> f64 {
    let mut acc = 0.0;
    Zip::from(x).and(mu).for_each(|&xv, &m| {
        acc += xv * m.ln() + (1.0 - xv) * (1.0 - m).ln();
    });
    acc
}

/// `psi = sum_j [x log mu0 + (1-x) log(1-mu0)]
///      + sum_{l=1}^{L-1} [ 1/2 log|P_l| - 1/2 r_l^T P_l r_l ]`, with
/// `r_l = z_l - mu_l`, summed over the batch columns.
///
/// The means stored in `state` are used as-is.
pub fn total_discrepancy(params: &GncnParams, state: &InferenceState, x: ArrayView2<'_, f64>) -> Result<f64> {
    if x.dim() != state.mu[0].dim() {
        return Err(NgcError::Shape(format!(
            "target {:?} does not match reconstruction {:?}",
            x.dim(),
            state.mu[0].dim()
        )));
    }
    let batch = state.batch_size() as f64;
    let mut psi = bernoulli_log_likelihood(x, state.mu[0].view());
    for l in 1..params.depth() {
        let p = params.p(l);
        let r = &state.z[l] - &state.mu[l];
        let pr = p.dot(&r);
        let quad = (&r * &pr).sum();
        psi += 0.5 * batch * log_det(p.view())? - 0.5 * quad;
    }
    if !psi.is_finite() {
        return Err(NgcError::NonFinite("total discrepancy".into()));
    }
    Ok(psi)
}

/// Exact partial derivatives of [`total_discrepancy`].
///
/// `w[l]` for `l in 0..L`, `p[l-1]` for precision `l in 1..L`, and `z[l-1]`
/// for latent layer `l in 1..=L`. Gradients with respect to `p` treat every
/// entry as free, i.e. `1/2 P^{-T} - 1/2 r r^T` per record.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w: Vec<Array2<f64>>,
    pub p: Vec<Array2<f64>>,
    pub z: Vec<Array2<f64>>,
}

/// Exact gradients of the total discrepancy at the latent values in
/// `state.z`. Means are recomputed from `state.z` so the result does not
/// depend on whether `state.mu` is current.
///
/// Requires differentiable activations. Output means that hit the `p_eps`
/// clip have zero derivative.
pub fn full_gradients(params: &GncnParams, state: &InferenceState, x: ArrayView2<'_, f64>) -> Result<Gradients> {
    let cfg = &params.config;
    for act in [cfg.act_hidden, cfg.act_out] {
        if !act.is_differentiable() {
            return Err(NgcError::NonDifferentiable(act.name()));
        }
    }
    let depth = params.depth();
    let batch = state.batch_size() as f64;
    let phi = cfg.act_hidden;
    let z = &state.z;

    // forward
    let phis: Vec<Array2<f64>> = (0..=depth).map(|l| phi.apply(z[l].view())).collect();
    let pre: Vec<Array2<f64>> = (0..depth).map(|l| params.w(l).dot(&phis[l + 1])).collect();

    // d psi / d h_l
    let mut dh: Vec<Array2<f64>> = Vec::with_capacity(depth);
    {
        let (lo, hi) = (cfg.p_eps, 1.0 - cfg.p_eps);
        let mut d0 = Array2::zeros(pre[0].dim());
        Zip::from(&mut d0).and(&pre[0]).and(x).for_each(|d, &h, &xv| {
            let raw_mu = cfg.act_out.eval(h);
            if raw_mu < lo || raw_mu > hi {
                *d = 0.0;
            } else {
                let de = xv / raw_mu - (1.0 - xv) / (1.0 - raw_mu);
                *d = de * cfg.act_out.derivative(h);
            }
        });
        dh.push(d0);
    }
    let mut residual = vec![Array2::zeros((0, 0))];
    for l in 1..depth {
        let r = &z[l] - &pre[l];
        let sym = symmetrize(params.p(l));
        dh.push(sym.dot(&r));
        residual.push(r);
    }

    let w = (0..depth).map(|l| dh[l].dot(&phis[l + 1].t())).collect();

    let mut p = Vec::with_capacity(depth.saturating_sub(1));
    for l in 1..depth {
        let inv_t = spd_inverse(params.p(l).view())?.t().to_owned();
        let outer = residual[l].dot(&residual[l].t());
        p.push(inv_t * (0.5 * batch) - outer * 0.5);
    }

    let mut zg = Vec::with_capacity(depth);
    for l in 1..=depth {
        let mut g = params.w(l - 1).t().dot(&dh[l - 1]);
        Zip::from(&mut g).and(&z[l]).for_each(|gv, &zv| *gv *= phi.derivative(zv));
        if l < depth {
            g -= &dh[l];
        }
        zg.push(g);
    }
    Ok(Gradients { w, p, z: zg })
}
