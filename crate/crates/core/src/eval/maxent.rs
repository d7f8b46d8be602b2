//! Multinomial logistic ("maximum entropy") probe trained by mini-batch
//! gradient descent on softmax cross-entropy.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{NgcError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxentParams {
    /// `C x J`.
    pub weights: Array2<f64>,
    /// Length `C`.
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxentOptions {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub l2: f64,
    /// Standardise features with training statistics (folded back into the
    /// returned weights).
    pub standardize: bool,
    pub seed: u64,
}

impl Default for MaxentOptions {
    fn default() -> Self {
        Self {
            epochs: 100,
            lr: 0.1,
            batch_size: 100,
            l2: 1e-4,
            standardize: true,
            seed: 0,
        }
    }
}

impl MaxentParams {
    pub fn zeros(classes: usize, features: usize) -> Self {
        Self {
            weights: Array2::zeros((classes, features)),
            bias: Array1::zeros(classes),
        }
    }

    pub fn logits(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        self.weights.dot(&x) + &self.bias.view().insert_axis(Axis(1))
    }

    /// Class probabilities, `C x N`.
    pub fn predict_proba(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        softmax_columns(self.logits(x))
    }
}

pub fn softmax_columns(mut logits: Array2<f64>) -> Array2<f64> {
    for mut col in logits.axis_iter_mut(Axis(1)) {
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        col.mapv_inplace(|v| (v - max).exp());
        let s = col.sum();
        col.mapv_inplace(|v| v / s);
    }
    logits
}

/// Fits the probe to `features` (`J x N`) and one-hot `labels` (`C x N`).
pub fn maxent_fit(features: ArrayView2<'_, f64>, labels: ArrayView2<'_, f64>, opts: MaxentOptions) -> Result<MaxentParams> {
    let (j, n) = features.dim();
    let c = labels.nrows();
    if labels.ncols() != n {
        return Err(NgcError::Shape(format!("{} labels for {n} records", labels.ncols())));
    }
    let present = labels.axis_iter(Axis(0)).filter(|row| row.sum() > 0.0).count();
    if present < 2 {
        return Err(NgcError::Data("maxent needs at least two classes in the training labels".into()));
    }
    if opts.batch_size == 0 {
        return Err(NgcError::Config("maxent batch_size must be >= 1".into()));
    }
    let (shift, scale) = if opts.standardize {
        let mean = features.mean_axis(Axis(1)).expect("non-empty");
        let var = features.var_axis(Axis(1), 0.0);
        (mean, var.mapv(|v| if v > 1e-12 { 1.0 / v.sqrt() } else { 1.0 }))
    } else {
        (Array1::zeros(j), Array1::ones(j))
    };
    let xs = (&features - &shift.view().insert_axis(Axis(1))) * &scale.view().insert_axis(Axis(1));
    let mut model = MaxentParams::zeros(c, j);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(opts.batch_size) {
            let xb = xs.select(Axis(1), batch);
            let yb = labels.select(Axis(1), batch);
            let grad = model.predict_proba(xb.view()) - &yb;
            let m = batch.len() as f64;
            let gw = grad.dot(&xb.t()) / m + &model.weights * opts.l2;
            let gb = grad.sum_axis(Axis(1)) / m;
            model.weights.scaled_add(-opts.lr, &gw);
            model.bias.scaled_add(-opts.lr, &gb);
        }
    }
    // fold the standardisation back so the model applies to raw features
    let weights = &model.weights * &scale.view().insert_axis(Axis(0));
    let bias = &model.bias - &weights.dot(&shift);
    Ok(MaxentParams { weights, bias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::metrics::classification_error;
    use ndarray::array;

    #[test]
    fn separable_scalar_problem_is_solved() {
        let x = array![[-3.0, -2.0, -1.5, -1.0, 1.0, 1.2, 2.0, 3.5]];
        let y = array![
            [1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]
        ];
        let m = maxent_fit(x.view(), y.view(), MaxentOptions { epochs: 200, batch_size: 4, ..Default::default() }).unwrap();
        let err = classification_error(y.view(), m.predict_proba(x.view()).view()).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn zero_epochs_returns_initial_params() {
        let x = array![[1.0, 2.0]];
        let y = array![[1.0, 0.0], [0.0, 1.0]];
        let opts = MaxentOptions { epochs: 0, standardize: false, ..Default::default() };
        assert_eq!(maxent_fit(x.view(), y.view(), opts).unwrap(), MaxentParams::zeros(2, 1));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = MaxentParams {
            weights: array![[1.0, -2.0], [0.5, 3.0], [-1.0, 0.0]],
            bias: array![0.1, -0.3, 2.0],
        };
        let p = m.predict_proba(array![[1.0, -4.0, 30.0], [2.0, 0.5, -20.0]].view());
        for col in p.axis_iter(Axis(1)) {
            assert!((col.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = array![[1.0, 2.0]];
        let y = array![[1.0, 1.0], [0.0, 0.0]];
        assert!(maxent_fit(x.view(), y.view(), MaxentOptions::default()).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let x = array![[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], [1.0, 0.0, 1.0, 0.0, 1.0, 0.0]];
        let y = array![[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]];
        let opts = MaxentOptions { epochs: 5, batch_size: 2, seed: 4, ..Default::default() };
        assert_eq!(
            maxent_fit(x.view(), y.view(), opts).unwrap(),
            maxent_fit(x.view(), y.view(), opts).unwrap()
        );
    }
}
