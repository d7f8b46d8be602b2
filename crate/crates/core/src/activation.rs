//! Pointwise activation functions used for the state nonlinearity `phi` and
//! the prediction squash `g`.

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Logistic,
    Tanh,
    Softplus,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Logistic => "logistic",
            Activation::Tanh => "tanh",
            Activation::Softplus => "softplus",
        }
    }

    /// Whether the function is smooth everywhere (the exact-gradient oracle
    /// needs this).
    pub fn is_differentiable(self) -> bool {
        !matches!(self, Activation::Relu)
    }

    #[inline]
    pub fn eval(self, v: f64) -> f64 {
        match self {
            Activation::Identity => v,
            Activation::Relu => v.max(0.0),
            Activation::Logistic => logistic(v),
            Activation::Tanh => v.tanh(),
            Activation::Softplus => {
                if v > 30.0 {
                    v
                } else {
                    v.exp().ln_1p()
                }
            }
        }
    }

    /// Derivative with respect to the pre-activation.
    #[inline]
    pub fn derivative(self, v: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if v > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => {
                let s = logistic(v);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = v.tanh();
                1.0 - t * t
            }
            Activation::Softplus => logistic(v),
        }
    }

    pub fn apply(self, m: ArrayView2<'_, f64>) -> Array2<f64> {
        match self {
            Activation::Identity => m.to_owned(),
            _ => m.mapv(|v| self.eval(v)),
        }
    }

    pub fn apply_into(self, src: ArrayView2<'_, f64>, dst: &mut Array2<f64>) {
        Zip::from(dst).and(src).for_each(|d, &s| *d = self.eval(s));
    }

    pub fn apply_derivative(self, m: ArrayView2<'_, f64>) -> Array2<f64> {
        m.mapv(|v| self.derivative(v))
    }
}

#[inline]
pub fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}
