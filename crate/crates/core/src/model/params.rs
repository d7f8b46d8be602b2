use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::ModelConfig;
use crate::error::{NgcError, Result};
use crate::model::lateral::{build_group_mask, build_lateral_matrix};

/// Columns whose norm falls below this are left untouched by normalisation.
pub const MIN_COLUMN_NORM: f64 = 1e-12;

/// All tensors of one model.
///
/// Layer indices follow the model's own numbering: `w(l)` for `l in 0..L`
/// maps `phi(z[l+1])` to the mean of layer `l`; `e(l)` for `l in 1..=L`
/// carries errors of layer `l-1` up to layer `l`; `p(l)` for `l in 1..L` is
/// the precision of layer `l`; `v(l)` for `l in 1..=L` is the fixed lateral
/// matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GncnParams {
    pub config: ModelConfig,
    pub(crate) w: Vec<Array2<f64>>,
    pub(crate) e: Vec<Array2<f64>>,
    pub(crate) p: Vec<Array2<f64>>,
    pub(crate) v: Vec<Array2<f64>>,
}

impl GncnParams {
    /// Fresh model: Gaussian weights (column-normalised), identity
    /// precisions, lateral matrices from the group structure.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.init_std)
            .map_err(|e| NgcError::Config(format!("init_std: {e}")))?;
        let sizes = &config.layer_sizes;
        let depth = config.depth();
        let mut gaussian = |rows: usize, cols: usize| {
            let mut m = Array2::from_shape_simple_fn((rows, cols), || normal.sample(&mut rng));
            normalize_weight_columns(&mut m);
            m
        };
        let w: Vec<_> = (0..depth).map(|l| gaussian(sizes[l], sizes[l + 1])).collect();
        let e: Vec<_> = (1..=depth).map(|l| gaussian(sizes[l], sizes[l - 1])).collect();
        let p = (1..depth).map(|l| Array2::eye(sizes[l])).collect();
        let v = (1..=depth)
            .map(|l| {
                let mask = build_group_mask(sizes[l], config.group_sizes[l - 1])?;
                build_lateral_matrix(&mask, config.alpha_e, config.alpha_h)
            })
            .collect::<Result<_>>()?;
        Ok(Self { config, w, e, p, v })
    }

    /// Assembles a model from explicit tensors, validating every shape.
    pub fn from_parts(
        config: ModelConfig,
        w: Vec<Array2<f64>>,
        e: Vec<Array2<f64>>,
        p: Vec<Array2<f64>>,
        v: Vec<Array2<f64>>,
    ) -> Result<Self> {
        config.validate()?;
        let params = Self { config, w, e, p, v };
        params.check_shapes()?;
        Ok(params)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let sizes = &self.config.layer_sizes;
        let depth = self.depth();
        let expect = |name: String, m: &Array2<f64>, dim: (usize, usize)| {
            if m.dim() != dim {
                Err(NgcError::Shape(format!("{name} is {:?}, expected {:?}", m.dim(), dim)))
            } else {
                Ok(())
            }
        };
        if self.w.len() != depth || self.e.len() != depth || self.v.len() != depth {
            return Err(NgcError::Shape("tensor count does not match depth".into()));
        }
        if self.p.len() != depth - 1 {
            return Err(NgcError::Shape("precision count must be depth - 1".into()));
        }
        for l in 0..depth {
            expect(format!("w{l}"), &self.w[l], (sizes[l], sizes[l + 1]))?;
        }
        for l in 1..=depth {
            expect(format!("e{l}"), &self.e[l - 1], (sizes[l], sizes[l - 1]))?;
            expect(format!("v{l}"), &self.v[l - 1], (sizes[l], sizes[l]))?;
        }
        for l in 1..depth {
            expect(format!("p{l}"), &self.p[l - 1], (sizes[l], sizes[l]))?;
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.config.depth()
    }

    pub fn w(&self, l: usize) -> &Array2<f64> {
        &self.w[l]
    }

    pub fn e(&self, l: usize) -> &Array2<f64> {
        &self.e[l - 1]
    }

    pub fn p(&self, l: usize) -> &Array2<f64> {
        &self.p[l - 1]
    }

    pub fn v(&self, l: usize) -> &Array2<f64> {
        &self.v[l - 1]
    }

    pub fn w_mut(&mut self, l: usize) -> &mut Array2<f64> {
        &mut self.w[l]
    }

    pub fn e_mut(&mut self, l: usize) -> &mut Array2<f64> {
        &mut self.e[l - 1]
    }

    pub fn p_mut(&mut self, l: usize) -> &mut Array2<f64> {
        &mut self.p[l - 1]
    }

    pub fn v_mut(&mut self, l: usize) -> &mut Array2<f64> {
        &mut self.v[l - 1]
    }

    /// Sets every error matrix to the transpose of the forward matrix below
    /// it, recovering the weight-transport special case.
    pub fn tie_error_weights(&mut self) {
        for l in 1..=self.depth() {
            self.e[l - 1] = self.w[l - 1].t().to_owned();
        }
    }

    /// Replaces every lateral matrix with zeros.
    pub fn disable_lateral(&mut self) {
        for v in &mut self.v {
            v.fill(0.0);
        }
    }

    /// Named tensors in checkpoint order.
    pub fn named_tensors(&self) -> Vec<(String, &Array2<f64>)> {
        let depth = self.depth();
        let mut out = Vec::new();
        for l in 0..depth {
            out.push((format!("w{l}"), &self.w[l]));
        }
        for l in 1..=depth {
            out.push((format!("e{l}"), &self.e[l - 1]));
        }
        for l in 1..depth {
            out.push((format!("p{l}"), &self.p[l - 1]));
        }
        for l in 1..=depth {
            out.push((format!("v{l}"), &self.v[l - 1]));
        }
        out
    }

    /// Number of synapses in the forward, error and precision matrices.
    pub fn synapse_count(&self) -> usize {
        self.w.iter().chain(&self.e).chain(&self.p).map(|m| m.len()).sum()
    }
}

/// Rescales each column to unit Euclidean norm in place. Near-zero columns
/// are skipped.
pub fn normalize_weight_columns(m: &mut Array2<f64>) {
    for mut col in m.axis_iter_mut(Axis(1)) {
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= MIN_COLUMN_NORM {
            col.mapv_inplace(|v| v / norm);
        }
    }
}

/// Largest deviation of a nonzero column norm from 1.
pub fn max_column_norm_deviation(m: &Array2<f64>) -> f64 {
    m.axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .filter(|&n| n >= MIN_COLUMN_NORM)
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max)
}
