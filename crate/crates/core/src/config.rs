//! Model and run configuration.
//!
//! Configurations are plain JSON documents. Unknown keys are rejected so a
//! typo never silently falls back to a default.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::activation::Activation;
use crate::error::{NgcError, Result};

/// How the per-layer precision matrices are parameterised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    /// Fixed at the identity, never updated.
    Identity,
    /// Only the diagonal is learned.
    Diagonal,
    /// Dense symmetric positive-definite matrix.
    Full,
}

/// Architecture and settling hyperparameters of one generative model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Widths of layers `0..=L`; entry 0 is the input dimension.
    pub layer_sizes: Vec<usize>,
    /// Number of settling iterations.
    pub settle_steps: usize,
    /// State update rate.
    pub beta: f64,
    /// Leak strength.
    pub gamma: f64,
    /// Error-synapse learning rate scale, in `[0, 1]`.
    pub lambda_e: f64,
    /// Self-excitation strength.
    pub alpha_e: f64,
    /// Lateral inhibition strength.
    pub alpha_h: f64,
    /// Competition group size for each latent layer `1..=L`.
    pub group_sizes: Vec<usize>,
    pub act_hidden: Activation,
    pub act_out: Activation,
    pub precision_mode: PrecisionMode,
    /// Standard deviation of the Gaussian weight initialisation (before
    /// column normalisation).
    pub init_std: f64,
    /// Clipping margin applied to Bernoulli means.
    pub p_eps: f64,
    /// Lower bound enforced on precision eigenvalues.
    pub eig_floor: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![784, 360, 360, 100],
            settle_steps: 50,
            beta: 0.05,
            gamma: 0.001,
            lambda_e: 0.9,
            alpha_e: 0.13,
            alpha_h: 0.125,
            group_sizes: vec![4, 4, 5],
            act_hidden: Activation::Relu,
            act_out: Activation::Logistic,
            precision_mode: PrecisionMode::Diagonal,
            init_std: 0.055,
            p_eps: 1e-6,
            eig_floor: 1e-3,
            seed: 1234,
        }
    }
}

impl ModelConfig {
    /// Number of latent layers `L`.
    pub fn depth(&self) -> usize {
        self.layer_sizes.len().saturating_sub(1)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn top_dim(&self) -> usize {
        self.layer_sizes[self.depth()]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(NgcError::Config(m));
        if self.layer_sizes.len() < 2 {
            return bad("layer_sizes needs at least an input and one latent layer".into());
        }
        if self.layer_sizes.iter().any(|&j| j == 0) {
            return bad("every layer width must be at least 1".into());
        }
        if self.group_sizes.len() != self.depth() {
            return bad(format!(
                "group_sizes has {} entries, expected one per latent layer ({})",
                self.group_sizes.len(),
                self.depth()
            ));
        }
        for (l, &k) in self.group_sizes.iter().enumerate() {
            let width = self.layer_sizes[l + 1];
            if k == 0 || width % k != 0 {
                return Err(NgcError::GroupSize { width, group: k });
            }
        }
        if !(self.beta > 0.0) {
            return bad(format!("beta must be > 0, got {}", self.beta));
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.lambda_e) {
            return bad(format!("lambda_e must lie in [0, 1], got {}", self.lambda_e));
        }
        if self.settle_steps == 0 {
            return bad("settle_steps must be >= 1".into());
        }
        if !(self.p_eps > 0.0 && self.p_eps < 0.5) {
            return bad(format!("p_eps must lie in (0, 0.5), got {}", self.p_eps));
        }
        if !(self.eig_floor > 0.0) {
            return bad("eig_floor must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub eta_w: f64,
    /// Precision learning rate; `None` means `eta_w / 10`.
    pub eta_p: Option<f64>,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eta_w: 0.02,
            eta_p: None,
            epochs: 50,
            batch_size: 200,
        }
    }
}

impl OptimizerConfig {
    pub fn precision_rate(&self) -> f64 {
        self.eta_p.unwrap_or(self.eta_w / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Training images: an IDX file, or a headered CSV (`.csv` extension).
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    /// Records held out of the training set for validation.
    pub n_val: usize,
    /// Keep only the first `n` training records (before the validation split).
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    /// Binarisation threshold on `v / 255`, compared with `>=`.
    pub threshold: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train_images: None,
            train_labels: None,
            test_images: None,
            test_labels: None,
            n_val: 2000,
            train_limit: None,
            test_limit: None,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    Full,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmmConfig {
    pub n_components: usize,
    pub em_iters: usize,
    pub tol: f64,
    pub covariance: CovarianceKind,
    pub var_floor: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        Self {
            n_components: 65,
            em_iters: 100,
            tol: 1e-4,
            covariance: CovarianceKind::Full,
            var_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    RightHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub mc_samples: usize,
    pub mask: MaskKind,
    /// Number of sampled images rendered by `sample`.
    pub n_samples_grid: usize,
    pub maxent_epochs: usize,
    pub maxent_lr: f64,
    pub maxent_batch: usize,
    pub sparsity_eps: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            mc_samples: 5000,
            mask: MaskKind::RightHalf,
            n_samples_grid: 100,
            maxent_epochs: 100,
            maxent_lr: 0.1,
            maxent_batch: 100,
            sparsity_eps: 1e-6,
        }
    }
}

/// Every hyperparameter and path of one training or evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub optimizer: OptimizerConfig,
    pub data: DataConfig,
    pub gmm: GmmConfig,
    pub eval: EvalConfig,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
    /// Worker threads for batch-parallel settling; 1 keeps runs bit-reproducible.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            optimizer: OptimizerConfig::default(),
            data: DataConfig::default(),
            gmm: GmmConfig::default(),
            eval: EvalConfig::default(),
            output_dir: None,
            seed: 1234,
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NgcError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Overrides the run seed; the model seed follows it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.model.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.eval.mc_samples == 0 {
            return Err(NgcError::Config("mc_samples must be >= 1".into()));
        }
        if self.optimizer.batch_size == 0 {
            return Err(NgcError::Config("batch_size must be >= 1".into()));
        }
        if self.gmm.n_components == 0 {
            return Err(NgcError::Config("gmm.n_components must be >= 1".into()));
        }
        if self.threads == 0 {
            return Err(NgcError::Config("threads must be >= 1".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialisation.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}
