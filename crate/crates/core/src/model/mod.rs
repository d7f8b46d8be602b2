//! The generative coding model: parameters, settling, objective and local
//! learning rules.

pub mod checkpoint;
pub mod inference;
pub mod lateral;
pub mod learning;
pub mod objective;
pub mod params;

pub use checkpoint::{load_checkpoint, load_manifest, save_checkpoint, Manifest, TensorEntry};
pub use inference::{
    ancestral_decode, complete_pattern, compute_error_neurons, infer_latents, predict_means,
    raw_bernoulli_error, settle, settle_observed, state_update_step, InferenceState,
};
pub use lateral::{build_group_mask, build_lateral_matrix};
pub use learning::{apply_updates, update_error_weights, update_forward_weights, update_precisions};
pub use objective::{full_gradients, total_discrepancy, Gradients};
pub use params::{max_column_norm_deviation, normalize_weight_columns, GncnParams};
