//! Evaluation metrics, the marginal-likelihood estimator and the linear
//! probe used for downstream classification.

pub mod maxent;
pub mod metrics;
pub mod report;

pub use maxent::{maxent_fit, softmax_columns, MaxentOptions, MaxentParams};
pub use metrics::{
    argmax_columns, bce, classification_error, masked_mse, monte_carlo_log_px, per_record_log_px, sparsity_levels,
    summarize, LogPxEstimate,
};
pub use report::{MetricReport, ReportMeta, CSV_HEADER};
