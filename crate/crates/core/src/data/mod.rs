//! Dataset ingestion, binarisation, splitting, batching, masks and image
//! output.

pub mod dataset;
pub mod idx;
pub mod pgm;

pub use dataset::{
    binarize, binarize_value, image_side, load_split, minibatch_indices, minibatch_iterator, one_hot,
    split_train_val, DatasetSplit, MaskSpec, MiniBatches,
};
pub use idx::{encode_idx, load_idx, parse_idx, IdxTensor};
pub use pgm::{read_pgm, render_grid, write_pgm_grid, Pgm};
