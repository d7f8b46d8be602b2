use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::MaskKind;
use crate::data::idx::{load_idx, IdxTensor};
use crate::error::{NgcError, Result};

/// `v / 255 >= threshold` mapped to 1, everything else to 0.
pub fn binarize_value(v: u8, threshold: f64) -> f64 {
    if v as f64 / 255.0 >= threshold {
        1.0
    } else {
        0.0
    }
}

/// Binarises raw byte records laid out record-major into a `D x S` design
/// matrix (one record per column).
pub fn binarize(raw: &[u8], record_size: usize, threshold: f64) -> Array2<f64> {
    let s = raw.len() / record_size;
    let mut x = Array2::zeros((record_size, s));
    for (j, rec) in raw.chunks_exact(record_size).enumerate() {
        for (i, &v) in rec.iter().enumerate() {
            x[[i, j]] = binarize_value(v, threshold);
        }
    }
    x
}

/// One-hot `C x S` label matrix.
pub fn one_hot(labels: &[u8], classes: usize) -> Result<Array2<f64>> {
    let mut y = Array2::zeros((classes, labels.len()));
    for (j, &c) in labels.iter().enumerate() {
        if c as usize >= classes {
            return Err(NgcError::Data(format!("label {c} outside {classes} classes")));
        }
        y[[c as usize, j]] = 1.0;
    }
    Ok(y)
}

/// Binary design matrix with optional one-hot labels, one record per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub x: Array2<f64>,
    pub y: Option<Array2<f64>>,
    /// Source files and preprocessing notes.
    pub names: Vec<String>,
}

impl DatasetSplit {
    pub fn new(x: Array2<f64>, y: Option<Array2<f64>>) -> Result<Self> {
        if let Some(y) = &y {
            if y.ncols() != x.ncols() {
                return Err(NgcError::Shape(format!(
                    "{} label columns for {} records",
                    y.ncols(),
                    x.ncols()
                )));
            }
        }
        Ok(Self { x, y, names: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.y.as_ref().map(|y| y.nrows())
    }

    /// Columns at `indices`, in order.
    pub fn select(&self, indices: &[usize]) -> DatasetSplit {
        DatasetSplit {
            x: self.x.select(Axis(1), indices),
            y: self.y.as_ref().map(|y| y.select(Axis(1), indices)),
            names: self.names.clone(),
        }
    }

    /// The first `n` records (or all if fewer).
    pub fn take(&self, n: usize) -> DatasetSplit {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&idx)
    }

    /// Class index per record (argmax, lowest index on ties).
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.y.as_ref().map(|y| crate::eval::argmax_columns(y.view()))
    }
}

/// Loads images (and optionally labels) from IDX files or a headered CSV.
///
/// CSV layout: one header row; an optional column named `label`; every other
/// column is a pixel intensity in `0..=255`.
pub fn load_split(images: &Path, labels: Option<&Path>, threshold: f64) -> Result<DatasetSplit> {
    let is_csv = images.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let (raw, record_size, csv_labels) = if is_csv {
        let (raw, size, labels) = read_pixel_csv(images)?;
        (raw, size, labels)
    } else {
        let t: IdxTensor = load_idx(images)?;
        let size = t.record_size();
        (t.data, size, None)
    };
    let x = binarize(&raw, record_size, threshold);
    let label_bytes = match (labels, csv_labels) {
        (Some(path), _) => {
            let t = load_idx(path)?;
            if t.dims.len() != 1 {
                return Err(NgcError::Data(format!("{} is not a rank-1 label file", path.display())));
            }
            Some(t.data)
        }
        (None, l) => l,
    };
    let y = match label_bytes {
        Some(l) => {
            if l.len() != x.ncols() {
                return Err(NgcError::Data(format!("{} labels for {} images", l.len(), x.ncols())));
            }
            let classes = *l.iter().max().unwrap_or(&0) as usize + 1;
            Some(one_hot(&l, classes.max(2))?)
        }
        None => None,
    };
    let mut split = DatasetSplit::new(x, y)?;
    split.names.push(images.display().to_string());
    if let Some(p) = labels {
        split.names.push(p.display().to_string());
    }
    split.names.push(format!("binarized at v/255 >= {threshold}"));
    Ok(split)
}

fn read_pixel_csv(path: &Path) -> Result<(Vec<u8>, usize, Option<Vec<u8>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| NgcError::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| NgcError::Data(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let label_col = header.iter().position(|h| *h == "label");
    let record_size = header.len() - usize::from(label_col.is_some());
    let mut raw = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(NgcError::Data(format!("{} row {} has {} fields", path.display(), n + 2, fields.len())));
        }
        for (i, f) in fields.iter().enumerate() {
            let v: u8 = f
                .parse()
                .map_err(|_| NgcError::Data(format!("{} row {}: bad value {f:?}", path.display(), n + 2)))?;
            if Some(i) == label_col {
                labels.as_mut().expect("label column").push(v);
            } else {
                raw.push(v);
            }
        }
    }
    Ok((raw, record_size, labels))
}

/// Deterministic seeded split into `(train, validation)` with `n_val`
/// validation records.
pub fn split_train_val(data: &DatasetSplit, n_val: usize, seed: u64) -> Result<(DatasetSplit, DatasetSplit)> {
    if n_val == 0 {
        return Ok((data.clone(), data.select(&[])));
    }
    if n_val >= data.len() {
        return Err(NgcError::Data(format!(
            "validation size {n_val} must be smaller than {} records",
            data.len()
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (val, train) = idx.split_at(n_val);
    let mut train = train.to_vec();
    let mut val = val.to_vec();
    train.sort_unstable();
    val.sort_unstable();
    Ok((data.select(&train), data.select(&val)))
}

/// Column-index batches for one epoch: a fresh permutation seeded by
/// `(seed, epoch)`; the last batch may be short.
pub fn minibatch_indices(n: usize, batch_size: usize, seed: u64, epoch: usize) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(NgcError::Config("batch_size must be >= 1".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let stream = seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(stream));
    Ok(idx.chunks(batch_size).map(<[usize]>::to_vec).collect())
}

/// Iterator over the record batches of one epoch.
pub struct MiniBatches<'a> {
    data: &'a DatasetSplit,
    batches: std::vec::IntoIter<Vec<usize>>,
}

impl Iterator for MiniBatches<'_> {
    type Item = Array2<f64>;

    fn next(&mut self) -> Option<Self::Item> {
        self.batches.next().map(|b| self.data.x.select(Axis(1), &b))
    }
}

pub fn minibatch_iterator(data: &DatasetSplit, batch_size: usize, seed: u64, epoch: usize) -> Result<MiniBatches<'_>> {
    Ok(MiniBatches {
        data,
        batches: minibatch_indices(data.len(), batch_size, seed, epoch)?.into_iter(),
    })
}

/// Binary mask over `D x S` records; 1 marks observed pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub kind: Option<MaskKind>,
    pub m: Array2<f64>,
}

impl MaskSpec {
    /// Hides the right `side / 2` pixel columns of each `side x side` image.
    pub fn right_half(dim: usize, records: usize) -> Result<Self> {
        let side = image_side(dim)?;
        let mut col = Array2::zeros((dim, 1));
        for r in 0..side {
            for c in 0..side {
                if c < side - side / 2 {
                    col[[r * side + c, 0]] = 1.0;
                }
            }
        }
        let m = col.broadcast((dim, records)).expect("broadcast column").to_owned();
        Ok(Self {
            kind: Some(MaskKind::RightHalf),
            m,
        })
    }

    pub fn custom(m: Array2<f64>) -> Result<Self> {
        if m.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(NgcError::Data("mask entries must be 0 or 1".into()));
        }
        Ok(Self { kind: None, m })
    }

    pub fn from_kind(kind: MaskKind, dim: usize, records: usize) -> Result<Self> {
        match kind {
            MaskKind::RightHalf => Self::right_half(dim, records),
        }
    }

    /// `x ⊙ m`.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        &x * &self.m
    }
}

/// Side length of a square image with `dim` pixels.
pub fn image_side(dim: usize) -> Result<usize> {
    let side = (dim as f64).sqrt().round() as usize;
    if side * side != dim {
        return Err(NgcError::Data(format!("{dim} pixels is not a square image")));
    }
    Ok(side)
}

/// Paths in `cfg` with `None` replaced by an error naming the field.
pub fn require_path<'a>(p: &'a Option<PathBuf>, field: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| NgcError::Config(format!("data.{field} is not set")))
}
