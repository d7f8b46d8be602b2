//! Binary PGM (P5) image grids.

use std::path::Path;

use ndarray::ArrayView2;

use crate::data::dataset::image_side;
use crate::error::{NgcError, Result};

/// A decoded greyscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Tiles the columns of `images` (`D x n`, values in `[0, 1]`) into a
/// `rows x cols` grid, left-to-right then top-to-bottom. Unused tiles are
/// black.
pub fn render_grid(images: ArrayView2<'_, f64>, rows: usize, cols: usize) -> Result<Pgm> {
    let (dim, n) = images.dim();
    let side = image_side(dim)?;
    if n > rows * cols {
        return Err(NgcError::Data(format!("{n} images do not fit a {rows}x{cols} grid")));
    }
    let width = cols * side;
    let height = rows * side;
    let mut pixels = vec![0u8; width * height];
    for t in 0..n {
        let (tr, tc) = (t / cols, t % cols);
        for r in 0..side {
            for c in 0..side {
                let v = images[[r * side + c, t]];
                pixels[(tr * side + r) * width + tc * side + c] = to_byte(v);
            }
        }
    }
    Ok(Pgm { width, height, pixels })
}

pub fn encode_pgm(img: &Pgm) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

pub fn write_pgm_grid(images: ArrayView2<'_, f64>, rows: usize, cols: usize, path: &Path) -> Result<()> {
    let img = render_grid(images, rows, cols)?;
    std::fs::write(path, encode_pgm(&img)).map_err(|e| NgcError::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Pgm> {
    let bytes = std::fs::read(path).map_err(|e| NgcError::io(path, e))?;
    decode_pgm(&bytes)
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm> {
    let bad = || NgcError::Data("malformed PGM".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    if fields[0] != "P5" || fields[3] != "255" {
        return Err(bad());
    }
    let width: usize = fields[1].parse().map_err(|_| bad())?;
    let height: usize = fields[2].parse().map_err(|_| bad())?;
    let pixels = bytes.get(pos..pos + width * height).ok_or_else(bad)?.to_vec();
    Ok(Pgm { width, height, pixels })
}
