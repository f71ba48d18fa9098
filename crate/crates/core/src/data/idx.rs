//! IDX files as distributed for MNIST and Fashion-MNIST.
//!
//! Both files start with a big-endian magic number and dimension sizes:
//! `0x00000803, n, rows, cols` for images and `0x00000801, n` for labels,
//! followed by one unsigned byte per pixel or label.

use std::path::Path;

use ndarray::Array2;

use super::LabeledData;
use crate::error::{HdcError, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Reads an image/label file pair, scaling pixels to `[0, 1]`.
pub fn load_idx_images(images: &Path, labels: &Path) -> Result<LabeledData> {
    let image_bytes = std::fs::read(images).map_err(|e| HdcError::io(images, e))?;
    let label_bytes = std::fs::read(labels).map_err(|e| HdcError::io(labels, e))?;
    let features = parse_images(&image_bytes, images)?;
    let labels_vec = parse_labels(&label_bytes, labels)?;
    if features.nrows() != labels_vec.len() {
        return Err(HdcError::Parse {
            path: labels.to_path_buf(),
            field: "count".into(),
            message: format!(
                "{} labels for {} images in {}",
                labels_vec.len(),
                features.nrows(),
                images.display()
            ),
        });
    }
    LabeledData::new(features, labels_vec)
}

/// Parses an IDX image file into an `n × (rows·cols)` matrix in `[0, 1]`.
pub fn parse_images(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    let mut r = Reader {
        bytes,
        pos: 0,
        path,
    };
    r.magic(IMAGES_MAGIC)?;
    let n = r.u32("image count")? as usize;
    let rows = r.u32("row count")? as usize;
    let cols = r.u32("column count")? as usize;
    let pixels = r.rest(n * rows * cols, "pixel data")?;
    Ok(Array2::from_shape_fn((n, rows * cols), |(i, j)| {
        pixels[i * rows * cols + j] as f64 / 255.0
    }))
}

/// Parses an IDX label file.
pub fn parse_labels(bytes: &[u8], path: &Path) -> Result<Vec<usize>> {
    let mut r = Reader {
        bytes,
        pos: 0,
        path,
    };
    r.magic(LABELS_MAGIC)?;
    let n = r.u32("label count")? as usize;
    Ok(r.rest(n, "label data")?
        .iter()
        .map(|&b| b as usize)
        .collect())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, field: &str, message: String) -> HdcError {
        HdcError::Parse {
            path: self.path.to_path_buf(),
            field: field.into(),
            message,
        }
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        let end = self.pos + 4;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| self.err(field, "truncated header".into()))?;
        self.pos = end;
        Ok(u32::from_be_bytes(chunk.try_into().expect("4-byte slice")))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let found = self.u32("magic")?;
        if found != expected {
            return Err(self.err(
                "magic",
                format!("bad magic {found:#010x}, expected {expected:#010x}"),
            ));
        }
        Ok(())
    }

    fn rest(&mut self, len: usize, field: &str) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < len {
            return Err(self.err(
                field,
                format!("truncated: expected {len} bytes, found {available}"),
            ));
        }
        if available > len {
            return Err(self.err(field, format!("{} trailing bytes", available - len)));
        }
        let out = &self.bytes[self.pos..];
        self.pos = self.bytes.len();
        Ok(out)
    }
}
