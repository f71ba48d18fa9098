//! Datasets: loading, preprocessing and client partitioning.
//!
//! Expected layout under the data directory:
//!
//! ```text
//! mnist/          train-images-idx3-ubyte  train-labels-idx1-ubyte
//!                 t10k-images-idx3-ubyte   t10k-labels-idx1-ubyte
//! fashion_mnist/  (same four file names)
//! ucihar/         train/X_train.txt  train/y_train.txt
//!                 test/X_test.txt    test/y_test.txt
//! ```

mod idx;
mod partition;
mod ucihar;

use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

pub use idx::{
    load_idx_images, parse_images, parse_labels as parse_idx_labels, IMAGES_MAGIC, LABELS_MAGIC,
};
pub use partition::{
    partition, partition_iid, partition_noniid, PartitionMode, CLASSES_PER_CLIENT,
    MAX_COVERAGE_REDRAWS,
};
pub use ucihar::{load_ucihar, UCIHAR_CLASSES, UCIHAR_FEATURES};

use crate::error::{HdcError, Result};
use crate::hdc::{normalize_l2, EncoderParams};

/// Feature rows with aligned class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub features: Array2<f64>,
    pub labels: Vec<usize>,
}

impl LabeledData {
    pub fn new(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(HdcError::shape(
                format!("{} labels", features.nrows()),
                labels.len(),
            ));
        }
        Ok(Self { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> LabeledData {
        LabeledData {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Keeps the first `n` rows.
    pub fn truncate(&mut self, n: usize) {
        if n < self.len() {
            self.features = self.features.slice(ndarray::s![..n, ..]).to_owned();
            self.labels.truncate(n);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetName {
    Mnist,
    FashionMnist,
    Ucihar,
}

impl DatasetName {
    pub const ALL: [DatasetName; 3] = [Self::Mnist, Self::FashionMnist, Self::Ucihar];

    pub fn n_classes(self) -> usize {
        match self {
            Self::Mnist | Self::FashionMnist => 10,
            Self::Ucihar => UCIHAR_CLASSES,
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            Self::Mnist | Self::FashionMnist => 784,
            Self::Ucihar => UCIHAR_FEATURES,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mnist => "mnist",
            Self::FashionMnist => "fashion_mnist",
            Self::Ucihar => "ucihar",
        }
    }
}

impl std::fmt::Display for DatasetName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DatasetName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mnist" => Ok(Self::Mnist),
            "fashion_mnist" | "fashion-mnist" => Ok(Self::FashionMnist),
            "ucihar" | "uci_har" | "uci-har" => Ok(Self::Ucihar),
            other => Err(format!(
                "unknown dataset {other:?} (expected mnist, fashion_mnist or ucihar)"
            )),
        }
    }
}

/// A train/test pair with its class count.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: DatasetName,
    pub train: LabeledData,
    pub test: LabeledData,
    pub n_classes: usize,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.train.dim()
    }
}

/// Loads one of the supported datasets from `data_dir` (layout in the module docs).
pub fn load_dataset(name: DatasetName, data_dir: &Path) -> Result<Dataset> {
    let (train, test) = match name {
        DatasetName::Mnist | DatasetName::FashionMnist => {
            let dir = data_dir.join(name.as_str());
            let train = load_idx_images(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )?;
            let test = load_idx_images(
                &dir.join("t10k-images-idx3-ubyte"),
                &dir.join("t10k-labels-idx1-ubyte"),
            )?;
            (train, test)
        }
        DatasetName::Ucihar => load_ucihar(&data_dir.join(name.as_str()))?,
    };
    let n_classes = name.n_classes();
    for (split, data) in [("train", &train), ("test", &test)] {
        if data.dim() != name.input_dim() {
            return Err(HdcError::InvalidInput(format!(
                "{name} {split} split has {} features, expected {}",
                data.dim(),
                name.input_dim()
            )));
        }
        if let Some(&bad) = data.labels.iter().find(|&&y| y >= n_classes) {
            return Err(HdcError::InvalidInput(format!(
                "{name} {split} split has label {bad}"
            )));
        }
    }
    Ok(Dataset {
        name,
        train,
        test,
        n_classes,
    })
}

/// Normalizes every row to unit ℓ2 norm, then applies the random Fourier
/// feature map. Row order is preserved.
pub fn preprocess(features: &Array2<f64>, encoder: &EncoderParams) -> Result<Array2<f64>> {
    let mut normalized = Array2::zeros(features.raw_dim());
    for (mut out, row) in normalized
        .axis_iter_mut(Axis(0))
        .zip(features.axis_iter(Axis(0)))
    {
        out.assign(&normalize_l2(row)?);
    }
    encoder.rffm_batch(normalized.view())
}

/// [`preprocess`] applied to a labeled split.
pub fn preprocess_split(data: &LabeledData, encoder: &EncoderParams) -> Result<LabeledData> {
    LabeledData::new(preprocess(&data.features, encoder)?, data.labels.clone())
}
