//! Sub-models: a model restricted to a subset of hypervector positions.

use std::collections::HashSet;

use ndarray::{Array2, ArrayView2, Axis};

use super::model::PrototypeModel;
use crate::error::{HdcError, Result};

/// Distinct positions in `[0, D)` selected for one global epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
    epoch: usize,
}

impl IndexSet {
    /// Validates that every index is below `dim` and appears once.
    pub fn new(indices: Vec<usize>, dim: usize, epoch: usize) -> Result<Self> {
        validate(&indices, dim)?;
        Ok(Self { indices, epoch })
    }

    /// `[0, 1, …, dim-1]`
    pub fn full(dim: usize, epoch: usize) -> Self {
        Self {
            indices: (0..dim).collect(),
            epoch,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Global epoch (1-based) this set was drawn for.
    pub fn epoch(&self) -> usize {
        self.epoch
    }
}

fn validate(indices: &[usize], dim: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(indices.len());
    for &i in indices {
        if i >= dim {
            return Err(HdcError::InvalidIndex {
                index: i,
                reason: format!("out of range for dimension {dim}"),
            });
        }
        if !seen.insert(i) {
            return Err(HdcError::InvalidIndex {
                index: i,
                reason: "duplicate".into(),
            });
        }
    }
    Ok(())
}

/// A `K × D̂` restriction of a model together with the positions it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct SubModel {
    pub indices: IndexSet,
    pub model: PrototypeModel,
}

/// Gathers the columns `idx` of `model`, in the order given by `idx`.
pub fn restrict(model: &PrototypeModel, idx: &IndexSet) -> Result<SubModel> {
    validate(idx.indices(), model.dim())?;
    let gathered = model.prototypes().select(Axis(1), idx.indices());
    Ok(SubModel {
        indices: idx.clone(),
        model: PrototypeModel::from_array(gathered)?,
    })
}

/// Columns `idx` of an encoded sample matrix.
pub fn restrict_samples(encoded: ArrayView2<f64>, idx: &IndexSet) -> Result<Array2<f64>> {
    validate(idx.indices(), encoded.ncols())?;
    Ok(encoded.select(Axis(1), idx.indices()))
}

/// Writes the sub-model columns back into `model` at their positions.
/// Every other column is left untouched.
pub fn scatter(model: &mut PrototypeModel, sub: &SubModel) -> Result<()> {
    let idx = sub.indices.indices();
    validate(idx, model.dim())?;
    if sub.model.n_classes() != model.n_classes() || sub.model.dim() != idx.len() {
        return Err(HdcError::shape(
            format!("{} x {}", model.n_classes(), idx.len()),
            format!("{} x {}", sub.model.n_classes(), sub.model.dim()),
        ));
    }
    let target = model.prototypes_mut();
    for (t, &col) in idx.iter().enumerate() {
        target
            .column_mut(col)
            .assign(&sub.model.prototypes().column(t));
    }
    Ok(())
}
