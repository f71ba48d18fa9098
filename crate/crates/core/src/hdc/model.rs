//! Class prototypes: initialization, inference and mistake-driven retraining.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use super::vector::{distance_from_parts, norm_l2};
use crate::error::{HdcError, Result};

/// `K` class prototypes stored as the rows of a `K × D` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeModel {
    prototypes: Array2<f64>,
}

/// Result of classifying one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: usize,
    /// Cosine distance to every prototype, indexed by class.
    pub distances: Vec<f64>,
}

impl PrototypeModel {
    pub fn zeros(n_classes: usize, dim: usize) -> Self {
        Self {
            prototypes: Array2::zeros((n_classes, dim)),
        }
    }

    pub fn from_array(prototypes: Array2<f64>) -> Result<Self> {
        if prototypes.nrows() == 0 {
            return Err(HdcError::InvalidInput(
                "a model needs at least one class".into(),
            ));
        }
        if prototypes.iter().any(|v| !v.is_finite()) {
            return Err(HdcError::InvalidInput(
                "prototype entries must be finite".into(),
            ));
        }
        Ok(Self { prototypes })
    }

    pub fn n_classes(&self) -> usize {
        self.prototypes.nrows()
    }

    pub fn dim(&self) -> usize {
        self.prototypes.ncols()
    }

    pub fn prototypes(&self) -> ArrayView2<'_, f64> {
        self.prototypes.view()
    }

    pub fn prototype(&self, class: usize) -> ArrayView1<'_, f64> {
        self.prototypes.row(class)
    }

    pub(crate) fn prototypes_mut(&mut self) -> &mut Array2<f64> {
        &mut self.prototypes
    }

    pub fn into_array(self) -> Array2<f64> {
        self.prototypes
    }

    /// Class with the smallest cosine distance to `query`; ties go to the
    /// lowest class index.
    pub fn predict(&self, query: ArrayView1<f64>) -> Result<Prediction> {
        self.check_dim(query.len())?;
        let norms = row_norms(&self.prototypes);
        let mut distances = vec![0.0; self.n_classes()];
        let class = classify(
            &self.prototypes,
            &norms,
            query,
            norm_l2(query),
            &mut distances,
        );
        Ok(Prediction { class, distances })
    }

    /// Predicted class for every row of `queries`.
    ///
    /// Dot products come from one matrix product, so this is the fast path
    /// for evaluation on a whole test split.
    pub fn predict_batch(&self, queries: ArrayView2<f64>) -> Result<Vec<usize>> {
        self.check_dim(queries.ncols())?;
        let norms = row_norms(&self.prototypes);
        let dots = queries.dot(&self.prototypes.t());
        Ok(dots
            .axis_iter(Axis(0))
            .zip(queries.axis_iter(Axis(0)))
            .map(|(row, q)| {
                let qn = norm_l2(q);
                argmin(
                    row.iter()
                        .zip(&norms)
                        .map(|(&dot, &pn)| distance_from_parts(dot, pn, qn)),
                )
            })
            .collect())
    }

    /// Fraction of rows of `queries` classified as their label.
    pub fn accuracy(&self, queries: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
        Ok(self.correct_count(queries, labels)? as f64 / labels.len() as f64)
    }

    /// Number of correctly classified queries.
    pub fn correct_count(&self, queries: ArrayView2<f64>, labels: &[usize]) -> Result<usize> {
        if queries.nrows() != labels.len() {
            return Err(HdcError::shape(
                format!("{} labels", queries.nrows()),
                labels.len(),
            ));
        }
        if labels.is_empty() {
            return Err(HdcError::Config(
                "cannot evaluate on an empty test set".into(),
            ));
        }
        let predicted = self.predict_batch(queries)?;
        Ok(predicted.iter().zip(labels).filter(|(p, y)| p == y).count())
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(HdcError::shape(
                format!("query of length {}", self.dim()),
                len,
            ));
        }
        Ok(())
    }
}

/// Builds prototypes as `alpha` times the per-class mean of `encoded` rows.
///
/// Rows are accumulated in ascending order. Classes with no samples keep an
/// all-zero prototype.
pub fn init_prototypes(
    encoded: ArrayView2<f64>,
    labels: &[usize],
    n_classes: usize,
    alpha: f64,
) -> Result<PrototypeModel> {
    if encoded.nrows() == 0 {
        return Err(HdcError::InvalidInput(
            "cannot initialize prototypes from an empty dataset".into(),
        ));
    }
    check_labels(encoded.nrows(), labels, n_classes)?;

    let mut sums = Array2::<f64>::zeros((n_classes, encoded.ncols()));
    let mut counts = vec![0usize; n_classes];
    for (x, &y) in encoded.axis_iter(Axis(0)).zip(labels) {
        sums.row_mut(y).scaled_add(1.0, &x);
        counts[y] += 1;
    }
    for (mut row, &n) in sums.axis_iter_mut(Axis(0)).zip(&counts) {
        if n > 0 {
            let n = n as f64;
            row.mapv_inplace(|s| alpha * (s / n));
        }
    }
    PrototypeModel::from_array(sums)
}

/// One online retraining pass over the data in stored order.
///
/// For each sample the distances are taken against the current prototypes;
/// on a misprediction `ŷ ≠ y` the model is updated with
/// `p_y += α Δ_y x` and `p_ŷ -= α Δ_ŷ x`. Returns the number of mispredictions.
pub fn retrain_pass(
    model: &mut PrototypeModel,
    encoded: ArrayView2<f64>,
    labels: &[usize],
    alpha: f64,
) -> Result<usize> {
    retrain_pass_in_order(model, encoded, labels, 0..encoded.nrows(), alpha)
}

/// [`retrain_pass`] visiting the samples in the given `order`.
pub fn retrain_pass_in_order(
    model: &mut PrototypeModel,
    encoded: ArrayView2<f64>,
    labels: &[usize],
    order: impl IntoIterator<Item = usize>,
    alpha: f64,
) -> Result<usize> {
    check_labels(encoded.nrows(), labels, model.n_classes())?;
    model.check_dim(encoded.ncols())?;

    let prototypes = &mut model.prototypes;
    let mut norms = row_norms(prototypes);
    let mut distances = vec![0.0; prototypes.nrows()];
    let mut mistakes = 0;
    for i in order {
        if i >= encoded.nrows() {
            return Err(HdcError::InvalidIndex {
                index: i,
                reason: format!("sample order refers past {} samples", encoded.nrows()),
            });
        }
        let x = encoded.row(i);
        let y = labels[i];
        let predicted = classify(prototypes, &norms, x, norm_l2(x), &mut distances);
        if predicted != y {
            mistakes += 1;
            prototypes.row_mut(y).scaled_add(alpha * distances[y], &x);
            prototypes
                .row_mut(predicted)
                .scaled_add(-alpha * distances[predicted], &x);
            norms[y] = norm_l2(prototypes.row(y));
            norms[predicted] = norm_l2(prototypes.row(predicted));
        }
    }
    Ok(mistakes)
}

fn classify(
    prototypes: &Array2<f64>,
    norms: &[f64],
    query: ArrayView1<f64>,
    query_norm: f64,
    distances: &mut [f64],
) -> usize {
    for ((d, p), &pn) in distances
        .iter_mut()
        .zip(prototypes.axis_iter(Axis(0)))
        .zip(norms)
    {
        *d = distance_from_parts(p.dot(&query), pn, query_norm);
    }
    argmin(distances.iter().copied())
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn row_norms(m: &Array2<f64>) -> Vec<f64> {
    m.axis_iter(Axis(0)).map(norm_l2).collect()
}

fn check_labels(n_rows: usize, labels: &[usize], n_classes: usize) -> Result<()> {
    if labels.len() != n_rows {
        return Err(HdcError::shape(format!("{n_rows} labels"), labels.len()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(HdcError::InvalidInput(format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    Ok(())
}

/// Elementwise mean of equally shaped models, accumulated in the given order.
///
/// Uses the running form `m += (x - m) / k`, which returns a shared input
/// unchanged and is exact for the mean of a value and its negation.
pub fn mean_of<'a>(models: impl IntoIterator<Item = ArrayView2<'a, f64>>) -> Result<Array2<f64>> {
    let mut iter = models.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| HdcError::Aggregation("nothing to average".into()))?;
    let mut mean = first.to_owned();
    for (k, m) in iter.enumerate() {
        if m.dim() != mean.dim() {
            return Err(HdcError::Aggregation(format!(
                "shape {:?} does not match {:?}",
                m.dim(),
                mean.dim()
            )));
        }
        let k = (k + 2) as f64;
        ndarray::Zip::from(&mut mean)
            .and(&m)
            .for_each(|acc, &x| *acc += (x - *acc) / k);
    }
    Ok(mean)
}
