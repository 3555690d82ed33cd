//! Labelled datasets, scatter matrices and the separability functional.

use std::collections::BTreeMap;

use crate::costmodel::CostMatrix;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// `N × D` features with one label in `0..class_count` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<usize>,
    class_count: usize,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.rows()
            )));
        }
        if features.rows() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 datapoints, got {}",
                features.rows()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::InvalidDataset("zero feature columns".into()));
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= class_count) {
            return Err(Error::LabelOutOfRange {
                row,
                label,
                class_count,
            });
        }
        Ok(Dataset {
            features,
            labels,
            class_count,
        })
    }

    /// Infers `class_count` as one past the largest label.
    pub fn from_labels(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |&m| m + 1);
        Dataset::new(features, labels, k)
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Row indices carrying label `k`, in row order.
    pub fn class_indices(&self, k: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == k).then_some(i))
            .collect()
    }

    /// New dataset holding the given rows in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let d = self.dim();
        let mut data = Vec::with_capacity(rows.len() * d);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.point(r));
            labels.push(self.labels[r]);
        }
        Dataset::new(Matrix::from_vec(rows.len(), d, data)?, labels, self.class_count)
    }

    pub(crate) fn with_features(&self, features: Matrix) -> Result<Dataset> {
        Dataset::new(features, self.labels.clone(), self.class_count)
    }

    fn require_all_classes(&self) -> Result<()> {
        match self.class_sizes().iter().position(|&n| n == 0) {
            Some(k) => Err(Error::EmptyClass(k)),
            None => Ok(()),
        }
    }
}

fn mean_of_rows(x: &Matrix, rows: impl Iterator<Item = usize>) -> Option<Vec<f64>> {
    let mut mean = vec![0.0; x.cols()];
    let mut n = 0usize;
    for r in rows {
        for (m, &v) in mean.iter_mut().zip(x.row(r)) {
            *m += v;
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    Some(mean)
}

/// `Σ (x_r - centre)(x_r - centre)ᵀ` over the given rows.
fn scatter_about(x: &Matrix, rows: impl Iterator<Item = usize>, centre: &[f64]) -> Matrix {
    let d = x.cols();
    let mut s = Matrix::zeros(d, d);
    let mut dev = vec![0.0; d];
    for r in rows {
        for ((dv, &v), &c) in dev.iter_mut().zip(x.row(r)).zip(centre) {
            *dv = v - c;
        }
        s.add_outer(1.0, &dev, &dev);
    }
    s.symmetrized()
}

pub fn overall_mean(data: &Dataset) -> Vec<f64> {
    mean_of_rows(&data.features, 0..data.len()).expect("datasets hold at least two rows")
}

pub fn class_mean(data: &Dataset, k: usize) -> Result<Vec<f64>> {
    let rows = data
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == k)
        .map(|(i, _)| i);
    mean_of_rows(&data.features, rows).ok_or(Error::EmptyClass(k))
}

/// Mean-centred total scatter `(X - x̄)ᵀ (X - x̄)`.
pub fn total_scatter(data: &Dataset) -> Matrix {
    let mean = overall_mean(data);
    scatter_about(&data.features, 0..data.len(), &mean)
}

fn class_scatter(data: &Dataset, k: usize, centre: &[f64]) -> Matrix {
    let rows = data
        .labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == k)
        .map(|(i, _)| i);
    scatter_about(&data.features, rows, centre)
}

/// Average over classes of each class's scatter about its own centroid.
pub fn within_class_scatter(data: &Dataset) -> Result<Matrix> {
    data.require_all_classes()?;
    let d = data.dim();
    let mut sw = Matrix::zeros(d, d);
    for k in 0..data.class_count {
        let mean = class_mean(data, k)?;
        sw.add_scaled(1.0, &class_scatter(data, k, &mean));
    }
    Ok(sw.scale(1.0 / data.class_count as f64))
}

/// Unweighted sum over classes of centroid-deviation outer products.
pub fn between_class_scatter(data: &Dataset) -> Result<Matrix> {
    data.require_all_classes()?;
    let d = data.dim();
    let mean = overall_mean(data);
    let mut sb = Matrix::zeros(d, d);
    let mut dev = vec![0.0; d];
    for k in 0..data.class_count {
        let ck = class_mean(data, k)?;
        for ((dv, c), m) in dev.iter_mut().zip(&ck).zip(&mean) {
            *dv = c - m;
        }
        sb.add_outer(1.0, &dev, &dev);
    }
    Ok(sb.symmetrized())
}

/// Size-weighted average of the scatters of classes `i` and `j` about the
/// midpoint of their two centroids.
///
/// The midpoint is unweighted even when the class sizes differ.
pub fn pairwise_scatter(data: &Dataset, i: usize, j: usize) -> Result<Matrix> {
    if i == j {
        return Err(Error::SameClass(i));
    }
    // fixed operand order so (i, j) and (j, i) agree bit for bit
    let (lo, hi) = (i.min(j), i.max(j));
    let mean_lo = class_mean(data, lo)?;
    let mean_hi = class_mean(data, hi)?;
    let mid: Vec<f64> = mean_lo.iter().zip(&mean_hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let sizes = data.class_sizes();
    let (n_lo, n_hi) = (sizes[lo] as f64, sizes[hi] as f64);
    let mut s = class_scatter(data, lo, &mid).scale(n_lo);
    s.add_scaled(n_hi, &class_scatter(data, hi, &mid));
    Ok(s.scale(1.0 / (n_lo + n_hi)).symmetrized())
}

/// `Σ_i Σ_j c_ij Σ_ij`, evaluated as `Σ_{i<j} (c_ij + c_ji) Σ_ij`.
pub fn cost_weighted_between_scatter(data: &Dataset, costs: &CostMatrix) -> Result<Matrix> {
    let k = data.class_count;
    if costs.class_count() != k {
        return Err(Error::CostShapeMismatch {
            expected: k,
            got: costs.class_count(),
        });
    }
    data.require_all_classes()?;
    let d = data.dim();
    let mut sb = Matrix::zeros(d, d);
    for i in 0..k {
        for j in (i + 1)..k {
            let w = costs.get(i, j) + costs.get(j, i);
            if w == 0.0 {
                continue;
            }
            sb.add_scaled(w, &pairwise_scatter(data, i, j)?);
        }
    }
    Ok(sb.symmetrized())
}

/// Rayleigh quotient `uᵀ numer u / uᵀ denom u`.
pub fn separability(u: &[f64], numer: &Matrix, denom: &Matrix) -> Result<f64> {
    if u.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDirection);
    }
    Ok(numer.quadratic_form(u)? / denom.quadratic_form(u)?)
}

/// Every scatter matrix a dataset gives rise to.
#[derive(Debug, Clone)]
pub struct ScatterSet {
    pub total: Matrix,
    pub within: Matrix,
    pub between: Matrix,
    pub pairwise: BTreeMap<(usize, usize), Matrix>,
}

impl ScatterSet {
    /// Computes all scatters; `between` is the cost-weighted form when costs
    /// are given, otherwise the centroid form.
    pub fn compute(data: &Dataset, costs: Option<&CostMatrix>) -> Result<Self> {
        let k = data.class_count;
        let mut pairwise = BTreeMap::new();
        for i in 0..k {
            for j in (i + 1)..k {
                pairwise.insert((i, j), pairwise_scatter(data, i, j)?);
            }
        }
        let between = match costs {
            Some(c) => cost_weighted_between_scatter(data, c)?,
            None => between_class_scatter(data)?,
        };
        Ok(ScatterSet {
            total: total_scatter(data),
            within: within_class_scatter(data)?,
            between,
            pairwise,
        })
    }
}
