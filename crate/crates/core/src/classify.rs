//! Brute-force k-nearest-neighbours classification and confusion counts.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scatter::Dataset;

/// Uniform-vote KNN over Euclidean distance.
///
/// Ties are broken deterministically: among equidistant candidates the lower
/// training index is nearer, and among equally voted labels the smaller label
/// wins.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train_features: Matrix,
    train_labels: Vec<usize>,
    k: usize,
    class_count: usize,
}

impl KnnModel {
    pub fn new(
        train_features: Matrix,
        train_labels: Vec<usize>,
        class_count: usize,
        k: usize,
    ) -> Result<Self> {
        let n = train_features.rows();
        if train_labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {n} training rows",
                train_labels.len()
            )));
        }
        if k == 0 || k > n {
            return Err(Error::InvalidNeighbourCount { k, n_train: n });
        }
        if let Some((row, &label)) = train_labels.iter().enumerate().find(|(_, &l)| l >= class_count) {
            return Err(Error::LabelOutOfRange {
                row,
                label,
                class_count,
            });
        }
        Ok(KnnModel {
            train_features,
            train_labels,
            k,
            class_count,
        })
    }

    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        KnnModel::new(
            train.features().clone(),
            train.labels().to_vec(),
            train.class_count(),
            k,
        )
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn dim(&self) -> usize {
        self.train_features.cols()
    }

    pub fn predict(&self, query: &[f64]) -> Result<usize> {
        if query.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "query has {} features, model expects {}",
                query.len(),
                self.dim()
            )));
        }
        let mut dists: Vec<(f64, usize)> = (0..self.train_features.rows())
            .map(|i| {
                let d2 = self
                    .train_features
                    .row(i)
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d2, i)
            })
            .collect();
        let by_distance_then_index =
            |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dists.len() {
            dists.select_nth_unstable_by(self.k - 1, by_distance_then_index);
        }

        let mut votes = vec![0usize; self.class_count];
        for &(_, i) in &dists[..self.k] {
            votes[self.train_labels[i]] += 1;
        }
        let winner = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(label, _)| label)
            .expect("class_count is at least one when k ≥ 1");
        Ok(winner)
    }

    pub fn predict_all(&self, queries: &Matrix) -> Result<Vec<usize>> {
        (0..queries.rows())
            .map(|i| self.predict(queries.row(i)))
            .collect()
    }

    pub fn confusion(&self, test: &Dataset) -> Result<ConfusionMatrix> {
        confusion(self, test)
    }
}

pub fn knn_predict(model: &KnnModel, query: &[f64]) -> Result<usize> {
    model.predict(query)
}

/// Scores every test point; rows are true labels, columns predictions.
pub fn confusion(model: &KnnModel, test: &Dataset) -> Result<ConfusionMatrix> {
    let k = model.class_count.max(test.class_count());
    let mut cm = ConfusionMatrix::new(k);
    for i in 0..test.len() {
        let predicted = model.predict(test.point(i))?;
        cm.record(test.labels()[i], predicted, 1);
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    class_count: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(class_count: usize) -> Self {
        ConfusionMatrix {
            class_count,
            counts: vec![0; class_count * class_count],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix {
            class_count: k,
            counts: rows.concat(),
        })
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn get(&self, true_label: usize, predicted: usize) -> u64 {
        self.counts[true_label * self.class_count + predicted]
    }

    pub fn record(&mut self, true_label: usize, predicted: usize, count: u64) {
        self.counts[true_label * self.class_count + predicted] += count;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.class_count).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts
            .chunks(self.class_count.max(1))
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.correct() == self.total()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.counts
            .chunks(self.class_count.max(1))
            .map(<[u64]>::to_vec)
            .collect()
    }

    /// Elementwise sum; both matrices must have the same class count.
    pub fn merged(&self, other: &ConfusionMatrix) -> Result<ConfusionMatrix> {
        if self.class_count != other.class_count {
            return Err(Error::DimensionMismatch(format!(
                "confusion matrices with {} and {} classes",
                self.class_count, other.class_count
            )));
        }
        Ok(ConfusionMatrix {
            class_count: self.class_count,
            counts: self
                .counts
                .iter()
                .zip(&other.counts)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Header row of predicted labels followed by one row of counts per true label.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.class_count).map(|j| j.to_string()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in self.to_rows() {
            let fields: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}
