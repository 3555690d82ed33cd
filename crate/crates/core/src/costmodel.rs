//! Misclassification cost matrices and total-cost accounting.
//!
//! Entry `(i, j)` is the cost of predicting label `j` for a point whose true
//! label is `i`. Correct predictions cost nothing, so the diagonal must be
//! exactly zero.

use std::path::Path;

use crate::classify::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::fmt::f64_exact;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    class_count: usize,
    costs: Vec<f64>,
}

/// Validates a raw square grid of costs.
pub fn validate_cost_matrix<R: AsRef<[f64]>>(raw: &[R]) -> Result<CostMatrix> {
    let k = raw.len();
    let mut costs = Vec::with_capacity(k * k);
    for (i, row) in raw.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != k {
            return Err(Error::NotSquare(format!(
                "row {i} has {} entries, expected {k}",
                row.len()
            )));
        }
        for (j, &value) in row.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if value < 0.0 {
                return Err(Error::NegativeCost {
                    row: i,
                    col: j,
                    value,
                });
            }
            if i == j && value != 0.0 {
                return Err(Error::NonzeroDiagonal { index: i, value });
            }
            costs.push(value);
        }
    }
    Ok(CostMatrix {
        class_count: k,
        costs,
    })
}

impl CostMatrix {
    pub fn from_rows<R: AsRef<[f64]>>(raw: &[R]) -> Result<Self> {
        validate_cost_matrix(raw)
    }

    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(format!("{}x{}", m.rows(), m.cols())));
        }
        validate_cost_matrix(&m.to_rows())
    }

    /// Unit cost for every misclassification.
    pub fn uniform(k: usize) -> Self {
        let costs = (0..k * k)
            .map(|idx| if idx / k == idx % k { 0.0 } else { 1.0 })
            .collect();
        CostMatrix {
            class_count: k,
            costs,
        }
    }

    /// The nine-class case-study cost function: unit cost by default, 50 for
    /// (2,0) (6,4) (7,3) (8,1), 10 for their reverses, 25 between 7 and 8.
    pub fn case_study() -> Self {
        let mut c = CostMatrix::uniform(9);
        for (i, j, v) in [
            (2, 0, 50.0),
            (6, 4, 50.0),
            (7, 3, 50.0),
            (8, 1, 50.0),
            (0, 2, 10.0),
            (4, 6, 10.0),
            (3, 7, 10.0),
            (1, 8, 10.0),
            (7, 8, 25.0),
            (8, 7, 25.0),
        ] {
            c.costs[i * 9 + j] = v;
        }
        c
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn get(&self, true_label: usize, predicted: usize) -> f64 {
        self.costs[true_label * self.class_count + predicted]
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = self
            .costs
            .chunks(self.class_count.max(1))
            .map(|r| r.iter().map(|x| x * alpha).collect())
            .collect();
        validate_cost_matrix(&rows)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.costs
            .chunks(self.class_count.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.class_count, self.class_count, self.costs.clone())
            .expect("validated costs are finite")
    }

    /// Reads `K` rows of `K` comma-separated costs. A first row whose first
    /// field is not a number is treated as a header.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn parse_csv(text: &str, path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut lines = Vec::new();
        let mut first = true;
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(0, |p| p.line());
            if first {
                first = false;
                if record.get(0).is_some_and(|f| f.parse::<f64>().is_err()) {
                    continue;
                }
            }
            let mut row = Vec::with_capacity(record.len());
            for (col, field) in record.iter().enumerate() {
                let v = field.parse::<f64>().map_err(|_| {
                    Error::parse(path, line, col + 1, format!("expected a number, got {field:?}"))
                })?;
                row.push(v);
            }
            rows.push(row);
            lines.push(line);
        }
        if rows.is_empty() {
            return Err(Error::parse(path, 1, 1, "no cost rows"));
        }
        validate_cost_matrix(&rows).map_err(|e| match e {
            Error::NegativeCost { row, col, .. } | Error::NonFinite { row, col } => {
                Error::parse(path, lines[row], col + 1, e.to_string())
            }
            Error::NonzeroDiagonal { index, .. } => {
                Error::parse(path, lines[index], index + 1, e.to_string())
            }
            Error::NotSquare(_) => Error::parse(path, lines[0], 1, e.to_string()),
            other => other,
        })
    }

    /// Headerless CSV, one row per true label.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.to_rows() {
            let fields: Vec<String> = row.iter().map(|&x| f64_exact(x)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(path, line, 1, e.to_string())
}

/// `Σ_ij counts_ij · c_ij`.
pub fn total_cost(cm: &ConfusionMatrix, costs: &CostMatrix) -> Result<f64> {
    if cm.class_count() != costs.class_count() {
        return Err(Error::ShapeMismatch {
            confusion: cm.class_count(),
            costs: costs.class_count(),
        });
    }
    let k = costs.class_count();
    let mut total = 0.0;
    for i in 0..k {
        for j in 0..k {
            total += cm.get(i, j) as f64 * costs.get(i, j);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_study_matrix_is_valid() {
        let c = CostMatrix::case_study();
        let again = validate_cost_matrix(&c.to_rows()).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.get(2, 0), 50.0);
        assert_eq!(c.get(0, 2), 10.0);
        assert_eq!(c.get(7, 8), 25.0);
        assert_eq!(c.get(8, 7), 25.0);
        assert_eq!(c.get(5, 6), 1.0);
        assert_eq!(c.get(4, 4), 0.0);
        let fifties = c.to_rows().iter().flatten().filter(|&&x| x == 50.0).count();
        assert_eq!(fifties, 4);
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut rows = CostMatrix::uniform(3).to_rows();
        rows[1][1] = 1.0;
        assert!(matches!(
            validate_cost_matrix(&rows),
            Err(Error::NonzeroDiagonal { index: 1, .. })
        ));
        let mut rows = CostMatrix::uniform(3).to_rows();
        rows[0][1] = -1.0;
        assert!(matches!(
            validate_cost_matrix(&rows),
            Err(Error::NegativeCost { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            validate_cost_matrix(&[vec![0.0, 1.0]]),
            Err(Error::NotSquare(_))
        ));
    }

    #[test]
    fn total_cost_cases() {
        let c = CostMatrix::case_study();
        let mut cm = ConfusionMatrix::new(9);
        for k in 0..9 {
            cm.record(k, k, 50);
        }
        assert_eq!(total_cost(&cm, &c).unwrap(), 0.0);
        cm.record(2, 0, 1);
        assert_eq!(total_cost(&cm, &c).unwrap(), 50.0);

        let mut cm = ConfusionMatrix::new(9);
        cm.record(0, 1, 1);
        cm.record(3, 4, 1);
        cm.record(5, 6, 1);
        cm.record(7, 8, 1);
        assert_eq!(total_cost(&cm, &c).unwrap(), 28.0);

        assert!(matches!(
            total_cost(&ConfusionMatrix::new(2), &c),
            Err(Error::ShapeMismatch {
                confusion: 2,
                costs: 9
            })
        ));
    }

    #[test]
    fn csv_with_and_without_header() {
        let p = Path::new("mem.csv");
        let with = CostMatrix::parse_csv("a,b\n0,2\n1.5,0\n", p).unwrap();
        let without = CostMatrix::parse_csv("0,2\n1.5,0\n", p).unwrap();
        assert_eq!(with, without);
        assert_eq!(with.get(1, 0), 1.5);
        let c = CostMatrix::case_study();
        assert_eq!(CostMatrix::parse_csv(&c.to_csv(), p).unwrap(), c);
    }

    #[test]
    fn csv_diagnostics_name_line_and_column() {
        let err = CostMatrix::parse_csv("0,1\n1,zero\n", Path::new("c.csv")).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => assert_eq!((line, column), (2, 2)),
            e => panic!("unexpected {e}"),
        }
    }
}
