//! PCA, LDA and cost-informed projections behind one [`Projection`] type.
//!
//! Every fit keeps all `D` basis vectors, ordered by descending eigenvalue;
//! truncation to `d` dimensions happens in [`transform`] by keeping the
//! leading columns.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::costmodel::CostMatrix;
use crate::error::{Error, Result};
use crate::fmt::f64_exact;
use crate::linalg::{self, cholesky, pivot_ratio, EigenResult, Matrix};
use crate::scatter::{self, Dataset};

/// Relative ridge added to a degenerate denominator scatter.
pub const RIDGE_EPS: f64 = 1e-8;
/// Squared-pivot ratio below which a denominator counts as degenerate.
pub const DEGENERATE_PIVOT_RATIO: f64 = 1e-12;
/// Eigenvalues below this fraction of the largest are clamped to zero.
pub const EIGEN_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pca,
    Lda,
    CostInformed,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Pca, Method::Lda, Method::CostInformed];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Lda => "lda",
            Method::CostInformed => "cost-informed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "pca" => Ok(Method::Pca),
            "lda" => Ok(Method::Lda),
            "cost-informed" | "costinformed" | "ci" | "cidr" => Ok(Method::CostInformed),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected pca, lda or cost-informed)"
            ))),
        }
    }
}

/// A fitted linear reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub method: Method,
    /// `D × D`, one basis vector per column.
    pub basis: Matrix,
    pub eigenvalues: Vec<f64>,
    pub source_dim: usize,
    /// Whether the denominator scatter needed a ridge before solving.
    pub ridged: bool,
}

impl Projection {
    pub fn basis_vector(&self, i: usize) -> Vec<f64> {
        self.basis.column(i)
    }

    pub fn transform(&self, data: &Dataset, d: usize) -> Result<Dataset> {
        transform(self, data, d)
    }

    /// Projects a raw feature matrix onto the leading `d` basis vectors.
    pub fn project(&self, features: &Matrix, d: usize) -> Result<Matrix> {
        if features.cols() != self.source_dim {
            return Err(Error::DimensionMismatch(format!(
                "data has {} features, projection expects {}",
                features.cols(),
                self.source_dim
            )));
        }
        if d == 0 || d > self.source_dim {
            return Err(Error::BadTargetDim {
                requested: d,
                available: self.source_dim,
            });
        }
        features.matmul(&self.basis.leading_columns(d))
    }

    /// Line-oriented text form; every float carries 17 significant digits.
    ///
    /// ```text
    /// costdr-projection 1
    /// method cost-informed
    /// source_dim 3
    /// ridged false
    /// eigenvalues <D values>
    /// basis
    /// <D rows of D values>
    /// ```
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|&x| f64_exact(x)).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        out.push_str("costdr-projection 1\n");
        out.push_str(&format!("method {}\n", self.method));
        out.push_str(&format!("source_dim {}\n", self.source_dim));
        out.push_str(&format!("ridged {}\n", self.ridged));
        out.push_str(&format!("eigenvalues {}\n", join(&self.eigenvalues)));
        out.push_str("basis\n");
        for i in 0..self.basis.rows() {
            out.push_str(&join(self.basis.row(i)));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .by_ref()
                .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
                .ok_or_else(|| Error::parse(path, 0, 1, format!("unexpected end of file, expected {what}")))
        };
        let keyed = |(n, line): (u64, &str), key: &str| -> Result<String> {
            match line.split_once(char::is_whitespace) {
                Some((k, rest)) if k == key => Ok(rest.trim().to_string()),
                _ if line == key => Ok(String::new()),
                _ => Err(Error::parse(path, n, 1, format!("expected `{key}`"))),
            }
        };
        let floats = |n: u64, s: &str, expected: usize| -> Result<Vec<f64>> {
            let vals: Vec<f64> = s
                .split_whitespace()
                .enumerate()
                .map(|(c, tok)| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::parse(path, n, c + 1, format!("invalid number {tok:?}")))
                })
                .collect::<Result<_>>()?;
            if vals.len() != expected {
                return Err(Error::parse(
                    path,
                    n,
                    1,
                    format!("expected {expected} values, found {}", vals.len()),
                ));
            }
            Ok(vals)
        };

        let header = next("header")?;
        if keyed(header, "costdr-projection")? != "1" {
            return Err(Error::parse(path, header.0, 1, "unsupported projection version"));
        }
        let line = next("method")?;
        let method = keyed(line, "method")?
            .parse::<Method>()
            .map_err(|e| Error::parse(path, line.0, 8, e.to_string()))?;
        let line = next("source_dim")?;
        let source_dim = keyed(line, "source_dim")?
            .parse::<usize>()
            .map_err(|e| Error::parse(path, line.0, 12, e.to_string()))?;
        let line = next("ridged")?;
        let ridged = keyed(line, "ridged")?
            .parse::<bool>()
            .map_err(|e| Error::parse(path, line.0, 8, e.to_string()))?;
        let line = next("eigenvalues")?;
        let eigenvalues = floats(line.0, &keyed(line, "eigenvalues")?, source_dim)?;
        keyed(next("basis")?, "basis")?;
        let mut data = Vec::with_capacity(source_dim * source_dim);
        for _ in 0..source_dim {
            let (n, l) = next("basis row")?;
            data.extend(floats(n, l, source_dim)?);
        }
        Ok(Projection {
            method,
            basis: Matrix::from_vec(source_dim, source_dim, data)?,
            eigenvalues,
            source_dim,
            ridged,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Projection::parse(&text, path)
    }
}

/// Adds `ε · (trace / D) · I` when `m` fails Cholesky or is numerically
/// singular. A zero-trace matrix gets `ε · I`. Returns the matrix to factor
/// and whether a ridge was applied.
pub fn regularize(m: &Matrix) -> (Matrix, bool) {
    let healthy = cholesky(m).is_ok_and(|l| pivot_ratio(&l) >= DEGENERATE_PIVOT_RATIO);
    if healthy {
        return (m.clone(), false);
    }
    let d = m.rows();
    let scale = m.trace() / d as f64;
    let ridge = RIDGE_EPS * if scale > 0.0 { scale } else { 1.0 };
    let mut out = m.clone();
    for i in 0..d {
        out[(i, i)] += ridge;
    }
    (out, true)
}

fn solve_pencil(method: Method, numer: &Matrix, denom: &Matrix) -> Result<Projection> {
    let (denom, ridged) = regularize(denom);
    let mut eig = linalg::eig_generalized(numer, &denom)?;
    clamp_small(&mut eig);
    Ok(Projection {
        method,
        source_dim: numer.rows(),
        basis: eig.eigenvectors,
        eigenvalues: eig.eigenvalues,
        ridged,
    })
}

fn clamp_small(eig: &mut EigenResult) {
    let max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    for l in &mut eig.eigenvalues {
        if *l < EIGEN_CLAMP * max {
            *l = 0.0;
        }
    }
}

/// Eigenvectors of the centred total scatter.
pub fn fit_pca(data: &Dataset) -> Result<Projection> {
    let eig = linalg::eig_symmetric(&scatter::total_scatter(data))?;
    Ok(Projection {
        method: Method::Pca,
        source_dim: data.dim(),
        basis: eig.eigenvectors,
        eigenvalues: eig.eigenvalues,
        ridged: false,
    })
}

/// Solves the (between, within) scatter pencil.
pub fn fit_lda(data: &Dataset) -> Result<Projection> {
    let sw = scatter::within_class_scatter(data)?;
    let sb = scatter::between_class_scatter(data)?;
    solve_pencil(Method::Lda, &sb, &sw)
}

/// Solves the (cost-weighted pairwise between, total) scatter pencil.
pub fn fit_cost_informed(data: &Dataset, costs: &CostMatrix) -> Result<Projection> {
    let sb = scatter::cost_weighted_between_scatter(data, costs)?;
    let se = scatter::total_scatter(data);
    solve_pencil(Method::CostInformed, &sb, &se)
}

/// Dispatches on `method`; `costs` is required for the cost-informed fit.
pub fn fit(method: Method, data: &Dataset, costs: Option<&CostMatrix>) -> Result<Projection> {
    match method {
        Method::Pca => fit_pca(data),
        Method::Lda => fit_lda(data),
        Method::CostInformed => fit_cost_informed(data, costs.ok_or(Error::MissingCostMatrix)?),
    }
}

/// `X' = X V[:, ..d]`, labels carried through.
pub fn transform(p: &Projection, data: &Dataset, d: usize) -> Result<Dataset> {
    data.with_features(p.project(data.features(), d)?)
}
