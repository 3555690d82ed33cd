//! Seeded synthetic data: Gaussian classes with inverse-Wishart covariances.
//!
//! Randomness comes from ChaCha20 keyed by a 64-bit root seed. Independent
//! substreams are addressed by ChaCha's 64-bit stream id; a child stream id
//! is a SplitMix64 mix of the parent id and a child index, so every
//! substream is a pure function of `(seed, path of child indices)`.

use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::costmodel::csv_error;
use crate::error::{Error, Result};
use crate::fmt::f64_exact;
use crate::linalg::{cholesky, solve_lower, Matrix};
use crate::scatter::Dataset;

/// Name of the generator family, recorded in experiment metadata.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9), substreams via SplitMix64-mixed stream ids";

/// Address of one random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn new(seed: u64) -> Self {
        RngSeed { seed, stream: 0 }
    }

    pub fn substream(&self, child: u64) -> RngSeed {
        RngSeed {
            seed: self.seed,
            stream: splitmix64(splitmix64(self.stream) ^ child),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

// child indices under a replication stream
const STREAM_GENERATE: u64 = 0;
const STREAM_SPLIT: u64 = 1;

/// Parameters of the nine-class case-study generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeSpec {
    pub class_means: Vec<Vec<f64>>,
    pub iw_scale: Matrix,
    pub iw_dof: f64,
    pub points_per_class: usize,
}

impl Default for GenerativeSpec {
    fn default() -> Self {
        GenerativeSpec::case_study(100, 0.15, 8.0)
    }
}

impl GenerativeSpec {
    /// Eight vertices of the unit cube centred at the origin, in lexicographic
    /// order of `(x, y, z)` with −0.5 before +0.5, then the centre as class 8.
    pub fn case_study(points_per_class: usize, scale: f64, dof: f64) -> Self {
        let mut class_means: Vec<Vec<f64>> = (0..8u32)
            .map(|b| {
                [2, 1, 0]
                    .iter()
                    .map(|&bit| if b >> bit & 1 == 1 { 0.5 } else { -0.5 })
                    .collect()
            })
            .collect();
        class_means.push(vec![0.0; 3]);
        GenerativeSpec {
            class_means,
            iw_scale: Matrix::identity(3).scale(scale),
            iw_dof: dof,
            points_per_class,
        }
    }

    pub fn dim(&self) -> usize {
        self.iw_scale.rows()
    }

    pub fn class_count(&self) -> usize {
        self.class_means.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.dim();
        if self.iw_dof <= p as f64 + 1.0 {
            return Err(Error::BadDof {
                dof: self.iw_dof,
                min: p as f64 + 1.0,
            });
        }
        cholesky(&self.iw_scale)?;
        if self.class_means.iter().any(|m| m.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "class means must have {p} coordinates"
            )));
        }
        if self.points_per_class == 0 || self.class_count() == 0 {
            return Err(Error::Config(
                "need at least one class and one point per class".into(),
            ));
        }
        Ok(())
    }
}

/// One draw from the inverse-Wishart with scale `Ψ` and `ν` degrees of freedom
/// (mean `Ψ / (ν − p − 1)`).
///
/// Draws `W ~ Wishart(Ψ⁻¹, ν)` by Bartlett decomposition `W = (L A)(L A)ᵀ`,
/// where `Ψ⁻¹ = L Lᵀ`, `A` is lower triangular with `A_ii = √χ²(ν − i)`
/// (0-based `i`) and standard-normal entries below the diagonal, then
/// returns `W⁻¹ = (L A)⁻ᵀ (L A)⁻¹`.
pub fn sample_inverse_wishart<R: rand::Rng + ?Sized>(
    scale: &Matrix,
    dof: f64,
    rng: &mut R,
) -> Result<Matrix> {
    let p = scale.rows();
    if dof.is_nan() || dof <= p as f64 - 1.0 {
        return Err(Error::BadDof {
            dof,
            min: p as f64 - 1.0,
        });
    }
    let scale_inv = crate::linalg::spd_inverse(scale)?;
    let l = cholesky(&scale_inv)?;

    let mut a = Matrix::zeros(p, p);
    for i in 0..p {
        let chi2 = ChiSquared::new(dof - i as f64).map_err(|_| Error::BadDof {
            dof,
            min: p as f64 - 1.0,
        })?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l.matmul(&a)?;
    let la_inv = solve_lower(&la, &Matrix::identity(p))?;
    let w_inv = la_inv.transpose().matmul(&la_inv)?.symmetrized();
    cholesky(&w_inv)?;
    Ok(w_inv)
}

/// `n` rows of `mean + L z` with `cov = L Lᵀ` and `z` standard normal.
pub fn sample_gaussian<R: rand::Rng + ?Sized>(
    mean: &[f64],
    cov: &Matrix,
    n: usize,
    rng: &mut R,
) -> Result<Matrix> {
    let d = mean.len();
    if cov.shape() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "mean has {d} entries but covariance is {}x{}",
            cov.rows(),
            cov.cols()
        )));
    }
    let l = cholesky(cov)?;
    let mut out = Matrix::zeros(n, d);
    let mut z = vec![0.0; d];
    for r in 0..n {
        z.iter_mut().for_each(|x| *x = StandardNormal.sample(rng));
        let row = out.row_mut(r);
        for i in 0..d {
            row[i] = mean[i] + (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>();
        }
    }
    Ok(out)
}

/// One dataset realization; class `k` draws its covariance and points from
/// its own substream of `seed`. Rows are class-major in draw order.
pub fn generate_case_study(spec: &GenerativeSpec, seed: &RngSeed) -> Result<(Dataset, Vec<Matrix>)> {
    spec.validate()?;
    let (k, d, n) = (spec.class_count(), spec.dim(), spec.points_per_class);
    let mut data = Vec::with_capacity(k * n * d);
    let mut labels = Vec::with_capacity(k * n);
    let mut covariances = Vec::with_capacity(k);
    for (label, mean) in spec.class_means.iter().enumerate() {
        let mut rng = seed.substream(label as u64).rng();
        let cov = sample_inverse_wishart(&spec.iw_scale, spec.iw_dof, &mut rng)?;
        let points = sample_gaussian(mean, &cov, n, &mut rng)?;
        data.extend_from_slice(points.as_slice());
        labels.extend(std::iter::repeat_n(label, n));
        covariances.push(cov);
    }
    let dataset = Dataset::new(Matrix::from_vec(k * n, d, data)?, labels, k)?;
    Ok((dataset, covariances))
}

/// Dataset for replication `id` under `root`.
pub fn generate_replication(
    spec: &GenerativeSpec,
    root: &RngSeed,
    id: u64,
) -> Result<(Dataset, Vec<Matrix>)> {
    generate_case_study(spec, &root.substream(id).substream(STREAM_GENERATE))
}

/// Split seed for replication `id` under `root`.
pub fn split_seed(root: &RngSeed, id: u64) -> RngSeed {
    root.substream(id).substream(STREAM_SPLIT)
}

/// Draws `per_class_train` points of every class, uniformly without
/// replacement, into the training half; everything else is test. Both halves
/// keep the original row order.
pub fn stratified_split<R: rand::Rng + ?Sized>(
    data: &Dataset,
    per_class_train: usize,
    rng: &mut R,
) -> Result<(Dataset, Dataset)> {
    let mut in_train = vec![false; data.len()];
    for k in 0..data.class_count() {
        let idx = data.class_indices(k);
        if idx.len() <= per_class_train {
            return Err(Error::InsufficientClassData {
                class: k,
                available: idx.len(),
                required: per_class_train + 1,
            });
        }
        for pick in rand::seq::index::sample(rng, idx.len(), per_class_train) {
            in_train[idx[pick]] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| in_train[i]);
    Ok((data.subset(&train)?, data.subset(&test)?))
}

/// `x1,...,xD,label` header, one row per datapoint.
pub fn write_dataset_csv<W: Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (1..=data.dim())
        .map(|i| format!("x{i}"))
        .chain(["label".into()])
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for i in 0..data.len() {
        let mut fields: Vec<String> = data.point(i).iter().map(|&x| f64_exact(x)).collect();
        fields.push(data.labels()[i].to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn save_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_dataset_csv(data, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Parses a dataset CSV. `class_count` defaults to one past the largest label.
pub fn parse_dataset_csv(text: &str, path: &Path, class_count: Option<usize>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.len() < 2 || header.get(header.len() - 1) != Some("label") {
        return Err(Error::parse(
            path,
            1,
            header.len().max(1),
            "last header column must be `label`",
        ));
    }
    let d = header.len() - 1;
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (c, field) in record.iter().take(d).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, line, c + 1, format!("expected a number, got {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, line, c + 1, "non-finite feature value"));
            }
            data.push(v);
        }
        let field = &record[d];
        let label: usize = field.parse().map_err(|_| {
            Error::parse(
                path,
                line,
                d + 1,
                format!("expected a class label, got {field:?}"),
            )
        })?;
        if let Some(k) = class_count.filter(|&k| label >= k) {
            return Err(Error::parse(
                path,
                line,
                d + 1,
                format!("label {label} outside 0..{k}"),
            ));
        }
        labels.push(label);
    }
    let n = labels.len();
    let features = Matrix::from_vec(n, d, data)?;
    let k = class_count.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
    Dataset::new(features, labels, k).map_err(|e| Error::parse(path, 0, 1, e.to_string()))
}

pub fn load_dataset(path: impl AsRef<Path>, class_count: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset_csv(&text, path, class_count)
}
