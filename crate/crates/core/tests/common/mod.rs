//! Independent oracles shared by the integration tests. Nothing here calls
//! into the eigensolvers or the KNN implementation it is used to check.

#![allow(dead_code)]

use costdr::{Dataset, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// `A Aᵀ + shift·I` for a random `A`.
pub fn random_spd(rng: &mut impl Rng, n: usize, shift: f64) -> Matrix {
    let a = Matrix::from_vec(n, n, (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    let mut m = a.matmul(&a.transpose()).unwrap().symmetrized();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    m
}

pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for _ in 0..rank {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += v[i] * v[j];
            }
        }
    }
    m
}

/// Determinant by cofactor expansion (n ≤ 3).
pub fn det(m: &Matrix) -> f64 {
    match m.rows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        n => panic!("det oracle only handles n ≤ 3, got {n}"),
    }
}

/// `det(B − λM)`.
pub fn pencil_det(b: &Matrix, m: &Matrix, lambda: f64) -> f64 {
    det(&b.sub(&m.scale(lambda)).unwrap())
}

/// Real roots of `c0 + c1 x + c2 x² (+ c3 x³)`, ascending; assumes every root is real.
pub fn real_poly_roots(coeffs: &[f64]) -> Vec<f64> {
    match coeffs.len() {
        3 => {
            let (c, b, a) = (coeffs[0], coeffs[1], coeffs[2]);
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            let q = -0.5 * (b + b.signum() * disc);
            let mut r = if q == 0.0 {
                vec![0.0, 0.0]
            } else {
                vec![q / a, c / q]
            };
            r.sort_by(f64::total_cmp);
            r
        }
        4 => {
            // trigonometric solution of the depressed cubic
            let (a3, a2, a1, a0) = (coeffs[3], coeffs[2], coeffs[1], coeffs[0]);
            let (b, c, d) = (a2 / a3, a1 / a3, a0 / a3);
            let p = c - b * b / 3.0;
            let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
            let shift = -b / 3.0;
            let mut r = if p.abs() < 1e-300 {
                vec![shift + (-q).cbrt(); 3]
            } else {
                let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
                let arg = if m == 0.0 {
                    0.0
                } else {
                    (3.0 * q / (p * m)).clamp(-1.0, 1.0)
                };
                let theta = arg.acos() / 3.0;
                (0..3)
                    .map(|k| shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
                    .collect()
            };
            r.sort_by(f64::total_cmp);
            r
        }
        n => panic!("unsupported degree {}", n - 1),
    }
}

fn polish(f: impl Fn(f64) -> f64, mut x: f64, scale: f64) -> f64 {
    let h = 1e-7 * scale.max(1e-12);
    for _ in 0..8 {
        let fx = f(x);
        let d = (f(x + h) - f(x - h)) / (2.0 * h);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = fx / d;
        // only accept steps that stay local; clustered roots stay at the trig estimate
        if step.abs() > 1e-6 * scale {
            break;
        }
        x -= step;
    }
    x
}

/// Eigenvalues of a symmetric 2×2 or 3×3 matrix as characteristic-polynomial
/// roots, descending.
pub fn char_poly_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let coeffs = match n {
        2 => vec![det(a), -a.trace(), 1.0],
        3 => {
            let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
                - a[(0, 2)] * a[(2, 0)]
                + a[(1, 1)] * a[(2, 2)]
                - a[(1, 2)] * a[(2, 1)];
            // det(λI − A) = λ³ − tr λ² + minors λ − det
            vec![-det(a), minors, -a.trace(), 1.0]
        }
        _ => panic!("oracle handles 2×2 and 3×3"),
    };
    let scale = a.frobenius_norm().max(1e-300);
    let mut r: Vec<f64> = real_poly_roots(&coeffs)
        .into_iter()
        .map(|x| polish(|l| det(&a.sub(&Matrix::identity(n).scale(l)).unwrap()), x, scale))
        .collect();
    r.sort_by(|x, y| y.total_cmp(x));
    r
}

/// Roots of `det(B − λM) = 0`, descending, via polynomial interpolation of
/// the determinant.
pub fn pencil_roots(b: &Matrix, m: &Matrix) -> Vec<f64> {
    let f = |l: f64| pencil_det(b, m, l);
    let coeffs = match b.rows() {
        2 => {
            let (f0, f1, fm) = (f(0.0), f(1.0), f(-1.0));
            vec![f0, 0.5 * (f1 - fm), 0.5 * (f1 + fm) - f0]
        }
        3 => {
            let (f0, f1, fm, f2) = (f(0.0), f(1.0), f(-1.0), f(2.0));
            let c0 = f0;
            let c2 = 0.5 * (f1 + fm) - f0;
            let s = 0.5 * (f1 - fm);
            let t = f2 - c0 - 4.0 * c2;
            let c3 = (0.5 * t - s) / 3.0;
            vec![c0, s - c3, c2, c3]
        }
        _ => panic!("oracle handles 2×2 and 3×3"),
    };
    let raw = real_poly_roots(&coeffs);
    let scale = raw.iter().fold(0.0f64, |s, r| s.max(r.abs())).max(1e-300);
    let mut r: Vec<f64> = raw.into_iter().map(|x| polish(f, x, scale)).collect();
    r.sort_by(|x, y| y.total_cmp(x));
    r
}

/// Largest Rayleigh quotient over `points` equally spaced unit directions.
pub fn grid_max_quotient(numer: &Matrix, denom: &Matrix, points: usize) -> (f64, [f64; 2]) {
    let mut best = (f64::NEG_INFINITY, [1.0, 0.0]);
    for i in 0..points {
        let t = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
        let u = [t.cos(), t.sin()];
        let q =
            |m: &Matrix| m[(0, 0)] * u[0] * u[0] + 2.0 * m[(0, 1)] * u[0] * u[1] + m[(1, 1)] * u[1] * u[1];
        let psi = q(numer) / q(denom);
        if psi > best.0 {
            best = (psi, u);
        }
    }
    best
}

/// Full sort of all training points by (squared distance, index), then
/// a smallest-label-wins majority vote.
pub fn brute_knn(train: &Matrix, labels: &[usize], class_count: usize, k: usize, q: &[f64]) -> usize {
    let mut all: Vec<(f64, usize)> = (0..train.rows())
        .map(|i| {
            let d2: f64 = train.row(i).iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = vec![0usize; class_count];
    for &(_, i) in all.iter().take(k) {
        votes[labels[i]] += 1;
    }
    let mut best = 0;
    for c in 1..class_count {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    best
}

/// Random labelled dataset in `d` dimensions with `k` classes of `n` points,
/// class centres spread by `spread`.
pub fn random_dataset(rng: &mut impl Rng, d: usize, k: usize, n: usize, spread: f64) -> Dataset {
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..d).map(|_| rng.random_range(-spread..spread)).collect())
        .collect();
    let mut data = Vec::with_capacity(k * n * d);
    let mut labels = Vec::with_capacity(k * n);
    for (c, centre) in centres.iter().enumerate() {
        let stretch: Vec<f64> = (0..d).map(|_| rng.random_range(0.3..1.5)).collect();
        for _ in 0..n {
            for j in 0..d {
                data.push(centre[j] + stretch[j] * rng.random_range(-1.0..1.0));
            }
            labels.push(c);
        }
    }
    Dataset::new(Matrix::from_vec(k * n, d, data).unwrap(), labels, k).unwrap()
}

/// Random orthogonal matrix by Gram–Schmidt on random columns.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            cols.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut q = Matrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        q.set_column(j, c);
    }
    q
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
