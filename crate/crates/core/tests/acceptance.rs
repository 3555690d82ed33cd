//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::*;
use costdr::classify::KnnModel;
use costdr::datagen::{sample_inverse_wishart, RngSeed};
use costdr::linalg::{eig_generalized, eig_symmetric, Matrix};
use costdr::reducers::{fit_cost_informed, fit_lda, fit_pca};
use costdr::scatter::{self, Dataset};
use costdr::CostMatrix;
use rand::Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_costdr"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        String::from_utf8_lossy(&out.stderr).into_owned()
    })
}

/// `(method, dim) -> (median, q3)` from a summary CSV.
fn read_summary(path: &Path) -> Result<Vec<(String, usize, f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let num = |i: usize| f[i].parse::<f64>().map_err(|e| e.to_string());
            Ok((
                f[0].to_string(),
                f[1].parse().map_err(|_| "dim")?,
                num(4)?,
                num(5)?,
            ))
        })
        .collect()
}

fn ordinal_reproduction() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let cfg = repo_file("configs/paper.toml");
    run_cli(&[
        "--quiet",
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--replications",
        "200",
        "--out",
        out,
    ])?;
    let rows = read_summary(&dir.path().join("summary.csv"))?;
    let get = |m: &str, d: usize| {
        rows.iter()
            .find(|r| r.0 == m && r.1 == d)
            .map(|r| (r.2, r.3))
            .ok_or(format!("missing {m} d={d}"))
    };
    let mut report = Vec::new();
    for d in [1, 2, 3] {
        let (p, l, c) = (get("pca", d)?, get("lda", d)?, get("cost-informed", d)?);
        report.push(format!("d={d} medians pca {} lda {} ci {}", p.0, l.0, c.0));
        if d == 3 {
            let meds = [p.0, l.0, c.0];
            let hi = meds.iter().cloned().fold(f64::MIN, f64::max);
            let lo = meds.iter().cloned().fold(f64::MAX, f64::min);
            ensure(hi <= 1.25 * lo, || {
                format!("d=3 medians spread too wide: {meds:?}")
            })?;
        } else {
            ensure(c.0 < p.0 && c.0 < l.0, || {
                format!("d={d}: cost-informed median not lowest")
            })?;
        }
        if d == 1 {
            ensure(c.1 < p.0 && c.1 < l.0, || {
                format!("d=1: cost-informed Q3 {} not below baselines", c.1)
            })?;
        }
    }
    Ok(report.join("; "))
}

fn eigensolver_oracles() -> Result<String, String> {
    let mut r = rng(1001);
    let mut worst: f64 = 0.0;
    for i in 0..2000 {
        let n = 2 + i % 2;
        let a = random_symmetric(&mut r, n);
        let got = eig_symmetric(&a).map_err(|e| e.to_string())?.eigenvalues;
        let want = char_poly_eigenvalues(&a);
        let scale = want.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
        worst = worst.max(max_abs_diff(&got, &want) / scale);

        let b = random_psd(&mut r, n, n);
        let m = random_spd(&mut r, n, 0.5);
        let got = eig_generalized(&b, &m).map_err(|e| e.to_string())?.eigenvalues;
        let want = pencil_roots(&b, &m);
        let scale = want.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
        worst = worst.max(max_abs_diff(&got, &want) / scale);
    }
    ensure(worst < 1e-8, || format!("worst relative error {worst:e}"))?;
    Ok(format!(
        "worst relative error {worst:.1e} over 1000 matrices and 1000 pencils of each size"
    ))
}

fn separability_maximisation() -> Result<String, String> {
    let mut r = rng(1002);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = r.random_range(2..5);
        let n = r.random_range(5..20);
        let data = random_dataset(&mut r, 2, k, n, 2.0);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { 0.0 } else { r.random_range(0.5..50.0) })
                    .collect()
            })
            .collect();
        let c = CostMatrix::from_rows(&rows).map_err(|e| e.to_string())?;
        let lda = fit_lda(&data).map_err(|e| e.to_string())?;
        let ci = fit_cost_informed(&data, &c).map_err(|e| e.to_string())?;
        let sw = scatter::within_class_scatter(&data).map_err(|e| e.to_string())?;
        let sb = scatter::between_class_scatter(&data).map_err(|e| e.to_string())?;
        let sbc = scatter::cost_weighted_between_scatter(&data, &c).map_err(|e| e.to_string())?;
        let se = scatter::total_scatter(&data);
        for (lead, (grid, _)) in [
            (lda.eigenvalues[0], grid_max_quotient(&sb, &sw, 3600)),
            (ci.eigenvalues[0], grid_max_quotient(&sbc, &se, 3600)),
        ] {
            // the solver's value may only fall short of the grid by round-off
            let shortfall = (grid - lead) / grid;
            worst = worst.max(shortfall);
            ensure(shortfall <= 1e-4, || {
                format!("eigenvalue {lead} below grid maximum {grid}")
            })?;
        }
    }
    Ok(format!(
        "largest relative shortfall vs grid {worst:.1e} over 100 datasets"
    ))
}

fn cost_scale_invariance() -> Result<String, String> {
    let mut r = rng(1004);
    let base = CostMatrix::case_study();
    let tenfold = base.scaled(10.0).map_err(|e| e.to_string())?;
    let (mut worst_v, mut worst_l): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let data = random_dataset(&mut r, 3, 9, 12, 1.0);
        let a = fit_cost_informed(&data, &base).map_err(|e| e.to_string())?;
        let b = fit_cost_informed(&data, &tenfold).map_err(|e| e.to_string())?;
        worst_v = worst_v.max(max_abs_diff(a.basis.as_slice(), b.basis.as_slice()));
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            if *y != 0.0 {
                worst_l = worst_l.max((10.0 * x - y).abs() / y.abs());
            } else {
                worst_l = worst_l.max(x.abs());
            }
        }
    }
    ensure(worst_v <= 1e-10 && worst_l <= 1e-10, || {
        format!("basis drift {worst_v:e}, eigenvalue drift {worst_l:e}")
    })?;
    Ok(format!(
        "basis drift {worst_v:.1e}, eigenvalue drift {worst_l:.1e} over 50 datasets"
    ))
}

fn inverse_wishart_mean() -> Result<String, String> {
    let scale = Matrix::identity(3).scale(0.15);
    let mut rng = RngSeed::new(1005).rng();
    let n = 100_000;
    let mut sum = Matrix::zeros(3, 3);
    for _ in 0..n {
        let w = sample_inverse_wishart(&scale, 8.0, &mut rng).map_err(|e| e.to_string())?;
        sum = sum.add(&w).map_err(|e| e.to_string())?;
    }
    let mean = sum.scale(1.0 / n as f64);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            // diagonal entries relative to 0.0375; off-diagonal ones against the same scale
            let want = if i == j { 0.0375 } else { 0.0 };
            worst = worst.max((mean[(i, j)] - want).abs() / 0.0375);
        }
    }
    ensure(worst < 0.05, || {
        format!("worst entry error {:.2}%", 100.0 * worst)
    })?;
    Ok(format!("worst entry error {:.2}% of 0.0375", 100.0 * worst))
}

fn knn_brute_force() -> Result<String, String> {
    let mut r = rng(1006);
    // integer-valued coordinates make equal distances common; the last 50
    // training points duplicate earlier ones with a different label
    let mut rows: Vec<Vec<f64>> = (0..400)
        .map(|_| (0..3).map(|_| r.random_range(-4..=4) as f64).collect())
        .collect();
    let mut labels: Vec<usize> = (0..400).map(|_| r.random_range(0..9)).collect();
    for i in 0..50 {
        rows.push(rows[i * 7].clone());
        labels.push((labels[i * 7] + 1 + i % 8) % 9);
    }
    let train = Matrix::from_rows(&rows).map_err(|e| e.to_string())?;
    let model = KnnModel::new(train.clone(), labels.clone(), 9, 5).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for q in 0..10_000 {
        let query: Vec<f64> = if q % 2 == 0 {
            (0..3).map(|_| r.random_range(-4..=4) as f64).collect()
        } else {
            (0..3).map(|_| r.random_range(-4.5..4.5)).collect()
        };
        let got = model.predict(&query).map_err(|e| e.to_string())?;
        if got != brute_knn(&train, &labels, 9, 5, &query) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok("10000 queries, 450 training points, 0 mismatches".into())
}

fn determinism() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = repo_file("configs/paper.toml");
    let cfg = cfg.to_str().unwrap();
    let runs = [("a", "1"), ("b", "1"), ("c", "8")];
    for (name, threads) in runs {
        let out = dir.path().join(name);
        run_cli(&[
            "--quiet",
            "--threads",
            threads,
            "experiment",
            "--config",
            cfg,
            "--out",
            out.to_str().unwrap(),
        ])?;
    }
    for file in ["results.csv", "summary.csv"] {
        let a = std::fs::read(dir.path().join("a").join(file)).map_err(|e| e.to_string())?;
        for other in ["b", "c"] {
            let b = std::fs::read(dir.path().join(other).join(file)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("{file} differs between run a and run {other}"))?;
        }
    }
    Ok("shipped full config: repeat run and 1 vs 8 threads byte-identical".into())
}

fn degenerate_inputs() -> Result<String, String> {
    let e = |x: costdr::Error| x.to_string();
    // single-point classes: within-class scatter is zero, the ridge takes over
    let single = Dataset::new(
        Matrix::from_rows(&[[0.0, 0.0], [1.0, 2.0], [3.0, 1.0]]).map_err(|x| x.to_string())?,
        vec![0, 1, 2],
        3,
    )
    .map_err(e)?;
    let lda = fit_lda(&single).map_err(e)?;
    ensure(lda.ridged, || {
        "single-point classes did not trigger the ridge".into()
    })?;
    let ci = fit_cost_informed(&single, &CostMatrix::uniform(3)).map_err(e)?;
    let pca = fit_pca(&single).map_err(e)?;
    for p in [&lda, &ci, &pca] {
        ensure(
            p.eigenvalues
                .iter()
                .chain(p.basis.as_slice())
                .all(|x| x.is_finite()),
            || format!("{} produced non-finite output", p.method),
        )?;
    }

    // coincident centroids: between-class scatter vanishes
    let mut r = rng(1008);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3 {
        for _ in 0..10 {
            let p = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
            rows.push(p);
            rows.push([-p[0], -p[1]]);
            labels.extend([c, c]);
        }
    }
    let coincident =
        Dataset::new(Matrix::from_rows(&rows).map_err(|x| x.to_string())?, labels, 3).map_err(e)?;
    let lda = fit_lda(&coincident).map_err(e)?;
    ensure(lda.eigenvalues.iter().all(|&x| x == 0.0), || {
        format!("LDA eigenvalues not all zero: {:?}", lda.eigenvalues)
    })?;
    let ci = fit_cost_informed(&coincident, &CostMatrix::uniform(3)).map_err(e)?;
    ensure(ci.eigenvalues.iter().all(|x| x.is_finite() && *x >= 0.0), || {
        "cost-informed spectrum invalid".into()
    })?;

    // collinear data: singular within-class and total scatter
    let rows: Vec<[f64; 2]> = (0..12).map(|i| [i as f64, 2.0 * i as f64]).collect();
    let line = Dataset::new(
        Matrix::from_rows(&rows).map_err(|x| x.to_string())?,
        (0..12).map(|i| i / 4).collect(),
        3,
    )
    .map_err(e)?;
    let lda = fit_lda(&line).map_err(e)?;
    let ci = fit_cost_informed(&line, &CostMatrix::uniform(3)).map_err(e)?;
    ensure(lda.ridged && ci.ridged, || {
        "singular scatter did not trigger the ridge".into()
    })?;
    let sw = scatter::within_class_scatter(&line).map_err(e)?;
    ensure(sw.trace() > 0.0, || "unexpected zero within-class trace".into())?;
    ensure(lda.eigenvalues.iter().all(|x| x.is_finite()), || {
        "LDA eigenvalues not finite".into()
    })?;
    let transformed = lda.transform(&line, 1).map_err(e)?;
    ensure(
        transformed.features().as_slice().iter().all(|x| x.is_finite()),
        || "non-finite projection".into(),
    )?;
    Ok("single-point classes, coincident centroids and singular scatter handled".into())
}

fn main() {
    let checks: [(&str, Check); 8] = [
        (
            "1 ordinal reproduction of the cost box plots",
            ordinal_reproduction,
        ),
        ("2 eigensolver vs polynomial oracles", eigensolver_oracles),
        ("3 leading eigenvalue vs grid search", separability_maximisation),
        ("4 cost-scale invariance", cost_scale_invariance),
        ("5 inverse-Wishart mean", inverse_wishart_mean),
        ("6 KNN vs brute force", knn_brute_force),
        ("7 determinism across runs and threads", determinism),
        ("8 degenerate inputs", degenerate_inputs),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1}s): {why}");
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
