//! Replicated train/reduce/classify/cost experiment and its box-plot summary.
//!
//! A replication draws one dataset realization from its own substream, splits
//! it per class, fits every requested reducer on the training half and, for
//! every target dimensionality, scores a KNN classifier on the reduced test
//! half. All methods in a replication see the same split.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::classify::{ConfusionMatrix, KnnModel};
use crate::costmodel::{total_cost, CostMatrix};
use crate::datagen::{self, GenerativeSpec, RngSeed};
use crate::error::{Error, Result};
use crate::fmt::f64_exact;
use crate::reducers::{self, Method};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub replications: usize,
    pub per_class_train: usize,
    pub knn_k: usize,
    pub dims: Vec<usize>,
    pub methods: Vec<Method>,
    pub cost_matrix: CostMatrix,
    pub generative: GenerativeSpec,
    pub root_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            replications: 500,
            per_class_train: 50,
            knn_k: 5,
            dims: vec![1, 2, 3],
            methods: Method::ALL.to_vec(),
            cost_matrix: CostMatrix::case_study(),
            generative: GenerativeSpec::default(),
            root_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.generative.validate()?;
        let d = self.generative.dim();
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&x| x == 0 || x > d) {
            return Err(Error::Config(format!("dims must be nonempty and within 1..={d}")));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.cost_matrix.class_count() != self.generative.class_count() {
            return Err(Error::CostShapeMismatch {
                expected: self.generative.class_count(),
                got: self.cost_matrix.class_count(),
            });
        }
        let train_total = self.per_class_train * self.generative.class_count();
        if self.knn_k == 0 || self.knn_k > train_total {
            return Err(Error::InvalidNeighbourCount {
                k: self.knn_k,
                n_train: train_total,
            });
        }
        Ok(())
    }

    /// `(method, dim)` cells in reporting order.
    pub fn cells(&self) -> Vec<(Method, usize)> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        let mut dims = self.dims.clone();
        dims.sort_unstable();
        dims.dedup();
        methods
            .iter()
            .flat_map(|&m| dims.iter().map(move |&d| (m, d)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub method: Method,
    pub dim: usize,
    pub total_cost: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub id: usize,
    pub cells: Vec<CellResult>,
}

impl ReplicationResult {
    pub fn cost(&self, method: Method, dim: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.dim == dim)
            .map(|c| c.total_cost)
    }
}

pub fn run_replication(cfg: &ExperimentConfig, id: usize) -> Result<ReplicationResult> {
    let root = RngSeed::new(cfg.root_seed);
    let (data, _) = datagen::generate_replication(&cfg.generative, &root, id as u64)?;
    let mut split_rng = datagen::split_seed(&root, id as u64).rng();
    let (train, test) = datagen::stratified_split(&data, cfg.per_class_train, &mut split_rng)?;

    let mut cells = Vec::new();
    let mut fitted: BTreeMap<Method, reducers::Projection> = BTreeMap::new();
    for (method, dim) in cfg.cells() {
        let projection = match fitted.entry(method) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(reducers::fit(method, &train, Some(&cfg.cost_matrix))?)
            }
        };
        let train_reduced = projection.transform(&train, dim)?;
        let test_reduced = projection.transform(&test, dim)?;
        let knn = KnnModel::fit(&train_reduced, cfg.knn_k)?;
        let confusion = knn.confusion(&test_reduced)?;
        let cost = total_cost(&confusion, &cfg.cost_matrix)?;
        cells.push(CellResult {
            method,
            dim,
            total_cost: cost,
            confusion,
        });
    }
    Ok(ReplicationResult { id, cells })
}

/// Runs every replication on the current rayon pool and summarizes.
///
/// Results are ordered by replication id. On failure the lowest failing id
/// is reported.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<ReplicationResult>, BoxPlotSummary)> {
    cfg.validate()?;
    let outcomes: Vec<Result<ReplicationResult>> = (0..cfg.replications)
        .into_par_iter()
        .map(|id| run_replication(cfg, id))
        .collect();
    let mut results = Vec::with_capacity(outcomes.len());
    for (id, outcome) in outcomes.into_iter().enumerate() {
        results.push(outcome.map_err(|e| Error::Replication {
            id,
            source: Box::new(e),
        })?);
    }
    let summary = summarize_results(cfg, &results)?;
    Ok((results, summary))
}

/// Same as [`run_experiment`] on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<(Vec<ReplicationResult>, BoxPlotSummary)> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

/// Box-plot statistics of one cost distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryEntry {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub mean: f64,
    pub count: usize,
}

impl SummaryEntry {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Linear interpolation between closest ranks on sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles, 1.5·IQR whiskers and outliers.
pub fn summarize(costs: &[f64]) -> Result<SummaryEntry> {
    if costs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = costs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = |&x: &f64| x >= lo_fence && x <= hi_fence;
    let whisker_low = sorted.iter().copied().find(inside).unwrap_or(q1);
    let whisker_high = sorted.iter().copied().rev().find(inside).unwrap_or(q3);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|&x| x < lo_fence || x > hi_fence)
        .collect();
    Ok(SummaryEntry {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low,
        whisker_high,
        outliers,
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        count: sorted.len(),
    })
}

/// Per `(method, dim)` summaries in reporting order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoxPlotSummary {
    pub entries: Vec<((Method, usize), SummaryEntry)>,
}

impl BoxPlotSummary {
    pub fn get(&self, method: Method, dim: usize) -> Option<&SummaryEntry> {
        self.entries
            .iter()
            .find(|((m, d), _)| *m == method && *d == dim)
            .map(|(_, e)| e)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,dim,min,q1,median,q3,max,mean,n_outliers\n");
        for ((m, d), e) in &self.entries {
            let _ = writeln!(
                out,
                "{m},{d},{},{},{},{},{},{},{}",
                f64_exact(e.min),
                f64_exact(e.q1),
                f64_exact(e.median),
                f64_exact(e.q3),
                f64_exact(e.max),
                f64_exact(e.mean),
                e.outliers.len()
            );
        }
        out
    }

    /// Box plots grouped by dimensionality, one box per method.
    pub fn to_svg(&self) -> String {
        render_svg(self)
    }
}

pub fn summarize_results(cfg: &ExperimentConfig, results: &[ReplicationResult]) -> Result<BoxPlotSummary> {
    let mut entries = Vec::new();
    for (method, dim) in cfg.cells() {
        let costs: Vec<f64> = results.iter().filter_map(|r| r.cost(method, dim)).collect();
        entries.push(((method, dim), summarize(&costs)?));
    }
    Ok(BoxPlotSummary { entries })
}

pub fn results_csv(results: &[ReplicationResult]) -> String {
    let mut out = String::from("replication,method,dim,total_cost\n");
    for r in results {
        for c in &r.cells {
            let _ = writeln!(out, "{},{},{},{}", r.id, c.method, c.dim, f64_exact(c.total_cost));
        }
    }
    out
}

/// Writes `results.csv`, `summary.csv` and optionally `boxplot.svg` into `dir`.
pub fn write_outputs(
    dir: &Path,
    results: &[ReplicationResult],
    summary: &BoxPlotSummary,
    svg: bool,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path, e))
    };
    write("results.csv", results_csv(results))?;
    write("summary.csv", summary.to_csv())?;
    if svg {
        write("boxplot.svg", summary.to_svg())?;
    }
    Ok(())
}

fn render_svg(summary: &BoxPlotSummary) -> String {
    const WIDTH: f64 = 720.0;
    const HEIGHT: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 60.0;

    let mut dims: Vec<usize> = summary.entries.iter().map(|((_, d), _)| *d).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut methods: Vec<Method> = summary.entries.iter().map(|((m, _), _)| *m).collect();
    methods.sort();
    methods.dedup();

    let ymax = summary
        .entries
        .iter()
        .map(|(_, e)| e.max)
        .fold(0.0f64, f64::max)
        .max(1.0);
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y = |v: f64| TOP + plot_h * (1.0 - v / ymax);
    let group_w = (WIDTH - LEFT - RIGHT) / dims.len().max(1) as f64;
    let box_w = group_w / (methods.len() as f64 + 1.0);
    let colours = ["#4c72b0", "#dd8452", "#55a868"];

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.2}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    for t in 0..=4 {
        let v = ymax * t as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.0}</text>"#,
            LEFT - 6.0,
            y(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">total misclassification cost</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (gi, &d) in dims.iter().enumerate() {
        let gx = LEFT + gi as f64 * group_w;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">d = {d}</text>"#,
            gx + group_w / 2.0,
            HEIGHT - BOTTOM + 20.0
        );
        for (mi, &m) in methods.iter().enumerate() {
            let Some(e) = summary.get(m, d) else { continue };
            let colour = colours[mi % colours.len()];
            let x0 = gx + box_w * (mi as f64 + 0.5);
            let xc = x0 + box_w / 2.0;
            let _ = writeln!(
                s,
                r#"<line x1="{xc:.2}" y1="{:.2}" x2="{xc:.2}" y2="{:.2}" stroke="black"/>"#,
                y(e.whisker_low),
                y(e.whisker_high)
            );
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}" stroke="black"/>"#,
                x0 + 2.0,
                y(e.q3),
                box_w - 4.0,
                (y(e.q1) - y(e.q3)).max(0.5)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
                x0 + 2.0,
                y(e.median),
                x0 + box_w - 2.0,
                y(e.median)
            );
            for &o in &e.outliers {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{xc:.2}" cy="{:.2}" r="2" fill="none" stroke="black"/>"#,
                    y(o)
                );
            }
        }
    }
    for (mi, &m) in methods.iter().enumerate() {
        let lx = LEFT + 10.0 + mi as f64 * 140.0;
        let ly = HEIGHT - 18.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.2}" y="{:.2}" width="12" height="12" fill="{}"/><text x="{:.2}" y="{ly:.2}">{m}</text>"#,
            ly - 10.0,
            colours[mi % colours.len()],
            lx + 16.0
        );
    }
    s.push_str("</svg>\n");
    s
}
