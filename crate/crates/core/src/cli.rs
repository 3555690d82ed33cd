//! Command-line front end.
//!
//! Human-readable progress goes to stderr. With `--quiet`, stderr stays
//! silent and a single value is printed to stdout where one makes sense
//! (row count, leading eigenvalue, total cost).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::classify::KnnModel;
use crate::costmodel::{total_cost, CostMatrix};
use crate::datagen::{self, GenerativeSpec, RngSeed};
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig};
use crate::fmt::f64_exact;
use crate::reducers::{self, Method, Projection};

#[derive(Debug, Parser)]
#[command(
    name = "costdr",
    version,
    about = "Cost-informed linear dimensionality reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Root random seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Suppress logs; print a single result value to stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Worker threads for the experiment (does not change any output).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one realization of the nine-class case-study generator.
    Generate(GenerateArgs),
    /// Fit a projection to a labelled dataset.
    Fit(FitArgs),
    /// Project a dataset onto the leading basis vectors of a projection.
    Transform(TransformArgs),
    /// Score a KNN classifier and report its confusion matrix and total cost.
    Classify(ClassifyArgs),
    /// Run the replicated comparison of PCA, LDA and cost-informed reduction.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    pub points_per_class: usize,
    /// Inverse-Wishart scale is this value times the identity.
    #[arg(long, default_value_t = 0.15)]
    pub iw_scale: f64,
    #[arg(long, default_value_t = 8.0)]
    pub iw_dof: f64,
    /// Replication index; matches the dataset the experiment draws for it.
    #[arg(long, default_value_t = 0)]
    pub replication: u64,
    /// Also write the held-out split: train to --out, test to this path.
    #[arg(long)]
    pub test_out: Option<PathBuf>,
    #[arg(long, default_value_t = 50, requires = "test_out")]
    pub per_class_train: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Cost matrix CSV; required for cost-informed.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub projection: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Projection applied to both sets first; omit to classify raw features.
    #[arg(long)]
    pub projection: Option<PathBuf>,
    #[arg(long, requires = "projection")]
    pub dim: Option<usize>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Cost matrix CSV; unit costs when omitted.
    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Confusion matrix CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// TOML configuration; defaults reproduce the case study.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub per_class_train: Option<usize>,
    #[arg(long)]
    pub knn_k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Option<Vec<Method>>,
    #[arg(long)]
    pub costs: Option<PathBuf>,
    #[arg(long)]
    pub points_per_class: Option<usize>,
    #[arg(long)]
    pub no_svg: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Experiment configuration file. Relative paths resolve against the file's
/// directory.
///
/// ```toml
/// replications = 500
/// per_class_train = 50
/// knn_k = 5
/// dims = [1, 2, 3]
/// methods = ["pca", "lda", "cost-informed"]
/// costs = "../data/case_study_costs.csv"   # omitted: built-in case-study costs
/// seed = 0
/// svg = true
///
/// [generative]
/// points_per_class = 100
/// iw_scale = 0.15
/// iw_dof = 8.0
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub replications: Option<usize>,
    pub per_class_train: Option<usize>,
    pub knn_k: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub methods: Option<Vec<String>>,
    pub costs: Option<PathBuf>,
    pub seed: Option<u64>,
    pub svg: Option<bool>,
    pub generative: Option<GenerativeFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerativeFile {
    pub points_per_class: Option<usize>,
    pub iw_scale: Option<f64>,
    pub iw_dof: Option<f64>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

struct Log {
    quiet: bool,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn value(&self, v: impl std::fmt::Display) {
        if self.quiet {
            println!("{v}");
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let log = Log { quiet: cli.quiet };
    let seed = cli.seed;
    match cli.command {
        Command::Generate(a) => cmd_generate(a, seed.unwrap_or(0), &log),
        Command::Fit(a) => cmd_fit(a, &log),
        Command::Transform(a) => cmd_transform(a, &log),
        Command::Classify(a) => cmd_classify(a, &log),
        Command::Experiment(a) => cmd_experiment(a, seed, cli.threads, &log),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        ))
    }
}

fn cmd_generate(a: GenerateArgs, seed: u64, log: &Log) -> Result<()> {
    let spec = GenerativeSpec::case_study(a.points_per_class, a.iw_scale, a.iw_dof);
    let root = RngSeed::new(seed);
    let (data, _) = datagen::generate_replication(&spec, &root, a.replication)?;
    match &a.test_out {
        None => {
            datagen::save_dataset(&data, &a.out)?;
            log.info(format!(
                "wrote {}: N={} D={} K={}",
                a.out.display(),
                data.len(),
                data.dim(),
                data.class_count()
            ));
        }
        Some(test_out) => {
            let mut rng = datagen::split_seed(&root, a.replication).rng();
            let (train, test) = datagen::stratified_split(&data, a.per_class_train, &mut rng)?;
            datagen::save_dataset(&train, &a.out)?;
            datagen::save_dataset(&test, test_out)?;
            log.info(format!(
                "wrote {} (N={}) and {} (N={}): D={} K={}",
                a.out.display(),
                train.len(),
                test_out.display(),
                test.len(),
                data.dim(),
                data.class_count()
            ));
        }
    }
    log.value(data.len());
    Ok(())
}

fn cmd_fit(a: FitArgs, log: &Log) -> Result<()> {
    require_file(&a.data)?;
    if a.method == Method::CostInformed && a.costs.is_none() {
        return Err(Error::MissingCostMatrix);
    }
    let costs = a.costs.as_ref().map(CostMatrix::read_csv).transpose()?;
    let data = datagen::load_dataset(&a.data, costs.as_ref().map(CostMatrix::class_count))?;
    let p = reducers::fit(a.method, &data, costs.as_ref())?;
    p.write(&a.out)?;
    let spectrum: Vec<String> = p.eigenvalues.iter().map(|&x| format!("{x:.6e}")).collect();
    log.info(format!("{} eigenvalues: {}", p.method, spectrum.join(" ")));
    if p.ridged {
        log.info("denominator scatter was degenerate; ridge applied");
    }
    log.value(f64_exact(p.eigenvalues[0]));
    Ok(())
}

fn cmd_transform(a: TransformArgs, log: &Log) -> Result<()> {
    require_file(&a.projection)?;
    require_file(&a.data)?;
    let p = Projection::read(&a.projection)?;
    let data = datagen::load_dataset(&a.data, None)?;
    let out = reducers::transform(&p, &data, a.dim)?;
    datagen::save_dataset(&out, &a.out)?;
    log.info(format!(
        "wrote {}: N={} d={}",
        a.out.display(),
        out.len(),
        out.dim()
    ));
    log.value(out.len());
    Ok(())
}

fn cmd_classify(a: ClassifyArgs, log: &Log) -> Result<()> {
    require_file(&a.train)?;
    require_file(&a.test)?;
    let costs = a.costs.as_ref().map(CostMatrix::read_csv).transpose()?;
    let k_hint = costs.as_ref().map(CostMatrix::class_count);
    let mut train = datagen::load_dataset(&a.train, k_hint)?;
    let mut test = datagen::load_dataset(&a.test, k_hint)?;
    let class_count = train.class_count().max(test.class_count());
    if k_hint.is_none() {
        train = crate::scatter::Dataset::new(train.features().clone(), train.labels().to_vec(), class_count)?;
        test = crate::scatter::Dataset::new(test.features().clone(), test.labels().to_vec(), class_count)?;
    }
    if let Some(path) = &a.projection {
        require_file(path)?;
        let p = Projection::read(path)?;
        let d = a.dim.unwrap_or(p.source_dim);
        train = p.transform(&train, d)?;
        test = p.transform(&test, d)?;
    }
    let costs = costs.unwrap_or_else(|| CostMatrix::uniform(class_count));
    let knn = KnnModel::fit(&train, a.k)?;
    let cm = knn.confusion(&test)?;
    let cost = total_cost(&cm, &costs)?;
    if let Some(out) = &a.out {
        std::fs::write(out, cm.to_csv()).map_err(|e| Error::io(out, e))?;
    }
    log.info(cm.to_csv().trim_end());
    log.info(format!(
        "accuracy {}/{}; total cost {cost}",
        cm.correct(),
        cm.total()
    ));
    log.value(f64_exact(cost));
    Ok(())
}

/// Resolves the experiment configuration: defaults, then file, then flags.
pub fn resolve_experiment(a: &ExperimentArgs, seed: Option<u64>) -> Result<(ExperimentConfig, bool)> {
    let file = match &a.config {
        Some(p) => {
            require_file(p)?;
            ConfigFile::read(p)?
        }
        None => ConfigFile::default(),
    };
    let base_dir = a
        .config
        .as_ref()
        .and_then(|p| p.parent().map(Path::to_path_buf))
        .unwrap_or_default();

    let mut cfg = ExperimentConfig::default();
    let gen = file.generative.unwrap_or_default();
    let defaults = GenerativeSpec::default();
    let points = a
        .points_per_class
        .or(gen.points_per_class)
        .unwrap_or(defaults.points_per_class);
    let scale = gen.iw_scale.unwrap_or(0.15);
    let dof = gen.iw_dof.unwrap_or(defaults.iw_dof);
    cfg.generative = GenerativeSpec::case_study(points, scale, dof);

    if let Some(v) = a.replications.or(file.replications) {
        cfg.replications = v;
    }
    if let Some(v) = a.per_class_train.or(file.per_class_train) {
        cfg.per_class_train = v;
    }
    if let Some(v) = a.knn_k.or(file.knn_k) {
        cfg.knn_k = v;
    }
    if let Some(v) = a.dims.clone().or(file.dims) {
        cfg.dims = v;
    }
    if let Some(v) = &a.methods {
        cfg.methods = v.clone();
    } else if let Some(v) = &file.methods {
        cfg.methods = v
            .iter()
            .map(|s| {
                s.parse::<Method>()
                    .map_err(|e| Error::Config(format!("methods: {e}")))
            })
            .collect::<Result<_>>()?;
    }
    let costs_path = a.costs.clone().or_else(|| file.costs.map(|p| base_dir.join(p)));
    if let Some(p) = costs_path {
        require_file(&p)?;
        cfg.cost_matrix = CostMatrix::read_csv(&p)?;
    }
    cfg.root_seed = seed.or(file.seed).unwrap_or(0);
    let svg = !a.no_svg && file.svg.unwrap_or(true);
    cfg.validate()?;
    Ok((cfg, svg))
}

fn metadata(cfg: &ExperimentConfig) -> String {
    let dims: Vec<String> = cfg.dims.iter().map(usize::to_string).collect();
    let methods: Vec<String> = cfg.methods.iter().map(Method::to_string).collect();
    format!(
        "rng = {}\nroot_seed = {}\nreplications = {}\nper_class_train = {}\nknn_k = {}\ndims = {}\nmethods = {}\npoints_per_class = {}\niw_scale = {}\niw_dof = {}\n",
        datagen::RNG_NAME,
        cfg.root_seed,
        cfg.replications,
        cfg.per_class_train,
        cfg.knn_k,
        dims.join(","),
        methods.join(","),
        cfg.generative.points_per_class,
        f64_exact(cfg.generative.iw_scale[(0, 0)]),
        f64_exact(cfg.generative.iw_dof),
    )
}

fn cmd_experiment(a: ExperimentArgs, seed: Option<u64>, threads: Option<usize>, log: &Log) -> Result<()> {
    let (cfg, svg) = resolve_experiment(&a, seed)?;
    log.info(format!(
        "running {} replications ({} cells each)",
        cfg.replications,
        cfg.cells().len()
    ));
    let (results, summary) = match threads {
        Some(t) => experiment::run_experiment_with_threads(&cfg, t)?,
        None => experiment::run_experiment(&cfg)?,
    };
    experiment::write_outputs(&a.out, &results, &summary, svg)?;
    let meta_path = a.out.join("metadata.txt");
    std::fs::write(&meta_path, metadata(&cfg)).map_err(|e| Error::io(&meta_path, e))?;
    for ((m, d), e) in &summary.entries {
        log.info(format!(
            "{m:>13} d={d}: median {:.1}  IQR [{:.1}, {:.1}]  range [{:.1}, {:.1}]",
            e.median, e.q1, e.q3, e.min, e.max
        ));
    }
    log.info(format!("wrote results to {}", a.out.display()));
    Ok(())
}
