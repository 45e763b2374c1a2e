//! Command-line front end. Every subcommand resolves its options as
//! flags, then `--config` file, then built-in defaults.

pub mod config;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::eval::{self, confusion, Metrics, ReportRow};
use crate::features::{compute_features, FeatureVector};
use crate::io;
use crate::spatial::SpatialIndex;
use crate::svm::{self, SvmModel};
use crate::synthgen::{derive_seed, generate_tree, SuitePreset, TreeSpec};
use crate::{Class, Error, LabelVector, PointCloud, Result};

pub use config::{Method, RunConfig, WORKERS_ENV};
pub use pipeline::{run_pipeline, PipelineOutput, Seeds, PLANAR_LEAVES_WARNING};

#[derive(Debug, Parser)]
#[command(name = "leafwood", version, about = "Wood/leaf classification of tree point clouds")]
pub struct Cli {
    /// Worker threads (0 = all cores). Never changes results.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// `key = value` config file; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic tree as a labeled PLY.
    Synth(SynthArgs),
    /// Compute per-point feature vectors.
    Features(FeaturesArgs),
    /// Build a training set.
    Sample(SampleArgs),
    /// Train an SVM on a training set.
    Train(TrainArgs),
    /// Classify a cloud with a trained model.
    Classify(ClassifyArgs),
    /// Compare predicted labels with ground truth.
    Eval(EvalArgs),
    /// Run everything end to end.
    Pipeline(PipelineArgs),
}

/// Options shared by the commands that touch the configuration.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Neighborhood size.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// auto, seed-sphere or labels.
    #[arg(long)]
    pub method: Option<String>,
    /// leafy, balanced or woody.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub n_candidates: Option<usize>,
    #[arg(long)]
    pub n_leaf: Option<usize>,
    #[arg(long)]
    pub n_wood: Option<usize>,
    /// Seed-sphere radius in meters.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Seeds per class for the seed-sphere method.
    #[arg(long)]
    pub n_seeds: Option<usize>,
    /// Training size for the labels method.
    #[arg(long)]
    pub n_labeled: Option<usize>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Train on unscaled features.
    #[arg(long)]
    pub no_scaling: bool,
    /// Pick C and gamma by 5-fold cross-validation.
    #[arg(long)]
    pub grid_search: bool,
    /// paper or standard.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Declare that leaves are flat (logs a caveat; synthetic trees get planar leaves).
    #[arg(long)]
    pub planar_leaves: bool,
    /// Points in a synthetic tree.
    #[arg(long)]
    pub points: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        fn put<T: ToString>(cfg: &mut RunConfig, key: &str, v: &Option<T>) -> Result<()> {
            match v {
                Some(v) => cfg.set(key, &v.to_string()),
                None => Ok(()),
            }
        }
        put(cfg, "k", &self.k)?;
        put(cfg, "seed", &self.seed)?;
        put(cfg, "method", &self.method)?;
        put(cfg, "profile", &self.profile)?;
        put(cfg, "n_candidates", &self.n_candidates)?;
        put(cfg, "n_leaf", &self.n_leaf)?;
        put(cfg, "n_wood", &self.n_wood)?;
        put(cfg, "radius", &self.radius)?;
        put(cfg, "n_seeds", &self.n_seeds)?;
        put(cfg, "n_labeled", &self.n_labeled)?;
        put(cfg, "c", &self.c)?;
        put(cfg, "gamma", &self.gamma)?;
        put(cfg, "tol", &self.tol)?;
        put(cfg, "max_iter", &self.max_iter)?;
        put(cfg, "kappa", &self.kappa)?;
        put(cfg, "synth_points", &self.points)?;
        if self.no_scaling {
            cfg.svm.scaling = false;
        }
        if self.grid_search {
            cfg.grid_search = true;
        }
        if self.planar_leaves {
            cfg.planar_leaves = true;
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output PLY, or a directory when `--count` is above 1.
    #[arg(long)]
    pub out: PathBuf,
    /// leafy, balanced, woody or cycle.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// Cloud (.xyz or ASCII .ply).
    #[arg(long)]
    pub input: PathBuf,
    /// Feature CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Precomputed feature CSV; computed on the fly when absent.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Truth labels (needed by the seed-sphere and labels methods unless
    /// the input PLY carries them).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Seed points as `index class` lines, class `leaf`/`wood` or `1`/`0`.
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// Training CSV to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Sample audit CSV to write.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training CSV.
    #[arg(long)]
    pub training: PathBuf,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Cloud to classify.
    #[arg(long)]
    pub input: PathBuf,
    /// Precomputed feature CSV for `input`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Classified PLY to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write one 0/1 label per line.
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted labels (.txt or labeled .ply).
    #[arg(long)]
    pub pred: PathBuf,
    /// Truth labels (.txt or labeled .ply).
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long, default_value = "tree")]
    pub name: String,
    #[arg(long, default_value = "auto")]
    pub method_name: String,
    /// Report CSV to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Cloud to classify. Mutually exclusive with `--synth`.
    #[arg(long, conflicts_with = "synth")]
    pub input: Option<PathBuf>,
    /// Generate the input: leafy, balanced, woody or cycle.
    #[arg(long)]
    pub synth: Option<String>,
    /// Truth labels for evaluation (a labeled input PLY also works).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub seed_file: Option<PathBuf>,
    /// Also run the seed-sphere method and report the difference.
    #[arg(long)]
    pub baseline: bool,
    /// Write features.csv as well.
    #[arg(long)]
    pub dump_features: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub opts: Overrides,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let opts = match &cli.command {
        Command::Synth(a) => &a.opts,
        Command::Features(a) => &a.opts,
        Command::Sample(a) => &a.opts,
        Command::Train(a) => &a.opts,
        Command::Classify(a) => &a.opts,
        Command::Eval(a) => &a.opts,
        Command::Pipeline(a) => &a.opts,
    };
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        require(path)?;
        cfg.apply_file(path)?;
    }
    opts.apply(&mut cfg)?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Synth(a) => cmd_synth(a, &cfg),
        Command::Features(a) => cmd_features(a, &cfg),
        Command::Sample(a) => cmd_sample(a, &cfg),
        Command::Train(a) => cmd_train(a, &cfg),
        Command::Classify(a) => cmd_classify(a, &cfg),
        Command::Eval(a) => cmd_eval(a, &cfg),
        Command::Pipeline(a) => cmd_pipeline(a, &cfg),
    })
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Config(format!("input file not found: {}", path.display())))
    }
}

fn load_cloud(path: &Path) -> Result<(PointCloud, Option<LabelVector>)> {
    require(path)?;
    io::read_cloud(path)
}

fn load_features(path: Option<&PathBuf>, cloud: &PointCloud, k: usize) -> Result<Vec<FeatureVector>> {
    match path {
        Some(p) => {
            require(p)?;
            let f = io::read_features_csv(p)?;
            if f.len() != cloud.len() {
                return Err(Error::InvalidInput(format!(
                    "{} has {} rows but the cloud has {} points",
                    p.display(),
                    f.len(),
                    cloud.len()
                )));
            }
            Ok(f)
        }
        None => compute_features(cloud, &SpatialIndex::build(cloud)?, k),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads `index class` seed lines.
pub fn read_seed_file(path: &Path, n_points: usize) -> Result<Seeds> {
    require(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seeds = Seeds::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(idx), Some(class), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(path, i + 1, "expected 'index class'"));
        };
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("invalid index {idx:?}")))?;
        if idx >= n_points {
            return Err(Error::parse(path, i + 1, format!("index {idx} out of range")));
        }
        match class {
            "leaf" | "1" => seeds.leaf.push(idx),
            "wood" | "0" => seeds.wood.push(idx),
            _ => return Err(Error::parse(path, i + 1, format!("invalid class {class:?}"))),
        }
    }
    if seeds.leaf.is_empty() || seeds.wood.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{} needs at least one leaf and one wood seed",
            path.display()
        )));
    }
    Ok(seeds)
}

fn synth_spec(cfg: &RunConfig, preset: SuitePreset, seed: u64) -> TreeSpec {
    TreeSpec {
        leaf_fraction: preset.leaf_fraction(),
        total_points: Some(cfg.synth_points),
        planar_leaves: cfg.planar_leaves,
        seed,
        ..TreeSpec::default()
    }
}

fn parse_preset(s: Option<&str>, cfg: &RunConfig) -> Result<SuitePreset> {
    match s {
        Some(s) => SuitePreset::parse(s)
            .ok_or_else(|| Error::Config(format!("unknown synth preset {s:?}"))),
        None => Ok(cfg.synth_preset),
    }
}

fn cmd_synth(a: &SynthArgs, cfg: &RunConfig) -> Result<()> {
    let preset = parse_preset(a.preset.as_deref(), cfg)?;
    if a.count == 0 {
        return Err(Error::Config("count must be positive".into()));
    }
    if a.count == 1 {
        let spec = synth_spec(cfg, preset.for_tree(0), cfg.seed);
        let (cloud, labels) = generate_tree(&spec)?;
        return io::write_classified_ply(&cloud, &labels, &a.out);
    }
    create_dir(&a.out)?;
    for i in 0..a.count {
        let spec = synth_spec(cfg, preset.for_tree(i), derive_seed(cfg.seed, i));
        let (cloud, labels) = generate_tree(&spec)?;
        io::write_classified_ply(&cloud, &labels, a.out.join(format!("tree_{i:02}.ply")))?;
    }
    Ok(())
}

fn cmd_features(a: &FeaturesArgs, cfg: &RunConfig) -> Result<()> {
    let (cloud, _) = load_cloud(&a.input)?;
    let features = load_features(None, &cloud, cfg.k)?;
    io::write_features_csv(&features, &a.out)
}

fn cmd_sample(a: &SampleArgs, cfg: &RunConfig) -> Result<()> {
    let (cloud, embedded) = load_cloud(&a.input)?;
    let truth = match &a.labels {
        Some(p) => {
            require(p)?;
            Some(io::read_labels_any(p, Some(cloud.len()))?)
        }
        None => embedded,
    };
    let seeds = a
        .seed_file
        .as_ref()
        .map(|p| read_seed_file(p, cloud.len()))
        .transpose()?;
    let features = load_features(a.features.as_ref(), &cloud, cfg.k)?;
    let index = SpatialIndex::build(&cloud)?;
    let (ts, records) = pipeline::build_training(
        cfg,
        cfg.method,
        &cloud,
        &index,
        Some(&features),
        truth.as_ref(),
        seeds.as_ref(),
    )?;
    io::write_training_csv(&ts, &a.out)?;
    if let Some(p) = &a.audit {
        io::write_samples_csv(&records, p)?;
    }
    Ok(())
}

fn cmd_train(a: &TrainArgs, cfg: &RunConfig) -> Result<()> {
    require(&a.training)?;
    let entries = io::read_training_csv(&a.training)?;
    let (model, report, hp, _) = pipeline::train_model(cfg, &entries)?;
    eprintln!(
        "trained on {} samples: C={} gamma={} iterations={} support vectors={}",
        entries.len(),
        hp.c,
        hp.gamma,
        report.iterations,
        report.n_support
    );
    model.save(&a.out)
}

fn cmd_classify(a: &ClassifyArgs, cfg: &RunConfig) -> Result<()> {
    require(&a.model)?;
    let model = SvmModel::load(&a.model)?;
    let (cloud, _) = load_cloud(&a.input)?;
    let features = load_features(a.features.as_ref(), &cloud, cfg.k)?;
    let labels = svm::classify_cloud(&model, &features);
    io::write_classified_ply(&cloud, &labels, &a.out)?;
    if let Some(p) = &a.labels_out {
        io::write_labels(&labels, p)?;
    }
    Ok(())
}

fn cmd_eval(a: &EvalArgs, cfg: &RunConfig) -> Result<()> {
    require(&a.pred)?;
    require(&a.truth)?;
    let pred = io::read_labels_any(&a.pred, None)?;
    let truth = io::read_labels_any(&a.truth, Some(pred.len()))?;
    let row = ReportRow::new(&a.name, &a.method_name, confusion(&pred, &truth)?);
    print!("{}", eval::report_table(std::slice::from_ref(&row)));
    println!("kappa ({}) = {:.4}", cfg.kappa.name(), row.metrics.kappa(cfg.kappa));
    if let Some(p) = &a.out {
        eval::write_report(&[row], p, None)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricsJson {
    p_o: f64,
    kappa_paper: f64,
    kappa_standard: f64,
    kappa: f64,
    tp: u64,
    tn: u64,
    fp: u64,
    #[serde(rename = "fn")]
    fn_: u64,
}

#[derive(Debug, Serialize)]
struct MethodJson {
    method: &'static str,
    training_leaf: usize,
    training_wood: usize,
    c: f64,
    gamma: f64,
    iterations: usize,
    dual_objective: f64,
    kkt_violation: f64,
    support_vectors: usize,
    predicted_leaf: usize,
    predicted_wood: usize,
    metrics: Option<MetricsJson>,
}

#[derive(Debug, Serialize)]
struct SummaryJson {
    version: &'static str,
    points: usize,
    kappa_variant: &'static str,
    main: MethodJson,
    baseline: Option<MethodJson>,
    kappa_improvement: Option<f64>,
    warnings: Vec<String>,
}

fn method_json(r: &pipeline::MethodRun, cfg: &RunConfig) -> MethodJson {
    MethodJson {
        method: r.method.name(),
        training_leaf: r.training.count(Class::Leaf),
        training_wood: r.training.count(Class::Wood),
        c: r.hyperparams.c,
        gamma: r.hyperparams.gamma,
        iterations: r.report.iterations,
        dual_objective: r.report.objective,
        kkt_violation: r.report.violation,
        support_vectors: r.report.n_support,
        predicted_leaf: r.predicted.count(Class::Leaf),
        predicted_wood: r.predicted.count(Class::Wood),
        metrics: r.confusion.map(|cm| {
            let m = Metrics::from_confusion(&cm);
            MetricsJson {
                p_o: m.p_o,
                kappa_paper: m.kappa_paper,
                kappa_standard: m.kappa_standard,
                kappa: m.kappa(cfg.kappa),
                tp: cm.tp,
                tn: cm.tn,
                fp: cm.fp,
                fn_: cm.fn_,
            }
        }),
    }
}

/// Collects log lines for `run.log` and mirrors them to stderr.
#[derive(Default)]
struct RunLog {
    text: String,
}

impl RunLog {
    fn line(&mut self, msg: impl AsRef<str>) {
        eprintln!("{}", msg.as_ref());
        let _ = writeln!(self.text, "{}", msg.as_ref());
    }
}

fn cmd_pipeline(a: &PipelineArgs, cfg: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let mut log = RunLog::default();
    let (cloud, embedded, name) = match (&a.input, &a.synth) {
        (Some(p), None) => {
            let (c, l) = load_cloud(p)?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned());
            (c, l, name.unwrap_or_else(|| "tree".into()))
        }
        (None, Some(s)) => {
            let preset = parse_preset(Some(s), cfg)?.for_tree(0);
            let (c, l) = generate_tree(&synth_spec(cfg, preset, cfg.seed))?;
            (c, Some(l), format!("synth_{}", preset.name()))
        }
        _ => return Err(Error::Config("pipeline needs --input or --synth".into())),
    };
    let truth = match &a.truth {
        Some(p) => {
            require(p)?;
            Some(io::read_labels_any(p, Some(cloud.len()))?)
        }
        None => embedded,
    };
    let seeds = a
        .seed_file
        .as_ref()
        .map(|p| read_seed_file(p, cloud.len()))
        .transpose()?;
    create_dir(&a.out_dir)?;
    if a.synth.is_some() {
        if let Some(t) = &truth {
            io::write_classified_ply(&cloud, t, a.out_dir.join("input.ply"))?;
        }
    }
    log.line(format!("input {name}: {} points", cloud.len()));

    let out = run_pipeline(cfg, &cloud, truth.as_ref(), seeds.as_ref(), a.baseline)?;
    for w in &out.warnings {
        log.line(format!("warning: {w}"));
    }
    let runs = std::iter::once(&out.main).chain(out.baseline.as_ref());
    let mut rows = Vec::new();
    for r in runs {
        log.line(format!(
            "{}: {} training samples ({} leaf, {} wood), C={} gamma={}, {} SMO iterations, {} support vectors",
            r.method.name(),
            r.training.len(),
            r.training.count(Class::Leaf),
            r.training.count(Class::Wood),
            r.hyperparams.c,
            r.hyperparams.gamma,
            r.report.iterations,
            r.report.n_support
        ));
        if let Some(grid) = &r.grid {
            for g in grid {
                log.line(format!("  grid C={} gamma={} cv accuracy={:.4}", g.c, g.gamma, g.cv_accuracy));
            }
        }
        if let Some(cm) = r.confusion {
            let row = ReportRow::new(&name, r.method.name(), cm);
            log.line(format!(
                "{}: p_o={:.4} kappa({})={:.4}",
                r.method.name(),
                row.metrics.p_o,
                cfg.kappa.name(),
                row.metrics.kappa(cfg.kappa)
            ));
            rows.push(row);
        }
    }

    let dir = &a.out_dir;
    io::write_classified_ply(&cloud, &out.main.predicted, dir.join("classified.ply"))?;
    io::write_samples_csv(&out.main.records, dir.join("samples.csv"))?;
    io::write_training_csv(&out.main.training, dir.join("training.csv"))?;
    out.main.model.save(dir.join("model.svm"))?;
    if a.dump_features {
        io::write_features_csv(&out.features, dir.join("features.csv"))?;
    }
    if !rows.is_empty() {
        eval::write_report(&rows, &dir.join("report.csv"), Some(&dir.join("report.txt")))?;
    }
    let improvement = match (out.main.metrics(), out.baseline.as_ref().and_then(|b| b.metrics())) {
        (Some(m), Some(b)) => Some(m.kappa(cfg.kappa) - b.kappa(cfg.kappa)),
        _ => None,
    };
    if let Some(d) = improvement {
        log.line(format!("kappa improvement over seed-sphere: {d:+.4}"));
    }
    let summary = SummaryJson {
        version: env!("CARGO_PKG_VERSION"),
        points: cloud.len(),
        kappa_variant: cfg.kappa.name(),
        main: method_json(&out.main, cfg),
        baseline: out.baseline.as_ref().map(|b| method_json(b, cfg)),
        kappa_improvement: improvement,
        warnings: out.warnings.clone(),
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Numeric(format!("cannot serialize summary: {e}")))?;
    write_file(&dir.join("summary.json"), &(json + "\n"))?;
    write_file(&dir.join("config.txt"), &cfg.echo())?;
    write_file(&dir.join("run.log"), &log.text)?;
    eprintln!("done in {:.2} s", started.elapsed().as_secs_f64());
    Ok(())
}
