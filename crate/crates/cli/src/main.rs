//! `handuse` command-line entry point.
//!
//! Exit codes: 0 success, 1 validation or domain error, 2 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use handuse::config::{Condition, ModelSource, RunConfig};
use handuse::corpus::{load_label_rows, load_manifest, Corpus, Mode};
use handuse::features::cache::{load_or_extract, CacheStats};
use handuse::forest::Forest;
use handuse::harness::{
    compare, evaluate, predict_tasks, predictions_to_jsonl, rater_agreement, train_forest, write_outputs, Category,
    EvaluationReport, Predictor,
};
use handuse::metrics::Metric;
use handuse::par::{self, Execution};
use handuse::stats::{CompareOptions, WilcoxonMethod};
use handuse::synth::{generate, SynthConfig};
use handuse::Error;

#[derive(Parser)]
#[command(
    name = "handuse",
    version,
    about = "Hand-use and hand-role analysis of egocentric video"
)]
struct Cli {
    /// Worker threads for data-parallel loops.
    #[arg(long, global = true, env = "HANDUSE_JOBS")]
    jobs: Option<usize>,
    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus manifest and every file it references.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Compute features and store them in the per-task cache.
    Extract {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// Cache directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one forest on the given tasks and save it as JSON.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a saved forest to the given tasks and write predictions JSONL.
    Predict {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-subject-out evaluation of one configuration.
    Evaluate(EvaluateArgs),
    /// Inter-rater agreement of two annotation files.
    Agreement {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "interaction")]
        mode: Mode,
        /// Write the summary JSON here as well as to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Statistical comparison of evaluation reports that share folds.
    Compare {
        #[arg(required = true, num_args = 2..)]
        reports: Vec<PathBuf>,
        #[arg(long, default_value = "mcc")]
        metric: Metric,
        #[arg(long, default_value = "overall")]
        category: Category,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Bonferroni-adjust post hoc p-values.
        #[arg(long)]
        bonferroni: bool,
        /// Column names, one per report, instead of the report model labels.
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the synthetic test corpus.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        participants: usize,
        #[arg(long, default_value_t = 40)]
        frames: usize,
        #[arg(long, default_value_t = 720)]
        width: u32,
        #[arg(long, default_value_t = 405)]
        height: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        no_windows: bool,
        #[arg(long)]
        no_masks: bool,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "interaction")]
    mode: Mode,
    /// Comma-separated task ids; all tasks when omitted.
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<String>,
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    hsv_bins: Option<usize>,
    #[arg(long)]
    mag_bins: Option<usize>,
    #[arg(long)]
    dir_bins: Option<usize>,
    /// Fraction of mask pixels to flip (robustness probe).
    #[arg(long)]
    mask_flip: Option<f64>,
    #[arg(long)]
    mask_flip_seed: Option<u64>,
    /// Ignore mask files and always use the skin heuristic.
    #[arg(long)]
    no_mask_files: bool,
}

impl FeatureArgs {
    fn apply(&self, f: &mut handuse::features::FeatureConfig) {
        if let Some(v) = self.hsv_bins {
            f.hsv_bins = v;
        }
        if let Some(v) = self.mag_bins {
            f.mag_bins = v;
        }
        if let Some(v) = self.dir_bins {
            f.dir_bins = v;
        }
        if let Some(v) = self.mask_flip {
            f.masks.flip_fraction = v;
        }
        if let Some(v) = self.mask_flip_seed {
            f.masks.flip_seed = v;
        }
        if self.no_mask_files {
            f.masks.prefer_files = false;
        }
    }
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Weight of the weighted class relative to the other.
    #[arg(long)]
    class_weight_ratio: Option<f64>,
}

impl ForestArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.n_trees {
            c.forest.n_trees = v;
        }
        if let Some(v) = self.min_leaf {
            c.forest.min_leaf = v;
        }
        if self.max_depth.is_some() {
            c.forest.max_depth = self.max_depth;
        }
        if let Some(v) = self.class_weight_ratio {
            c.forest.class_weight_ratio = v;
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Start from a saved run configuration (e.g. the one embedded in a
    /// report); other flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long)]
    condition: Option<Condition>,
    #[arg(long)]
    source: Option<ModelSource>,
    /// Window predictions for the external_windows source.
    #[arg(long)]
    windows: Option<PathBuf>,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    forest: ForestArgs,
    #[arg(long)]
    output_dir: PathBuf,
    /// Recompute features even when a matching cache exists.
    #[arg(long)]
    no_cache: bool,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Stdout writes that end the process quietly when the reader goes away
/// (for example `handuse ... | head`).
fn emit(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_fmt(args).and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing to stdout: {e}");
        std::process::exit(2);
    }
}

macro_rules! out {
    ($($t:tt)*) => { emit(format_args!($($t)*)) };
}

macro_rules! outln {
    ($($t:tt)*) => { emit(format_args!("{}\n", format_args!($($t)*))) };
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn open_corpus(manifest: &Path) -> Result<Corpus, Error> {
    Corpus::open(manifest)
}

fn task_ids(corpus: &Corpus, wanted: &[String]) -> Result<Vec<String>, Error> {
    if wanted.is_empty() {
        return Ok(corpus.tasks.iter().map(|t| t.id.clone()).collect());
    }
    for id in wanted {
        if corpus.task(id).is_none() {
            return Err(Error::Invalid(format!("unknown task {id}")));
        }
    }
    Ok(wanted.to_vec())
}

fn extract_cached(
    corpus: &Corpus,
    ids: &[String],
    cfg: &RunConfig,
    cache: Option<&Path>,
    exec: Execution,
) -> Result<(handuse::features::extract::FeatureTable, CacheStats), Error> {
    let tasks: Vec<_> = ids.iter().map(|id| corpus.task(id).expect("checked")).collect();
    load_or_extract(corpus, &tasks, &cfg.features, cfg.mode, cache, exec)
}

fn base_config(c: &CorpusArgs, f: &FeatureArgs) -> RunConfig {
    let mut cfg = RunConfig::new(&c.manifest, c.mode, Condition::HomeOnly, ModelSource::Forest);
    f.apply(&mut cfg.features);
    cfg
}

fn run(cli: Cli, exec: Execution) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { manifest } => {
            let mut corpus = load_manifest(&manifest)?;
            corpus.load_all_data()?;
            let issues = corpus.validate();
            let frames: usize = corpus.tasks.iter().map(|t| t.frame_count).sum();
            outln!(
                "{}",
                json(&serde_json::json!({
                    "valid": issues.is_empty(),
                    "participants": corpus.participants.len(),
                    "tasks": corpus.tasks.len(),
                    "frames": frames,
                    "issues": issues,
                }))
                .trim_end()
            );
            if !issues.is_empty() {
                for i in &issues {
                    eprintln!("error: {i}");
                }
                return Ok(ExitCode::from(1));
            }
        }
        Command::Extract { corpus, features, out } => {
            let c = open_corpus(&corpus.manifest)?;
            let ids = task_ids(&c, &corpus.tasks)?;
            let cfg = base_config(&corpus, &features);
            let (table, stats) = extract_cached(&c, &ids, &cfg, Some(&out), exec)?;
            outln!(
                "{}",
                json(&serde_json::json!({
                    "mode": cfg.mode,
                    "feature_hash": cfg.features.hash(),
                    "layout_hash": table.layout.hash(),
                    "dimensions": table.layout.len(),
                    "instances": table.rows.len(),
                    "tasks_reused": stats.reused,
                    "tasks_computed": stats.computed,
                    "masks": table.masks,
                }))
                .trim_end()
            );
        }
        Command::Train {
            corpus,
            features,
            forest,
            cache,
            out,
        } => {
            let c = open_corpus(&corpus.manifest)?;
            let ids = task_ids(&c, &corpus.tasks)?;
            let mut cfg = base_config(&corpus, &features);
            forest.apply(&mut cfg);
            let (table, _) = extract_cached(&c, &ids, &cfg, cache.as_deref(), exec)?;
            let (model, set) = train_forest(&c, &table, &ids, cfg.mode, &cfg.forest_config(), exec)?;
            model.save(&out)?;
            eprintln!(
                "trained {} trees on {} instances ({} positive) -> {}",
                model.trees.len(),
                set.rows.len(),
                set.positives(),
                out.display()
            );
        }
        Command::Predict {
            corpus,
            features,
            model,
            cache,
            out,
        } => {
            let c = open_corpus(&corpus.manifest)?;
            let ids = task_ids(&c, &corpus.tasks)?;
            let cfg = base_config(&corpus, &features);
            let forest = Forest::load(&model)?;
            let (table, _) = extract_cached(&c, &ids, &cfg, cache.as_deref(), exec)?;
            forest.check_layout(&table.layout)?;
            let preds = predict_tasks(
                &c,
                &ids,
                cfg.mode,
                Predictor::Forest {
                    forest: &forest,
                    table: &table,
                },
                exec,
            )?;
            write(&out, &predictions_to_jsonl(&preds))?;
            eprintln!("{} predictions -> {}", preds.len(), out.display());
        }
        Command::Evaluate(a) => {
            let mut cfg = match &a.config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
                    RunConfig::from_json(&text, &p.display().to_string())?
                }
                None => {
                    let manifest = a
                        .manifest
                        .clone()
                        .ok_or_else(|| Error::Invalid("--manifest or --config is required".into()))?;
                    let mode = a.mode.unwrap_or(Mode::Interaction);
                    RunConfig::new(
                        &manifest,
                        mode,
                        a.condition.unwrap_or(Condition::HomeOnly),
                        a.source.unwrap_or(ModelSource::Forest),
                    )
                }
            };
            if a.config.is_some() {
                if let Some(m) = &a.manifest {
                    cfg.manifest = m.clone();
                }
                if let Some(m) = a.mode {
                    cfg.mode = m;
                }
                if let Some(c) = a.condition {
                    cfg.condition = c;
                }
                if let Some(s) = a.source {
                    cfg.model_source = s;
                }
            }
            if a.windows.is_some() {
                cfg.windows = a.windows.clone();
            }
            a.features.apply(&mut cfg.features);
            a.forest.apply(&mut cfg);
            cfg.output_dir = Some(a.output_dir.clone());
            cfg.use_cache = !a.no_cache;
            cfg.validate()?;
            let corpus = open_corpus(&cfg.manifest)?;
            let ev = evaluate(&corpus, &cfg, exec)?;
            write_outputs(&a.output_dir, &ev.report, &ev.folds)?;
            write(&a.output_dir.join("run_config.json"), &json(&cfg.reproducible()))?;
            out!("{}", ev.report.to_text());
            if let Some(s) = ev.cache {
                log::info!("feature cache: {} tasks reused, {} computed", s.reused, s.computed);
            }
        }
        Command::Agreement { a, b, mode, out } => {
            let ra = load_label_rows(&a)?;
            let rb = load_label_rows(&b)?;
            let s = rater_agreement(&ra, &rb, mode)?;
            let text = json(&s);
            if let Some(p) = out {
                write(&p, &text)?;
            }
            outln!("{:<24} {:>8} {:>8}", "Number of Observations", "Kappa", "PABAK");
            outln!("{:<24} {:>8.2} {:>8.2}", s.observations, s.kappa, s.pabak);
            outln!("agreement: {} (PABAK {})", s.band.as_str(), s.pabak_band.as_str());
            out!("{text}");
        }
        Command::Compare {
            reports,
            metric,
            category,
            alpha,
            bonferroni,
            names,
            out,
        } => {
            let mut loaded: Vec<EvaluationReport> = reports
                .iter()
                .map(|p| EvaluationReport::load(p))
                .collect::<Result<_, _>>()?;
            if !names.is_empty() {
                if names.len() != loaded.len() {
                    return Err(Error::Invalid(format!(
                        "{} names for {} reports",
                        names.len(),
                        loaded.len()
                    )));
                }
                for (r, n) in loaded.iter_mut().zip(names) {
                    r.model = n;
                }
            }
            let opts = CompareOptions {
                alpha,
                bonferroni,
                wilcoxon: WilcoxonMethod::Auto,
            };
            let r = compare(&loaded, metric, category, &opts)?;
            let text = json(&r);
            if let Some(p) = out {
                write(&p, &text)?;
            }
            out!("{text}");
            eprintln!("{}", r.summary);
        }
        Command::Synth {
            out,
            participants,
            frames,
            width,
            height,
            seed,
            no_windows,
            no_masks,
        } => {
            let cfg = SynthConfig {
                participants,
                frames_per_task: frames,
                width,
                height,
                seed,
                windows: !no_windows,
                masks_for_first: !no_masks,
                ..SynthConfig::default()
            };
            let s = generate(&out, &cfg)?;
            out!("{}", json(&s));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(j) = cli.jobs {
        par::set_jobs(j);
    }
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::available()
    };
    match run(cli, exec) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
