use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::folds::{make_folds, FoldSpec};
use super::report::{Category, EvaluationReport, FoldResult, FoldSummary, PredictionRecord, REPORT_VERSION};
use crate::config::{ModelSource, RunConfig};
use crate::corpus::{Corpus, HandInstance, Mode, Side, Task};
use crate::error::{Error, Result};
use crate::features::cache::{load_or_extract, CacheStats};
use crate::features::extract::{FeatureTable, InstanceKey};
use crate::forest::{Forest, ForestConfig, TrainingData};
use crate::fusion::{
    average_duplicates, contact_to_interaction, decide, load_windows, windows_to_frames, Source, WindowDecision,
    WindowKey, THRESHOLD,
};
use crate::metrics::{macro_average, metric_set, micro_average, ConfusionCounts};
use crate::par::Execution;

/// Samples for forest training, one per detected instance.
#[derive(Clone, Debug, Default)]
pub struct TrainingSet {
    pub keys: Vec<InstanceKey>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl TrainingSet {
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|l| **l).count()
    }
}

fn task<'a>(corpus: &'a Corpus, id: &str) -> Result<&'a Task> {
    let t = corpus
        .task(id)
        .ok_or_else(|| Error::invalid(format!("unknown task {id}")))?;
    if corpus.task_data(id).is_none() {
        return Err(Error::invalid(format!("task {id}: data not loaded")));
    }
    Ok(t)
}

/// Gathers the feature rows of every detected instance of `task_ids`.
/// Instances without a detection have no features and are not trained on.
pub fn training_set(corpus: &Corpus, table: &FeatureTable, task_ids: &[String], mode: Mode) -> Result<TrainingSet> {
    let mut set = TrainingSet::default();
    for id in task_ids {
        for inst in corpus.instances(task(corpus, id)?, mode) {
            if !inst.has_detection() {
                continue;
            }
            let row = table.get(id, inst.frame_index, inst.hand_side).ok_or_else(|| {
                Error::invalid(format!(
                    "no features for task {id} frame {} {}",
                    inst.frame_index, inst.hand_side
                ))
            })?;
            set.keys.push((id.clone(), inst.frame_index, inst.hand_side));
            set.rows.push(row.to_vec());
            set.labels.push(inst.label.target(mode));
        }
    }
    Ok(set)
}

pub fn train_forest(
    corpus: &Corpus,
    table: &FeatureTable,
    task_ids: &[String],
    mode: Mode,
    config: &ForestConfig,
    exec: Execution,
) -> Result<(Forest, TrainingSet)> {
    let set = training_set(corpus, table, task_ids, mode)?;
    if set.rows.is_empty() {
        return Err(Error::invalid("no training instances with a detection"));
    }
    let forest = Forest::train_keyed(
        &set.keys,
        TrainingData {
            rows: &set.rows,
            labels: &set.labels,
        },
        &table.layout.hash(),
        config,
        exec,
    )?;
    Ok((forest, set))
}

/// What produces test-time decisions.
#[derive(Clone, Copy, Debug)]
pub enum Predictor<'a> {
    Forest {
        forest: &'a Forest,
        table: &'a FeatureTable,
    },
    Windows(&'a BTreeMap<WindowKey, Vec<WindowDecision>>),
    Contacts,
}

impl Predictor<'_> {
    pub fn source(&self) -> Source {
        match self {
            Predictor::Forest { .. } => Source::Forest,
            Predictor::Windows(_) => Source::WindowModel,
            Predictor::Contacts => Source::ContactDetector,
        }
    }
}

fn record(inst: &HandInstance, mode: Mode, probability: Option<f64>, source: Source) -> PredictionRecord {
    let detected = inst.has_detection();
    // A hand without a box is negative, whatever the source would say.
    let probability = probability.filter(|_| detected);
    PredictionRecord {
        task: inst.task_id.clone(),
        frame: inst.frame_index,
        side: inst.hand_side,
        hand_category: inst.hand_category,
        truth: inst.label.target(mode),
        probability,
        decision: probability.is_some_and(decide),
        source,
        excluded: mode == Mode::Role && !detected,
    }
}

/// Decisions for every instance of `task_ids`, in task then (frame, side)
/// order.
pub fn predict_tasks(
    corpus: &Corpus,
    task_ids: &[String],
    mode: Mode,
    predictor: Predictor<'_>,
    exec: Execution,
) -> Result<Vec<PredictionRecord>> {
    let source = predictor.source();
    let mut out = Vec::new();
    for id in task_ids {
        let t = task(corpus, id)?;
        let instances = corpus.instances(t, mode);
        match predictor {
            Predictor::Forest { forest, table } => {
                let detected: Vec<&HandInstance> = instances.iter().filter(|i| i.has_detection()).collect();
                let rows = detected
                    .iter()
                    .map(|i| {
                        table
                            .get(id, i.frame_index, i.hand_side)
                            .map(<[f64]>::to_vec)
                            .ok_or_else(|| {
                                Error::invalid(format!(
                                    "no features for task {id} frame {} {}",
                                    i.frame_index, i.hand_side
                                ))
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let probs = forest.predict_batch(&table.layout, &rows, exec)?;
                let mut by_key: BTreeMap<(usize, Side), f64> = BTreeMap::new();
                for (i, p) in detected.iter().zip(probs) {
                    by_key.insert((i.frame_index, i.hand_side), p);
                }
                for inst in &instances {
                    let p = by_key.get(&(inst.frame_index, inst.hand_side)).copied();
                    out.push(record(inst, mode, p, source));
                }
            }
            Predictor::Windows(windows) => {
                let mut frames: BTreeMap<Side, Vec<bool>> = BTreeMap::new();
                for side in Side::BOTH {
                    let ws = windows.get(&(id.clone(), side)).map(Vec::as_slice).unwrap_or(&[]);
                    if ws.is_empty() {
                        log::warn!("no window predictions for task {id} {side}; its frames are negative");
                    }
                    let f = windows_to_frames(ws, t.frame_count)
                        .map_err(|e| Error::invalid(format!("task {id} {side}: {e}")))?;
                    frames.insert(side, f);
                }
                for inst in &instances {
                    let d = frames[&inst.hand_side].get(inst.frame_index).copied().unwrap_or(false);
                    out.push(record(inst, mode, Some(if d { 1.0 } else { 0.0 }), source));
                }
            }
            Predictor::Contacts => {
                for inst in &instances {
                    let votes: Vec<f64> = inst
                        .candidates
                        .iter()
                        .filter_map(|d| d.contact_state)
                        .map(|s| if contact_to_interaction(s) { 1.0 } else { 0.0 })
                        .collect();
                    let p = if votes.is_empty() {
                        None
                    } else {
                        Some(average_duplicates(&votes)?)
                    };
                    out.push(record(inst, mode, p, source));
                }
            }
        }
    }
    debug_assert!(out
        .iter()
        .all(|r| r.decision == r.probability.is_some_and(|p| p >= THRESHOLD)));
    Ok(out)
}

/// Confusion counts per hand category; `Overall` pools both hands.
pub fn confusion_by_category(records: &[PredictionRecord]) -> BTreeMap<Category, ConfusionCounts> {
    let mut out: BTreeMap<Category, ConfusionCounts> = Category::ALL
        .into_iter()
        .map(|c| (c, ConfusionCounts::default()))
        .collect();
    for r in records.iter().filter(|r| !r.excluded) {
        for c in [Category::from(r.hand_category), Category::Overall] {
            out.get_mut(&c)
                .expect("all categories present")
                .record(r.truth, r.decision);
        }
    }
    out
}

fn summarize(
    fold: &FoldSpec,
    predictions: Vec<PredictionRecord>,
    train: Option<(&TrainingSet, &Forest)>,
) -> Result<FoldResult> {
    let confusion = confusion_by_category(&predictions);
    let mut metrics = BTreeMap::new();
    for (c, cm) in &confusion {
        if cm.total() > 0 {
            metrics.insert(*c, metric_set(cm)?);
        }
    }
    let summary = FoldSummary {
        fold: fold.clone(),
        train_instances: train.map_or(0, |(s, _)| s.rows.len()),
        train_positive: train.map_or(0, |(s, _)| s.positives()),
        test_instances: predictions.len(),
        missing_detections: predictions.iter().filter(|r| r.probability.is_none()).count(),
        excluded: predictions.iter().filter(|r| r.excluded).count(),
        degenerate_forest: train.and_then(|(_, f)| f.degenerate),
        confusion,
        metrics,
    };
    Ok(FoldResult { summary, predictions })
}

/// Resources shared by every fold of an evaluation.
#[derive(Clone, Copy, Debug)]
pub enum FoldInputs<'a> {
    Forest {
        table: &'a FeatureTable,
        config: &'a ForestConfig,
    },
    Windows(&'a BTreeMap<WindowKey, Vec<WindowDecision>>),
    Contacts,
}

/// Trains (when the source needs it) and tests one fold.
pub fn run_fold(corpus: &Corpus, fold: &FoldSpec, inputs: FoldInputs<'_>, exec: Execution) -> Result<FoldResult> {
    let mode = fold.mode;
    match inputs {
        FoldInputs::Forest { table, config } => {
            let (forest, set) = train_forest(corpus, table, &fold.train_tasks, mode, config, exec)
                .map_err(|e| Error::invalid(format!("fold {}: {e}", fold.test_participant)))?;
            let preds = predict_tasks(
                corpus,
                &fold.test_tasks,
                mode,
                Predictor::Forest { forest: &forest, table },
                exec,
            )?;
            summarize(fold, preds, Some((&set, &forest)))
        }
        FoldInputs::Windows(w) => {
            let preds = predict_tasks(corpus, &fold.test_tasks, mode, Predictor::Windows(w), exec)?;
            summarize(fold, preds, None)
        }
        FoldInputs::Contacts => {
            let preds = predict_tasks(corpus, &fold.test_tasks, mode, Predictor::Contacts, exec)?;
            summarize(fold, preds, None)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub folds: Vec<FoldResult>,
    pub cache: Option<CacheStats>,
}

/// Directory of the per-task feature cache for a run.
pub fn cache_dir(config: &RunConfig) -> Option<PathBuf> {
    config
        .output_dir
        .as_ref()
        .filter(|_| config.use_cache)
        .map(|d| d.join("feature_cache"))
}

/// Extracts (or loads from cache) the features of `tasks`.
pub fn features_for(
    corpus: &Corpus,
    tasks: &[String],
    config: &RunConfig,
    cache: Option<&Path>,
    exec: Execution,
) -> Result<(FeatureTable, CacheStats)> {
    let refs: Vec<&Task> = tasks.iter().map(|id| task(corpus, id)).collect::<Result<_>>()?;
    load_or_extract(corpus, &refs, &config.features, config.mode, cache, exec)
}

/// Leave-one-subject-out evaluation of one configuration. The corpus must
/// have its detections and annotations loaded.
pub fn evaluate(corpus: &Corpus, config: &RunConfig, exec: Execution) -> Result<Evaluation> {
    config.validate()?;
    let folds = make_folds(corpus, config.condition, config.mode)?;
    if folds.is_empty() {
        return Err(Error::invalid("corpus has no participant with Home tasks"));
    }
    for t in &corpus.tasks {
        task(corpus, &t.id)?;
    }

    let mut cache = None;
    let mut table = None;
    let mut windows = None;
    match config.model_source {
        ModelSource::Forest => {
            let mut needed: Vec<String> = folds
                .iter()
                .flat_map(|f| f.train_tasks.iter().chain(&f.test_tasks))
                .cloned()
                .collect();
            needed.sort();
            needed.dedup();
            let (t, stats) = features_for(corpus, &needed, config, cache_dir(config).as_deref(), exec)?;
            cache = Some(stats);
            table = Some(t);
        }
        ModelSource::ExternalWindows => {
            let path = config.windows.as_ref().expect("validated");
            let w = load_windows(path, config.mode)?;
            for (t, _) in w.keys() {
                if corpus.task(t).is_none() {
                    log::warn!("window predictions name unknown task {t}");
                }
            }
            windows = Some(w);
        }
        ModelSource::ExternalContacts => {}
    }

    let forest_cfg = config.forest_config();
    let inputs = match (&table, &windows) {
        (Some(t), _) => FoldInputs::Forest {
            table: t,
            config: &forest_cfg,
        },
        (_, Some(w)) => FoldInputs::Windows(w),
        _ => FoldInputs::Contacts,
    };
    let results: Vec<FoldResult> = exec
        .map(&folds, |f| run_fold(corpus, f, inputs, exec))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut macro_avg = BTreeMap::new();
    let mut micro = BTreeMap::new();
    let mut micro_confusion = BTreeMap::new();
    for c in Category::ALL {
        let sets: Vec<_> = results
            .iter()
            .filter_map(|r| r.summary.metrics.get(&c).copied())
            .collect();
        if !sets.is_empty() {
            macro_avg.insert(c, macro_average(&sets)?);
        }
        let cms: Vec<ConfusionCounts> = results.iter().map(|r| r.summary.confusion[&c]).collect();
        let pooled: ConfusionCounts = cms.iter().copied().sum();
        if pooled.total() > 0 {
            micro.insert(c, micro_average(&cms)?);
        }
        micro_confusion.insert(c, pooled);
    }

    let report = EvaluationReport {
        version: REPORT_VERSION,
        model: format!("{}_{}", config.model_source.as_str(), config.condition.as_str()),
        mode: config.mode,
        condition: config.condition,
        model_source: config.model_source,
        seed: config.seed,
        config_hash: config.hash(),
        config: config.reproducible(),
        feature_hash: table.as_ref().map(|_| config.features.hash()),
        layout_hash: table.as_ref().map(|t| t.layout.hash()),
        masks: table.as_ref().map(|t| t.masks),
        folds: results.iter().map(|r| r.summary.clone()).collect(),
        macro_avg,
        micro,
        micro_confusion,
    };
    Ok(Evaluation {
        report,
        folds: results,
        cache,
    })
}
