//! Leave-one-subject-out evaluation: fold construction, per-fold training
//! and testing, aggregation and reports.

mod agreement;
mod folds;
mod report;
mod run;

pub use agreement::rater_agreement;
pub use folds::{make_folds, verify_fold, FoldSpec};
pub use report::{
    compare, format_mean_sd, predictions_to_jsonl, write_outputs, Category, EvaluationReport, FoldResult, FoldSummary,
    PredictionRecord, REPORT_VERSION,
};
pub use run::{
    cache_dir, confusion_by_category, evaluate, features_for, predict_tasks, run_fold, train_forest, training_set,
    Evaluation, FoldInputs, Predictor, TrainingSet,
};
