//! Regression metrics and the pairwise "who is heavier" comparison task.

mod metrics;
mod pairs;
mod questionnaire;
mod report;

pub use metrics::{check_trained_on, evaluate_regression, pearson, RegressionMetrics};
pub use pairs::{
    answer_pairs, bucket_of, generate_pairs, CellAccuracy, ComparisonPair, GenderCategory,
    PairAccuracy, Truth, N_BUCKETS,
};
pub use questionnaire::{export_questionnaire, key_path_for, score_human_answers};
pub use report::EvalReport;
