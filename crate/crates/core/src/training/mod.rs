//! Loss, optimizer, training loop, evaluation metrics and report comparison.

mod evaluate;
mod metrics;
mod report;
mod train;

pub use evaluate::{evaluate, Classifier, MetricsReport};
pub use metrics::{accuracy, argmax_label, confusion_matrix, cross_entropy_loss, f1, mae};
pub use report::{compare_reports, Comparison, Delta};
pub use train::{
    example_gradients, sgd_step, train, train_model, Optimizer, Sgd, TrainConfig, TrainOutcome,
};
