//! Evaluation: accuracy measures, the Mann-Whitney test, cross-validated
//! comparison, and plot data.

pub mod cv;
pub mod mann_whitney;
pub mod metrics;
pub mod plots;

pub use cv::{
    cross_validate, BaselineBuilder, Builder, CandidateBuilder, ComparisonReport, CvOptions, Estimator, ResidualKind,
};
pub use mann_whitney::{exact_p, mann_whitney_u, normal_p, MannWhitney, PMethod};
pub use metrics::{mdmre, mmre, mre, mse, pred, Improvement, MetricSet};
pub use plots::{boxplot, emit_plot_data, interval, BoxRecord, IntervalRecord};
