//! Least-squares regression deviations and self-normalized sums.

mod regression;
mod selfnorm;

pub use regression::{
    least_squares, regression_ci, regression_coverage, regression_envelope, regression_epsilons,
    regression_model_epsilons, regression_reduction_check, regression_report, simulate_regression_data,
    ConfidenceInterval, CoverageReport, ReductionCheck, RegressionData, RegressionEnvelope, RegressionReport,
};
pub use selfnorm::{
    self_norm_envelope, self_norm_epsilon, self_norm_report, self_norm_statistic, wang_jing_bound, wang_jing_inputs,
    SelfNormReport,
};
