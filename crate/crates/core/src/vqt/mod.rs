//! Hybrid ansatz, free-energy cost, training and scaling studies.

pub mod ansatz;
pub mod cost;
pub mod optim;
pub mod studies;
pub mod train;

pub use ansatz::*;
pub use cost::{cost, CostBreakdown, CostFunction, EntropyMethod};
pub use optim::{OptimizerKind, OptimizerOptions, OptimizerOutcome};
pub use studies::{depth_dependence_study, gradient_variance_study, DepthRow, GradientVarianceRow, GradientVarianceTable};
pub use train::{train, train_with_target, ParameterMap, TrainConfig, TrainingResult};
