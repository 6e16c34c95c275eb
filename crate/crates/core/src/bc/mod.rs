//! Behavioral cloning: a small MLP trained to imitate the expert scheduler.

pub mod adam;
pub mod eval;
pub mod loss;
pub mod model;
pub mod train;

pub use adam::{AdamMoments, AdamParams};
pub use eval::{evaluate, EvalReport};
pub use loss::{ce_loss, one_hot, softmax, CrossEntropy};
pub use model::{MlpModel, MlpPolicy, DEFAULT_HIDDEN};
pub use train::{score, train, write_history, Dataset, EpochStats, TrainConfig, Trained};
