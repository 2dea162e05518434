//! Data loading, problem generation, metrics output and experiment drivers.

pub mod batching;
pub mod bench;
pub mod cli;
pub mod config;
pub mod generators;
pub mod metrics;
pub mod rate;
pub mod svmlight;

pub use config::RunConfig;
pub use metrics::{emit_metrics_csv, format_metrics_csv, read_metrics_csv};
pub use rate::{fit_rate, RateFit};
pub use svmlight::{load_svmlight, LabeledDataset};
