//! Multi-label rule learning through rule generation and subset selection.
//!
//! The pipeline has three stages: candidate rules are extracted from
//! randomized decision-tree ensembles trained per label and depth cap,
//! a separate-and-conquer loop selects a subset of them under a
//! configurable heuristic (precision, recall, F-measure, m-estimate, WRA),
//! and an optional threshold filters the selected rules by their score on
//! the full training data. The resulting theory predicts each label as a
//! DNF over its rules and is evaluated with micro-averaged and
//! instance-wise multi-label measures.
//!
//! The `experiment` module reproduces the surrounding protocols:
//! cross-validated parameter grids over (m, retention), average-rank
//! matrices across datasets, and nested tuning of the two parameters.
//!
//! With the default `parallel` feature, forests, grid cells, and folds run
//! on a rayon pool; without it everything runs sequentially. Results are
//! identical either way because every stochastic task draws from a seed
//! derived from its coordinates, never from scheduling order.

pub mod arff;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod experiment;
pub mod forest;
pub mod heuristics;
pub mod label_header;
pub mod report;
pub mod rng;
pub mod rules;
pub mod seco;
pub mod theory;
pub mod threshold;

pub use dataset::MultiLabelDataset;
pub use error::Error;
pub use heuristics::{ConfusionMatrix, HeuristicSpec};
pub use rules::{Condition, Rule};
pub use theory::Theory;
