//! Decision-tree induction with stream-parallel tree growth.
//!
//! The crate trains C4.5-style entropy/information-gain decision trees over a
//! columnar in-memory training set. Tree growth can run sequentially
//! (breadth-first) or as a stream of node/attribute tasks flowing through a
//! farm-with-feedback runtime built on bounded SPSC queues.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod parallel;
pub mod runtime;
pub mod synth;
pub mod tree;

pub use dataset::{AttributeKind, AttributeSchema, CaseSubset, TrainingSet};
pub use error::{Error, Result};
pub use parallel::{build_att_test, build_parallel, BuildParams, CostModel, Strategy};
pub use runtime::{FarmConfig, SchedulerKind};
pub use tree::{build_sequential, DecisionTree, GrowthParams};
