//! The fixed point forest on permutations and its local limit.
//!
//! Moving the first card of a deck `π` to the position named by its value
//! sends every permutation towards a base (`π(1) = 1`); the resulting graph on
//! `S_n` is a forest. This crate builds that forest, walks shortest and
//! longest paths to leaves, constructs the Poisson point process tree that
//! the forest converges to locally, and provides the Monte Carlo and exact
//! enumeration machinery used to compare the two.

pub mod error;
pub mod forest;
pub mod limit;
pub mod paths;
pub mod permutation;
pub mod report;
pub mod rng;
pub mod shape;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use forest::{
    brute_farthest_leaf, brute_nearest_leaf, build_forest, local_r_ball, ForestGraph, LabeledBall,
};
pub use limit::{PointProcessFamily, SpineInput};
pub use paths::{bumped_set, longest_path, shortest_path, BumpPath, BumpedSet};
pub use permutation::{Permutation, SeparationWord};
pub use report::{Comparison, StatisticReport};
pub use shape::{canonical_shape, RootedTree, RootedTreeShape};
pub use stats::{EmpiricalDistribution, IndicatorLaw, McConfig};

/// Crate version, embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
