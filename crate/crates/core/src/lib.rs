//! Entropy balance decompositions of partitioned discrete distributions.
//!
//! The crate computes plug-in Shannon measures over sparse joint
//! distributions, splits the uniform reference entropy of a partitioned
//! joint into divergence from uniformity, transmitted (binding) information
//! and variation of information, and renders the normalized results as
//! entropy triangles. It also carries the tooling needed to assess feature
//! transformations (log, PCA, FastICA) by the information they transfer.

pub mod balance;
pub mod cli;
pub mod dataset;
pub mod discretize;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod pipeline;
pub mod plot;
pub mod transforms;

pub use balance::{
    balance_report, cbet_from_confusion, channel_balance, classify_region, normalize_aggregate,
    normalize_split, split_balance, BalanceReport, ChannelDecomposition, CoordKind, Region, Side,
    SplitDecomposition, TriangleCoord,
};
pub use entropy::{Direction, JointDistribution, Partition};
pub use error::{Error, Result};
