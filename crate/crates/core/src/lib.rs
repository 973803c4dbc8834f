//! Robust model compression through predicate depth.
//!
//! A large model is read as a belief `p(y | x)` over a finite sample. The
//! median search ([`memo`]) finds the compact hypothesis whose minimum
//! per-point belief is largest, by binary search over the finite set of
//! oracle values with a constraint-consistent learner as the feasibility
//! test. [`crembo`] wraps it with trimming and validation-based selection.
//!
//! The crate is `no_std` (with `alloc`); file formats, CSV ingestion and the
//! command line live in the `crembo` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod crembo;
pub mod data;
pub mod depth;
pub mod error;
pub mod eval;
pub mod learners;
pub mod memo;
pub mod model;
pub mod oracle;
pub mod seed;
mod util;

pub use crate::crembo::{compress, crembo, BigModel, Compression, CremboConfig, CremboResult, EpsilonTrace, OracleProvenance};
pub use crate::data::{kfold, split, ClassId, ConstraintSample, Dataset, LabelSet, SplitSpec};
pub use crate::depth::{DepthProfile, DepthValue};
pub use crate::error::{Error, Result};
pub use crate::learners::{ConsistentLearner, Learned, LearnerConfig};
pub use crate::memo::{memo, memo_trimmed, MemoResult};
pub use crate::model::{Classifier, ForestModel, Model, Node, TreeModel};
pub use crate::oracle::{OracleSource, TableOracle, ThresholdSet};
