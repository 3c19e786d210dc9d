//! Neuro-fuzzy calibration of SEER-SEM effort multipliers.
//!
//! The crate converts COCOMO-rated project histories into SEER-SEM ratings,
//! trains one small ANFIS network per SEER parameter, and compares the
//! resulting estimator against an anchor-only baseline under k-fold
//! cross-validation.

// `!(x > 0.0)` is used deliberately throughout: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anfis;
pub mod bank;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod isotonic;
pub mod rating;
pub mod seer;
pub mod synthetic;

pub use anfis::{AnfisNet, BellMf, Consequent, Domain, TrainConfig};
pub use bank::{BankSettings, BankTrainOptions, Direction, NfBank, ParameterSpec};
pub use dataset::{Format, LoadOptions, Mode, ProjectRecord};
pub use error::{Error, Result};
pub use rating::{MappingTable, RatingLevel, Rosetta};
pub use seer::SeerConstants;
