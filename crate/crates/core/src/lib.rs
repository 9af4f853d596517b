//! Learning the best parameter of parametrized algorithm families from
//! samples or streams of problem instances.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod erm;
pub mod error;
pub mod families;
pub mod instances;
pub mod online;
pub mod piecewise;

pub use erm::{build_dual, erm_select, DualFunction, Family};
pub use error::{Error, Location, Result};
pub use instances::{Instance, RandomTape, TapedInstance};
pub use online::{run_online, DispersionReport, OnlineConfig, OnlineState};
pub use piecewise::{merge_sum, sum_balanced, Argmax, PiecewiseConstant};
