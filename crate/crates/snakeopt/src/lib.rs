//! Population-based optimization library built around a multi-strategy
//! improved snake optimizer, classical rival algorithms, a shifted/rotated
//! benchmark suite, nonparametric statistics, and an experiment harness.

pub mod benchfns;
pub mod core;
pub mod gps;
pub mod harness;
pub mod rivals;
pub mod snake;
pub mod stats;
pub mod tunedemo;

pub use crate::core::{
    clamp, evaluate, random_init, CoreError, Evaluator, Individual, Objective, Population,
    RngStream, RunResult, SearchSpace,
};
