//! Unit-disk maximum independent set: exact and heuristic solvers, noisy
//! Rydberg annealer simulation, and break-even statistics.

// `!(x > 0.0)` rejects NaN on purpose; index loops walk parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod anneal;
pub mod cost;
pub mod error;
pub mod exact;
pub mod exec;
pub mod graph;
pub mod harness;
pub mod heuristic;
pub mod rydberg;
pub mod stats;
