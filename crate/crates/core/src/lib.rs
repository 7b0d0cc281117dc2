//! Finite representations of Pareto fronts by iterative box decomposition of
//! the objective space.
//!
//! The driver in [`engine`] repeatedly picks the largest box of the remaining
//! search region, solves a Pascoletti-Serafini scalarization for its upper
//! corner and diagonal ([`scalarization`]), and shrinks the region around the
//! new point ([`search_region`]). It stops once every box has a minimal edge
//! length at most the target quality, which bounds the additive approximation
//! error of the representation ([`metrics`]).

pub mod geometry;
pub mod search_region;
pub mod scalarization;
pub mod problems;
pub mod engine;
pub mod metrics;
pub mod cli;
