//! Statistical-constraint checking for tabular data.
//!
//! A statistical constraint (SC) asserts that two sets of columns are
//! independent (`indep(X; Y | Z)`) or dependent (`dep(X; Y | Z)`), optionally
//! conditioned on a third set. This crate provides everything needed to put
//! such constraints to work against a CSV dataset:
//!
//! - [`dataset`]: typed column storage with stable row identity
//! - [`constraints`]: the constraint DSL, canonical forms, and constraint sets
//! - [`inference`]: graphoid closures, implication queries, and consistency
//!   checking with conflict derivations
//! - [`hypotest`]: chi-square, G, and Kendall-tau hypothesis tests, including
//!   conditional (stratified) variants and violation verdicts
//! - [`ranktree`]: order-statistics counting used by the fast tau paths
//! - [`drilldown`]: greedy top-k identification of the records most
//!   responsible for a violation
//! - [`errorsim`]: seeded synthetic error injection with ground-truth masks
//! - [`evalharness`]: precision/recall scoring and benchmark sweeps

pub mod constraints;
pub mod dataset;
pub mod drilldown;
pub mod errorsim;
pub mod evalharness;
pub mod hypotest;
pub mod inference;
pub mod ranktree;
