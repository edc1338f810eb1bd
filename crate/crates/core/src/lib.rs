//! Coordinate term mining from a single seed term.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`lingex`] bootstraps a few high-precision candidates from search
//!    snippets using function-word patterns (`X比seed`, `seed比X`, ...).
//! 2. [`expand`] issues pairwise queries, learns page-local wrappers
//!    ([`wrapper`]) over the parsed pages ([`dom`]) and extracts web lists.
//! 3. [`concept`] clusters web lists by content and context similarity and
//!    drops clusters that are unrelated to the seed or poorly supported.
//! 4. [`rank`] scores the terms of each concept with a random walk with
//!    restart on a term / list / affix graph.
//!
//! [`eval`] implements the evaluation metrics and [`pipeline`] wires the
//! stages together. All experiments run against a [`corpus::FixtureCorpus`]
//! so that results are reproducible offline.

pub mod cli;
pub mod concept;
pub mod corpus;
pub mod dom;
mod error;
pub mod eval;
pub mod expand;
pub mod lingex;
pub mod pipeline;
pub mod rank;
pub mod text;
pub mod wrapper;

pub use error::{Error, Result};
