// SPDX-License-Identifier: MIT
//! Exact f̄ / f̃ metrics, lazy words, odometer and circular construction
//! sequences, Feldman patterns, the shifting and cycling block mechanisms, and
//! a harness of desk-scale checks for the inequalities they are built on.
#![forbid(unsafe_code)]

pub mod circular;
pub mod constructions;
pub mod error;
pub mod feldman;
pub mod harness;
pub mod metric;
pub mod rational;
pub mod words;

pub use error::{Error, Result};
