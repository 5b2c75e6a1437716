//! Exact-arithmetic tools for symmetrized subsets of sequence spaces: the
//! `δ_N` indexes, c0-sequence extraction, ε-trees and series tail bounds.

pub mod cli;
pub mod error;
pub mod extraction;
pub mod indexes;
pub mod lp;
pub mod series;
pub mod sets;
pub mod vectors;

pub use error::{Error, Result};
