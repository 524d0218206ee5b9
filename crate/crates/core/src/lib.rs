//! Statistics kernel for testing whether a sample of categorical name
//! occurrences fits a reference population.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. Readers, writers
//! and the command-line front end live in the `namefit` crate.
//!
//! The null hypothesis is always "the test sample fits the reference
//! distribution". Nothing in this crate swaps that orientation.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod binning;
pub mod corpus;
pub mod distributions;
mod error;
pub mod inference;
pub mod intervals;
pub mod rare_names;

pub use error::{Error, Result};
