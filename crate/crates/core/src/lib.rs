#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod error;
pub mod evolve;
pub mod gap;
pub mod harness;
pub mod interp;
pub mod operators;
pub mod quad;
pub mod schedule;
pub mod variational;

pub use error::{Error, Result};
