//! Exact computations for integer sequences that converge to zero in
//! group topologies on `ℤ` and on the free abelian group of countable rank.

pub mod amalgam;
pub mod error;
pub mod experiment;
pub mod freeab;
pub mod num;
pub mod report;
pub mod ringseq;
pub mod seq;
pub mod surd;
pub mod topology;
pub mod tracker;
pub mod zbase;

pub use error::{Error, Result};
