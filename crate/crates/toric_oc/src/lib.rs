//! Exact open/closed correspondence computations for toric Calabi-Yau
//! 3-orbifolds with an outer framed brane.

pub mod arith;
pub mod error;
pub mod maybe_parallel;

pub mod lattice;
pub mod poly;
pub mod stackyfan;
pub mod eqalg;
pub mod occonstruct;
pub mod seriesengine;
pub mod bmodel;
pub mod localization;
pub mod correspondence;
pub mod cli;

pub use error::{Error, Result};
