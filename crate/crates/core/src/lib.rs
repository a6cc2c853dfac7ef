//! Numerical toolkit for multilinear pseudodifferential operators on periodic
//! grids: symbol classes, dyadic decompositions, symbol and function norms,
//! maximal functions, and exponent-region bookkeeping.

pub mod bumps;
pub mod error;
pub mod grid;
pub mod harness;
pub mod maximal;
pub mod norms;
pub mod operator;
pub mod regions;
pub mod symbols;

pub use error::{Error, Result};
