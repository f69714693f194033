//! Exact truncated models of δ-rings, Higgs modules, stratifications and
//! Čech–Alexander complexes over `Z/p^N`.
//!
//! Everything is finite: algebras are monomial truncations, complexes are
//! bounded complexes of finite free modules, and cohomology is reported as
//! elementary divisors over `Z/p^N`.

pub mod algebra;
pub mod cech;
pub mod coefficients;
pub mod complexes;
pub mod corpus;
pub mod delta;
pub mod duality;
mod error;
pub mod higgs;
pub mod par;
pub mod poly;
pub mod stratification;

pub use error::{Error, Result};
