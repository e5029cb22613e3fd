//! Scaling-cocycle decomposition for classical pseudo-differential symbols
//! in a flat model: Wodzicki residue densities, Kontsevich-Vishik densities,
//! and the pole structure of holomorphic families.

pub mod acceptance;
pub mod cocycle;
pub mod diff;
pub mod error;
pub mod quadrature;
pub mod symbol;
pub mod trace;
pub mod value;
pub mod zeta;

pub use error::{Error, Result};
pub use value::{CocycleOrder, OrderClass, VectorValue};
