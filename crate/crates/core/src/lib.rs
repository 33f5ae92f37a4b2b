//! Exact computation with abstract Cuntz semigroups: finite Cu-, W- and
//! Q-structures, their completions, limits and colimits, products and
//! ultraproducts of countable families, scales, and property checkers.

pub mod colimits;
pub mod completions;
pub mod corpus;
pub mod described;
pub mod dsl;
pub mod products;
pub mod error;
pub mod ordered;
pub mod relation;
pub mod scales;
pub mod tri;
pub mod ultra;

pub use error::{Error, Result};
