//! Categorical key agreement.
//!
//! Two-party sessions over any [`CategoryModel`](category::CategoryModel),
//! their matrix-enriched variant, an `n`-party chain protocol, the free
//! enrichment functor, and three classical platforms expressed as category
//! models. A simulated broker with a passive tap and exhaustive-search
//! attacks at toy sizes round it out.

pub mod arith;
pub mod category;
pub mod enrichment;
pub mod error;
pub mod instantiations;
pub mod laws;
pub mod matrix;
pub mod netsim;
pub mod protocols;
pub mod registry;

pub use category::{CategoryModel, HomAddition, Morphism, ObjectRef};
pub use error::{Error, Result};
