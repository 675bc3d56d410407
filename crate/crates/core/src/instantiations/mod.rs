//! Concrete platform models: Diffie-Hellman, conjugation (Ko-Lee) and matrix power functions.

pub mod dh;
pub mod kolee;
pub mod mpf;

pub use dh::{dh_category, dh_chain, DhCategory, DhParams};
pub use kolee::{kolee_category, ConjugationParams, GroupPair, KoLeeCategory};
pub use mpf::{mpf_model, MpfModel, MpfParams};
