//! Cyclically averaged spin-chain observables: γ-sequences on the N-site chain
//! `M_κ(ℂ)^{⊗N}`, their classes, Poisson bracket and quantization maps, with a
//! numerical harness for the large-N behaviour.

pub mod error;
pub mod harness;
pub mod models;
pub mod norm;
pub mod poisson;
pub mod site;
pub mod strings;
pub mod symbolic;
pub mod tensor_ops;
pub mod tolerance;

pub use error::{Error, Result};
