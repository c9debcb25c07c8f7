//! Library surface of the CLI crate: the derivation-script layer, exposed
//! for integration tests and embedding.

pub mod script;
