//! Build WSML logical expressions from ontology-typed graphs.
pub mod engine;
pub mod model;
pub mod ontology;
pub mod persist;
pub mod script;
pub mod session;
pub mod store;
pub mod textgen;
pub mod wsml;

#[cfg(test)]
mod test_support;
