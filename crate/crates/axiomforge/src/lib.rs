//! Command-line front end and HTTP session service for axiomforge.
pub mod server;
