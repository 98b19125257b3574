//! Library face of the command-line driver: the configuration schema
//! and model builders, exposed so integration tests can drive them
//! directly.

pub mod config;
