//! Library surface of the `ccfq` binary: the model-file format and the
//! subcommand implementations, shared with the integration tests.

pub mod commands;
pub mod document;
