//! Command implementations and the HTTP server for the `fdl` binary.

pub mod server;
