//! File formats, command-line interface, and HTTP service around
//! [`rolescore_core`].
//!
//! - [`results`]: `#meta`-headed JSONL run files
//! - [`profiles`]: YAML profile documents and the profile registry
//! - [`caps`]: JSON caps overrides
//! - [`views`]: JSON shapes shared by the CLI and the service
//! - [`render`]: Markdown tables
//! - [`service`]: the what-if scoring API
//! - [`cli`]: the `rolescore` command

pub mod caps;
pub mod cli;
pub mod profiles;
pub mod render;
pub mod results;
pub mod service;
pub mod views;

pub use rolescore_core as core;
