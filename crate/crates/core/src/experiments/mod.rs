//! Config-driven experiment runners and manifests.

pub mod config;
pub mod csvio;
pub mod manifest;
pub mod runs;
