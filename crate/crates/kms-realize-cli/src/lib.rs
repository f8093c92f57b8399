//! Pipeline, report emission and replay verification for `kms-realize`.
//!
//! A run reads a JSON config, computes the spectrum and its certificates, and
//! writes a directory of deterministic artifacts plus a `manifest.json` that
//! `verify` can replay.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;
