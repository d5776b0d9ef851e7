//! Batch pipeline around `fakemix-core`: dataset ingestion, boundary label
//! generation, augmentation runs with provenance, evaluation, the adaptive
//! pyramid demo, synthetic fixtures and the oracle self-check.
//!
//! Every subcommand is a plain function here so it can be driven from tests;
//! `main.rs` only parses arguments.

pub mod aspp_demo;
pub mod augment;
pub mod config;
pub mod eval;
pub mod fsutil;
pub mod gen_boundary;
pub mod ingest;
pub mod manifest;
pub mod selfcheck;
pub mod stats;
pub mod synth;
