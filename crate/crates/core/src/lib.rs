//! Reference-less evaluation of grammatical error correction outputs.
//!
//! The pipeline reads a token-labelled corpus, obtains corrections from chat
//! models (live or replayed), scores every output on nine metrics, and ranks
//! models with a two-step Borda count.

pub mod config;
pub mod corpus;
pub mod error;
pub mod gateway;
pub mod grammar;
pub mod language;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
pub mod ranking;
pub mod report;

pub use error::{Error, Result};
pub use language::Language;
