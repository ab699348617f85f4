//! The review bot: receives pull-request triggers, runs the guardrails,
//! asks an LLM provider for a checklist review of each changed file and
//! posts the results back to the code host.

pub mod config;
pub mod host;
pub mod ledger;
pub mod live_ingest;
pub mod provider;
pub mod runner;
pub mod webhook;

pub use config::BotConfig;
pub use runner::{ReviewOutcome, ReviewResult, ReviewService, RunnerError, TriggerEvent};
