//! Core of the reviewloop code-review bot.
//!
//! * [`domain`] holds the shared record types and the semester calendar.
//! * [`guardrails`] runs pre-flight checks on a review trigger.
//! * [`prompt`] renders the checklist review prompt.
//! * [`telemetry`] ingests PR/comment/commit records and computes engagement metrics.
//! * [`report`] writes the metric tables and plot series.
//! * [`fixtures`] builds the synthetic cohort datasets and the PR #129 trace.

pub mod comment;
pub mod domain;
pub mod fixtures;
pub mod guardrails;
pub mod prompt;
pub mod report;
pub mod telemetry;

pub use domain::{
    CalendarError, CohortCalendar, CommentRecord, CommitRecord, EngagementStatus, Instant,
    PullRequestRecord, WeekIndex,
};
