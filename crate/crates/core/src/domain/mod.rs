//! Shared domain types. Everything else in the crate builds on these.

mod calendar;
mod instant;
mod records;

pub use calendar::{CalendarError, CohortCalendar, WeekIndex};
pub use instant::{Instant, InstantParseError};
pub use records::{
    BotLogins, CommentRecord, CommitRecord, EngagementStatus, PullRequestRecord, RecordError,
    DEFAULT_BOT_LOGINS,
};
