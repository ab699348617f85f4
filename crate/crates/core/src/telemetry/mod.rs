//! Engagement telemetry: ingest repository records, classify each pull
//! request, and aggregate per semester week.

mod classify;
mod ingest;
mod metrics;

pub use classify::{
    classify, classify_all, ClassificationRules, ClassifiedPr, ClassifiedRow,
    DEFAULT_FAILURE_SIGNATURES,
};
pub use ingest::read_dir;
pub use ingest::{
    ingest_dir, load_team_map, write_dir, CommentRow, CommitRow, Dataset, IngestError, IngestIssue,
    IngestReport, PrRow, RawRecords, RecordCounts, COMMENTS_FILE, COMMITS_FILE, PRS_FILE,
    TEAMS_FILE,
};
pub use metrics::{
    overall_action_rate, summarize, weekly_metrics, CohortSummary, SummaryError, TeamMap,
    TeamsUsingRule, WeeklyMetrics,
};
