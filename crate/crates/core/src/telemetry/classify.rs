use regex::Regex;
use serde::Serialize;

use crate::comment::SUCCESS_HEADER;
use crate::domain::{
    BotLogins, CohortCalendar, EngagementStatus, Instant, PullRequestRecord, WeekIndex,
};

/// Bot comment bodies that mean "the bot ran and failed". The first matches
/// this project's own failure comments; the rest cover error text seen from
/// other review actions.
pub const DEFAULT_FAILURE_SIGNATURES: &[&str] = &[
    r"(?m)^LLM review could not run",
    r"(?i)\b(missing|invalid|incorrect|no)\b.{0,20}\bapi[ _-]?key\b",
    r"(?i)\b401\b.{0,40}\bunauthori[sz]ed\b",
    r"(?i)\b(exceed(s|ed)?|over)\b.{0,30}\b(file|size|token|line)s? limit\b",
];

#[derive(Debug, Clone)]
pub struct ClassificationRules {
    pub bot_logins: BotLogins,
    pub success_header: String,
    pub failure_signatures: Vec<Regex>,
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self {
            bot_logins: BotLogins::default(),
            success_header: SUCCESS_HEADER.to_string(),
            failure_signatures: DEFAULT_FAILURE_SIGNATURES
                .iter()
                .map(|p| Regex::new(p).expect("default signature compiles"))
                .collect(),
        }
    }
}

impl ClassificationRules {
    /// Adds extra failure patterns on top of the defaults.
    pub fn with_extra_signatures<I, S>(mut self, patterns: I) -> Result<Self, regex::Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        for p in patterns {
            self.failure_signatures.push(Regex::new(p.as_ref())?);
        }
        Ok(self)
    }

    pub fn is_success_body(&self, body: &str) -> bool {
        body.contains(&self.success_header)
    }

    pub fn is_failure_body(&self, body: &str) -> bool {
        self.failure_signatures.iter().any(|re| re.is_match(body))
    }
}

/// A pull request with its engagement status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedPr {
    pr: PullRequestRecord,
    status: EngagementStatus,
    first_success_at: Option<Instant>,
    actioned: bool,
}

impl ClassifiedPr {
    pub fn pr(&self) -> &PullRequestRecord {
        &self.pr
    }

    pub fn status(&self) -> EngagementStatus {
        self.status
    }

    pub fn first_success_at(&self) -> Option<Instant> {
        self.first_success_at
    }

    pub fn actioned(&self) -> bool {
        self.actioned
    }

    pub fn to_row(&self, cal: &CohortCalendar) -> ClassifiedRow {
        ClassifiedRow {
            repo_id: self.pr.repo_id.clone(),
            pr_number: self.pr.pr_number,
            created_at: self.pr.created_at,
            week: cal.week_of(self.pr.created_at),
            status: self.status,
            first_success_at: self.first_success_at,
            actioned: self.actioned,
            comments: self.pr.comments().len(),
            bot_comments: self.pr.comments().iter().filter(|c| c.is_bot).count(),
            commits: self.pr.commits().len(),
        }
    }
}

/// Flat, serializable view of a [`ClassifiedPr`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassifiedRow {
    pub repo_id: String,
    pub pr_number: u64,
    pub created_at: Instant,
    pub week: WeekIndex,
    pub status: EngagementStatus,
    pub first_success_at: Option<Instant>,
    pub actioned: bool,
    pub comments: usize,
    pub bot_comments: usize,
    pub commits: usize,
}

/// Success wins over failure: a PR with any header-bearing bot comment is a
/// successful review even if other triggers on it failed.
pub fn classify(pr: PullRequestRecord, rules: &ClassificationRules) -> ClassifiedPr {
    let bot_comments = || pr.comments().iter().filter(|c| c.is_bot);

    let first_success_at = bot_comments()
        .filter(|c| rules.is_success_body(&c.body))
        .map(|c| c.created_at)
        .min();

    let status = if first_success_at.is_some() {
        EngagementStatus::SuccessfulAiReview
    } else if bot_comments().any(|c| rules.is_failure_body(&c.body)) {
        EngagementStatus::FailedAiAttempt
    } else {
        EngagementStatus::NoAiAttempt
    };

    let actioned =
        first_success_at.is_some_and(|t| pr.commits().iter().any(|c| c.committed_at > t));

    ClassifiedPr {
        pr,
        status,
        first_success_at,
        actioned,
    }
}

pub fn classify_all(
    prs: impl IntoIterator<Item = PullRequestRecord>,
    rules: &ClassificationRules,
) -> Vec<ClassifiedPr> {
    prs.into_iter().map(|pr| classify(pr, rules)).collect()
}
