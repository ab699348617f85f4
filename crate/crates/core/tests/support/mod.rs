//! Test-only reference implementations. Nothing here calls the classifier,
//! the metrics code or `CohortCalendar::week_of`.
#![allow(dead_code)]

use chrono::{NaiveTime, TimeZone, Utc};
use rand::Rng;
use regex::Regex;
use reviewloop_core::domain::{BotLogins, CommentRecord, CommitRecord};
use reviewloop_core::{CohortCalendar, EngagementStatus, Instant, PullRequestRecord};

pub struct Oracle {
    pub bot_logins: Vec<String>,
    pub header: String,
    pub failure: Vec<Regex>,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            bot_logins: vec!["cr-gpt[bot]".into(), "github-actions[bot]".into()],
            header: "ChatGPT review for ".into(),
            failure: reviewloop_core::telemetry::DEFAULT_FAILURE_SIGNATURES
                .iter()
                .map(|p| Regex::new(p).unwrap())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleVerdict {
    pub status: EngagementStatus,
    pub first_success_at: Option<Instant>,
    pub actioned: bool,
}

impl Oracle {
    fn is_bot(&self, login: &str) -> bool {
        self.bot_logins.iter().any(|b| b == login)
    }

    pub fn classify(&self, pr: &PullRequestRecord) -> OracleVerdict {
        let mut first: Option<Instant> = None;
        let mut failed = false;
        for c in pr.comments() {
            if !self.is_bot(&c.author_login) {
                continue;
            }
            if c.body.contains(&self.header) {
                first = Some(match first {
                    Some(f) if f <= c.created_at => f,
                    _ => c.created_at,
                });
            } else if self.failure.iter().any(|re| re.is_match(&c.body)) {
                failed = true;
            }
        }
        // Every (PR, commit) pair is inspected.
        let mut actioned = false;
        if let Some(f) = first {
            for m in pr.commits() {
                if m.committed_at.unix_seconds() > f.unix_seconds() {
                    actioned = true;
                }
            }
        }
        let status = match (first, failed) {
            (Some(_), _) => EngagementStatus::SuccessfulAiReview,
            (None, true) => EngagementStatus::FailedAiAttempt,
            (None, false) => EngagementStatus::NoAiAttempt,
        };
        OracleVerdict {
            status,
            first_success_at: first,
            actioned,
        }
    }
}

/// UTC instants of local midnight on each week-opening Monday, weeks 1..=n+1.
pub fn monday_boundaries(cal: &CohortCalendar) -> Vec<Instant> {
    let tz = cal.timezone();
    (0..=cal.n_weeks())
        .map(|k| {
            let day = cal.week1_monday() + chrono::Days::new(7 * k as u64);
            let local = day.and_time(NaiveTime::MIN);
            let dt = tz
                .from_local_datetime(&local)
                .earliest()
                .expect("midnight exists");
            Instant::from_utc(dt.with_timezone(&Utc))
        })
        .collect()
}

/// Week number from the boundary table, `None` outside the semester.
pub fn oracle_week(bounds: &[Instant], t: Instant) -> Option<u32> {
    let mut found = None;
    for k in 0..bounds.len() - 1 {
        if bounds[k] <= t && t < bounds[k + 1] {
            assert!(found.is_none(), "overlapping boundary windows");
            found = Some(k as u32 + 1);
        }
    }
    found
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleWeek {
    pub success: u64,
    pub failed: u64,
    pub none: u64,
    pub actioned: u64,
}

/// Index 0 = outside the semester, 1..=n = weeks.
pub fn oracle_weekly(
    oracle: &Oracle,
    prs: &[PullRequestRecord],
    cal: &CohortCalendar,
) -> Vec<OracleWeek> {
    let bounds = monday_boundaries(cal);
    let mut rows = vec![OracleWeek::default(); cal.n_weeks() as usize + 1];
    for (slot, row) in rows.iter_mut().enumerate() {
        for pr in prs {
            let w = oracle_week(&bounds, pr.created_at).unwrap_or(0) as usize;
            if w != slot {
                continue;
            }
            let v = oracle.classify(pr);
            match v.status {
                EngagementStatus::SuccessfulAiReview => row.success += 1,
                EngagementStatus::FailedAiAttempt => row.failed += 1,
                EngagementStatus::NoAiAttempt => row.none += 1,
            }
            if v.actioned {
                row.actioned += 1;
            }
        }
    }
    rows
}

const BODIES: &[&str] = &[
    "ChatGPT review for src/a.js:\n\n1. Documentation Defects: fine",
    "LLM review could not run: this pull request did not pass the pre-flight checks.",
    "Error: missing API key",
    "Deployment preview is ready.",
    "LGTM",
    "ChatGPT review for",
    "see ChatGPT review for src/b.py: ok",
];

const LOGINS: &[&str] = &[
    "cr-gpt[bot]",
    "github-actions[bot]",
    "alice",
    "bob",
    "dependabot[bot]",
];

/// A random cohort around `cal`'s semester, with deliberate timestamp ties.
pub fn random_prs(
    rng: &mut impl Rng,
    cal: &CohortCalendar,
    max_prs: usize,
    max_commits: usize,
) -> Vec<PullRequestRecord> {
    let bots = BotLogins::default();
    let bounds = monday_boundaries(cal);
    let start = bounds[0].unix_seconds() - 3 * 86_400;
    let end = bounds[bounds.len() - 1].unix_seconds() + 3 * 86_400;
    let n = rng.gen_range(0..=max_prs);
    (0..n)
        .map(|i| {
            let created = Instant::from_unix(rng.gen_range(start..end)).unwrap();
            let mut anchors = vec![created];
            let comments: Vec<CommentRecord> = (0..rng.gen_range(0..6))
                .map(|_| {
                    let t = anchors[rng.gen_range(0..anchors.len())]
                        .plus_seconds(rng.gen_range(-600..7200));
                    anchors.push(t);
                    CommentRecord::new(
                        LOGINS[rng.gen_range(0..LOGINS.len())],
                        BODIES[rng.gen_range(0..BODIES.len())],
                        t,
                        &bots,
                    )
                })
                .collect();
            let commits: Vec<CommitRecord> = (0..rng.gen_range(0..=max_commits))
                .map(|k| {
                    let anchor = anchors[rng.gen_range(0..anchors.len())];
                    let t = match rng.gen_range(0..3) {
                        0 => anchor,
                        1 => anchor.plus_seconds(rng.gen_range(-3..=3)),
                        _ => anchor.plus_seconds(rng.gen_range(-86_400..86_400)),
                    };
                    CommitRecord::new(format!("{:07x}{k:04x}", i), "m", t).unwrap()
                })
                .collect();
            PullRequestRecord::new(
                format!("org/r{}", i % 7),
                i as u64 + 1,
                created,
                "dev",
                comments,
                commits,
            )
            .unwrap()
        })
        .collect()
}
