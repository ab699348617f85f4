use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ClassifiedPr;
use crate::domain::{CohortCalendar, EngagementStatus, WeekIndex};

/// Per-week composition and responsiveness, bucketed by PR creation week.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeeklyMetrics {
    pub week: WeekIndex,
    pub n_success: u64,
    pub n_failed: u64,
    pub n_none: u64,
    pub n_actioned: u64,
}

impl WeeklyMetrics {
    pub fn empty(week: WeekIndex) -> Self {
        Self {
            week,
            n_success: 0,
            n_failed: 0,
            n_none: 0,
            n_actioned: 0,
        }
    }

    pub fn n_total(&self) -> u64 {
        self.n_success + self.n_failed + self.n_none
    }

    /// `None` when no PR in the week had a successful review.
    pub fn action_rate(&self) -> Option<f64> {
        ratio(self.n_actioned, self.n_success)
    }

    fn add(&mut self, pr: &ClassifiedPr) {
        match pr.status() {
            EngagementStatus::SuccessfulAiReview => self.n_success += 1,
            EngagementStatus::FailedAiAttempt => self.n_failed += 1,
            EngagementStatus::NoAiAttempt => self.n_none += 1,
        }
        if pr.actioned() {
            self.n_actioned += 1;
        }
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// One row per semester week, plus a trailing `OutsideSemester` row when any
/// PR was created outside the semester.
pub fn weekly_metrics(classified: &[ClassifiedPr], cal: &CohortCalendar) -> Vec<WeeklyMetrics> {
    let mut rows: Vec<WeeklyMetrics> = cal.weeks().map(WeeklyMetrics::empty).collect();
    let mut outside = WeeklyMetrics::empty(WeekIndex::OutsideSemester);
    for pr in classified {
        match cal.week_of(pr.pr().created_at) {
            WeekIndex::Week(n) => rows[(n - 1) as usize].add(pr),
            WeekIndex::OutsideSemester => outside.add(pr),
        }
    }
    if outside.n_total() > 0 {
        rows.push(outside);
    }
    rows
}

pub fn overall_action_rate(classified: &[ClassifiedPr]) -> Option<f64> {
    let success = classified
        .iter()
        .filter(|c| c.status() == EngagementStatus::SuccessfulAiReview)
        .count() as u64;
    let actioned = classified.iter().filter(|c| c.actioned()).count() as u64;
    ratio(actioned, success)
}

/// repo_id -> team label.
pub type TeamMap = BTreeMap<String, String>;

/// What makes a team count as "using" the tool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TeamsUsingRule {
    /// At least one PR where the bot was triggered, successfully or not.
    #[default]
    AnyAttempt,
    /// At least one PR with a successful review.
    SuccessfulReview,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SummaryError {
    #[error("repository {repo_id} (PR #{pr_number}) has no team assignment")]
    UnmappedPr { repo_id: String, pr_number: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub teams_total: u64,
    pub teams_using_ai: u64,
    pub prs_total: u64,
    pub prs_success: u64,
    pub prs_failed: u64,
    pub prs_none: u64,
    pub prs_actioned: u64,
    pub commits_total: u64,
    /// Includes bot comments; `bot_comments_total` is broken out so it can
    /// be subtracted.
    pub comments_total: u64,
    pub bot_comments_total: u64,
}

impl CohortSummary {
    pub fn action_rate_overall(&self) -> Option<f64> {
        ratio(self.prs_actioned, self.prs_success)
    }
}

pub fn summarize(
    classified: &[ClassifiedPr],
    teams: &TeamMap,
    rule: TeamsUsingRule,
) -> Result<CohortSummary, SummaryError> {
    let mut summary = CohortSummary {
        teams_total: teams.values().collect::<BTreeSet<_>>().len() as u64,
        ..CohortSummary::default()
    };
    let mut using = BTreeSet::new();
    for c in classified {
        let pr = c.pr();
        let team = teams
            .get(&pr.repo_id)
            .ok_or_else(|| SummaryError::UnmappedPr {
                repo_id: pr.repo_id.clone(),
                pr_number: pr.pr_number,
            })?;
        summary.prs_total += 1;
        match c.status() {
            EngagementStatus::SuccessfulAiReview => summary.prs_success += 1,
            EngagementStatus::FailedAiAttempt => summary.prs_failed += 1,
            EngagementStatus::NoAiAttempt => summary.prs_none += 1,
        }
        if c.actioned() {
            summary.prs_actioned += 1;
        }
        let counts_as_use = match rule {
            TeamsUsingRule::AnyAttempt => c.status().is_ai_attempt(),
            TeamsUsingRule::SuccessfulReview => c.status() == EngagementStatus::SuccessfulAiReview,
        };
        if counts_as_use {
            using.insert(team.as_str());
        }
        summary.commits_total += pr.commits().len() as u64;
        summary.comments_total += pr.comments().len() as u64;
        summary.bot_comments_total += pr.comments().iter().filter(|c| c.is_bot).count() as u64;
    }
    summary.teams_using_ai = using.len() as u64;
    Ok(summary)
}
