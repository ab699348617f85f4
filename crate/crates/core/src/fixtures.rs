//! Reference datasets.
//!
//! [`pr129`] is the single-PR trace used by the `demo` command: four
//! file-scoped bot reviews followed by a burst of ten commits.
//!
//! [`CohortFixture`] generates a synthetic cohort whose aggregate counts are
//! fixed in advance (teams, PRs per status and week, actioned PRs, commits,
//! comments). The raw data behind the published cohort totals is not
//! available, so these stand in for it.

use chrono::{Duration, NaiveDateTime, NaiveTime, TimeZone};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::comment::review_comment_body;
use crate::domain::{
    BotLogins, CohortCalendar, CommentRecord, CommitRecord, Instant, PullRequestRecord,
};
use crate::guardrails::{
    check_credentials, check_files, render_rejection_comment, FileChange, GuardrailPolicy,
};
use crate::telemetry::{CommentRow, CommitRow, PrRow, RawRecords, TeamMap};

pub const PR129_REPO: &str = "cohort-2024/team-aa";
pub const PR129_NUMBER: u64 = 129;
pub const PR129_BOT: &str = "github-actions[bot]";

/// Files reviewed on PR #129, in the order their comments were posted.
pub const PR129_FILES: [&str; 4] = [
    "frontend/src/components/Form.js",
    "frontend/src/pages/ManuscriptSubmission.js",
    "frontend/src/pages/ThirdPageSubmission.js",
    "backend/src/services/submission.service.js",
];

pub const PR129_CREATED_AT: &str = "2024-05-14T06:52:10Z";
pub const PR129_REVIEW_TIMES: [&str; 4] = [
    "2024-05-14T07:08:35Z",
    "2024-05-14T07:08:36Z",
    "2024-05-14T07:08:36Z",
    "2024-05-14T07:08:37Z",
];

pub const PR129_COMMITS: [(&str, &str, &str); 10] = [
    (
        "3f9a1c0e7b21",
        "Refactor form components and tidy styling",
        "2024-05-14T07:14:21Z",
    ),
    (
        "8c2d44b9a0f3",
        "Attach auth token to outgoing requests",
        "2024-05-14T07:20:07Z",
    ),
    (
        "b71e0a5d3c88",
        "Validate login email domain",
        "2024-05-14T07:24:38Z",
    ),
    (
        "0d5f6e7a9b12",
        "Simplify form state handling in utils",
        "2024-05-14T07:28:26Z",
    ),
    (
        "e4a3b2c1d0f9",
        "Resolve ESLint errors and warnings",
        "2024-05-14T07:31:57Z",
    ),
    (
        "5a6b7c8d9e0f",
        "Fix submit hook edge cases",
        "2024-05-14T07:34:44Z",
    ),
    (
        "9f8e7d6c5b4a",
        "Show message when sign-in fails",
        "2024-05-14T07:37:03Z",
    ),
    (
        "1a2b3c4d5e6f",
        "Wire up refresh token flow",
        "2024-05-14T07:39:11Z",
    ),
    (
        "c0ffee123456",
        "Handle form errors, housekeeping",
        "2024-05-14T07:42:33Z",
    ),
    (
        "deadbeef7890",
        "fix(lint): address remaining issues",
        "2024-05-14T07:47:11Z",
    ),
];

fn at(text: &str) -> Instant {
    Instant::parse(text).expect("fixture timestamp")
}

/// Mock review text for one PR #129 file.
pub fn pr129_review_text(path: &str) -> String {
    format!(
        "1. Documentation Defects: comments in {path} are sparse; document exported functions.\n\
         2. Visual Representation Defects: several long JSX lines hurt readability.\n\
         3. Structure Defects: repeated field handlers could share one helper.\n\
         6. Check Defects: user input is submitted without validation."
    )
}

/// PR #129 as mined from the host: four bot reviews, ten later commits.
pub fn pr129() -> PullRequestRecord {
    let bots = BotLogins::default();
    let comments = PR129_FILES
        .iter()
        .zip(PR129_REVIEW_TIMES)
        .map(|(path, t)| {
            CommentRecord::new(
                PR129_BOT,
                review_comment_body(path, &pr129_review_text(path)),
                at(t),
                &bots,
            )
        })
        .collect();
    let commits = PR129_COMMITS
        .iter()
        .map(|(sha, msg, t)| CommitRecord::new(*sha, *msg, at(t)).expect("fixture sha"))
        .collect();
    PullRequestRecord::new(
        PR129_REPO,
        PR129_NUMBER,
        at(PR129_CREATED_AT),
        "team-aa-dev",
        comments,
        commits,
    )
    .expect("valid fixture")
}

/// PRs planned for one semester week.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeekPlan {
    pub total: u32,
    pub success: u32,
    pub actioned: u32,
    pub failed: u32,
}

#[derive(Debug, Clone)]
pub struct CohortFixture {
    pub calendar: CohortCalendar,
    pub teams_total: u32,
    pub teams_using_ai: u32,
    pub weeks: Vec<WeekPlan>,
    pub commits_total: u64,
    pub comments_total: u64,
    pub bot_login: &'static str,
    pub seed: u64,
}

fn plan(
    total: &[u32; 14],
    success: &[u32; 14],
    actioned: &[u32; 14],
    failed: &[u32; 14],
) -> Vec<WeekPlan> {
    (0..14)
        .map(|i| WeekPlan {
            total: total[i],
            success: success[i],
            actioned: actioned[i],
            failed: failed[i],
        })
        .collect()
}

impl CohortFixture {
    /// 29 teams, 581 PRs (75 reviewed, 24 actioned, 227 failed attempts).
    pub fn preset_2023() -> Self {
        Self {
            calendar: CohortCalendar::preset_2023(),
            teams_total: 29,
            teams_using_ai: 27,
            weeks: plan(
                &[2, 6, 14, 22, 30, 38, 45, 70, 60, 58, 72, 68, 52, 44],
                &[0, 0, 0, 0, 0, 0, 2, 6, 9, 10, 10, 12, 12, 14],
                &[0, 0, 0, 0, 0, 0, 0, 1, 4, 5, 5, 1, 2, 6],
                &[0, 0, 0, 0, 0, 0, 10, 22, 30, 35, 60, 40, 18, 12],
            ),
            commits_total: 8699,
            comments_total: 1698,
            bot_login: "cr-gpt[bot]",
            seed: 2023,
        }
    }

    /// 34 teams, 1176 PRs (100 reviewed, 33 actioned, no failed attempts).
    pub fn preset_2024() -> Self {
        Self {
            calendar: CohortCalendar::preset_2024(),
            teams_total: 34,
            teams_using_ai: 17,
            weeks: plan(
                &[4, 12, 30, 50, 70, 90, 110, 190, 140, 130, 120, 110, 70, 50],
                &[0, 0, 0, 0, 0, 0, 4, 14, 16, 16, 16, 14, 12, 8],
                &[0, 0, 0, 0, 0, 0, 1, 4, 7, 7, 7, 2, 5, 0],
                &[0; 14],
            ),
            commits_total: 9436,
            comments_total: 2872,
            bot_login: "github-actions[bot]",
            seed: 2024,
        }
    }

    pub fn label(&self) -> &str {
        self.calendar.cohort_label()
    }

    fn repo(&self, team: u32) -> String {
        format!("cohort-{}/team-{team:02}", self.label())
    }

    pub fn team_map(&self) -> TeamMap {
        (1..=self.teams_total)
            .map(|t| (self.repo(t), format!("Team-{t:02}")))
            .collect()
    }

    fn local_to_utc(&self, local: NaiveDateTime) -> Instant {
        let tz = self.calendar.timezone();
        let dt = tz
            .from_local_datetime(&local)
            .earliest()
            .or_else(|| {
                tz.from_local_datetime(&(local + Duration::hours(1)))
                    .earliest()
            })
            .expect("representable local time");
        Instant::from_utc(dt.with_timezone(&chrono::Utc))
    }

    /// Deterministic rows for this cohort. Panics if the plan is inconsistent.
    pub fn generate(&self) -> RawRecords {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let ai_teams = self.teams_using_ai.max(1);

        // Lay out every PR: week, status, team, creation time.
        let mut prs: Vec<PlannedPr> = Vec::new();
        let (mut ai_rr, mut other_rr) = (0u32, 0u32);
        for (wi, week) in self.weeks.iter().enumerate() {
            assert!(
                week.success + week.failed <= week.total,
                "week {} over-planned",
                wi + 1
            );
            assert!(
                week.actioned <= week.success,
                "week {} actioned > success",
                wi + 1
            );
            let monday = self
                .calendar
                .week_start(wi as u32 + 1)
                .expect("week in range");
            for k in 0..week.total {
                let kind = if k < week.actioned {
                    Kind::Actioned
                } else if k < week.success {
                    Kind::Reviewed
                } else if k < week.success + week.failed {
                    Kind::Failed
                } else {
                    Kind::Plain
                };
                let team = if kind == Kind::Plain {
                    other_rr += 1;
                    (other_rr - 1) % self.teams_total + 1
                } else {
                    ai_rr += 1;
                    (ai_rr - 1) % ai_teams + 1
                };
                let day = monday + chrono::Days::new(rng.gen_range(0..7));
                let time = NaiveTime::from_hms_opt(
                    rng.gen_range(8..22),
                    rng.gen_range(0..60),
                    rng.gen_range(0..60),
                )
                .expect("valid time");
                let created_at = self.local_to_utc(day.and_time(time));
                prs.push(PlannedPr {
                    kind,
                    team,
                    created_at,
                    week: wi as u32 + 1,
                    number: 0,
                    commits: 1,
                });
            }
        }
        prs.sort_by_key(|p| (p.created_at, p.team));
        let mut next_number = vec![1u64; self.teams_total as usize + 1];
        for p in &mut prs {
            p.number = next_number[p.team as usize];
            next_number[p.team as usize] += 1;
            if p.kind == Kind::Actioned {
                p.commits = 2;
            }
        }

        let base: u64 = prs.iter().map(|p| p.commits as u64).sum();
        assert!(
            self.commits_total >= base,
            "not enough commits for the plan"
        );
        for _ in 0..self.commits_total - base {
            let i = rng.gen_range(0..prs.len());
            prs[i].commits += 1;
        }

        let bots = BotLogins::default();
        let mut raw = RawRecords::default();
        let mut bot_comment_count = 0u64;
        let mut boundary_case_done = false;
        let mut comment_rows: Vec<(usize, CommentRow)> = Vec::new();

        for (idx, p) in prs.iter().enumerate() {
            let repo = self.repo(p.team);
            let number = p.number as i64;
            raw.prs.push(PrRow {
                repo_id: repo.clone(),
                number,
                created_at: p.created_at.to_string(),
                author: student(p.team, rng.gen_range(1..=5)),
            });

            let review_at = p.created_at.plus_seconds(rng.gen_range(30..300));
            let mut bot_comments: Vec<(Instant, String)> = Vec::new();
            match p.kind {
                Kind::Actioned | Kind::Reviewed => {
                    if rng.gen_bool(0.1) && self.weeks.iter().any(|w| w.failed > 0) {
                        bot_comments
                            .push((review_at.plus_seconds(-120), failure_body(&mut rng, p.week)));
                    }
                    let files = rng.gen_range(1..=4);
                    for f in 0..files {
                        let path = SOURCE_FILES[rng.gen_range(0..SOURCE_FILES.len())];
                        bot_comments.push((
                            review_at.plus_seconds(f),
                            review_comment_body(path, SHORT_REVIEW),
                        ));
                    }
                }
                Kind::Failed => {
                    for f in 0..rng.gen_range(1..=2) {
                        bot_comments.push((
                            review_at.plus_seconds(f * 600),
                            failure_body(&mut rng, p.week),
                        ));
                    }
                }
                Kind::Plain => {
                    if rng.gen_bool(0.05) {
                        bot_comments.push((review_at, "Deployment preview is ready.".to_string()));
                    }
                }
            }
            for (t, body) in &bot_comments {
                comment_rows.push((
                    idx,
                    CommentRow {
                        repo_id: repo.clone(),
                        pr_number: number,
                        author_login: self.bot_login.to_string(),
                        body: body.clone(),
                        created_at: t.to_string(),
                    },
                ));
            }
            bot_comment_count += bot_comments.len() as u64;

            // Commits: everything before the review unless actioned.
            let n = p.commits as i64;
            let mut times: Vec<Instant> = Vec::with_capacity(n as usize);
            match p.kind {
                Kind::Actioned => {
                    let after = (n / 2).max(1);
                    for _ in 0..n - after {
                        times.push(p.created_at.plus_seconds(-rng.gen_range(60..172_800)));
                    }
                    for _ in 0..after {
                        times.push(review_at.plus_seconds(rng.gen_range(60..259_200)));
                    }
                }
                Kind::Reviewed => {
                    for _ in 0..n {
                        times.push(p.created_at.plus_seconds(-rng.gen_range(60..172_800)));
                    }
                    if !boundary_case_done {
                        // A commit at exactly the review instant does not action the PR.
                        times[0] = review_at;
                        boundary_case_done = true;
                    }
                }
                Kind::Failed | Kind::Plain => {
                    for _ in 0..n {
                        times.push(p.created_at.plus_seconds(rng.gen_range(-172_800..259_200)));
                    }
                }
            }
            times.sort();
            for t in times {
                raw.commits.push(CommitRow {
                    repo_id: repo.clone(),
                    pr_number: number,
                    sha: format!("{:012x}", rng.gen::<u64>() & 0xffff_ffff_ffff),
                    message: COMMIT_MESSAGES[rng.gen_range(0..COMMIT_MESSAGES.len())].to_string(),
                    committed_at: t.to_string(),
                });
            }
        }

        assert!(
            self.comments_total >= bot_comment_count,
            "not enough comments for the plan"
        );
        for _ in 0..self.comments_total - bot_comment_count {
            let idx = rng.gen_range(0..prs.len());
            let p = &prs[idx];
            let login = student(p.team, rng.gen_range(1..=5));
            debug_assert!(!bots.contains(&login));
            comment_rows.push((
                idx,
                CommentRow {
                    repo_id: self.repo(p.team),
                    pr_number: p.number as i64,
                    author_login: login,
                    body: HUMAN_COMMENTS
                        .choose(&mut rng)
                        .expect("non-empty")
                        .to_string(),
                    created_at: p
                        .created_at
                        .plus_seconds(rng.gen_range(60..345_600))
                        .to_string(),
                },
            ));
        }
        comment_rows.sort_by_key(|(idx, _)| *idx);
        raw.comments = comment_rows.into_iter().map(|(_, row)| row).collect();
        raw
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Actioned,
    Reviewed,
    Failed,
    Plain,
}

struct PlannedPr {
    kind: Kind,
    team: u32,
    created_at: Instant,
    week: u32,
    number: u64,
    commits: u32,
}

fn student(team: u32, k: u32) -> String {
    format!("t{team:02}-student{k}")
}

fn failure_body(rng: &mut ChaCha8Rng, week: u32) -> String {
    let policy = GuardrailPolicy::default();
    let verdict = if week == 11 && rng.gen_bool(0.7) {
        let paths: Vec<String> = (0..rng.gen_range(60..400))
            .map(|i| format!("src/module{i}.js"))
            .collect();
        let files: Vec<FileChange<'_>> = paths.iter().map(|p| FileChange::new(p, 20, 0)).collect();
        check_files(&files, &policy)
    } else {
        match rng.gen_range(0..4) {
            0 => check_credentials(false, false, "OPENAI_API_KEY"),
            1 => check_credentials(true, false, "OPENAI_API_KEY"),
            2 => check_files(&[FileChange::new("docs/wireframe.png", 0, 0)], &policy),
            _ => check_files(&[FileChange::new("release/build.zip", 0, 0)], &policy),
        }
    };
    render_rejection_comment(&verdict)
}

const SHORT_REVIEW: &str = "1. Documentation Defects: add comments to exported functions.\n\
2. Visual Representation Defects: a few lines exceed 100 characters.\n\
8. Logic Defects: no issues found.";

const SOURCE_FILES: &[&str] = &[
    "src/App.js",
    "src/api/client.js",
    "src/components/Header.jsx",
    "src/components/LoginForm.jsx",
    "src/pages/Dashboard.tsx",
    "server/routes/users.js",
    "server/models/project.py",
    "server/services/auth.py",
];

const COMMIT_MESSAGES: &[&str] = &[
    "Add login page",
    "Fix typo",
    "Refactor API client",
    "Address review comments",
    "Update tests",
    "Add validation to form",
    "Merge branch 'main' into feature",
    "Improve error handling",
    "Rename variables for clarity",
    "Remove unused code",
];

const HUMAN_COMMENTS: &[&str] = &[
    "LGTM",
    "Looks good, merging.",
    "Can you add a test for this?",
    "Please rename this variable.",
    "Fixed in the latest commit.",
    "Why is this needed?",
    "Approved after the last changes.",
    "Minor nit: indentation.",
];
