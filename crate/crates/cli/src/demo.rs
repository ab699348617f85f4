//! Hermetic end-to-end run: PR #129 goes through the bot with the mock
//! provider, and the posted comments go back through the classifier.

use std::sync::Arc;

use anyhow::ensure;
use reviewloop_bot::host::{
    ChangedFile, Clock, FileStatus, FixtureCommit, FixturePr, HostSnapshot, InMemoryHost,
};
use reviewloop_bot::provider::MockProvider;
use reviewloop_bot::{ReviewOutcome, ReviewService, TriggerEvent};
use reviewloop_core::domain::BotLogins;
use reviewloop_core::fixtures::{
    PR129_BOT, PR129_COMMITS, PR129_CREATED_AT, PR129_FILES, PR129_NUMBER, PR129_REPO,
    PR129_REVIEW_TIMES,
};
use reviewloop_core::guardrails::GuardrailPolicy;
use reviewloop_core::telemetry::{classify, ClassificationRules};
use reviewloop_core::{CohortCalendar, EngagementStatus, Instant, WeekIndex};

fn at(s: &str) -> Instant {
    Instant::parse(s).expect("fixture time")
}

fn source_for(path: &str) -> String {
    let name = path
        .rsplit('/')
        .next()
        .unwrap_or(path)
        .trim_end_matches(".js");
    format!(
        "import React, {{ useState }} from 'react';\n\n\
         export default function {name}(props) {{\n  \
         const [values, setValues] = useState({{}});\n  \
         const onChange = (e) => setValues({{ ...values, [e.target.name]: e.target.value }});\n  \
         const onSubmit = () => props.onSubmit(values);\n  \
         return null;\n}}\n"
    )
}

pub fn snapshot() -> HostSnapshot {
    let files = PR129_FILES
        .iter()
        .map(|p| {
            let content = source_for(p);
            ChangedFile {
                path: p.to_string(),
                status: FileStatus::Modified,
                additions: content.lines().count() as u64,
                deletions: 0,
                content: Some(content),
                patch: None,
            }
        })
        .collect();
    let commits = PR129_COMMITS
        .iter()
        .map(|(sha, msg, t)| FixtureCommit {
            sha: sha.to_string(),
            message: msg.to_string(),
            committed_at: at(t),
        })
        .collect();
    HostSnapshot {
        pull_requests: vec![FixturePr {
            repo: PR129_REPO.into(),
            number: PR129_NUMBER,
            head_sha: Some(PR129_COMMITS[0].0.into()),
            created_at: Some(at(PR129_CREATED_AT)),
            author: Some("team-aa-dev".into()),
            files,
            comments: vec![],
            commits,
        }],
    }
}

pub fn run() -> anyhow::Result<()> {
    let clock = Clock::scripted(PR129_REVIEW_TIMES.iter().map(|t| at(t)));
    let host = Arc::new(InMemoryHost::new(snapshot(), PR129_BOT).with_clock(clock));
    let service = ReviewService::new(
        host.clone(),
        Arc::new(MockProvider),
        GuardrailPolicy::default(),
    );
    let event = TriggerEvent {
        repo_id: PR129_REPO.into(),
        pr_number: PR129_NUMBER,
        head_sha: PR129_COMMITS[0].0.into(),
        delivery_id: "demo-129".into(),
    };

    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()?;
    let results = runtime.block_on(service.handle_trigger(&event))?;
    ensure!(
        results.len() == PR129_FILES.len(),
        "expected {} results, got {}",
        PR129_FILES.len(),
        results.len()
    );

    println!("{PR129_REPO}#{PR129_NUMBER} opened {PR129_CREATED_AT}");
    for r in &results {
        match &r.outcome {
            ReviewOutcome::Posted {
                comment_body,
                posted_at,
                ..
            } => {
                println!(
                    "{posted_at}  {PR129_BOT}  {}",
                    comment_body.lines().next().unwrap_or("")
                );
            }
            ReviewOutcome::Failed { rule_id, message } => {
                anyhow::bail!("{} was not reviewed: [{rule_id}] {message}", r.file_path)
            }
        }
    }
    for (sha, msg, t) in PR129_COMMITS {
        println!("{t}  commit {sha}  {msg}");
    }

    let record = host
        .pull_request_record(PR129_REPO, PR129_NUMBER, &BotLogins::default())
        .expect("fixture PR")?;
    let created = record.created_at;
    let classified = classify(record, &ClassificationRules::default());
    let cal = CohortCalendar::preset_2024();
    let week = cal.week_of(created);

    println!("status: {:?}", classified.status());
    println!(
        "first successful review: {}",
        classified
            .first_success_at()
            .map(|t| t.to_string())
            .unwrap_or_default()
    );
    println!("actioned: {}", classified.actioned());
    println!("created in week: {week} ({} calendar)", cal.cohort_label());

    ensure!(
        classified.status() == EngagementStatus::SuccessfulAiReview,
        "PR #129 should be a successful review"
    );
    ensure!(
        classified.first_success_at() == Some(at(PR129_REVIEW_TIMES[0])),
        "first review time mismatch"
    );
    ensure!(classified.actioned(), "PR #129 should be actioned");
    ensure!(
        week == WeekIndex::Week(8),
        "PR #129 should fall in week 8, got {week}"
    );
    Ok(())
}
