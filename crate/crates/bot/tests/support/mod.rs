#![allow(dead_code)]

pub mod github_stub;

use reviewloop_bot::host::{ChangedFile, FileStatus, FixturePr, HostSnapshot};
use reviewloop_core::fixtures::{PR129_CREATED_AT, PR129_FILES, PR129_NUMBER, PR129_REPO};
use reviewloop_core::Instant;

pub fn js_source(path: &str, lines: usize) -> String {
    let mut s = format!("// {path}\n");
    for i in 0..lines {
        s.push_str(&format!("export const value{i} = () => {i};\n"));
    }
    s
}

pub fn file(path: &str, content: Option<String>) -> ChangedFile {
    let additions = content
        .as_deref()
        .map(|c| c.lines().count() as u64)
        .unwrap_or(0);
    ChangedFile {
        path: path.to_string(),
        status: FileStatus::Modified,
        additions,
        deletions: 0,
        content,
        patch: None,
    }
}

pub fn pr(repo: &str, number: u64, files: Vec<ChangedFile>) -> FixturePr {
    FixturePr {
        repo: repo.to_string(),
        number,
        head_sha: Some("abc1234".into()),
        created_at: Some(Instant::parse(PR129_CREATED_AT).unwrap()),
        author: Some("dev".into()),
        files,
        comments: vec![],
        commits: vec![],
    }
}

/// PR #129 with its four JavaScript files.
pub fn pr129_snapshot() -> HostSnapshot {
    let files = PR129_FILES
        .iter()
        .enumerate()
        .map(|(i, p)| file(p, Some(js_source(p, 10 + i))))
        .collect();
    HostSnapshot {
        pull_requests: vec![pr(PR129_REPO, PR129_NUMBER, files)],
    }
}
