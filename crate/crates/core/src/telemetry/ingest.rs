//! Line-delimited record files in, normalized [`Dataset`] out.
//!
//! A data directory holds `prs.jsonl`, `comments.jsonl` and `commits.jsonl`
//! (one JSON object per line) and optionally `teams.json`. Lines that are not
//! valid JSON objects of the right shape abort ingest with the file and line
//! number. Well-formed records with bad values (unparseable timestamps,
//! invalid shas, references to unknown PRs, duplicates) are dropped and
//! listed in the [`IngestReport`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::TeamMap;
use crate::domain::{
    BotLogins, CohortCalendar, CommentRecord, CommitRecord, Instant, PullRequestRecord,
};

pub const PRS_FILE: &str = "prs.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";
pub const COMMITS_FILE: &str = "commits.jsonl";
pub const TEAMS_FILE: &str = "teams.json";

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: schema error: {message}")]
    Schema {
        file: String,
        line: usize,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrRow {
    pub repo_id: String,
    pub number: i64,
    pub created_at: String,
    pub author: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommentRow {
    pub repo_id: String,
    pub pr_number: i64,
    pub author_login: String,
    pub body: String,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitRow {
    pub repo_id: String,
    pub pr_number: i64,
    pub sha: String,
    pub message: String,
    pub committed_at: String,
}

/// Unvalidated rows, in source order, from files or a live host query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRecords {
    pub prs: Vec<PrRow>,
    pub comments: Vec<CommentRow>,
    pub commits: Vec<CommitRow>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RecordCounts {
    pub read: u64,
    pub kept: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestIssue {
    pub file: &'static str,
    /// 1-based position in the source.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub prs: RecordCounts,
    pub comments: RecordCounts,
    pub commits: RecordCounts,
    pub dropped: Vec<IngestIssue>,
}

impl IngestReport {
    fn drop(&mut self, file: &'static str, line: usize, reason: impl Into<String>) {
        let counts = match file {
            PRS_FILE => &mut self.prs,
            COMMENTS_FILE => &mut self.comments,
            _ => &mut self.commits,
        };
        counts.dropped += 1;
        self.dropped.push(IngestIssue {
            file,
            line,
            reason: reason.into(),
        });
    }
}

/// One cohort's pull requests, sorted by (repo_id, pr_number).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub cohort: CohortCalendar,
    pub prs: Vec<PullRequestRecord>,
}

type PrKey = (String, u64);

struct PendingPr {
    created_at: Instant,
    author: String,
    comments: Vec<CommentRecord>,
    commits: Vec<CommitRecord>,
    shas: HashSet<String>,
}

impl Dataset {
    /// Validates and normalizes raw rows. Never fails; rejected rows are
    /// recorded in the returned report.
    pub fn from_rows(
        cohort: CohortCalendar,
        raw: RawRecords,
        bots: &BotLogins,
    ) -> (Self, IngestReport) {
        let mut report = IngestReport::default();
        let mut pending: BTreeMap<PrKey, PendingPr> = BTreeMap::new();

        report.prs.read = raw.prs.len() as u64;
        for (i, row) in raw.prs.into_iter().enumerate() {
            let line = i + 1;
            if row.repo_id.is_empty() {
                report.drop(PRS_FILE, line, "empty repo_id");
                continue;
            }
            let Ok(number) = u64::try_from(row.number) else {
                report.drop(
                    PRS_FILE,
                    line,
                    format!("non-positive PR number {}", row.number),
                );
                continue;
            };
            if number == 0 {
                report.drop(PRS_FILE, line, "non-positive PR number 0");
                continue;
            }
            let created_at = match Instant::parse(&row.created_at) {
                Ok(t) => t,
                Err(e) => {
                    report.drop(PRS_FILE, line, e.to_string());
                    continue;
                }
            };
            let key = (row.repo_id, number);
            if pending.contains_key(&key) {
                report.drop(PRS_FILE, line, format!("duplicate PR {}#{}", key.0, key.1));
                continue;
            }
            pending.insert(
                key,
                PendingPr {
                    created_at,
                    author: row.author,
                    comments: Vec::new(),
                    commits: Vec::new(),
                    shas: HashSet::new(),
                },
            );
        }

        report.comments.read = raw.comments.len() as u64;
        for (i, row) in raw.comments.into_iter().enumerate() {
            let line = i + 1;
            let created_at = match Instant::parse(&row.created_at) {
                Ok(t) => t,
                Err(e) => {
                    report.drop(COMMENTS_FILE, line, e.to_string());
                    continue;
                }
            };
            let Some(pr) = lookup(&mut pending, &row.repo_id, row.pr_number) else {
                report.drop(
                    COMMENTS_FILE,
                    line,
                    format!("unknown PR {}#{}", row.repo_id, row.pr_number),
                );
                continue;
            };
            pr.comments.push(CommentRecord::new(
                row.author_login,
                row.body,
                created_at,
                bots,
            ));
        }

        report.commits.read = raw.commits.len() as u64;
        for (i, row) in raw.commits.into_iter().enumerate() {
            let line = i + 1;
            let committed_at = match Instant::parse(&row.committed_at) {
                Ok(t) => t,
                Err(e) => {
                    report.drop(COMMITS_FILE, line, e.to_string());
                    continue;
                }
            };
            let commit = match CommitRecord::new(row.sha, row.message, committed_at) {
                Ok(c) => c,
                Err(e) => {
                    report.drop(COMMITS_FILE, line, e.to_string());
                    continue;
                }
            };
            let Some(pr) = lookup(&mut pending, &row.repo_id, row.pr_number) else {
                report.drop(
                    COMMITS_FILE,
                    line,
                    format!("unknown PR {}#{}", row.repo_id, row.pr_number),
                );
                continue;
            };
            if !pr.shas.insert(commit.sha.clone()) {
                report.drop(
                    COMMITS_FILE,
                    line,
                    format!("duplicate commit {}", commit.sha),
                );
                continue;
            }
            pr.commits.push(commit);
        }

        let prs: Vec<PullRequestRecord> = pending
            .into_iter()
            .map(|((repo_id, number), p)| {
                PullRequestRecord::new(
                    repo_id,
                    number,
                    p.created_at,
                    p.author,
                    p.comments,
                    p.commits,
                )
                .expect("rows validated above")
            })
            .collect();

        report.prs.kept = prs.len() as u64;
        report.comments.kept = prs.iter().map(|p| p.comments().len() as u64).sum();
        report.commits.kept = prs.iter().map(|p| p.commits().len() as u64).sum();

        (Self { cohort, prs }, report)
    }

    /// Rows in normalized order, suitable for [`write_dir`].
    pub fn to_rows(&self) -> RawRecords {
        let mut raw = RawRecords::default();
        for pr in &self.prs {
            let number = pr.pr_number as i64;
            raw.prs.push(PrRow {
                repo_id: pr.repo_id.clone(),
                number,
                created_at: pr.created_at.to_string(),
                author: pr.author.clone(),
            });
            raw.comments
                .extend(pr.comments().iter().map(|c| CommentRow {
                    repo_id: pr.repo_id.clone(),
                    pr_number: number,
                    author_login: c.author_login.clone(),
                    body: c.body.clone(),
                    created_at: c.created_at.to_string(),
                }));
            raw.commits.extend(pr.commits().iter().map(|c| CommitRow {
                repo_id: pr.repo_id.clone(),
                pr_number: number,
                sha: c.sha.clone(),
                message: c.message.clone(),
                committed_at: c.committed_at.to_string(),
            }));
        }
        raw
    }
}

fn lookup<'a>(
    pending: &'a mut BTreeMap<PrKey, PendingPr>,
    repo_id: &str,
    number: i64,
) -> Option<&'a mut PendingPr> {
    let number = u64::try_from(number).ok()?;
    pending.get_mut(&(repo_id.to_string(), number))
}

fn read_jsonl<T: DeserializeOwned>(dir: &Path, name: &'static str) -> Result<Vec<T>, IngestError> {
    let path = dir.join(name);
    let file = File::open(&path).map_err(io_err(&path))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| IngestError::Schema {
            file: name.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads the three record files from `dir`.
pub fn read_dir(dir: &Path) -> Result<RawRecords, IngestError> {
    Ok(RawRecords {
        prs: read_jsonl(dir, PRS_FILE)?,
        comments: read_jsonl(dir, COMMENTS_FILE)?,
        commits: read_jsonl(dir, COMMITS_FILE)?,
    })
}

pub fn ingest_dir(
    dir: &Path,
    cohort: CohortCalendar,
    bots: &BotLogins,
) -> Result<(Dataset, IngestReport), IngestError> {
    let raw = read_dir(dir)?;
    Ok(Dataset::from_rows(cohort, raw, bots))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IngestError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut out, row).expect("rows serialize");
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// Writes the three record files (and `teams.json` when given) into `dir`.
pub fn write_dir(dir: &Path, raw: &RawRecords, teams: Option<&TeamMap>) -> Result<(), IngestError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_jsonl(&dir.join(PRS_FILE), &raw.prs)?;
    write_jsonl(&dir.join(COMMENTS_FILE), &raw.comments)?;
    write_jsonl(&dir.join(COMMITS_FILE), &raw.commits)?;
    if let Some(teams) = teams {
        let path = dir.join(TEAMS_FILE);
        let text = serde_json::to_string_pretty(teams).expect("team map serializes");
        std::fs::write(&path, text + "\n").map_err(io_err(&path))?;
    }
    Ok(())
}

pub fn load_team_map(path: &Path) -> Result<TeamMap, IngestError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let map: HashMap<String, String> =
        serde_json::from_str(&text).map_err(|e| IngestError::Schema {
            file: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
    Ok(map.into_iter().collect())
}
