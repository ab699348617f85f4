//! Pre-flight checks for a review trigger.
//!
//! A trigger that would fail inside the provider call (no key, binary
//! artefacts, whole-repository diffs) is stopped here and answered with a
//! message telling the author what to change.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comment::FAILURE_HEADER;

const SNIFF_BYTES: usize = 8 * 1024;

const DEFAULT_ALLOWED: &[&str] = &[
    "bash",
    "c",
    "cc",
    "cfg",
    "cjs",
    "cpp",
    "cs",
    "css",
    "cxx",
    "dart",
    "go",
    "gradle",
    "h",
    "hh",
    "hpp",
    "htm",
    "html",
    "ini",
    "java",
    "js",
    "json",
    "jsx",
    "kt",
    "kts",
    "less",
    "lua",
    "m",
    "md",
    "mjs",
    "mm",
    "php",
    "pl",
    "properties",
    "ps1",
    "py",
    "r",
    "rb",
    "rs",
    "sass",
    "scala",
    "scss",
    "sh",
    "sql",
    "svelte",
    "swift",
    "toml",
    "ts",
    "tsx",
    "txt",
    "vue",
    "xml",
    "yaml",
    "yml",
    "zsh",
];

const DEFAULT_DENIED: &[&str] = &[
    "7z", "a", "avi", "bin", "bmp", "bz2", "class", "db", "dll", "doc", "docx", "dylib", "eot",
    "exe", "gif", "gz", "ico", "jar", "jpeg", "jpg", "mov", "mp3", "mp4", "o", "obj", "otf", "pdf",
    "png", "ppt", "pptx", "psd", "pyc", "rar", "so", "sqlite", "svg", "tar", "tgz", "tif", "tiff",
    "ttf", "war", "wav", "webp", "woff", "woff2", "xls", "xlsx", "xz", "zip",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    Credentials,
    ArtifactType,
    Scope,
    FileLimit,
}

impl RuleId {
    pub const ALL: [Self; 4] = [
        Self::Credentials,
        Self::ArtifactType,
        Self::Scope,
        Self::FileLimit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Credentials => "credentials",
            Self::ArtifactType => "artifact-type",
            Self::Scope => "scope",
            Self::FileLimit => "file-limit",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("extensions both allowed and denied: {0:?}")]
    OverlappingExtensions(Vec<String>),
    #[error("{0} must be at least 1")]
    ZeroLimit(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuardrailPolicy {
    pub allowed_extensions: BTreeSet<String>,
    pub denied_extensions: BTreeSet<String>,
    pub max_files_per_review: u32,
    pub max_changed_lines_per_file: u64,
    pub max_total_changed_lines: u64,
    pub require_credentials: bool,
}

impl Default for GuardrailPolicy {
    fn default() -> Self {
        Self {
            allowed_extensions: DEFAULT_ALLOWED.iter().map(|s| s.to_string()).collect(),
            denied_extensions: DEFAULT_DENIED.iter().map(|s| s.to_string()).collect(),
            max_files_per_review: 25,
            max_changed_lines_per_file: 800,
            max_total_changed_lines: 3000,
            require_credentials: true,
        }
    }
}

impl GuardrailPolicy {
    /// Lower-cases the extension sets and checks the limits.
    pub fn validated(mut self) -> Result<Self, PolicyError> {
        let norm = |set: &BTreeSet<String>| -> BTreeSet<String> {
            set.iter()
                .map(|e| e.trim_start_matches('.').to_ascii_lowercase())
                .collect()
        };
        self.allowed_extensions = norm(&self.allowed_extensions);
        self.denied_extensions = norm(&self.denied_extensions);
        let overlap: Vec<String> = self
            .allowed_extensions
            .intersection(&self.denied_extensions)
            .cloned()
            .collect();
        if !overlap.is_empty() {
            return Err(PolicyError::OverlappingExtensions(overlap));
        }
        if self.max_files_per_review == 0 {
            return Err(PolicyError::ZeroLimit("max_files_per_review"));
        }
        if self.max_changed_lines_per_file == 0 {
            return Err(PolicyError::ZeroLimit("max_changed_lines_per_file"));
        }
        if self.max_total_changed_lines == 0 {
            return Err(PolicyError::ZeroLimit("max_total_changed_lines"));
        }
        Ok(self)
    }
}

/// One violated rule with guidance for the pull-request author.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub rule: RuleId,
    pub message: String,
    /// File path, or `None` when the rule applies to the whole trigger.
    pub item: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Reject,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardrailVerdict {
    rejections: Vec<Rejection>,
}

impl GuardrailVerdict {
    pub fn pass() -> Self {
        Self::default()
    }

    pub fn outcome(&self) -> Outcome {
        if self.rejections.is_empty() {
            Outcome::Pass
        } else {
            Outcome::Reject
        }
    }

    pub fn is_pass(&self) -> bool {
        self.rejections.is_empty()
    }

    pub fn rejections(&self) -> &[Rejection] {
        &self.rejections
    }

    pub fn rules(&self) -> BTreeSet<RuleId> {
        self.rejections.iter().map(|r| r.rule).collect()
    }

    /// Appends `other`'s rejections after this verdict's.
    pub fn merge(mut self, other: GuardrailVerdict) -> Self {
        self.rejections.extend(other.rejections);
        self
    }

    fn reject(&mut self, rule: RuleId, message: String, item: Option<&str>) {
        debug_assert!(!message.is_empty());
        self.rejections.push(Rejection {
            rule,
            message,
            item: item.map(str::to_string),
        });
    }

    /// The rejection that concerns `path`, falling back to the first
    /// trigger-wide one.
    pub fn reason_for(&self, path: &str) -> Option<&Rejection> {
        self.rejections
            .iter()
            .find(|r| r.item.as_deref() == Some(path))
            .or_else(|| self.rejections.iter().find(|r| r.item.is_none()))
            .or_else(|| self.rejections.first())
    }
}

/// A changed file as seen by the guardrails.
#[derive(Debug, Clone, Copy)]
pub struct FileChange<'a> {
    pub path: &'a str,
    pub added_lines: u64,
    pub removed_lines: u64,
    /// Deleted files still count toward line limits but are never reviewed.
    pub deleted: bool,
    /// Leading bytes of the post-change content, when known.
    pub content: Option<&'a [u8]>,
}

impl<'a> FileChange<'a> {
    pub fn new(path: &'a str, added_lines: u64, removed_lines: u64) -> Self {
        Self {
            path,
            added_lines,
            removed_lines,
            deleted: false,
            content: None,
        }
    }

    pub fn changed_lines(&self) -> u64 {
        self.added_lines + self.removed_lines
    }
}

pub fn check_credentials(present: bool, authorized: bool, secret_name: &str) -> GuardrailVerdict {
    let mut verdict = GuardrailVerdict::pass();
    if !present {
        verdict.reject(
            RuleId::Credentials,
            format!(
                "No API key is available to the review bot. Add a repository secret named \
                 `{secret_name}` (Settings > Secrets and variables > Actions) holding a valid \
                 key, then push a new commit to re-run the review."
            ),
            None,
        );
    } else if !authorized {
        verdict.reject(
            RuleId::Credentials,
            format!(
                "The API key in `{secret_name}` was rejected as unauthorised. Check that the key \
                 is current and has access to the configured model, update the `{secret_name}` \
                 secret, then push a new commit to re-run the review."
            ),
            None,
        );
    }
    verdict
}

pub fn check_files(files: &[FileChange<'_>], policy: &GuardrailPolicy) -> GuardrailVerdict {
    let mut verdict = GuardrailVerdict::pass();

    let count = files.len();
    if count > policy.max_files_per_review as usize {
        verdict.reject(
            RuleId::Scope,
            format!(
                "This pull request changes {count} files, but one review run accepts at most {}. \
                 Scope meaningful diffs, not entire repositories: open a pull request per task \
                 or feature and request review on that.",
                policy.max_files_per_review
            ),
            None,
        );
    }

    let total: u64 = files.iter().map(FileChange::changed_lines).sum();
    if total > policy.max_total_changed_lines {
        verdict.reject(
            RuleId::FileLimit,
            format!(
                "This pull request changes {total} lines in total; the limit is {}. Split it \
                 into smaller pull requests that each cover one task.",
                policy.max_total_changed_lines
            ),
            None,
        );
    }

    for file in files {
        if !file.deleted {
            if let Some(message) = artifact_problem(file, policy) {
                verdict.reject(RuleId::ArtifactType, message, Some(file.path));
            }
        }
        let lines = file.changed_lines();
        if lines > policy.max_changed_lines_per_file {
            verdict.reject(
                RuleId::FileLimit,
                format!(
                    "`{}` changes {lines} lines; the per-file limit is {}. Break the change into \
                     smaller, focused commits and pull requests.",
                    file.path, policy.max_changed_lines_per_file
                ),
                Some(file.path),
            );
        }
    }

    verdict
}

fn artifact_problem(file: &FileChange<'_>, policy: &GuardrailPolicy) -> Option<String> {
    match extension_of(file.path) {
        Some(ext) if policy.denied_extensions.contains(&ext) => Some(format!(
            "`{}` is a non-code artefact (.{ext}). The reviewer only evaluates source code; \
             remove the file from this pull request or add it in a separate one.",
            file.path
        )),
        Some(ext)
            if !policy.allowed_extensions.is_empty()
                && !policy.allowed_extensions.contains(&ext) =>
        {
            Some(format!(
                "`{}` has extension .{ext}, which is not a reviewable source type. Move it to a \
                 separate pull request, or ask a maintainer to add .{ext} to the allowed \
                 extensions.",
                file.path
            ))
        }
        Some(_) => None,
        None => {
            let head = file.content?;
            let head = &head[..head.len().min(SNIFF_BYTES)];
            head.contains(&0).then(|| {
                format!(
                    "`{}` looks like a binary file (it contains NUL bytes). Binary files cannot \
                     be reviewed; keep them out of pull requests sent for AI review.",
                    file.path
                )
            })
        }
    }
}

/// Lower-cased final extension of the last path component.
pub fn extension_of(path: &str) -> Option<String> {
    Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .filter(|e| !e.is_empty())
        .map(str::to_ascii_lowercase)
}

/// The single comment posted when a trigger is rejected.
pub fn render_rejection_comment(verdict: &GuardrailVerdict) -> String {
    let mut out = format!(
        "{FAILURE_HEADER}: this pull request did not pass the pre-flight checks.\n\n\
         Fix the items below and push again to get an AI review.\n"
    );
    for r in verdict.rejections() {
        match &r.item {
            Some(item) => out.push_str(&format!("\n- [{}] `{item}`: {}", r.rule, r.message)),
            None => out.push_str(&format!("\n- [{}] {}", r.rule, r.message)),
        }
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> GuardrailPolicy {
        GuardrailPolicy::default().validated().unwrap()
    }

    #[test]
    fn credentials() {
        assert!(check_credentials(true, true, "LLM_API_KEY").is_pass());
        for (present, authorized) in [(false, true), (false, false), (true, false)] {
            let v = check_credentials(present, authorized, "LLM_API_KEY");
            assert_eq!(v.outcome(), Outcome::Reject);
            assert_eq!(v.rejections().len(), 1);
            assert_eq!(v.rejections()[0].rule, RuleId::Credentials);
            assert!(v.rejections()[0].message.contains("LLM_API_KEY"));
        }
        let missing = check_credentials(false, false, "MY_KEY");
        assert!(missing.rejections()[0]
            .message
            .contains("secret named `MY_KEY`"));
    }

    #[test]
    fn small_code_file_passes() {
        let v = check_files(&[FileChange::new("src/app.js", 40, 3)], &policy());
        assert_eq!(v.outcome(), Outcome::Pass);
    }

    #[test]
    fn png_is_rejected_as_artifact() {
        let v = check_files(&[FileChange::new("logo.png", 0, 0)], &policy());
        assert_eq!(v.outcome(), Outcome::Reject);
        let r = &v.rejections()[0];
        assert_eq!(r.rule, RuleId::ArtifactType);
        assert_eq!(r.item.as_deref(), Some("logo.png"));
        assert!(r.message.contains(".png"));
        assert!(r.message.contains("non-code"));
    }

    #[test]
    fn extension_match_is_case_insensitive() {
        let v = check_files(&[FileChange::new("assets/Logo.PNG", 0, 0)], &policy());
        assert_eq!(v.rules(), [RuleId::ArtifactType].into());
        assert_eq!(extension_of("a/b.tar.GZ").as_deref(), Some("gz"));
        assert_eq!(extension_of(".gitignore"), None);
        assert_eq!(extension_of("Makefile"), None);
    }

    #[test]
    fn unknown_extension_rejected_when_allow_list_set() {
        let v = check_files(&[FileChange::new("notes.weird", 1, 0)], &policy());
        assert_eq!(v.rules(), [RuleId::ArtifactType].into());
        let mut open = policy();
        open.allowed_extensions.clear();
        assert!(check_files(&[FileChange::new("notes.weird", 1, 0)], &open).is_pass());
    }

    #[test]
    fn extensionless_files_are_sniffed() {
        let mut f = FileChange::new("Makefile", 3, 0);
        f.content = Some(b"all:\n\tcargo build\n");
        assert!(check_files(&[f], &policy()).is_pass());
        let mut bin = FileChange::new("blob", 0, 0);
        let bytes = [0x7f, b'E', b'L', b'F', 0, 0, 1];
        bin.content = Some(&bytes);
        assert_eq!(
            check_files(&[bin], &policy()).rules(),
            [RuleId::ArtifactType].into()
        );
        // NUL beyond the sniff window is not looked at.
        let mut late = vec![b'a'; SNIFF_BYTES];
        late.push(0);
        let mut f = FileChange::new("LICENSE", 1, 0);
        f.content = Some(&late);
        assert!(check_files(&[f], &policy()).is_pass());
    }

    #[test]
    fn deleted_artifacts_are_fine() {
        let mut f = FileChange::new("old.zip", 0, 0);
        f.deleted = true;
        assert!(check_files(&[f], &policy()).is_pass());
    }

    #[test]
    fn whole_repo_trigger_gets_scope_message() {
        let paths: Vec<String> = (0..500).map(|i| format!("src/m{i}.py")).collect();
        let files: Vec<_> = paths.iter().map(|p| FileChange::new(p, 1, 0)).collect();
        let v = check_files(&files, &policy());
        assert_eq!(v.rules(), [RuleId::Scope].into());
        assert!(v.rejections()[0]
            .message
            .contains("Scope meaningful diffs, not entire repositories"));
    }

    #[test]
    fn line_limits() {
        let v = check_files(&[FileChange::new("a.rs", 801, 0)], &policy());
        assert_eq!(v.rules(), [RuleId::FileLimit].into());
        assert!(check_files(&[FileChange::new("a.rs", 400, 400)], &policy()).is_pass());
        let files: Vec<_> = (0..4).map(|_| FileChange::new("a.rs", 760, 0)).collect();
        let v = check_files(&files, &policy());
        assert_eq!(v.rejections().len(), 1);
        assert!(v.rejections()[0].item.is_none());
    }

    #[test]
    fn all_violations_collected() {
        let paths: Vec<String> = (0..30).map(|i| format!("f{i}.js")).collect();
        let mut files: Vec<_> = paths.iter().map(|p| FileChange::new(p, 1, 0)).collect();
        files.push(FileChange::new("bundle.zip", 0, 0));
        files.push(FileChange::new("huge.js", 5000, 0));
        let v = check_files(&files, &policy());
        assert_eq!(
            v.rules(),
            [RuleId::Scope, RuleId::FileLimit, RuleId::ArtifactType].into()
        );
        assert!(v.rejections().iter().all(|r| !r.message.is_empty()));
        assert_eq!(
            v.reason_for("bundle.zip").unwrap().rule,
            RuleId::ArtifactType
        );
        assert_eq!(v.reason_for("f1.js").unwrap().rule, RuleId::Scope);
    }

    #[test]
    fn policy_validation() {
        let mut p = GuardrailPolicy::default();
        p.allowed_extensions.insert("PNG".into());
        assert!(matches!(
            p.validated(),
            Err(PolicyError::OverlappingExtensions(_))
        ));
        let p = GuardrailPolicy {
            max_files_per_review: 0,
            ..GuardrailPolicy::default()
        };
        assert_eq!(
            p.validated(),
            Err(PolicyError::ZeroLimit("max_files_per_review"))
        );
    }

    #[test]
    fn rejection_comment_lists_every_rule() {
        let v = check_files(
            &[
                FileChange::new("logo.png", 0, 0),
                FileChange::new("a.js", 900, 0),
            ],
            &policy(),
        );
        let body = render_rejection_comment(&v);
        assert!(body.starts_with(FAILURE_HEADER));
        assert!(body.contains("[artifact-type] `logo.png`"));
        assert!(body.contains("[file-limit] `a.js`"));
    }
}
