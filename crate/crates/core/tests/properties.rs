use proptest::prelude::*;
use reviewloop_core::guardrails::{check_files, FileChange, GuardrailPolicy, RuleId};
use reviewloop_core::prompt::{chunk_payload, MIN_PAYLOAD_CHARS};

fn file_strategy() -> impl Strategy<Value = (String, u64, u64)> {
    (
        prop::sample::select(vec!["js", "py", "png", "zip", "md", "exe", "weird", ""]),
        "[a-z]{1,8}",
        0u64..1200,
        0u64..400,
    )
        .prop_map(|(ext, stem, a, r)| {
            let path = if ext.is_empty() {
                format!("src/{stem}")
            } else {
                format!("src/{stem}.{ext}")
            };
            (path, a, r)
        })
}

fn as_changes(files: &[(String, u64, u64)]) -> Vec<FileChange<'_>> {
    files
        .iter()
        .map(|(p, a, r)| FileChange::new(p, *a, *r))
        .collect()
}

/// Rules violated, computed directly from the policy numbers.
fn expected_rules(
    files: &[(String, u64, u64)],
    policy: &GuardrailPolicy,
) -> std::collections::BTreeSet<RuleId> {
    let mut rules = std::collections::BTreeSet::new();
    if files.len() > policy.max_files_per_review as usize {
        rules.insert(RuleId::Scope);
    }
    let total: u64 = files.iter().map(|(_, a, r)| a + r).sum();
    if total > policy.max_total_changed_lines
        || files
            .iter()
            .any(|(_, a, r)| a + r > policy.max_changed_lines_per_file)
    {
        rules.insert(RuleId::FileLimit);
    }
    for (p, _, _) in files {
        if let Some((_, ext)) = p.rsplit_once('.') {
            if !policy.allowed_extensions.contains(ext) {
                rules.insert(RuleId::ArtifactType);
            }
        }
    }
    rules
}

proptest! {
    #[test]
    fn verdicts_are_deterministic(files in prop::collection::vec(file_strategy(), 0..40)) {
        let policy = GuardrailPolicy::default();
        prop_assert_eq!(check_files(&as_changes(&files), &policy), check_files(&as_changes(&files), &policy));
    }

    #[test]
    fn every_violated_rule_is_reported(files in prop::collection::vec(file_strategy(), 0..40)) {
        let policy = GuardrailPolicy::default();
        let v = check_files(&as_changes(&files), &policy);
        prop_assert_eq!(v.rules(), expected_rules(&files, &policy));
        prop_assert_eq!(v.is_pass(), v.rejections().is_empty());
        prop_assert!(v.rejections().iter().all(|r| !r.message.trim().is_empty()));
    }

    #[test]
    fn adding_a_bad_file_never_passes(
        files in prop::collection::vec(file_strategy(), 0..10),
        bad in prop::sample::select(vec![("logo.png", 0u64), ("dump.zip", 0), ("huge.js", 5000)]),
    ) {
        let policy = GuardrailPolicy::default();
        let mut with_bad = files.clone();
        with_bad.push((bad.0.to_string(), bad.1, 0));
        prop_assert!(!check_files(&as_changes(&with_bad), &policy).is_pass());
    }

    #[test]
    fn chunks_partition_the_payload(text in "(\\PC{0,300}\n?){0,40}", limit in MIN_PAYLOAD_CHARS..700usize) {
        let chunks = chunk_payload(&text, limit).unwrap();
        prop_assert_eq!(chunks.concat(), text.clone());
        for (i, c) in chunks.iter().enumerate() {
            let n = c.chars().count();
            prop_assert!(n <= limit && n > 0);
            // A chunk ends mid-line only when the line alone is over the limit.
            if i + 1 < chunks.len() && !c.ends_with('\n') {
                let next_line = chunks[i + 1].split_inclusive('\n').next().unwrap();
                let line_len = c.rsplit('\n').next().unwrap().chars().count() + next_line.chars().count();
                prop_assert!(line_len > limit);
            }
        }
    }
}
