mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reviewloop_core::telemetry::{
    classify_all, overall_action_rate, weekly_metrics, ClassificationRules,
};
use reviewloop_core::{CohortCalendar, EngagementStatus, WeekIndex};
use support::{oracle_weekly, random_prs, Oracle};

#[test]
fn classification_and_weekly_counts_match_brute_force() {
    let oracle = Oracle::default();
    let rules = ClassificationRules::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..40 {
        let cal = if round % 2 == 0 {
            CohortCalendar::preset_2023()
        } else {
            CohortCalendar::preset_2024()
        };
        let prs = random_prs(&mut rng, &cal, 200, 40);
        let classified = classify_all(prs.clone(), &rules);

        for (pr, c) in prs.iter().zip(&classified) {
            let v = oracle.classify(pr);
            assert_eq!(c.status(), v.status, "{}#{}", pr.repo_id, pr.pr_number);
            assert_eq!(c.first_success_at(), v.first_success_at);
            assert_eq!(c.actioned(), v.actioned);
            assert_eq!(
                c.first_success_at().is_some(),
                c.status() == EngagementStatus::SuccessfulAiReview
            );
            assert!(!c.actioned() || c.status() == EngagementStatus::SuccessfulAiReview);
        }

        let expected = oracle_weekly(&oracle, &prs, &cal);
        let rows = weekly_metrics(&classified, &cal);
        for row in &rows {
            let slot = row.week.number().unwrap_or(0) as usize;
            let e = expected[slot];
            assert_eq!(
                (row.n_success, row.n_failed, row.n_none, row.n_actioned),
                (e.success, e.failed, e.none, e.actioned)
            );
            let oracle_rate = (e.success > 0).then(|| e.actioned as f64 / e.success as f64);
            assert_eq!(row.action_rate(), oracle_rate);
            if let Some(r) = row.action_rate() {
                assert!((0.0..=1.0).contains(&r));
            }
        }
        let outside_present = rows.iter().any(|r| r.week == WeekIndex::OutsideSemester);
        let e0 = expected[0];
        assert_eq!(outside_present, e0.success + e0.failed + e0.none > 0);

        let total_success: u64 = expected.iter().map(|w| w.success).sum();
        let total_actioned: u64 = expected.iter().map(|w| w.actioned).sum();
        let oracle_overall =
            (total_success > 0).then(|| total_actioned as f64 / total_success as f64);
        assert_eq!(overall_action_rate(&classified), oracle_overall);
    }
}
