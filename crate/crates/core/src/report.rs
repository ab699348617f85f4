//! Metric tables and plot-ready series.
//!
//! Output files (tab-separated, header row first):
//!
//! | file | columns |
//! |------|---------|
//! | `summary.tsv` | `cohort teams_total teams_using_ai prs_total prs_success prs_failed prs_none prs_actioned action_rate action_rate_pct commits_total comments_total bot_comments_total prs_outside_semester` |
//! | `composition_<cohort>.tsv` | `week n_success n_failed n_none n_total` |
//! | `action_rate_<cohort>.tsv` | `week action_rate action_rate_pct n_success n_actioned` |
//!
//! plus `digest.md`. Rates are raw fractions, percentages have one decimal.
//! An undefined rate (no successful reviews) is an empty field.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::domain::{CohortCalendar, WeekIndex};
use crate::telemetry::{
    summarize, weekly_metrics, ClassifiedPr, CohortSummary, SummaryError, TeamMap, TeamsUsingRule,
    WeeklyMetrics,
};

pub const SUMMARY_FILE: &str = "summary.tsv";
pub const DIGEST_FILE: &str = "digest.md";

const SUMMARY_HEADER: [&str; 14] = [
    "cohort",
    "teams_total",
    "teams_using_ai",
    "prs_total",
    "prs_success",
    "prs_failed",
    "prs_none",
    "prs_actioned",
    "action_rate",
    "action_rate_pct",
    "commits_total",
    "comments_total",
    "bot_comments_total",
    "prs_outside_semester",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("summary table: {0}")]
    Parse(String),
}

/// Everything reported for one cohort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortReport {
    pub label: String,
    pub n_weeks: u32,
    pub summary: CohortSummary,
    /// Weeks 1..=n_weeks, then an `OutsideSemester` row when non-empty.
    pub weekly: Vec<WeeklyMetrics>,
}

impl CohortReport {
    pub fn build(
        classified: &[ClassifiedPr],
        cal: &CohortCalendar,
        teams: &TeamMap,
        rule: TeamsUsingRule,
    ) -> Result<Self, SummaryError> {
        Ok(Self {
            label: cal.cohort_label().to_string(),
            n_weeks: cal.n_weeks(),
            summary: summarize(classified, teams, rule)?,
            weekly: weekly_metrics(classified, cal),
        })
    }

    fn in_semester(&self) -> impl Iterator<Item = &WeeklyMetrics> {
        self.weekly
            .iter()
            .filter(|w| w.week != WeekIndex::OutsideSemester)
    }

    pub fn outside_semester(&self) -> u64 {
        self.weekly
            .iter()
            .filter(|w| w.week == WeekIndex::OutsideSemester)
            .map(WeeklyMetrics::n_total)
            .sum()
    }

    fn week_row(&self, week: u32) -> WeeklyMetrics {
        self.in_semester()
            .find(|w| w.week == WeekIndex::Week(week))
            .copied()
            .unwrap_or_else(|| WeeklyMetrics::empty(WeekIndex::Week(week)))
    }

    /// (week, n_success, n_failed, n_none) for every semester week.
    pub fn composition_series(&self) -> Vec<(u32, u64, u64, u64)> {
        (1..=self.n_weeks)
            .map(|w| {
                let row = self.week_row(w);
                (w, row.n_success, row.n_failed, row.n_none)
            })
            .collect()
    }

    /// (week, rate, weight) where the weight is that week's successful reviews.
    pub fn action_rate_series(&self) -> Vec<(u32, Option<f64>, u64)> {
        (1..=self.n_weeks)
            .map(|w| {
                let row = self.week_row(w);
                (w, row.action_rate(), row.n_success)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReportBundle {
    pub cohorts: Vec<CohortReport>,
}

fn fmt_rate(rate: Option<f64>) -> String {
    rate.map(|r| r.to_string()).unwrap_or_default()
}

fn fmt_pct(rate: Option<f64>) -> String {
    rate.map(|r| format!("{:.1}", r * 100.0))
        .unwrap_or_default()
}

/// Cohort label made safe for a file name.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn tsv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, ReportError> {
    csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(|e| csv_io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> ReportError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), ReportError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = tsv_writer(path)?;
    w.write_record(header).map_err(|e| csv_io(path, e))?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>())
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| ReportError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Writes every report file into `out_dir` and returns their paths.
pub fn emit(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let summary_path = out_dir.join(SUMMARY_FILE);
    write_rows(
        &summary_path,
        &SUMMARY_HEADER,
        bundle.cohorts.iter().map(|c| {
            let s = &c.summary;
            let rate = s.action_rate_overall();
            vec![
                c.label.clone(),
                s.teams_total.to_string(),
                s.teams_using_ai.to_string(),
                s.prs_total.to_string(),
                s.prs_success.to_string(),
                s.prs_failed.to_string(),
                s.prs_none.to_string(),
                s.prs_actioned.to_string(),
                fmt_rate(rate),
                fmt_pct(rate),
                s.commits_total.to_string(),
                s.comments_total.to_string(),
                s.bot_comments_total.to_string(),
                c.outside_semester().to_string(),
            ]
        }),
    )?;
    written.push(summary_path);

    for c in &bundle.cohorts {
        let stem = file_stem(&c.label);
        let path = out_dir.join(format!("composition_{stem}.tsv"));
        write_rows(
            &path,
            &["week", "n_success", "n_failed", "n_none", "n_total"],
            c.composition_series().into_iter().map(|(w, s, f, n)| {
                vec![
                    w.to_string(),
                    s.to_string(),
                    f.to_string(),
                    n.to_string(),
                    (s + f + n).to_string(),
                ]
            }),
        )?;
        written.push(path);

        let path = out_dir.join(format!("action_rate_{stem}.tsv"));
        write_rows(
            &path,
            &[
                "week",
                "action_rate",
                "action_rate_pct",
                "n_success",
                "n_actioned",
            ],
            (1..=c.n_weeks).map(|w| {
                let row = c.week_row(w);
                vec![
                    w.to_string(),
                    fmt_rate(row.action_rate()),
                    fmt_pct(row.action_rate()),
                    row.n_success.to_string(),
                    row.n_actioned.to_string(),
                ]
            }),
        )?;
        written.push(path);
    }

    let digest_path = out_dir.join(DIGEST_FILE);
    std::fs::write(&digest_path, render_digest(bundle)).map_err(|source| ReportError::Io {
        path: digest_path.clone(),
        source,
    })?;
    written.push(digest_path);
    Ok(written)
}

/// Reads `summary.tsv` back into (cohort label, summary) pairs.
pub fn parse_summary_tsv(text: &str) -> Result<Vec<(String, CohortSummary)>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| ReportError::Parse(e.to_string()))?
        .clone();
    if header.iter().ne(SUMMARY_HEADER.iter().copied()) {
        return Err(ReportError::Parse(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ReportError::Parse(e.to_string()))?;
        let num = |i: usize| -> Result<u64, ReportError> {
            record[i].parse().map_err(|_| {
                ReportError::Parse(format!(
                    "column {} is not a count: {:?}",
                    SUMMARY_HEADER[i], &record[i]
                ))
            })
        };
        let summary = CohortSummary {
            teams_total: num(1)?,
            teams_using_ai: num(2)?,
            prs_total: num(3)?,
            prs_success: num(4)?,
            prs_failed: num(5)?,
            prs_none: num(6)?,
            prs_actioned: num(7)?,
            commits_total: num(10)?,
            comments_total: num(11)?,
            bot_comments_total: num(12)?,
        };
        let rate = &record[8];
        let expected = fmt_rate(summary.action_rate_overall());
        if rate != expected {
            return Err(ReportError::Parse(format!(
                "action_rate {rate:?} disagrees with counts ({expected:?})"
            )));
        }
        out.push((record[0].to_string(), summary));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricDelta {
    pub metric: &'static str,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// b - a
    pub abs_delta: Option<f64>,
    /// b / a
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeekFailureDelta {
    pub week: u32,
    pub failed_a: u64,
    pub failed_b: u64,
    pub dropped_to_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortComparison {
    pub label_a: String,
    pub label_b: String,
    pub metrics: Vec<MetricDelta>,
    pub weeks: Vec<WeekFailureDelta>,
    /// Cohort `a` had failed attempts and cohort `b` had none.
    pub zero_friction: bool,
}

impl CohortComparison {
    pub fn metric(&self, name: &str) -> Option<&MetricDelta> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

/// Deltas from cohort `a` to cohort `b`. Weeks missing on one side count as
/// empty.
pub fn compare_cohorts(a: &CohortReport, b: &CohortReport) -> CohortComparison {
    let (sa, sb) = (&a.summary, &b.summary);
    let count = |x: u64| Some(x as f64);
    let pairs: [(&'static str, Option<f64>, Option<f64>); 9] = [
        ("teams_total", count(sa.teams_total), count(sb.teams_total)),
        (
            "teams_using_ai",
            count(sa.teams_using_ai),
            count(sb.teams_using_ai),
        ),
        ("prs_total", count(sa.prs_total), count(sb.prs_total)),
        ("prs_success", count(sa.prs_success), count(sb.prs_success)),
        ("prs_failed", count(sa.prs_failed), count(sb.prs_failed)),
        (
            "prs_actioned",
            count(sa.prs_actioned),
            count(sb.prs_actioned),
        ),
        (
            "action_rate",
            sa.action_rate_overall(),
            sb.action_rate_overall(),
        ),
        (
            "commits_total",
            count(sa.commits_total),
            count(sb.commits_total),
        ),
        (
            "comments_total",
            count(sa.comments_total),
            count(sb.comments_total),
        ),
    ];
    let metrics = pairs
        .into_iter()
        .map(|(metric, va, vb)| {
            let (abs_delta, ratio) = match (va, vb) {
                (Some(x), Some(y)) => (Some(y - x), (x != 0.0).then(|| y / x)),
                _ => (None, None),
            };
            MetricDelta {
                metric,
                a: va,
                b: vb,
                abs_delta,
                ratio,
            }
        })
        .collect();

    let weeks: BTreeSet<u32> = (1..=a.n_weeks.max(b.n_weeks)).collect();
    let weeks = weeks
        .into_iter()
        .map(|w| {
            let failed_a = a.week_row(w).n_failed;
            let failed_b = b.week_row(w).n_failed;
            WeekFailureDelta {
                week: w,
                failed_a,
                failed_b,
                dropped_to_zero: failed_a > 0 && failed_b == 0,
            }
        })
        .collect();

    CohortComparison {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        metrics,
        weeks,
        zero_friction: sa.prs_failed > 0 && sb.prs_failed == 0,
    }
}

fn opt_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
        Some(v) => format!("{v:.3}"),
        None => "n/a".into(),
    }
}

pub fn render_digest(bundle: &ReportBundle) -> String {
    let mut out = String::from("# Engagement report\n");
    if bundle.cohorts.is_empty() {
        out.push_str("\nNo cohorts.\n");
        return out;
    }

    out.push_str("\n## Summary\n\n| Metric |");
    for c in &bundle.cohorts {
        let _ = write!(out, " {} |", c.label);
    }
    out.push_str("\n|---|");
    for _ in &bundle.cohorts {
        out.push_str("---:|");
    }
    out.push('\n');
    type Cell = fn(&CohortReport) -> String;
    let rows: [(&str, Cell); 11] = [
        ("Participating teams", |c| c.summary.teams_total.to_string()),
        ("Teams using AI tool", |c| {
            c.summary.teams_using_ai.to_string()
        }),
        ("Total pull requests", |c| c.summary.prs_total.to_string()),
        ("PRs with successful AI review", |c| {
            c.summary.prs_success.to_string()
        }),
        ("PRs with failed AI attempt", |c| {
            c.summary.prs_failed.to_string()
        }),
        ("Actioned PRs", |c| c.summary.prs_actioned.to_string()),
        ("Overall action rate (%)", |c| {
            let p = fmt_pct(c.summary.action_rate_overall());
            if p.is_empty() {
                "n/a".into()
            } else {
                p
            }
        }),
        ("Total commits in PRs", |c| {
            c.summary.commits_total.to_string()
        }),
        ("Total comments in PRs", |c| {
            c.summary.comments_total.to_string()
        }),
        ("  of which bot comments", |c| {
            c.summary.bot_comments_total.to_string()
        }),
        ("PRs created outside the semester", |c| {
            c.outside_semester().to_string()
        }),
    ];
    for (name, cell) in rows {
        let _ = write!(out, "| {name} |");
        for c in &bundle.cohorts {
            let _ = write!(out, " {} |", cell(c));
        }
        out.push('\n');
    }
    out.push_str("\nComment totals include bot comments.\n");

    for c in &bundle.cohorts {
        let _ = write!(
            out,
            "\n## Cohort {} by PR creation week\n\n| Week | Successful | Failed | None | Actioned | Action rate (%) |\n|---:|---:|---:|---:|---:|---:|\n",
            c.label
        );
        for w in 1..=c.n_weeks {
            let r = c.week_row(w);
            let pct = fmt_pct(r.action_rate());
            let _ = writeln!(
                out,
                "| {w} | {} | {} | {} | {} | {} |",
                r.n_success,
                r.n_failed,
                r.n_none,
                r.n_actioned,
                if pct.is_empty() { "n/a" } else { &pct }
            );
        }
    }

    for pair in bundle.cohorts.windows(2) {
        let cmp = compare_cohorts(&pair[0], &pair[1]);
        let _ = write!(
            out,
            "\n## {} vs {}\n\n| Metric | {} | {} | Delta | Ratio |\n|---|---:|---:|---:|---:|\n",
            cmp.label_a, cmp.label_b, cmp.label_a, cmp.label_b
        );
        for m in &cmp.metrics {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                m.metric,
                opt_num(m.a),
                opt_num(m.b),
                opt_num(m.abs_delta),
                opt_num(m.ratio)
            );
        }
        if cmp.zero_friction {
            let _ = writeln!(
                out,
                "\nFailed AI attempts fell from {} to zero.",
                pair[0].summary.prs_failed
            );
        }
        let dropped: Vec<String> = cmp
            .weeks
            .iter()
            .filter(|w| w.dropped_to_zero)
            .map(|w| w.week.to_string())
            .collect();
        if !dropped.is_empty() {
            let _ = writeln!(
                out,
                "\nWeeks whose failures dropped to zero: {}.",
                dropped.join(", ")
            );
        }
    }
    out
}
