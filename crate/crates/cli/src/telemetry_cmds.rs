use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use reviewloop_bot::config::{BotConfig, Secret};
use reviewloop_bot::host::GitHubClient;
use reviewloop_bot::live_ingest::ingest_live;
use reviewloop_core::report::{emit, CohortReport, ReportBundle};
use reviewloop_core::telemetry::{
    classify_all, ingest_dir, write_dir, ClassifiedPr, Dataset, IngestReport, TEAMS_FILE,
};
use reviewloop_core::CohortCalendar;
use serde_json::json;

use crate::cohort::{load_calendar, team_map};
use crate::{ClassifyOpts, UsageError};

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "config"])))]
pub struct IngestArgs {
    /// Directory with prs.jsonl, comments.jsonl and commits.jsonl.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Bot config whose [host] repos are mined over the API.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Calendar file or preset name.
    #[arg(long)]
    calendar: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    bot_logins: Vec<String>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    calendar: String,
    /// Output directory; without it classified records go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    classify: ClassifyOpts,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Cohort data directory; repeat once per cohort.
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    /// Calendar for the matching --data, in the same order.
    #[arg(long, required = true)]
    calendar: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    classify: ClassifyOpts,
}

fn print_ingest(report: &IngestReport) {
    eprintln!(
        "prs {}/{}, comments {}/{}, commits {}/{} kept",
        report.prs.kept,
        report.prs.read,
        report.comments.kept,
        report.comments.read,
        report.commits.kept,
        report.commits.read
    );
    for issue in report.dropped.iter().take(20) {
        eprintln!("  dropped {}:{}: {}", issue.file, issue.line, issue.reason);
    }
    if report.dropped.len() > 20 {
        eprintln!("  ... and {} more", report.dropped.len() - 20);
    }
}

fn load(data: &Path, cal: CohortCalendar, opts: &ClassifyOpts) -> anyhow::Result<Dataset> {
    let (dataset, report) = ingest_dir(data, cal, &opts.bot_logins())
        .with_context(|| format!("ingesting {}", data.display()))?;
    print_ingest(&report);
    Ok(dataset)
}

fn create_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

pub fn ingest(args: IngestArgs) -> anyhow::Result<()> {
    let cal = load_calendar(&args.calendar)?;
    let opts = ClassifyOpts {
        bot_logins: args.bot_logins,
        ..ClassifyOpts::default()
    };
    let (dataset, report) = match (&args.data, &args.config) {
        (Some(data), _) => {
            let r = ingest_dir(data, cal, &opts.bot_logins())
                .with_context(|| format!("ingesting {}", data.display()))?;
            let teams = data.join(TEAMS_FILE);
            if teams.is_file() {
                create_dir(&args.out)?;
                fs::copy(&teams, args.out.join(TEAMS_FILE))?;
            }
            r
        }
        (None, Some(config)) => {
            let cfg = BotConfig::load(config)?;
            if cfg.host.repos.is_empty() {
                return Err(UsageError(format!(
                    "{} lists no [host] repos to mine",
                    config.display()
                ))
                .into());
            }
            let client =
                GitHubClient::new(&cfg.host.api_url, Secret::from_env(&cfg.host.token_env))?;
            tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?
                .block_on(ingest_live(
                    &client,
                    &cfg.host.repos,
                    cal,
                    &opts.bot_logins(),
                ))?
        }
        (None, None) => unreachable!("clap enforces a source"),
    };
    print_ingest(&report);
    create_dir(&args.out)?;
    write_dir(&args.out, &dataset.to_rows(), None)?;
    fs::write(
        args.out.join("ingest_report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!("{}", args.out.display());
    Ok(())
}

fn write_classified(
    out: impl Write,
    classified: &[ClassifiedPr],
    cal: &CohortCalendar,
) -> anyhow::Result<()> {
    let mut out = BufWriter::new(out);
    for c in classified {
        serde_json::to_writer(&mut out, &c.to_row(cal))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn weekly_tsv(report: &CohortReport) -> String {
    let mut s = String::from("week\tn_success\tn_failed\tn_none\tn_actioned\taction_rate\n");
    for w in &report.weekly {
        let week = w
            .week
            .number()
            .map(|n| n.to_string())
            .unwrap_or_else(|| "outside".into());
        let rate = w.action_rate().map(|r| r.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{week}\t{}\t{}\t{}\t{}\t{rate}\n",
            w.n_success, w.n_failed, w.n_none, w.n_actioned
        ));
    }
    s
}

pub fn analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let cal = load_calendar(&args.calendar)?;
    let dataset = load(&args.data, cal.clone(), &args.classify)?;
    let teams = team_map(&args.data, &dataset.prs)?;
    let classified = classify_all(dataset.prs, &args.classify.rules());
    let report = CohortReport::build(&classified, &cal, &teams, args.classify.teams_rule())?;
    let s = &report.summary;
    eprintln!(
        "cohort {}: {} PRs, {} successful, {} failed, {} actioned, action rate {}",
        report.label,
        s.prs_total,
        s.prs_success,
        s.prs_failed,
        s.prs_actioned,
        s.action_rate_overall()
            .map(|r| format!("{:.1}%", r * 100.0))
            .unwrap_or_else(|| "n/a".into())
    );
    match &args.out {
        None => write_classified(std::io::stdout().lock(), &classified, &cal)?,
        Some(out) => {
            create_dir(out)?;
            let file = fs::File::create(out.join("classified.jsonl"))?;
            write_classified(file, &classified, &cal)?;
            fs::write(out.join("weekly.tsv"), weekly_tsv(&report))?;
            let summary = json!({
                "cohort": report.label,
                "summary": report.summary,
                "action_rate_overall": report.summary.action_rate_overall(),
            });
            fs::write(
                out.join("summary.json"),
                serde_json::to_string_pretty(&summary)?,
            )?;
            println!("{}", out.display());
        }
    }
    Ok(())
}

pub fn report(args: ReportArgs) -> anyhow::Result<()> {
    if args.data.len() != args.calendar.len() {
        return Err(UsageError(format!(
            "got {} --data but {} --calendar; give one calendar per cohort",
            args.data.len(),
            args.calendar.len()
        ))
        .into());
    }
    let rules = args.classify.rules();
    let mut bundle = ReportBundle::default();
    for (data, cal_arg) in args.data.iter().zip(&args.calendar) {
        let cal = load_calendar(cal_arg)?;
        let dataset = load(data, cal.clone(), &args.classify)?;
        let teams = team_map(data, &dataset.prs)?;
        let classified = classify_all(dataset.prs, &rules);
        bundle.cohorts.push(CohortReport::build(
            &classified,
            &cal,
            &teams,
            args.classify.teams_rule(),
        )?);
    }
    for path in emit(&bundle, &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}
