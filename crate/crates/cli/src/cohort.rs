use std::path::Path;

use anyhow::Context;
use reviewloop_core::domain::{BotLogins, DEFAULT_BOT_LOGINS};
use reviewloop_core::telemetry::{
    load_team_map, ClassificationRules, TeamMap, TeamsUsingRule, TEAMS_FILE,
};
use reviewloop_core::{CohortCalendar, PullRequestRecord};

use crate::{ClassifyOpts, UsageError};

/// `--calendar` takes a TOML file or a preset name (`2023`, `2024`).
pub fn load_calendar(arg: &str) -> anyhow::Result<CohortCalendar> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return toml::from_str(&text).with_context(|| format!("invalid calendar {arg}"));
    }
    CohortCalendar::preset(arg).ok_or_else(|| {
        UsageError(format!(
            "--calendar {arg:?} is neither a calendar file nor a preset (2023, 2024)"
        ))
        .into()
    })
}

impl ClassifyOpts {
    pub fn bot_logins(&self) -> BotLogins {
        if self.bot_logins.is_empty() {
            BotLogins::new(DEFAULT_BOT_LOGINS)
        } else {
            BotLogins::new(
                self.bot_logins
                    .iter()
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty()),
            )
        }
    }

    pub fn rules(&self) -> ClassificationRules {
        let mut rules = ClassificationRules {
            bot_logins: self.bot_logins(),
            ..ClassificationRules::default()
        };
        if let Some(h) = &self.success_header {
            rules.success_header = h.clone();
        }
        rules
    }

    pub fn teams_rule(&self) -> TeamsUsingRule {
        if self.strict_teams {
            TeamsUsingRule::SuccessfulReview
        } else {
            TeamsUsingRule::AnyAttempt
        }
    }
}

/// `teams.json` from the data directory; without one every repository is its own team.
pub fn team_map(data: &Path, prs: &[PullRequestRecord]) -> anyhow::Result<TeamMap> {
    let path = data.join(TEAMS_FILE);
    if path.is_file() {
        return Ok(load_team_map(&path)?);
    }
    tracing::warn!(
        "{} not found; treating each repository as a team",
        path.display()
    );
    Ok(prs
        .iter()
        .map(|p| (p.repo_id.clone(), p.repo_id.clone()))
        .collect())
}
