use std::fmt;

use chrono::{Datelike, NaiveDate, NaiveDateTime, Weekday};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

use super::Instant;

pub const DEFAULT_SEMESTER_WEEKS: u32 = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalendarError {
    #[error("unknown timezone {0:?}")]
    UnknownTimezone(String),
    #[error("week 1 must start on a Monday, {0} is a {1}")]
    NotMonday(NaiveDate, Weekday),
    #[error("a semester needs at least one week")]
    NoWeeks,
}

/// Semester week an event falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeekIndex {
    Week(u32),
    OutsideSemester,
}

impl WeekIndex {
    pub fn number(self) -> Option<u32> {
        match self {
            Self::Week(n) => Some(n),
            Self::OutsideSemester => None,
        }
    }
}

impl fmt::Display for WeekIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Week(n) => write!(f, "{n}"),
            Self::OutsideSemester => f.write_str("outside"),
        }
    }
}

/// A strict semester grid: `n_weeks` consecutive Monday-to-Monday windows,
/// starting at local midnight of `week1_monday` in `timezone_name`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCalendar", into = "RawCalendar")]
pub struct CohortCalendar {
    cohort_label: String,
    week1_monday: NaiveDate,
    timezone_name: String,
    tz: Tz,
    n_weeks: u32,
}

#[derive(Serialize, Deserialize)]
struct RawCalendar {
    cohort_label: String,
    week1_monday: NaiveDate,
    timezone: String,
    #[serde(default = "default_weeks")]
    n_weeks: u32,
}

fn default_weeks() -> u32 {
    DEFAULT_SEMESTER_WEEKS
}

impl TryFrom<RawCalendar> for CohortCalendar {
    type Error = CalendarError;

    fn try_from(raw: RawCalendar) -> Result<Self, Self::Error> {
        Self::new(
            raw.cohort_label,
            raw.week1_monday,
            &raw.timezone,
            raw.n_weeks,
        )
    }
}

impl From<CohortCalendar> for RawCalendar {
    fn from(cal: CohortCalendar) -> Self {
        Self {
            cohort_label: cal.cohort_label,
            week1_monday: cal.week1_monday,
            timezone: cal.timezone_name,
            n_weeks: cal.n_weeks,
        }
    }
}

impl CohortCalendar {
    pub fn new(
        cohort_label: impl Into<String>,
        week1_monday: NaiveDate,
        timezone_name: &str,
        n_weeks: u32,
    ) -> Result<Self, CalendarError> {
        let tz: Tz = timezone_name
            .parse()
            .map_err(|_| CalendarError::UnknownTimezone(timezone_name.to_string()))?;
        if week1_monday.weekday() != Weekday::Mon {
            return Err(CalendarError::NotMonday(
                week1_monday,
                week1_monday.weekday(),
            ));
        }
        if n_weeks == 0 {
            return Err(CalendarError::NoWeeks);
        }
        Ok(Self {
            cohort_label: cohort_label.into(),
            week1_monday,
            timezone_name: timezone_name.to_string(),
            tz,
            n_weeks,
        })
    }

    /// Semester 1 2023: week 1 starts Monday 27 March, Melbourne time.
    pub fn preset_2023() -> Self {
        Self::new(
            "2023",
            date(2023, 3, 27),
            "Australia/Melbourne",
            DEFAULT_SEMESTER_WEEKS,
        )
        .expect("valid preset")
    }

    /// Semester 1 2024: week 1 starts Monday 25 March, Melbourne time.
    pub fn preset_2024() -> Self {
        Self::new(
            "2024",
            date(2024, 3, 25),
            "Australia/Melbourne",
            DEFAULT_SEMESTER_WEEKS,
        )
        .expect("valid preset")
    }

    pub fn preset(label: &str) -> Option<Self> {
        match label {
            "2023" => Some(Self::preset_2023()),
            "2024" => Some(Self::preset_2024()),
            _ => None,
        }
    }

    pub fn cohort_label(&self) -> &str {
        &self.cohort_label
    }

    pub fn week1_monday(&self) -> NaiveDate {
        self.week1_monday
    }

    pub fn timezone_name(&self) -> &str {
        &self.timezone_name
    }

    pub fn timezone(&self) -> Tz {
        self.tz
    }

    pub fn n_weeks(&self) -> u32 {
        self.n_weeks
    }

    /// Wall-clock time of `instant` in the calendar's timezone.
    pub fn to_local(&self, instant: Instant) -> NaiveDateTime {
        instant.as_utc().with_timezone(&self.tz).naive_local()
    }

    pub fn week_of(&self, instant: Instant) -> WeekIndex {
        self.week_of_local_date(self.to_local(instant).date())
    }

    pub fn week_of_local_date(&self, local: NaiveDate) -> WeekIndex {
        let days = (local - self.week1_monday).num_days();
        if days < 0 {
            return WeekIndex::OutsideSemester;
        }
        let week = days / 7 + 1;
        if week > i64::from(self.n_weeks) {
            WeekIndex::OutsideSemester
        } else {
            WeekIndex::Week(week as u32)
        }
    }

    pub fn weeks(&self) -> impl Iterator<Item = WeekIndex> {
        (1..=self.n_weeks).map(WeekIndex::Week)
    }

    /// Local Monday that opens `week` (1-based).
    pub fn week_start(&self, week: u32) -> Option<NaiveDate> {
        (1..=self.n_weeks)
            .contains(&week)
            .then(|| self.week1_monday + chrono::Days::new(7 * u64::from(week - 1)))
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}
