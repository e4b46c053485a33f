//! Calendar date formats shared by the date generator, the date oracle and
//! the day-distance metric.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

pub const MONTH_NAMES: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

pub const MAX_YEAR: i32 = 9999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateFormat {
    /// `YYYY-MM-DD`
    Iso,
    /// `D Month YYYY`, e.g. `7 March 2011`
    DayMonthName,
    /// `MM/DD/YYYY`
    Us,
}

impl DateFormat {
    pub const ALL: [DateFormat; 3] = [DateFormat::Iso, DateFormat::DayMonthName, DateFormat::Us];

    pub fn name(self) -> &'static str {
        match self {
            DateFormat::Iso => "iso",
            DateFormat::DayMonthName => "day_month_name",
            DateFormat::Us => "us",
        }
    }

    pub fn render(self, date: NaiveDate) -> String {
        let (y, m, d) = (date.year(), date.month(), date.day());
        match self {
            DateFormat::Iso => format!("{y:04}-{m:02}-{d:02}"),
            DateFormat::DayMonthName => format!("{d} {} {y:04}", MONTH_NAMES[m as usize - 1]),
            DateFormat::Us => format!("{m:02}/{d:02}/{y:04}"),
        }
    }
}

impl fmt::Display for DateFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DateFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DateFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown date format `{s}`"))
    }
}

/// Accepted date syntax: a set of formats plus a field-width policy.
///
/// With `flexible_widths` the numeric fields may be written with fewer
/// digits than the canonical rendering (`2020-1-5`, `5/3/812`); the
/// canonical rendering is always accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateSyntax {
    pub formats: Vec<DateFormat>,
    pub flexible_widths: bool,
}

impl Default for DateSyntax {
    fn default() -> Self {
        DateSyntax {
            formats: vec![DateFormat::Iso],
            flexible_widths: true,
        }
    }
}

impl DateSyntax {
    pub fn parse(&self, s: &str) -> Result<NaiveDate, DateParseError> {
        let mut last = DateParseError::NoFormat;
        for &format in &self.formats {
            match self.parse_as(format, s) {
                Ok(d) => return Ok(d),
                // Prefer a calendar error over a syntax mismatch.
                Err(e) if last == DateParseError::NoFormat || last == DateParseError::Syntax => {
                    last = e
                }
                Err(_) => {}
            }
        }
        Err(last)
    }

    pub fn parse_as(&self, format: DateFormat, s: &str) -> Result<NaiveDate, DateParseError> {
        let (year, month, day) = match format {
            DateFormat::Iso => {
                let [y, m, d] = split3(s, '-')?;
                (self.number(y, 4)?, self.number(m, 2)?, self.number(d, 2)?)
            }
            DateFormat::Us => {
                let [m, d, y] = split3(s, '/')?;
                (self.number(y, 4)?, self.number(m, 2)?, self.number(d, 2)?)
            }
            DateFormat::DayMonthName => {
                let [d, name, y] = split3(s, ' ')?;
                let month = MONTH_NAMES
                    .iter()
                    .position(|&n| n == name)
                    .ok_or(DateParseError::Syntax)? as u32
                    + 1;
                // The day is rendered unpadded, so it is always 1-2 digits.
                let day = digits(d, 1, 2)?;
                (self.number(y, 4)?, month, day)
            }
        };
        if year > MAX_YEAR as u32 {
            return Err(DateParseError::OutOfRange);
        }
        NaiveDate::from_ymd_opt(year as i32, month, day).ok_or(DateParseError::NoSuchDay)
    }

    fn number(&self, field: &str, width: usize) -> Result<u32, DateParseError> {
        if self.flexible_widths {
            digits(field, 1, width)
        } else {
            digits(field, width, width)
        }
    }
}

fn split3(s: &str, sep: char) -> Result<[&str; 3], DateParseError> {
    let mut parts = s.split(sep);
    match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), Some(c), None) => Ok([a, b, c]),
        _ => Err(DateParseError::Syntax),
    }
}

fn digits(field: &str, min: usize, max: usize) -> Result<u32, DateParseError> {
    if field.len() < min || field.len() > max || !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(DateParseError::Syntax);
    }
    field.parse().map_err(|_| DateParseError::Syntax)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum DateParseError {
    #[error("no date format configured")]
    NoFormat,
    #[error("input does not match any accepted date format")]
    Syntax,
    #[error("year outside 0..=9999")]
    OutOfRange,
    #[error("no such day in the calendar")]
    NoSuchDay,
}

pub fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strict() -> DateSyntax {
        DateSyntax {
            formats: DateFormat::ALL.to_vec(),
            flexible_widths: false,
        }
    }

    #[test]
    fn renders_and_parses_every_format() {
        let date = NaiveDate::from_ymd_opt(812, 3, 7).unwrap();
        for f in DateFormat::ALL {
            let s = f.render(date);
            assert_eq!(strict().parse_as(f, &s), Ok(date), "{s}");
        }
        assert_eq!(DateFormat::Iso.render(date), "0812-03-07");
        assert_eq!(DateFormat::DayMonthName.render(date), "7 March 0812");
        assert_eq!(DateFormat::Us.render(date), "03/07/0812");
    }

    #[test]
    fn leap_rules() {
        let s = strict();
        assert!(s.parse("2020-02-29").is_ok());
        assert_eq!(s.parse("2019-02-29"), Err(DateParseError::NoSuchDay));
        assert_eq!(s.parse("1900-02-29"), Err(DateParseError::NoSuchDay));
        assert!(s.parse("2000-02-29").is_ok());
        assert_eq!(s.parse("2020-13-01"), Err(DateParseError::NoSuchDay));
        assert_eq!(s.parse("2020-00-10"), Err(DateParseError::NoSuchDay));
        assert_eq!(s.parse("2020-04-31"), Err(DateParseError::NoSuchDay));
    }

    #[test]
    fn width_policy() {
        let flexible = DateSyntax::default();
        assert!(flexible.parse("2020-1-5").is_ok());
        assert!(flexible.parse("20-01-05").is_ok());
        assert!(strict().parse("2020-1-5").is_err());
        assert!(flexible.parse("2020-001-05").is_err());
        assert!(flexible.parse("2020--05").is_err());
        assert!(flexible.parse("+2020-01-05").is_err());
    }

    #[test]
    fn rejects_non_ascii_digits() {
        // Arabic-Indic digits are numeric but not part of the date syntax.
        assert!(DateSyntax::default().parse("٢٠٢٠-01-01").is_err());
        assert!(DateSyntax::default().parse("").is_err());
    }
}
