use chrono::NaiveDate;

use super::{Chooser, Generator};
use crate::calendar::{days_in_month, DateFormat, MAX_YEAR};

/// Calendar dates with years in `0..=9999`, rendered in one of the
/// configured formats.
#[derive(Debug, Clone)]
pub struct DateGenerator {
    formats: Vec<DateFormat>,
}

impl DateGenerator {
    pub fn new(formats: Vec<DateFormat>) -> Self {
        let formats = if formats.is_empty() {
            vec![DateFormat::Iso]
        } else {
            formats
        };
        DateGenerator { formats }
    }

    pub fn formats(&self) -> &[DateFormat] {
        &self.formats
    }
}

impl Default for DateGenerator {
    fn default() -> Self {
        DateGenerator::new(vec![DateFormat::Iso])
    }
}

impl Generator for DateGenerator {
    fn name(&self) -> &'static str {
        "date"
    }

    fn generate(&self, chooser: &mut dyn Chooser) -> String {
        let format = if self.formats.len() > 1 {
            self.formats[chooser.choose("date.format", self.formats.len())]
        } else {
            self.formats[0]
        };
        let year = chooser.choose("date.year", MAX_YEAR as usize + 1) as i32;
        let month = chooser.choose("date.month", 12) as u32 + 1;
        let day = chooser.choose("date.day", days_in_month(year, month) as usize) as u32 + 1;
        let date = NaiveDate::from_ymd_opt(year, month, day).expect("day within month");
        format.render(date)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calendar::{is_leap, DateSyntax};
    use crate::rng::{derive, Stream};

    #[test]
    fn seed_snapshot() {
        let mut rng = derive(1, Stream::Custom(0), 0);
        assert_eq!(DateGenerator::default().sample(&mut rng), "7285-11-05");
    }

    #[test]
    fn february_respects_leap_rules() {
        let g = DateGenerator::default();
        let syntax = DateSyntax::default();
        let mut rng = derive(5, Stream::Custom(0), 0);
        let mut saw_feb = 0;
        for _ in 0..20_000 {
            let s = g.sample(&mut rng);
            let date = syntax.parse(&s).unwrap();
            use chrono::Datelike;
            if date.month() == 2 {
                saw_feb += 1;
                assert!(date.day() <= 29);
                if date.day() == 29 {
                    assert!(is_leap(date.year()), "{s}");
                }
            }
        }
        assert!(saw_feb > 0);
    }

    #[test]
    fn every_format_is_emitted() {
        let g = DateGenerator::new(DateFormat::ALL.to_vec());
        let mut rng = derive(9, Stream::Custom(0), 0);
        let samples: Vec<String> = (0..200).map(|_| g.sample(&mut rng)).collect();
        assert!(samples.iter().any(|s| s.contains('-')));
        assert!(samples.iter().any(|s| s.contains('/')));
        assert!(samples.iter().any(|s| s.contains(' ')));
    }
}
