//! Comparison sets built around an oracle: random valid samples and
//! hand-constructed invalid dates.

use chrono::NaiveDate;
use rand::Rng;

use super::{OracleError, ValidityOracle};
use crate::calendar::{days_in_month, is_leap, DateFormat, DateSyntax, MAX_YEAR, MONTH_NAMES};
use crate::candidate::{Candidate, Origin, Role, TestSet};
use crate::generators::Generator;
use crate::rng::SearchRng;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("only {found} of {wanted} distinct samples after {attempts} attempts")]
    Exhausted {
        wanted: usize,
        found: usize,
        attempts: usize,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn attempt_limit(n: usize) -> usize {
    n * 100 + 100
}

/// `n` distinct generator samples, each confirmed valid by `oracle`.
pub fn random_valid_set(
    generator: &dyn Generator,
    oracle: &ValidityOracle,
    n: usize,
    rng: &mut SearchRng,
) -> Result<TestSet, SampleError> {
    let mut set = TestSet::new(Role::Random);
    let mut attempts = 0;
    while set.len() < n {
        if attempts == attempt_limit(n) {
            return Err(SampleError::Exhausted {
                wanted: n,
                found: set.len(),
                attempts,
            });
        }
        attempts += 1;
        let text = generator.sample(rng);
        if set.contains(&text) || !oracle.is_valid(&text)? {
            continue;
        }
        let index = set.len();
        set.insert(Candidate::new(text, true, Origin::Random { index }));
    }
    Ok(set)
}

/// Ways of nudging a valid date just across the boundary.
#[derive(Debug, Clone, Copy)]
enum Perturbation {
    MonthThirteen,
    MonthZero,
    DayPastMonthEnd,
    LeapDayInCommonYear,
}

const PERTURBATIONS: [Perturbation; 4] = [
    Perturbation::MonthThirteen,
    Perturbation::MonthZero,
    Perturbation::DayPastMonthEnd,
    Perturbation::LeapDayInCommonYear,
];

/// Renders `(year, month, day)` even when they form no real date. Months
/// outside 1..=12 cannot be written with a month name.
fn render_fields(format: DateFormat, year: i32, month: u32, day: u32) -> Option<String> {
    Some(match format {
        DateFormat::Iso => format!("{year:04}-{month:02}-{day:02}"),
        DateFormat::Us => format!("{month:02}/{day:02}/{year:04}"),
        DateFormat::DayMonthName => {
            let name = MONTH_NAMES.get((month as usize).checked_sub(1)?)?;
            format!("{day} {name} {year:04}")
        }
    })
}

/// `n` invalid date strings built by perturbing random valid dates: month
/// 13 or 00, the day after the last of the month, or 29 February in a common
/// year. Every member is confirmed invalid by the date oracle.
pub fn reference_invalid_dates(
    n: usize,
    syntax: &DateSyntax,
    rng: &mut SearchRng,
) -> Result<TestSet, SampleError> {
    let oracle = ValidityOracle::date(syntax.clone());
    let format = syntax.formats.first().copied().unwrap_or(DateFormat::Iso);
    let mut set = TestSet::new(Role::ReferenceInvalid);
    let mut attempts = 0;
    while set.len() < n {
        if attempts == attempt_limit(n) {
            return Err(SampleError::Exhausted {
                wanted: n,
                found: set.len(),
                attempts,
            });
        }
        attempts += 1;
        let year = rng.random_range(0..=MAX_YEAR);
        let month = rng.random_range(1..=12u32);
        let day = rng.random_range(1..=days_in_month(year, month));
        debug_assert!(NaiveDate::from_ymd_opt(year, month, day).is_some());

        let fields = match PERTURBATIONS[rng.random_range(0..PERTURBATIONS.len())] {
            Perturbation::MonthThirteen => (year, 13, day),
            Perturbation::MonthZero => (year, 0, day),
            Perturbation::DayPastMonthEnd => (year, month, days_in_month(year, month) + 1),
            Perturbation::LeapDayInCommonYear => {
                let mut y = year;
                while is_leap(y) {
                    y = (y + 1) % (MAX_YEAR + 1);
                }
                (y, 2, 29)
            }
        };
        let Some(text) = render_fields(format, fields.0, fields.1, fields.2) else {
            continue;
        };
        if set.contains(&text) || oracle.is_valid(&text)? {
            continue;
        }
        let index = set.len();
        set.insert(Candidate::new(
            text,
            false,
            Origin::ReferenceInvalid { index },
        ));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::DateGenerator;
    use crate::rng::{derive, Stream};

    #[test]
    fn reference_invalid_dates_are_invalid_and_near_miss() {
        let syntax = DateSyntax::default();
        let mut rng = derive(1, Stream::ReferenceInvalid, 0);
        let set = reference_invalid_dates(200, &syntax, &mut rng).unwrap();
        assert_eq!(set.len(), 200);
        let oracle = ValidityOracle::date(syntax);
        assert!(set
            .iter()
            .all(|c| !c.valid && !oracle.is_valid(&c.text).unwrap()));
        assert!(set.iter().any(|c| c.text[5..].starts_with("13-")));
        assert!(set.iter().any(|c| c.text[5..].starts_with("00-")));
        assert!(set.iter().any(|c| c.text.ends_with("-02-29")));
    }

    #[test]
    fn reference_invalid_dates_empty() {
        let mut rng = derive(1, Stream::ReferenceInvalid, 0);
        assert!(reference_invalid_dates(0, &DateSyntax::default(), &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn month_name_format_skips_unnameable_months() {
        let syntax = DateSyntax {
            formats: vec![DateFormat::DayMonthName],
            flexible_widths: false,
        };
        let mut rng = derive(2, Stream::ReferenceInvalid, 0);
        let set = reference_invalid_dates(50, &syntax, &mut rng).unwrap();
        let oracle = ValidityOracle::date(syntax);
        assert!(set.iter().all(|c| !oracle.is_valid(&c.text).unwrap()));
    }

    #[test]
    fn random_valid_set_is_valid_distinct_and_seeded() {
        let g = DateGenerator::default();
        let oracle = ValidityOracle::date(DateSyntax::default());
        let draw = || {
            let mut rng = derive(3, Stream::RandomSet, 0);
            random_valid_set(&g, &oracle, 100, &mut rng).unwrap()
        };
        let a = draw();
        assert_eq!(a.len(), 100);
        assert!(a.iter().all(|c| oracle.is_valid(&c.text).unwrap()));
        let b = draw();
        assert!(a.strings().eq(b.strings()));
    }

    #[test]
    fn random_valid_set_reports_exhaustion() {
        #[derive(Debug)]
        struct Never;
        impl crate::oracles::Sut for Never {
            fn check(&self, _: &str) -> Result<crate::oracles::OracleVerdict, OracleError> {
                Ok(crate::oracles::OracleVerdict::invalid("never"))
            }
        }
        let oracle = ValidityOracle::new("never", Never);
        let mut rng = derive(3, Stream::RandomSet, 0);
        let err = random_valid_set(&DateGenerator::default(), &oracle, 2, &mut rng).unwrap_err();
        assert!(matches!(err, SampleError::Exhausted { found: 0, .. }));
    }
}
