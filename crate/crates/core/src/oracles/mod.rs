//! Validity oracles.
//!
//! An input is valid when the system under test processes it without
//! failing. Every in-process oracle is a parse-or-fail check: the verdict is
//! the contract, the parser behind it is configuration.

mod command;
mod sets;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

pub use command::{CommandOracle, CommandSpec, DEFAULT_TIMEOUT_MS};
pub use sets::{random_valid_set, reference_invalid_dates, SampleError};

use crate::calendar::DateSyntax;

pub const ORACLE_NAMES: [&str; 5] = ["date", "json", "xml", "regex", "command"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub valid: bool,
    /// Parser diagnostic, present only for invalid inputs.
    pub detail: Option<String>,
}

impl OracleVerdict {
    pub fn valid() -> Self {
        OracleVerdict {
            valid: true,
            detail: None,
        }
    }

    pub fn invalid(detail: impl fmt::Display) -> Self {
        OracleVerdict {
            valid: false,
            detail: Some(detail.to_string()),
        }
    }
}

impl<E: fmt::Display> From<Result<(), E>> for OracleVerdict {
    fn from(r: Result<(), E>) -> Self {
        match r {
            Ok(()) => OracleVerdict::valid(),
            Err(e) => OracleVerdict::invalid(e),
        }
    }
}

/// Configuration failure of an oracle; never produced for bad inputs.
#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("failed to launch `{command}`: {source}")]
    Launch {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("i/o with `{command}` failed: {source}")]
    Io {
        command: String,
        #[source]
        source: std::io::Error,
    },
}

/// A system under test reduced to its accept/reject behaviour.
pub trait Sut: Send + Sync + fmt::Debug {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError>;
}

#[derive(Debug, Clone, Default)]
pub struct DateSut {
    pub syntax: DateSyntax,
}

impl Sut for DateSut {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        Ok(self.syntax.parse(input).map(|_| ()).into())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct JsonSut;

impl Sut for JsonSut {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        Ok(serde_json::from_str::<serde_json::Value>(input)
            .map(|_| ())
            .into())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct XmlSut;

impl Sut for XmlSut {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        Ok(roxmltree::Document::parse(input).map(|_| ()).into())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RegexSut;

impl Sut for RegexSut {
    fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        Ok(regex::Regex::new(input).map(|_| ()).into())
    }
}

/// A named [`Sut`] with a running count of evaluations.
#[derive(Debug)]
pub struct ValidityOracle {
    name: String,
    sut: Box<dyn Sut>,
    evaluations: AtomicU64,
}

impl ValidityOracle {
    pub fn new(name: impl Into<String>, sut: impl Sut + 'static) -> Self {
        ValidityOracle {
            name: name.into(),
            sut: Box::new(sut),
            evaluations: AtomicU64::new(0),
        }
    }

    pub fn date(syntax: DateSyntax) -> Self {
        ValidityOracle::new("date", DateSut { syntax })
    }

    pub fn json() -> Self {
        ValidityOracle::new("json", JsonSut)
    }

    pub fn xml() -> Self {
        ValidityOracle::new("xml", XmlSut)
    }

    pub fn regex() -> Self {
        ValidityOracle::new("regex", RegexSut)
    }

    pub fn command(spec: CommandSpec) -> Self {
        ValidityOracle::new("command", CommandOracle::new(spec))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn check(&self, input: &str) -> Result<OracleVerdict, OracleError> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        self.sut.check(input)
    }

    pub fn is_valid(&self, input: &str) -> Result<bool, OracleError> {
        self.check(input).map(|v| v.valid)
    }

    /// Checks arbitrary bytes, decoding invalid UTF-8 with replacement
    /// characters first.
    pub fn check_bytes(&self, input: &[u8]) -> Result<OracleVerdict, OracleError> {
        self.check(&String::from_utf8_lossy(input))
    }

    pub fn evaluation_count(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid(o: &ValidityOracle, s: &str) -> bool {
        o.is_valid(s).unwrap()
    }

    #[test]
    fn date_examples() {
        let o = ValidityOracle::date(DateSyntax::default());
        assert!(valid(&o, "2020-02-29"));
        assert!(!valid(&o, "2019-02-29"));
        assert!(!valid(&o, ""));
        assert_eq!(o.evaluation_count(), 3);
        let v = o.check("2019-02-29").unwrap();
        assert!(v.detail.is_some());
        assert_eq!(o.check("2019-02-28").unwrap(), OracleVerdict::valid());
    }

    #[test]
    fn json_examples() {
        let o = ValidityOracle::json();
        assert!(valid(&o, "{}"));
        assert!(!valid(&o, "{"));
        assert!(valid(&o, "[1,2,3]"));
    }

    #[test]
    fn xml_examples() {
        let o = ValidityOracle::xml();
        assert!(valid(&o, "<a>1</a>"));
        assert!(!valid(&o, "<a>"));
        assert!(!valid(&o, ""));
        assert!(!valid(&o, "<a></b>"));
        assert!(!valid(&o, "<a/><b/>"));
    }

    #[test]
    fn regex_examples() {
        let o = ValidityOracle::regex();
        assert!(valid(&o, "a+b*"));
        assert!(!valid(&o, "("));
        assert!(valid(&o, "[a-z]{2,3}"));
    }
}
