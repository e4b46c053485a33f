//! Genotype-level mutation operators.
//!
//! Positions are counted in Unicode scalar values. An operator applied to a
//! string without an applicable site returns the string unchanged and
//! reports `site: None`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationOperator {
    /// Digit `d` becomes `d + 1`; a `9` is removed.
    IncreaseInt,
    /// Digit `d` becomes `d - 1`; a `0` is removed.
    DecreaseInt,
    /// Digit `d` becomes `(d + 1) mod 10`.
    IncreaseIntKeepingSize,
    /// Digit `d` becomes `(d - 1) mod 10`.
    DecreaseIntKeepingSize,
    /// One character is deleted.
    DeleteChars1,
    /// One character is duplicated in place.
    CopyChars1,
}

/// Result of one operator application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mutation {
    pub output: String,
    /// Scalar position that was mutated; `None` when no site existed.
    pub site: Option<usize>,
}

impl MutationOperator {
    pub const ALL: [MutationOperator; 6] = [
        MutationOperator::IncreaseInt,
        MutationOperator::DecreaseInt,
        MutationOperator::IncreaseIntKeepingSize,
        MutationOperator::DecreaseIntKeepingSize,
        MutationOperator::DeleteChars1,
        MutationOperator::CopyChars1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationOperator::IncreaseInt => "increase_int",
            MutationOperator::DecreaseInt => "decrease_int",
            MutationOperator::IncreaseIntKeepingSize => "increase_int_keeping_size",
            MutationOperator::DecreaseIntKeepingSize => "decrease_int_keeping_size",
            MutationOperator::DeleteChars1 => "delete_chars_1",
            MutationOperator::CopyChars1 => "copy_chars_1",
        }
    }

    pub fn size_preserving(self) -> bool {
        matches!(
            self,
            MutationOperator::IncreaseIntKeepingSize | MutationOperator::DecreaseIntKeepingSize
        )
    }

    fn acts_on_digits(self) -> bool {
        !matches!(
            self,
            MutationOperator::DeleteChars1 | MutationOperator::CopyChars1
        )
    }

    fn applicable(self, c: char) -> bool {
        !self.acts_on_digits() || c.is_ascii_digit()
    }

    /// Scalar positions this operator may act on.
    pub fn sites(self, s: &str) -> Vec<usize> {
        s.chars()
            .enumerate()
            .filter(|&(_, c)| self.applicable(c))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn has_site(self, s: &str) -> bool {
        s.chars().any(|c| self.applicable(c))
    }

    /// Applies the operator at scalar position `pos`, or returns `None` if
    /// `pos` is not an applicable site.
    pub fn apply_at(self, s: &str, pos: usize) -> Option<String> {
        let (byte, c) = s.char_indices().nth(pos)?;
        if !self.applicable(c) {
            return None;
        }
        let before = &s[..byte];
        let after = &s[byte + c.len_utf8()..];
        let digit = c as u8;
        let replacement: Option<char> = match self {
            MutationOperator::IncreaseInt => (digit < b'9').then(|| (digit + 1) as char),
            MutationOperator::DecreaseInt => (digit > b'0').then(|| (digit - 1) as char),
            MutationOperator::IncreaseIntKeepingSize => {
                Some((b'0' + (digit - b'0' + 1) % 10) as char)
            }
            MutationOperator::DecreaseIntKeepingSize => {
                Some((b'0' + (digit - b'0' + 9) % 10) as char)
            }
            MutationOperator::DeleteChars1 => None,
            MutationOperator::CopyChars1 => {
                let mut out = String::with_capacity(s.len() + c.len_utf8());
                out.push_str(before);
                out.push(c);
                out.push(c);
                out.push_str(after);
                return Some(out);
            }
        };
        let mut out = String::with_capacity(s.len());
        out.push_str(before);
        if let Some(r) = replacement {
            out.push(r);
        }
        out.push_str(after);
        Some(out)
    }

    /// Applies the operator at a uniformly chosen applicable site.
    pub fn apply<R: Rng + ?Sized>(self, s: &str, rng: &mut R) -> Mutation {
        let sites = self.sites(s);
        if sites.is_empty() {
            return Mutation {
                output: s.to_owned(),
                site: None,
            };
        }
        let site = sites[rng.random_range(0..sites.len())];
        Mutation {
            output: self.apply_at(s, site).expect("site is applicable"),
            site: Some(site),
        }
    }
}

impl fmt::Display for MutationOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationOperator::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown mutation operator `{s}`"))
    }
}

pub const PRESET_NAMES: [&str; 3] = ["int", "int_keep_size", "chars"];

/// Non-empty list of operators; `mutate` picks one uniformly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutatorSet {
    name: String,
    operators: Vec<MutationOperator>,
}

impl MutatorSet {
    pub fn new(
        name: impl Into<String>,
        operators: Vec<MutationOperator>,
    ) -> Result<Self, EmptyMutatorSet> {
        if operators.is_empty() {
            return Err(EmptyMutatorSet);
        }
        Ok(MutatorSet {
            name: name.into(),
            operators,
        })
    }

    /// `int`, `int_keep_size` or `chars`.
    pub fn preset(name: &str) -> Option<Self> {
        use MutationOperator::*;
        let operators = match name {
            "int" => vec![IncreaseInt, DecreaseInt],
            "int_keep_size" => vec![IncreaseIntKeepingSize, DecreaseIntKeepingSize],
            "chars" => vec![DeleteChars1, CopyChars1],
            _ => return None,
        };
        Some(MutatorSet {
            name: name.to_owned(),
            operators,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn operators(&self) -> &[MutationOperator] {
        &self.operators
    }

    /// True if at least one operator can act on `s`.
    pub fn can_mutate(&self, s: &str) -> bool {
        self.operators.iter().any(|op| op.has_site(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("a mutator set needs at least one operator")]
pub struct EmptyMutatorSet;

/// Output of [`mutate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutateOutcome {
    pub output: String,
    pub operator: MutationOperator,
    pub no_site: bool,
}

/// Picks one operator uniformly and applies it.
pub fn mutate<R: Rng + ?Sized>(s: &str, ops: &MutatorSet, rng: &mut R) -> MutateOutcome {
    let operator = ops.operators[rng.random_range(0..ops.operators.len())];
    let Mutation { output, site } = operator.apply(s, rng);
    MutateOutcome {
        output,
        operator,
        no_site: site.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive, Stream};
    use MutationOperator::*;

    fn rng() -> crate::rng::SearchRng {
        derive(0, Stream::Custom(0), 0)
    }

    #[test]
    fn increase_int_examples() {
        assert_eq!(IncreaseInt.apply("2", &mut rng()).output, "3");
        assert_eq!(IncreaseInt.apply("9", &mut rng()).output, "");
        assert_eq!(IncreaseInt.apply("a5b", &mut rng()).output, "a6b");
        assert_eq!(IncreaseInt.apply("a5b", &mut rng()).site, Some(1));
    }

    #[test]
    fn decrease_int_examples() {
        assert_eq!(DecreaseInt.apply("5", &mut rng()).output, "4");
        assert_eq!(DecreaseInt.apply("0", &mut rng()).output, "");
        assert_eq!(DecreaseInt.apply("x0", &mut rng()).output, "x");
    }

    #[test]
    fn keeping_size_examples() {
        assert_eq!(IncreaseIntKeepingSize.apply_at("1999", 3).unwrap(), "1990");
        assert_eq!(IncreaseIntKeepingSize.apply("9", &mut rng()).output, "0");
        let m = IncreaseIntKeepingSize.apply("abc", &mut rng());
        assert_eq!((m.output.as_str(), m.site), ("abc", None));
        assert_eq!(DecreaseIntKeepingSize.apply("0", &mut rng()).output, "9");
        assert_eq!(DecreaseIntKeepingSize.apply_at("2020", 0).unwrap(), "1020");
        let m = DecreaseIntKeepingSize.apply("", &mut rng());
        assert_eq!((m.output.as_str(), m.site), ("", None));
    }

    #[test]
    fn char_operator_examples() {
        assert_eq!(DeleteChars1.apply_at("ab", 0).unwrap(), "b");
        assert_eq!(DeleteChars1.apply("x", &mut rng()).output, "");
        assert_eq!(DeleteChars1.apply("", &mut rng()).site, None);
        assert_eq!(CopyChars1.apply_at("ab", 1).unwrap(), "abb");
        assert_eq!(CopyChars1.apply("a", &mut rng()).output, "aa");
        assert_eq!(CopyChars1.apply_at("日本", 1).unwrap(), "日本本");
        assert_eq!(DeleteChars1.apply_at("日本", 0).unwrap(), "本");
    }

    #[test]
    fn apply_at_rejects_non_sites() {
        assert_eq!(IncreaseInt.apply_at("a5b", 0), None);
        assert_eq!(IncreaseInt.apply_at("a5b", 3), None);
        // Non-ASCII digits are not integer figures.
        assert_eq!(IncreaseInt.sites("٣"), Vec::<usize>::new());
    }

    #[test]
    fn mutate_dispatch() {
        let ops = MutatorSet::new("inc", vec![IncreaseInt]).unwrap();
        let out = mutate("7", &ops, &mut rng());
        assert_eq!(
            out,
            MutateOutcome {
                output: "8".into(),
                operator: IncreaseInt,
                no_site: false
            }
        );
        let ints = MutatorSet::preset("int").unwrap();
        let out = mutate("abc", &ints, &mut rng());
        assert!(out.no_site);
        assert_eq!(out.output, "abc");
        assert!(!ints.can_mutate("abc"));

        let chars = MutatorSet::preset("chars").unwrap();
        let a = mutate("hello world", &chars, &mut rng());
        let b = mutate("hello world", &chars, &mut rng());
        assert_eq!(a, b);
    }

    #[test]
    fn presets_and_names() {
        for name in PRESET_NAMES {
            assert_eq!(MutatorSet::preset(name).unwrap().name(), name);
        }
        assert!(MutatorSet::preset("bits").is_none());
        assert_eq!(MutatorSet::new("none", vec![]), Err(EmptyMutatorSet));
        for op in MutationOperator::ALL {
            assert_eq!(op.name().parse::<MutationOperator>().unwrap(), op);
        }
    }
}
