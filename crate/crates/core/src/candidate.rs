//! Candidates and role-tagged, duplicate-free test sets.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Where a candidate came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// Member of the initial test set handed to step 1.
    Initial { seed: u64, index: usize },
    /// Accepted by the distance-maximising search in step 1.
    Step1 { seed: u64, index: usize },
    /// Produced by the property-switching walk in step 2.
    Step2 {
        seed_index: usize,
        step_index: usize,
        operator: String,
    },
    /// Unoptimised generator sample used as a comparison set.
    Random { index: usize },
    /// Hand-constructed invalid input near the boundary.
    ReferenceInvalid { index: usize },
}

impl Origin {
    pub fn tag(&self) -> &'static str {
        match self {
            Origin::Initial { .. } => "initial",
            Origin::Step1 { .. } => "step1",
            Origin::Step2 { .. } => "step2",
            Origin::Random { .. } => "random",
            Origin::ReferenceInvalid { .. } => "reference_invalid",
        }
    }
}

/// A string genotype with its oracle verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub text: String,
    pub valid: bool,
    pub origin: Origin,
}

impl Candidate {
    pub fn new(text: impl Into<String>, valid: bool, origin: Origin) -> Self {
        Candidate {
            text: text.into(),
            valid,
            origin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Tset,
    Mvs,
    Mis,
    Random,
    ReferenceInvalid,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Tset => "tset",
            Role::Mvs => "mvs",
            Role::Mis => "mis",
            Role::Random => "random",
            Role::ReferenceInvalid => "reference_invalid",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered collection of candidates. Insertion keeps the first occurrence of
/// each string and silently drops later duplicates.
#[derive(Debug, Clone)]
pub struct TestSet {
    role: Role,
    candidates: Vec<Candidate>,
    seen: HashSet<String>,
}

impl TestSet {
    pub fn new(role: Role) -> Self {
        TestSet {
            role,
            candidates: Vec::new(),
            seen: HashSet::new(),
        }
    }

    pub fn from_candidates(role: Role, candidates: impl IntoIterator<Item = Candidate>) -> Self {
        let mut set = TestSet::new(role);
        set.extend(candidates);
        set
    }

    /// Builds a set from bare strings; used by tests and re-analysis.
    pub fn from_strings<S: AsRef<str>>(role: Role, valid: bool, strings: &[S]) -> Self {
        TestSet::from_candidates(
            role,
            strings
                .iter()
                .enumerate()
                .map(|(index, s)| Candidate::new(s.as_ref(), valid, Origin::Random { index })),
        )
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Returns `true` if the candidate was new.
    pub fn insert(&mut self, candidate: Candidate) -> bool {
        if self.seen.contains(&candidate.text) {
            return false;
        }
        self.seen.insert(candidate.text.clone());
        self.candidates.push(candidate);
        true
    }

    pub fn contains(&self, text: &str) -> bool {
        self.seen.contains(text)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Candidate> {
        self.candidates.iter()
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn strings(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.text.as_str())
    }
}

impl Extend<Candidate> for TestSet {
    fn extend<T: IntoIterator<Item = Candidate>>(&mut self, iter: T) {
        for c in iter {
            self.insert(c);
        }
    }
}

impl<'a> IntoIterator for &'a TestSet {
    type Item = &'a Candidate;
    type IntoIter = std::slice::Iter<'a, Candidate>;

    fn into_iter(self) -> Self::IntoIter {
        self.candidates.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_first_occurrence() {
        let mut set = TestSet::new(Role::Mvs);
        assert!(set.insert(Candidate::new("a", true, Origin::Random { index: 0 })));
        assert!(set.insert(Candidate::new("b", true, Origin::Random { index: 1 })));
        assert!(!set.insert(Candidate::new("a", true, Origin::Random { index: 2 })));
        assert_eq!(set.len(), 2);
        assert_eq!(set.candidates()[0].origin, Origin::Random { index: 0 });
        assert_eq!(set.strings().collect::<Vec<_>>(), ["a", "b"]);
    }
}
