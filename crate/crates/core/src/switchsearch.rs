//! Step 2: property-switching search.
//!
//! Starting from a valid seed, candidates are mutated one operator
//! application at a time and checked against the oracle. Every mutant lands
//! in the mutated valid set (MVS) or the mutated invalid set (MIS); whenever
//! a mutant's validity differs from the current candidate's, a switch is
//! recorded and the walk continues from the mutant. The walk thus oscillates
//! across the boundary, and each switch is a pair of inputs one mutation
//! apart on either side of it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidate::{Candidate, Origin, Role, TestSet};
use crate::mutation::{mutate, MutationOperator, MutatorSet};
use crate::oracles::{OracleError, ValidityOracle};
use crate::rng::{derive, SearchRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchBudget {
    pub target_switches: usize,
    /// Consecutive mutations without a validity flip before giving up.
    pub max_mutations_per_switch: usize,
    pub max_total_mutations: usize,
}

impl Default for SwitchBudget {
    fn default() -> Self {
        SwitchBudget {
            target_switches: 20,
            max_mutations_per_switch: 500,
            max_total_mutations: 5_000,
        }
    }
}

/// Which candidate the next mutation starts from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMode {
    /// Every mutant becomes the current candidate (a pure random walk).
    AdvanceAlways,
    /// The current candidate is mutated repeatedly until a mutant flips
    /// validity; only that mutant becomes current.
    AdvanceOnSwitch,
    /// Valid mutants and switches become current; an invalid mutant of an
    /// invalid candidate does not. The walk keeps drifting through valid
    /// space but never wanders deep into invalid space: every invalid
    /// candidate it records is within two edits of a valid one.
    #[default]
    AdvanceWhileValid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub text: String,
    pub valid: bool,
    /// Operator that produced this entry from `parent`; `None` for the seed.
    pub operator: Option<MutationOperator>,
    /// Trace index of the entry this one was mutated from.
    pub parent: Option<usize>,
}

/// A validity flip: `to` was mutated from `from` and has the opposite
/// verdict. Both are trace indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Switch {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    /// `max_mutations_per_switch` mutations in a row kept the verdict.
    NoSwitchFound,
    /// `max_total_mutations` reached before the target.
    BudgetExhausted,
    /// No operator of the set can act on the current candidate.
    NoApplicableSite,
}

#[derive(Debug, Clone)]
pub struct BoundaryPair {
    pub seed_index: usize,
    pub seed: Candidate,
    pub mvs: TestSet,
    pub mis: TestSet,
    pub trace: Vec<TraceEntry>,
    pub switches: Vec<Switch>,
    pub termination: Termination,
    /// Oracle calls made for this pair, the seed's included.
    pub oracle_evaluations: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum Step2Error {
    #[error("the test set is empty")]
    EmptySet,
    #[error("seed {index} `{text}` is not valid under the oracle")]
    SeedInvalid { index: usize, text: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Runs one property-switching walk from `seed`.
pub fn property_switch_search(
    seed_index: usize,
    seed: &Candidate,
    ops: &MutatorSet,
    oracle: &ValidityOracle,
    budget: &SwitchBudget,
    mode: WalkMode,
    rng: &mut SearchRng,
) -> Result<BoundaryPair, Step2Error> {
    if !oracle.is_valid(&seed.text)? {
        return Err(Step2Error::SeedInvalid {
            index: seed_index,
            text: seed.text.clone(),
        });
    }
    let mut pair = BoundaryPair {
        seed_index,
        seed: seed.clone(),
        mvs: TestSet::new(Role::Mvs),
        mis: TestSet::new(Role::Mis),
        trace: vec![TraceEntry {
            text: seed.text.clone(),
            valid: true,
            operator: None,
            parent: None,
        }],
        switches: Vec::new(),
        termination: Termination::TargetReached,
        oracle_evaluations: 1,
    };

    let mut current = 0usize;
    let mut since_switch = 0usize;
    let mut total = 0usize;
    pair.termination = loop {
        if pair.switches.len() >= budget.target_switches {
            break Termination::TargetReached;
        }
        if total >= budget.max_total_mutations {
            break Termination::BudgetExhausted;
        }
        if since_switch >= budget.max_mutations_per_switch {
            break Termination::NoSwitchFound;
        }
        let parent = &pair.trace[current];
        if !ops.can_mutate(&parent.text) {
            break Termination::NoApplicableSite;
        }
        let parent_valid = parent.valid;
        let outcome = mutate(&parent.text, ops, rng);
        if outcome.no_site {
            continue;
        }

        let valid = oracle.is_valid(&outcome.output)?;
        pair.oracle_evaluations += 1;
        total += 1;
        since_switch += 1;

        let step_index = pair.trace.len();
        let candidate = Candidate::new(
            outcome.output.clone(),
            valid,
            Origin::Step2 {
                seed_index,
                step_index,
                operator: outcome.operator.name().to_owned(),
            },
        );
        if valid {
            pair.mvs.insert(candidate);
        } else {
            pair.mis.insert(candidate);
        }
        pair.trace.push(TraceEntry {
            text: outcome.output,
            valid,
            operator: Some(outcome.operator),
            parent: Some(current),
        });

        if valid != parent_valid {
            pair.switches.push(Switch {
                from: current,
                to: step_index,
            });
            current = step_index;
            since_switch = 0;
        } else if mode == WalkMode::AdvanceAlways || (mode == WalkMode::AdvanceWhileValid && valid)
        {
            current = step_index;
        }
    };
    Ok(pair)
}

/// Why a seed contributed fewer switches than requested.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedNote {
    pub seed_index: usize,
    pub seed: String,
    pub outcome: String,
    pub switches: usize,
}

#[derive(Debug, Clone)]
pub struct Step2Result {
    pub preset: String,
    pub pairs: Vec<BoundaryPair>,
    /// Union of every pair's MVS, first occurrence kept.
    pub mvs: TestSet,
    /// Union of every pair's MIS, first occurrence kept.
    pub mis: TestSet,
    pub notes: Vec<SeedNote>,
}

impl Step2Result {
    pub fn switch_count(&self) -> usize {
        self.pairs.iter().map(|p| p.switches.len()).sum()
    }

    pub fn oracle_evaluations(&self) -> usize {
        self.pairs.iter().map(|p| p.oracle_evaluations).sum()
    }
}

/// Runs one walk per test-set member. Each walk draws from its own stream
/// `(master_seed, Step2 { preset: stream }, index)`, so results do not depend
/// on scheduling. Walks that stop short are kept and noted; seeds the oracle
/// rejects are skipped and noted.
pub fn run_step2(
    tset: &TestSet,
    ops: &MutatorSet,
    oracle: &ValidityOracle,
    budget: &SwitchBudget,
    mode: WalkMode,
    master_seed: u64,
    stream: u32,
) -> Result<Step2Result, Step2Error> {
    if tset.is_empty() {
        return Err(Step2Error::EmptySet);
    }
    let outcomes: Vec<Result<BoundaryPair, Step2Error>> = tset
        .candidates()
        .par_iter()
        .enumerate()
        .map(|(index, seed)| {
            let mut rng = derive(master_seed, Stream::Step2 { preset: stream }, index as u32);
            property_switch_search(index, seed, ops, oracle, budget, mode, &mut rng)
        })
        .collect();

    let mut result = Step2Result {
        preset: ops.name().to_owned(),
        pairs: Vec::with_capacity(outcomes.len()),
        mvs: TestSet::new(Role::Mvs),
        mis: TestSet::new(Role::Mis),
        notes: Vec::new(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(pair) => {
                if pair.termination != Termination::TargetReached {
                    result.notes.push(SeedNote {
                        seed_index: pair.seed_index,
                        seed: pair.seed.text.clone(),
                        outcome: serde_json::to_value(pair.termination)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_owned))
                            .unwrap_or_default(),
                        switches: pair.switches.len(),
                    });
                }
                result.mvs.extend(pair.mvs.candidates().iter().cloned());
                result.mis.extend(pair.mis.candidates().iter().cloned());
                result.pairs.push(pair);
            }
            Err(Step2Error::SeedInvalid { index, text }) => result.notes.push(SeedNote {
                seed_index: index,
                seed: text,
                outcome: "seed_invalid".to_owned(),
                switches: 0,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(result)
}

/// True if `to` is obtainable from `from` by one application of `op`.
pub fn is_single_application(op: MutationOperator, from: &str, to: &str) -> bool {
    op.sites(from)
        .into_iter()
        .any(|site| op.apply_at(from, site).as_deref() == Some(to))
}
