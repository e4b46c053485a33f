//! Step 1: grow a test set by repeatedly accepting the generated candidate
//! whose minimum distance to everything accepted so far is largest.
//!
//! Each selection round is a level-1 nested Monte-Carlo search over the
//! generator's choice points. At every choice point a few options are tried,
//! each scored by random playouts to a complete string, and the best option
//! is committed. The best complete string seen anywhere in the round is the
//! round's candidate.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{ChoiceTrace, Frontier, Generator, PlayoutChooser};
use crate::candidate::{Candidate, Origin, Role, TestSet};
use crate::distance::{min_dist_to_set, DistanceError, DistanceMetric};
use crate::rng::SearchRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NmcsBudget {
    /// Options evaluated at each choice point.
    pub choices_evaluated: usize,
    pub playouts_per_choice: usize,
    /// Choice points committed per round before settling for the best
    /// playout seen.
    pub max_choice_points: usize,
    /// Consecutive rounds without a new candidate before giving up.
    pub stall_limit: usize,
}

impl Default for NmcsBudget {
    fn default() -> Self {
        NmcsBudget {
            choices_evaluated: 2,
            playouts_per_choice: 1,
            max_choice_points: 64,
            stall_limit: 50,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Step1Error {
    #[error("no new candidate in {rounds} consecutive rounds ({accepted} accepted)")]
    GenerationStall { accepted: usize, rounds: usize },
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Outcome of one accepted selection round.
#[derive(Debug, Clone)]
pub struct Selection {
    pub text: String,
    pub fitness: f64,
    pub trace: ChoiceTrace,
    /// Fitness of every playout evaluated in the round, in order.
    pub evaluated: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Step1Result {
    /// Initial set followed by the accepted candidates.
    pub tset: TestSet,
    pub selections: Vec<Selection>,
    pub rejected_rounds: usize,
}

/// `size` random generator samples, tagged as the initial test set.
pub fn initial_set(
    generator: &dyn Generator,
    size: usize,
    seed: u64,
    rng: &mut SearchRng,
) -> TestSet {
    let mut set = TestSet::new(Role::Tset);
    let mut attempts = 0;
    while set.len() < size && attempts < size * 100 + 100 {
        attempts += 1;
        let text = generator.sample(rng);
        let index = set.len();
        set.insert(Candidate::new(text, true, Origin::Initial { seed, index }));
    }
    set
}

/// Fitness: minimum distance to the current set. Members of the
/// set score zero so a duplicate can never win a round.
fn fitness(text: &str, tset: &TestSet, metric: &dyn DistanceMetric) -> Result<f64, DistanceError> {
    if tset.contains(text) {
        return Ok(0.0);
    }
    min_dist_to_set(text, tset.strings(), metric)
}

struct Round<'a> {
    generator: &'a dyn Generator,
    tset: &'a TestSet,
    metric: &'a dyn DistanceMetric,
    seed: u64,
    best: Option<(f64, String, ChoiceTrace)>,
    evaluated: Vec<f64>,
}

impl Round<'_> {
    /// Runs one playout and returns its fitness and frontier decision.
    fn playout(
        &mut self,
        prefix: &[usize],
        frontier: Frontier,
        rng: &mut SearchRng,
    ) -> Result<(f64, Option<super::Decision>), DistanceError> {
        let mut chooser = PlayoutChooser::new(prefix, frontier, rng);
        let text = self.generator.generate(&mut chooser);
        let front = chooser.frontier_decision();
        let decisions = chooser.into_decisions();

        let score = fitness(&text, self.tset, self.metric)?;
        self.evaluated.push(score);
        // Strictly greater: ties keep the first-evaluated playout.
        if self.best.as_ref().is_none_or(|(b, _, _)| score > *b) {
            let trace = ChoiceTrace {
                decisions,
                seed: self.seed,
            };
            self.best = Some((score, text, trace));
        }
        Ok((score, front))
    }
}

fn select(
    generator: &dyn Generator,
    tset: &TestSet,
    metric: &dyn DistanceMetric,
    budget: &NmcsBudget,
    seed: u64,
    rng: &mut SearchRng,
) -> Result<Selection, DistanceError> {
    let mut round = Round {
        generator,
        tset,
        metric,
        seed,
        best: None,
        evaluated: Vec::new(),
    };
    let k = budget.choices_evaluated.max(1);
    let playouts = budget.playouts_per_choice.max(1);
    let mut prefix: Vec<usize> = Vec::new();

    loop {
        // The probe playout discovers the frontier and doubles as the first
        // playout of the first option.
        let (probe_score, front) = round.playout(&prefix, Frontier::Random, rng)?;
        let Some(front) = front else { break };
        if prefix.len() >= budget.max_choice_points {
            break;
        }

        let mut options = vec![front.index];
        let extra = (k - 1).min(front.arity - 1);
        if extra > 0 {
            for i in index::sample(rng, front.arity - 1, extra) {
                options.push(if i >= front.index { i + 1 } else { i });
            }
        }

        let mut best_option = (front.index, f64::NEG_INFINITY);
        for (n, &option) in options.iter().enumerate() {
            let mut score = if n == 0 {
                probe_score
            } else {
                f64::NEG_INFINITY
            };
            let remaining = if n == 0 { playouts - 1 } else { playouts };
            for _ in 0..remaining {
                let (s, _) = round.playout(&prefix, Frontier::Forced(option), rng)?;
                score = score.max(s);
            }
            if score > best_option.1 {
                best_option = (option, score);
            }
        }
        prefix.push(best_option.0);
    }

    let (fitness, text, trace) = round.best.expect("at least one playout per round");
    Ok(Selection {
        text,
        fitness,
        trace,
        evaluated: round.evaluated,
    })
}

/// Grows `initial` to `target_size` members by repeated selection rounds.
///
/// The initial members count towards `target_size`. An empty initial set is
/// allowed: the first candidate then has infinite fitness and is always
/// accepted.
pub fn nmcs_step1(
    generator: &dyn Generator,
    initial: TestSet,
    metric: &dyn DistanceMetric,
    target_size: usize,
    budget: &NmcsBudget,
    seed: u64,
    rng: &mut SearchRng,
) -> Result<Step1Result, Step1Error> {
    let mut tset = TestSet::from_candidates(Role::Tset, initial.candidates().iter().cloned());
    let mut selections = Vec::new();
    let mut rejected_rounds = 0;
    let mut stalled = 0;

    while tset.len() < target_size {
        let selection = select(generator, &tset, metric, budget, seed, rng)?;
        if selection.fitness > 0.0 && !tset.contains(&selection.text) {
            let index = tset.len();
            tset.insert(Candidate::new(
                selection.text.clone(),
                true,
                Origin::Step1 { seed, index },
            ));
            selections.push(selection);
            stalled = 0;
        } else {
            rejected_rounds += 1;
            stalled += 1;
            if stalled >= budget.stall_limit.max(1) {
                return Err(Step1Error::GenerationStall {
                    accepted: selections.len(),
                    rounds: stalled,
                });
            }
        }
    }

    Ok(Step1Result {
        tset,
        selections,
        rejected_rounds,
    })
}
