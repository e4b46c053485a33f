//! Choice points and the choosers that resolve them.
//!
//! A generator is a deterministic function of the answers it receives at its
//! choice points. Recording those answers gives a [`ChoiceTrace`] that
//! replays to the identical string.

use rand::Rng;
use serde::Serialize;

use crate::rng::SearchRng;

/// One resolved choice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub point: &'static str,
    pub index: usize,
    pub arity: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ChoiceTrace {
    pub decisions: Vec<Decision>,
    pub seed: u64,
}

impl ChoiceTrace {
    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.decisions.iter().map(|d| d.index).collect()
    }
}

/// Answers a generator's choice points.
pub trait Chooser {
    /// Returns an index in `0..arity`. `arity` is always at least 1.
    fn choose(&mut self, point: &'static str, arity: usize) -> usize;
}

/// Uniform random choices, recorded as it goes.
pub struct RandomChooser<'r> {
    rng: &'r mut SearchRng,
    trace: ChoiceTrace,
}

impl<'r> RandomChooser<'r> {
    /// `seed` is recorded in the trace; it identifies the stream `rng`
    /// was derived from.
    pub fn new(rng: &'r mut SearchRng, seed: u64) -> Self {
        RandomChooser {
            rng,
            trace: ChoiceTrace {
                decisions: Vec::new(),
                seed,
            },
        }
    }

    pub fn into_trace(self) -> ChoiceTrace {
        self.trace
    }
}

impl Chooser for RandomChooser<'_> {
    fn choose(&mut self, point: &'static str, arity: usize) -> usize {
        let index = self.rng.random_range(0..arity.max(1));
        self.trace.decisions.push(Decision {
            point,
            index,
            arity,
        });
        index
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(
        "trace diverged at decision {position}: expected `{expected}`, generator asked `{found}`"
    )]
    Diverged {
        position: usize,
        expected: &'static str,
        found: &'static str,
    },
    #[error("trace exhausted after {0} decisions")]
    Exhausted(usize),
    #[error("generator stopped after {used} of {recorded} recorded decisions")]
    Unused { used: usize, recorded: usize },
}

/// Replays a recorded trace, noting the first divergence.
pub struct ReplayChooser<'t> {
    trace: &'t ChoiceTrace,
    position: usize,
    error: Option<ReplayError>,
}

impl<'t> ReplayChooser<'t> {
    pub fn new(trace: &'t ChoiceTrace) -> Self {
        ReplayChooser {
            trace,
            position: 0,
            error: None,
        }
    }

    pub fn finish(self) -> Result<(), ReplayError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        if self.position != self.trace.len() {
            return Err(ReplayError::Unused {
                used: self.position,
                recorded: self.trace.len(),
            });
        }
        Ok(())
    }
}

impl Chooser for ReplayChooser<'_> {
    fn choose(&mut self, point: &'static str, arity: usize) -> usize {
        let position = self.position;
        self.position += 1;
        match self.trace.decisions.get(position) {
            Some(d) if d.point == point && d.arity == arity => d.index,
            Some(d) => {
                self.error.get_or_insert(ReplayError::Diverged {
                    position,
                    expected: d.point,
                    found: point,
                });
                0
            }
            None => {
                self.error.get_or_insert(ReplayError::Exhausted(position));
                0
            }
        }
    }
}

/// How a playout resolves the first choice point past its prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Frontier {
    Random,
    Forced(usize),
}

/// Replays `prefix`, resolves the next choice point (the frontier) as
/// directed, then chooses uniformly at random. Drives the playouts of the
/// nested Monte-Carlo search.
pub(crate) struct PlayoutChooser<'a> {
    prefix: &'a [usize],
    frontier: Frontier,
    rng: &'a mut SearchRng,
    decisions: Vec<Decision>,
}

impl<'a> PlayoutChooser<'a> {
    pub fn new(prefix: &'a [usize], frontier: Frontier, rng: &'a mut SearchRng) -> Self {
        PlayoutChooser {
            prefix,
            frontier,
            rng,
            decisions: Vec::new(),
        }
    }

    /// The frontier decision, if the generator got that far.
    pub fn frontier_decision(&self) -> Option<Decision> {
        self.decisions.get(self.prefix.len()).copied()
    }

    pub fn into_decisions(self) -> Vec<Decision> {
        self.decisions
    }
}

impl Chooser for PlayoutChooser<'_> {
    fn choose(&mut self, point: &'static str, arity: usize) -> usize {
        let position = self.decisions.len();
        let index = if position < self.prefix.len() {
            self.prefix[position].min(arity - 1)
        } else if position == self.prefix.len() {
            match self.frontier {
                Frontier::Forced(i) => i.min(arity - 1),
                Frontier::Random => self.rng.random_range(0..arity),
            }
        } else {
            self.rng.random_range(0..arity)
        };
        self.decisions.push(Decision {
            point,
            index,
            arity,
        });
        index
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive, Stream};

    fn draw(c: &mut dyn Chooser) -> Vec<usize> {
        vec![c.choose("a", 10), c.choose("b", 3), c.choose("c", 100)]
    }

    #[test]
    fn replay_reproduces_random_choices() {
        let mut rng = derive(1, Stream::Custom(0), 0);
        let mut random = RandomChooser::new(&mut rng, 1);
        let first = draw(&mut random);
        let trace = random.into_trace();
        assert_eq!(trace.indices(), first);
        assert_eq!(trace.seed, 1);

        let mut replay = ReplayChooser::new(&trace);
        assert_eq!(draw(&mut replay), first);
        assert_eq!(replay.finish(), Ok(()));
    }

    #[test]
    fn replay_reports_divergence() {
        let trace = ChoiceTrace {
            decisions: vec![Decision {
                point: "x",
                index: 0,
                arity: 2,
            }],
            seed: 0,
        };
        let mut replay = ReplayChooser::new(&trace);
        replay.choose("y", 2);
        assert!(matches!(replay.finish(), Err(ReplayError::Diverged { .. })));

        let mut replay = ReplayChooser::new(&trace);
        replay.choose("x", 2);
        replay.choose("x", 2);
        assert_eq!(replay.finish(), Err(ReplayError::Exhausted(1)));

        let replay = ReplayChooser::new(&trace);
        assert!(matches!(replay.finish(), Err(ReplayError::Unused { .. })));
    }

    #[test]
    fn playout_honours_prefix_and_frontier() {
        let mut rng = derive(2, Stream::Custom(0), 0);
        let prefix = [7];
        let mut playout = PlayoutChooser::new(&prefix, Frontier::Forced(2), &mut rng);
        let got = draw(&mut playout);
        assert_eq!(&got[..2], &[7, 2]);
        assert_eq!(playout.frontier_decision().unwrap().arity, 3);
    }
}
