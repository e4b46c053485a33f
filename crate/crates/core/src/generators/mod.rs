//! Valid-input generators and the step-1 dispersion search.
//!
//! Generators are written against a [`Chooser`]: every stochastic decision
//! is an explicit choice point with a finite arity. Random sampling, replay
//! and the nested Monte-Carlo search are just different choosers.

mod choice;
mod date;
mod nmcs;
mod regex;
mod structure;

use std::fmt;
use std::sync::Arc;

pub use choice::{ChoiceTrace, Chooser, Decision, RandomChooser, ReplayChooser, ReplayError};
pub use date::DateGenerator;
pub use nmcs::{initial_set, nmcs_step1, NmcsBudget, Selection, Step1Error, Step1Result};
pub use regex::{group_depth, RegexGenerator};
pub use structure::{
    serialize_json, serialize_xml, SerializationError, StructureGenerator, StructureSyntax, Tree,
};

use crate::calendar::DateFormat;
use crate::rng::SearchRng;

pub(crate) use choice::{Frontier, PlayoutChooser};

pub const GENERATOR_NAMES: [&str; 4] = ["date", "json", "xml", "regex"];
pub const DEFAULT_MAX_DEPTH: usize = 6;
pub const DEFAULT_FAN_OUT: usize = 5;

/// Produces valid inputs for one system under test.
pub trait Generator: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    fn generate(&self, chooser: &mut dyn Chooser) -> String;

    fn sample(&self, rng: &mut SearchRng) -> String {
        self.generate(&mut RandomChooser::new(rng, 0))
    }

    /// Samples and returns the trace that reproduces the sample.
    fn sample_traced(&self, rng: &mut SearchRng, seed: u64) -> (String, ChoiceTrace) {
        let mut chooser = RandomChooser::new(rng, seed);
        let out = self.generate(&mut chooser);
        (out, chooser.into_trace())
    }
}

/// Regenerates the string a trace was recorded from.
pub fn replay(generator: &dyn Generator, trace: &ChoiceTrace) -> Result<String, ReplayError> {
    let mut chooser = ReplayChooser::new(trace);
    let out = generator.generate(&mut chooser);
    chooser.finish().map(|()| out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSettings {
    pub date_formats: Vec<DateFormat>,
    pub max_depth: usize,
    pub fan_out: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        GeneratorSettings {
            date_formats: vec![DateFormat::Iso],
            max_depth: DEFAULT_MAX_DEPTH,
            fan_out: DEFAULT_FAN_OUT,
        }
    }
}

pub fn generator_by_name(name: &str, settings: &GeneratorSettings) -> Option<Arc<dyn Generator>> {
    let g: Arc<dyn Generator> = match name {
        "date" => Arc::new(DateGenerator::new(settings.date_formats.clone())),
        "json" => Arc::new(StructureGenerator::new(
            StructureSyntax::Json,
            settings.max_depth,
            settings.fan_out,
        )),
        "xml" => Arc::new(StructureGenerator::new(
            StructureSyntax::Xml,
            settings.max_depth,
            settings.fan_out,
        )),
        "regex" => Arc::new(RegexGenerator::new(settings.max_depth)),
        _ => return None,
    };
    Some(g)
}
