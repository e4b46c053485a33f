//! Declarative run configuration, read from TOML.
//!
//! Unknown keys are rejected at every level so that a run is exactly
//! reproducible from its file. Defaults that depend on the SUT (generator,
//! mutator presets, analysis metrics, reference-invalid set) are filled in by
//! [`RunConfig::resolve`], after which the configuration is fully explicit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calendar::{DateFormat, DateSyntax};
use crate::distance::{
    metric_by_name, Compressor, MetricSettings, DEFAULT_INCOMPARABLE_PENALTY, METRIC_NAMES,
};
use crate::generators::{
    GeneratorSettings, NmcsBudget, DEFAULT_FAN_OUT, DEFAULT_MAX_DEPTH, GENERATOR_NAMES,
};
use crate::mutation::{MutatorSet, PRESET_NAMES};
use crate::oracles::{CommandSpec, ValidityOracle};
use crate::switchsearch::{SwitchBudget, WalkMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SutKind {
    Date,
    Json,
    Xml,
    Regex,
    Command,
}

impl SutKind {
    pub fn name(self) -> &'static str {
        match self {
            SutKind::Date => "date",
            SutKind::Json => "json",
            SutKind::Xml => "xml",
            SutKind::Regex => "regex",
            SutKind::Command => "command",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Defaults to the SUT's name for the built-in SUTs.
    pub name: Option<String>,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_fan_out")]
    pub fan_out: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            name: None,
            max_depth: DEFAULT_MAX_DEPTH,
            fan_out: DEFAULT_FAN_OUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DateConfig {
    pub formats: Vec<DateFormat>,
    /// Accept numeric fields written with fewer digits than usual.
    pub flexible_widths: bool,
}

impl Default for DateConfig {
    fn default() -> Self {
        let syntax = DateSyntax::default();
        DateConfig {
            formats: syntax.formats,
            flexible_widths: syntax.flexible_widths,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    pub compressor: Compressor,
    pub incomparable_penalty: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            compressor: Compressor::default(),
            incomparable_penalty: DEFAULT_INCOMPARABLE_PENALTY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchConfig {
    pub target_switches: usize,
    pub max_mutations_per_switch: usize,
    pub max_total_mutations: usize,
    pub walk_mode: WalkMode,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        let b = SwitchBudget::default();
        SwitchConfig {
            target_switches: b.target_switches,
            max_mutations_per_switch: b.max_mutations_per_switch,
            max_total_mutations: b.max_total_mutations,
            walk_mode: WalkMode::default(),
        }
    }
}

impl SwitchConfig {
    pub fn budget(&self) -> SwitchBudget {
        SwitchBudget {
            target_switches: self.target_switches,
            max_mutations_per_switch: self.max_mutations_per_switch,
            max_total_mutations: self.max_total_mutations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sut: SutKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Where run directories are created; the CLI may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_generation_metric")]
    pub generation_metric: String,
    pub analysis_metrics: Option<Vec<String>>,
    pub mutator_presets: Option<Vec<String>>,
    #[serde(default = "default_tset_size")]
    pub tset_size: usize,
    #[serde(default = "default_initial_set_size")]
    pub initial_set_size: usize,
    #[serde(default = "default_random_set_size")]
    pub random_set_size: usize,
    pub include_reference_invalid: Option<bool>,
    #[serde(default = "default_reference_invalid_size")]
    pub reference_invalid_size: usize,
    #[serde(default)]
    pub generator: GeneratorConfig,
    #[serde(default)]
    pub date: DateConfig,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub nmcs: NmcsBudget,
    #[serde(default)]
    pub switch: SwitchConfig,
}

fn default_seed() -> u64 {
    1
}
fn default_generation_metric() -> String {
    "ncd".to_owned()
}
fn default_tset_size() -> usize {
    10
}
fn default_initial_set_size() -> usize {
    1
}
fn default_random_set_size() -> usize {
    100
}
fn default_reference_invalid_size() -> usize {
    100
}
fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}
fn default_fan_out() -> usize {
    DEFAULT_FAN_OUT
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}{}: `{field}` {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid {
        origin: String,
        line: Option<usize>,
        field: String,
        message: String,
    },
}

impl ConfigError {
    /// The offending field, for validation errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// 1-based line of the first `key = ...` assignment for the last path
/// segment of `field`, if the source spells it out.
fn line_of(source: &str, field: &str) -> Option<usize> {
    let key = field.rsplit('.').next()?;
    source
        .lines()
        .position(|line| {
            line.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
}

impl RunConfig {
    /// Reads, parses and validates a configuration file.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        RunConfig::parse(&source, &path.display().to_string())
    }

    /// Parses and validates TOML text; `origin` names it in diagnostics.
    pub fn parse(source: &str, origin: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(source).map_err(|e| ConfigError::Parse {
            origin: origin.to_owned(),
            message: e.to_string().trim_end().to_owned(),
        })?;
        cfg.resolve()
            .map_err(|(field, message)| ConfigError::Invalid {
                origin: origin.to_owned(),
                line: line_of(source, &field),
                field,
                message,
            })
    }

    /// Fills SUT-dependent defaults and checks every constraint, reporting
    /// the first failure as `(field, message)`.
    pub fn resolve(mut self) -> Result<RunConfig, (String, String)> {
        let bad = |field: &str, message: String| Err((field.to_owned(), message));
        let date = self.sut == SutKind::Date;

        match (self.sut, &self.command) {
            (SutKind::Command, None) => {
                return bad("command", "is required when sut = \"command\"".into())
            }
            (SutKind::Command, Some(c)) if c.path.is_empty() => {
                return bad("command.path", "must not be empty".into())
            }
            (SutKind::Command, Some(c)) if c.timeout_ms == 0 => {
                return bad("command.timeout_ms", "must be positive".into())
            }
            (SutKind::Command, Some(_)) => {}
            (_, Some(_)) => return bad("command", "is only allowed when sut = \"command\"".into()),
            (_, None) => {}
        }

        if self.generator.name.is_none() && self.sut != SutKind::Command {
            self.generator.name = Some(self.sut.name().to_owned());
        }
        match self.generator.name.as_deref() {
            None => {
                return bad(
                    "generator.name",
                    "is required when sut = \"command\"".into(),
                )
            }
            Some(g) if !GENERATOR_NAMES.contains(&g) => {
                return bad(
                    "generator.name",
                    format!("`{g}` is not one of {}", GENERATOR_NAMES.join(", ")),
                )
            }
            Some(_) => {}
        }
        if self.generator.max_depth == 0 {
            return bad("generator.max_depth", "must be positive".into());
        }
        if self.generator.fan_out == 0 {
            return bad("generator.fan_out", "must be positive".into());
        }
        if self.date.formats.is_empty() {
            return bad("date.formats", "must list at least one format".into());
        }

        if !METRIC_NAMES.contains(&self.generation_metric.as_str()) {
            return bad(
                "generation_metric",
                format!(
                    "`{}` is not one of {}",
                    self.generation_metric,
                    METRIC_NAMES.join(", ")
                ),
            );
        }
        let analysis = self.analysis_metrics.get_or_insert_with(|| {
            let names: &[&str] = if date {
                &METRIC_NAMES
            } else {
                &["ncd", "levenshtein"]
            };
            names.iter().map(|s| s.to_string()).collect()
        });
        if analysis.is_empty() {
            return bad("analysis_metrics", "must list at least one metric".into());
        }
        if let Some(m) = analysis
            .iter()
            .find(|m| !METRIC_NAMES.contains(&m.as_str()))
        {
            return bad(
                "analysis_metrics",
                format!("`{m}` is not one of {}", METRIC_NAMES.join(", ")),
            );
        }

        let presets = self
            .mutator_presets
            .get_or_insert_with(|| vec![if date { "int" } else { "chars" }.to_owned()]);
        if presets.is_empty() || presets.len() > 2 {
            return bad("mutator_presets", "must list one or two presets".into());
        }
        if let Some(p) = presets.iter().find(|p| !PRESET_NAMES.contains(&p.as_str())) {
            return bad(
                "mutator_presets",
                format!("`{p}` is not one of {}", PRESET_NAMES.join(", ")),
            );
        }
        if presets.len() == 2 && presets[0] == presets[1] {
            return bad("mutator_presets", "must not repeat a preset".into());
        }

        if self.tset_size == 0 {
            return bad("tset_size", "must be at least 1".into());
        }
        if self.initial_set_size == 0 || self.initial_set_size > self.tset_size {
            return bad("initial_set_size", "must be between 1 and tset_size".into());
        }
        if self.random_set_size == 0 {
            return bad("random_set_size", "must be at least 1".into());
        }
        let reference = *self.include_reference_invalid.get_or_insert(date);
        if reference && !date {
            return bad(
                "include_reference_invalid",
                "is only available for the date SUT".into(),
            );
        }
        if reference && self.reference_invalid_size == 0 {
            return bad("reference_invalid_size", "must be at least 1".into());
        }

        if !(self.metrics.incomparable_penalty.is_finite()
            && self.metrics.incomparable_penalty > 0.0)
        {
            return bad(
                "metrics.incomparable_penalty",
                "must be a positive number".into(),
            );
        }
        if self.nmcs.choices_evaluated == 0 {
            return bad("nmcs.choices_evaluated", "must be positive".into());
        }
        if self.nmcs.playouts_per_choice == 0 {
            return bad("nmcs.playouts_per_choice", "must be positive".into());
        }
        if self.nmcs.stall_limit == 0 {
            return bad("nmcs.stall_limit", "must be positive".into());
        }
        let b = self.switch.budget();
        for (field, value) in [
            ("switch.target_switches", b.target_switches),
            (
                "switch.max_mutations_per_switch",
                b.max_mutations_per_switch,
            ),
            ("switch.max_total_mutations", b.max_total_mutations),
        ] {
            if value == 0 {
                return bad(field, "must be positive".into());
            }
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn date_syntax(&self) -> DateSyntax {
        DateSyntax {
            formats: self.date.formats.clone(),
            flexible_widths: self.date.flexible_widths,
        }
    }

    pub fn metric_settings(&self) -> MetricSettings {
        MetricSettings {
            compressor: self.metrics.compressor,
            incomparable_penalty: self.metrics.incomparable_penalty,
            date_syntax: self.date_syntax(),
        }
    }

    pub fn generator_settings(&self) -> GeneratorSettings {
        GeneratorSettings {
            date_formats: self.date.formats.clone(),
            max_depth: self.generator.max_depth,
            fan_out: self.generator.fan_out,
        }
    }

    pub fn generator_name(&self) -> &str {
        self.generator.name.as_deref().unwrap_or(self.sut.name())
    }

    pub fn analysis_metric_names(&self) -> &[String] {
        self.analysis_metrics.as_deref().unwrap_or_default()
    }

    pub fn preset_names(&self) -> &[String] {
        self.mutator_presets.as_deref().unwrap_or_default()
    }

    pub fn reference_invalid(&self) -> bool {
        self.include_reference_invalid.unwrap_or(false)
    }

    pub fn oracle(&self) -> ValidityOracle {
        match self.sut {
            SutKind::Date => ValidityOracle::date(self.date_syntax()),
            SutKind::Json => ValidityOracle::json(),
            SutKind::Xml => ValidityOracle::xml(),
            SutKind::Regex => ValidityOracle::regex(),
            SutKind::Command => ValidityOracle::command(self.command.clone().expect("validated")),
        }
    }

    pub fn mutator_sets(&self) -> Vec<MutatorSet> {
        self.preset_names()
            .iter()
            .map(|p| MutatorSet::preset(p).expect("validated"))
            .collect()
    }

    /// Checks that every referenced metric can be constructed.
    pub fn check_metrics(&self) -> bool {
        let settings = self.metric_settings();
        std::iter::once(&self.generation_metric)
            .chain(self.analysis_metric_names())
            .all(|m| metric_by_name(m, &settings).is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(s, "test.toml")
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let c = parse("sut = \"date\"\n").unwrap();
        assert_eq!(c.seed, 1);
        assert_eq!(c.tset_size, 10);
        assert_eq!(c.initial_set_size, 1);
        assert_eq!(c.random_set_size, 100);
        assert_eq!(c.generation_metric, "ncd");
        assert_eq!(c.generator_name(), "date");
        assert_eq!(
            c.analysis_metric_names(),
            ["ncd", "levenshtein", "day", "msid"]
        );
        assert_eq!(c.preset_names(), ["int"]);
        assert!(c.reference_invalid());
        assert_eq!(c.nmcs, NmcsBudget::default());
        assert_eq!(c.switch.budget(), SwitchBudget::default());
        assert_eq!(c.switch.walk_mode, WalkMode::AdvanceWhileValid);
        assert_eq!(c.metrics.compressor, Compressor::default());

        let j = parse("sut = \"json\"").unwrap();
        assert_eq!(j.preset_names(), ["chars"]);
        assert_eq!(j.analysis_metric_names(), ["ncd", "levenshtein"]);
        assert!(!j.reference_invalid());
    }

    #[test]
    fn zero_tset_size_names_the_field_and_line() {
        let err = parse("sut = \"date\"\n\ntset_size = 0\n").unwrap_err();
        assert_eq!(err.field(), Some("tset_size"));
        let msg = err.to_string();
        assert!(msg.contains("test.toml:3"), "{msg}");
        assert!(msg.contains("tset_size"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected_everywhere() {
        for src in [
            "sut = \"date\"\nbogus = 1\n",
            "sut = \"date\"\n[switch]\ntarget_switchs = 3\n",
            "sut = \"date\"\n[nmcs]\nlevel = 2\n",
            "sut = \"command\"\n[command]\npath = \"true\"\nshell = true\n",
        ] {
            let err = parse(src).unwrap_err();
            assert!(matches!(err, ConfigError::Parse { .. }), "{src}: {err}");
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        let msg = parse("sut = \"date\"\ntset_size = \"ten\"\n")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn bad_names_are_rejected() {
        for (src, field) in [
            (
                "sut = \"date\"\ngeneration_metric = \"cosine\"",
                "generation_metric",
            ),
            (
                "sut = \"date\"\nanalysis_metrics = [\"ncd\", \"x\"]",
                "analysis_metrics",
            ),
            (
                "sut = \"date\"\nmutator_presets = [\"bits\"]",
                "mutator_presets",
            ),
            (
                "sut = \"date\"\nmutator_presets = [\"int\", \"int\"]",
                "mutator_presets",
            ),
            (
                "sut = \"date\"\n[generator]\nname = \"yaml\"",
                "generator.name",
            ),
            (
                "sut = \"json\"\ninclude_reference_invalid = true",
                "include_reference_invalid",
            ),
            ("sut = \"command\"", "command"),
            ("sut = \"json\"\n[command]\npath = \"true\"", "command"),
        ] {
            assert_eq!(parse(src).unwrap_err().field(), Some(field), "{src}");
        }
        assert!(matches!(
            parse("sut = \"yaml\"").unwrap_err(),
            ConfigError::Parse { .. }
        ));
    }

    #[test]
    fn full_config_round_trips() {
        let src = r#"
sut = "command"
seed = 42
generation_metric = "levenshtein"
analysis_metrics = ["ncd"]
mutator_presets = ["int", "int_keep_size"]
tset_size = 5

[command]
path = "/usr/bin/true"
args = ["-x"]
timeout_ms = 100

[generator]
name = "date"

[date]
formats = ["iso", "us"]
flexible_widths = false

[metrics]
compressor = "deflate-6"
incomparable_penalty = 1000.0

[nmcs]
choices_evaluated = 3

[switch]
target_switches = 4
walk_mode = "advance_on_switch"
"#;
        let c = parse(src).unwrap();
        assert_eq!(c.switch.target_switches, 4);
        assert_eq!(c.switch.max_total_mutations, 5_000);
        assert_eq!(c.switch.walk_mode, WalkMode::AdvanceOnSwitch);
        assert_eq!(c.nmcs.choices_evaluated, 3);
        assert_eq!(c.command.as_ref().unwrap().timeout_ms, 100);
        let again = parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }
}
