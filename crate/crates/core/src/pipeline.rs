//! The full run: step 1, step 2 per mutator preset, comparison sets,
//! analysis under every requested metric, and the artifacts on disk.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::{
    cross_metric_analysis, verdict, AnalysisError, BoundaryVerdict, Comparison, ComparisonReport,
};
use crate::artifacts::{self, ArtifactError};
use crate::candidate::{Role, TestSet};
use crate::config::{ConfigError, RunConfig};
use crate::distance::{metric_by_name, DistanceMetric};
use crate::generators::{generator_by_name, initial_set, nmcs_step1, Step1Error};
use crate::oracles::{random_valid_set, reference_invalid_dates, SampleError};
use crate::rng::{derive, Stream};
use crate::switchsearch::{run_step2, SeedNote, Step2Error, Step2Result};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("step 1: {0}")]
    Step1(#[from] Step1Error),
    #[error("step 2: {0}")]
    Step2(#[from] Step2Error),
    #[error("comparison sets: {0}")]
    Sample(#[from] SampleError),
    #[error("analysis of preset `{preset}`: {source}")]
    Analysis {
        preset: String,
        source: AnalysisError,
    },
    #[error(transparent)]
    Artifact(#[from] ArtifactError),
}

/// The sets one preset's step 2 produced.
#[derive(Debug, Clone)]
pub struct PresetSets {
    pub preset: String,
    pub mvs: TestSet,
    pub mis: TestSet,
}

/// Every candidate set of a run; what the analysis consumes.
#[derive(Debug, Clone)]
pub struct RunSets {
    pub tset: TestSet,
    pub random: TestSet,
    pub reference_invalid: Option<TestSet>,
    pub presets: Vec<PresetSets>,
}

#[derive(Debug, Clone)]
pub struct RunData {
    pub sets: RunSets,
    pub initial_set_size: usize,
    pub step1_rejected_rounds: usize,
    pub step2: Vec<Step2Result>,
    pub oracle_evaluations: u64,
}

/// Analysis of one preset's MVS under every analysis metric.
#[derive(Debug, Clone)]
pub struct PresetAnalysis {
    pub preset: String,
    pub reports: Vec<ComparisonReport>,
    pub verdicts: Vec<BoundaryVerdict>,
}

impl PresetAnalysis {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

fn metrics(
    cfg: &RunConfig,
    names: &[String],
) -> Result<Vec<Arc<dyn DistanceMetric>>, PipelineError> {
    let settings = cfg.metric_settings();
    names
        .iter()
        .map(|n| {
            metric_by_name(n, &settings).ok_or_else(|| PipelineError::UnknownName {
                kind: "metric",
                name: n.clone(),
            })
        })
        .collect()
}

/// Runs both steps and builds the comparison sets, touching no files.
pub fn generate(cfg: &RunConfig) -> Result<RunData, PipelineError> {
    let generator =
        generator_by_name(cfg.generator_name(), &cfg.generator_settings()).ok_or_else(|| {
            PipelineError::UnknownName {
                kind: "generator",
                name: cfg.generator_name().to_owned(),
            }
        })?;
    let metric = metrics(cfg, std::slice::from_ref(&cfg.generation_metric))?.remove(0);
    let oracle = cfg.oracle();
    let seed = cfg.seed;

    let mut rng = derive(seed, Stream::InitialSet, 0);
    let initial = initial_set(generator.as_ref(), cfg.initial_set_size, seed, &mut rng);
    let initial_set_size = initial.len();
    let mut rng = derive(seed, Stream::Step1, 0);
    let step1 = nmcs_step1(
        generator.as_ref(),
        initial,
        metric.as_ref(),
        cfg.tset_size,
        &cfg.nmcs,
        seed,
        &mut rng,
    )?;

    let mut rng = derive(seed, Stream::RandomSet, 0);
    let random = random_valid_set(generator.as_ref(), &oracle, cfg.random_set_size, &mut rng)?;
    let reference_invalid = if cfg.reference_invalid() {
        let mut rng = derive(seed, Stream::ReferenceInvalid, 0);
        Some(reference_invalid_dates(
            cfg.reference_invalid_size,
            &cfg.date_syntax(),
            &mut rng,
        )?)
    } else {
        None
    };

    let budget = cfg.switch.budget();
    let step2 = cfg
        .mutator_sets()
        .iter()
        .enumerate()
        .map(|(i, ops)| {
            run_step2(
                &step1.tset,
                ops,
                &oracle,
                &budget,
                cfg.switch.walk_mode,
                seed,
                i as u32,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;

    let presets = step2
        .iter()
        .map(|r| PresetSets {
            preset: r.preset.clone(),
            mvs: r.mvs.clone(),
            mis: r.mis.clone(),
        })
        .collect();
    Ok(RunData {
        sets: RunSets {
            tset: step1.tset,
            random,
            reference_invalid,
            presets,
        },
        initial_set_size,
        step1_rejected_rounds: step1.rejected_rounds,
        step2,
        oracle_evaluations: oracle.evaluation_count(),
    })
}

/// Compares each preset's MVS with its MIS, the random set, the Tset, the
/// reference-invalid set if present and the other preset's MVS if present.
pub fn analyze(
    sets: &RunSets,
    metrics: &[Arc<dyn DistanceMetric>],
) -> Result<Vec<PresetAnalysis>, PipelineError> {
    sets.presets
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut others = vec![
                (Comparison::MvsVsRandom, &sets.random),
                (Comparison::MvsVsTset, &sets.tset),
                (Comparison::MvsVsMis, &p.mis),
            ];
            if let Some(r) = &sets.reference_invalid {
                others.push((Comparison::MvsVsReferenceInvalid, r));
            }
            if let Some(alt) = sets.presets.iter().enumerate().find(|(j, _)| *j != i) {
                others.push((Comparison::MvsVsAltMvs, &alt.1.mvs));
            }
            let wrap = |source| PipelineError::Analysis {
                preset: p.preset.clone(),
                source,
            };
            let reports = cross_metric_analysis(&p.mvs, &others, metrics).map_err(wrap)?;
            let verdicts = reports
                .iter()
                .map(verdict)
                .collect::<Result<Vec<_>, _>>()
                .map_err(wrap)?;
            Ok(PresetAnalysis {
                preset: p.preset.clone(),
                reports,
                verdicts,
            })
        })
        .collect()
}

/// Generation plus analysis under the configured metrics, in memory.
pub fn run_in_memory(cfg: &RunConfig) -> Result<(RunData, Vec<PresetAnalysis>), PipelineError> {
    let data = generate(cfg)?;
    let metrics = metrics(cfg, cfg.analysis_metric_names())?;
    let analyses = analyze(&data.sets, &metrics)?;
    Ok((data, analyses))
}

// ---------------------------------------------------------------------------
// Files

pub const CONFIG_FILE: &str = "config.toml";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ANALYSIS_DIR: &str = "analysis";

fn mvs_file(preset: &str) -> String {
    format!("mvs_{preset}.jsonl")
}
fn mis_file(preset: &str) -> String {
    format!("mis_{preset}.jsonl")
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetCounts {
    pub preset: String,
    pub walks: usize,
    pub mvs: usize,
    pub mis: usize,
    pub switches: usize,
    pub oracle_evaluations: usize,
    /// Seeds whose walk stopped short of the switch target.
    pub notes: Vec<SeedNote>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunCounts {
    pub initial_set: usize,
    pub tset: usize,
    pub step1_accepted: usize,
    pub step1_rejected_rounds: usize,
    pub random: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_invalid: Option<usize>,
    pub presets: Vec<PresetCounts>,
    pub oracle_evaluations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictSummary {
    pub generation_metric: String,
    pub preset: String,
    pub analysis_metric: String,
    pub holds: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub started_at: String,
    pub finished_at: String,
    /// `complete`, or `partial` when the run stopped on an error.
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: RunConfig,
    pub counts: RunCounts,
    pub verdicts: Vec<VerdictSummary>,
    /// Paths relative to the run directory, in write order.
    pub artifacts: Vec<String>,
}

impl RunManifest {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn counts(data: &RunData) -> RunCounts {
    RunCounts {
        initial_set: data.initial_set_size,
        tset: data.sets.tset.len(),
        step1_accepted: data.sets.tset.len() - data.initial_set_size,
        step1_rejected_rounds: data.step1_rejected_rounds,
        random: data.sets.random.len(),
        reference_invalid: data.sets.reference_invalid.as_ref().map(TestSet::len),
        presets: data
            .step2
            .iter()
            .map(|r| PresetCounts {
                preset: r.preset.clone(),
                walks: r.pairs.len(),
                mvs: r.mvs.len(),
                mis: r.mis.len(),
                switches: r.switch_count(),
                oracle_evaluations: r.oracle_evaluations(),
                notes: r.notes.clone(),
            })
            .collect(),
        oracle_evaluations: data.oracle_evaluations,
    }
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn path(&mut self, rel: String) -> PathBuf {
        let path = self.dir.join(&rel);
        self.written.push(rel);
        path
    }
}

fn write_analyses(
    w: &mut Writer<'_>,
    generation_metric: &str,
    analyses: &[PresetAnalysis],
) -> Result<Vec<VerdictSummary>, ArtifactError> {
    let mut summaries = Vec::new();
    for a in analyses {
        for (report, v) in a.reports.iter().zip(&a.verdicts) {
            let stem = format!(
                "{ANALYSIS_DIR}/{generation_metric}-{}-{}",
                a.preset, report.metric
            );
            artifacts::write_distances_csv(&w.path(format!("{stem}-distances.csv")), report)?;
            artifacts::write_summary_csv(&w.path(format!("{stem}-summary.csv")), report)?;
            artifacts::write_verdict_json(&w.path(format!("{stem}-verdict.json")), v)?;
            summaries.push(VerdictSummary {
                generation_metric: generation_metric.to_owned(),
                preset: a.preset.clone(),
                analysis_metric: report.metric.clone(),
                holds: v.holds,
                margin: v.margin,
            });
        }
    }
    Ok(summaries)
}

/// Result of [`run_pipeline`].
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub analyses: Vec<PresetAnalysis>,
}

/// Runs everything and writes the artifacts plus `manifest.json` under
/// `run_dir`. Once the directory exists, a failure still leaves a manifest,
/// marked `partial`, describing what was written.
pub fn run_pipeline(cfg: &RunConfig, run_dir: &Path) -> Result<RunOutcome, PipelineError> {
    // Names are checked before anything touches the disk.
    let analysis_metrics = metrics(cfg, cfg.analysis_metric_names())?;
    metrics(cfg, std::slice::from_ref(&cfg.generation_metric))?;
    let started_at = now();

    let mut w = Writer {
        dir: run_dir,
        written: Vec::new(),
    };
    let mut manifest = RunManifest {
        tool: "boundseek",
        version: env!("CARGO_PKG_VERSION"),
        started_at,
        finished_at: String::new(),
        status: "partial",
        error: None,
        config: cfg.clone(),
        counts: RunCounts::default(),
        verdicts: Vec::new(),
        artifacts: Vec::new(),
    };

    let mut body = || -> Result<Vec<PresetAnalysis>, PipelineError> {
        artifacts::write_text(&w.path(CONFIG_FILE.to_owned()), &cfg.to_toml())?;
        let data = generate(cfg)?;
        manifest.counts = counts(&data);

        let sets = &data.sets;
        artifacts::write_set(&w.path("tset.jsonl".into()), &sets.tset)?;
        artifacts::write_set(&w.path("random.jsonl".into()), &sets.random)?;
        if let Some(r) = &sets.reference_invalid {
            artifacts::write_set(&w.path("reference_invalid.jsonl".into()), r)?;
        }
        for (p, r) in sets.presets.iter().zip(&data.step2) {
            artifacts::write_set(&w.path(mvs_file(&p.preset)), &p.mvs)?;
            artifacts::write_set(&w.path(mis_file(&p.preset)), &p.mis)?;
            artifacts::write_traces(&w.path(format!("traces_{}.jsonl", p.preset)), &r.pairs)?;
        }

        let analyses = analyze(sets, &analysis_metrics)?;
        manifest.verdicts = write_analyses(&mut w, &cfg.generation_metric, &analyses)?;
        Ok(analyses)
    };
    let result = body();

    match &result {
        Ok(_) => manifest.status = "complete",
        Err(e) => manifest.error = Some(e.to_string()),
    }
    manifest.artifacts = std::mem::take(&mut w.written);
    manifest.finished_at = now();
    artifacts::write_json(&run_dir.join(MANIFEST_FILE), &manifest)?;
    let analyses = result?;
    Ok(RunOutcome { manifest, analyses })
}

/// Loads the sets a previous run persisted.
pub fn load_run(run_dir: &Path) -> Result<(RunConfig, RunSets), PipelineError> {
    let cfg = RunConfig::load(&run_dir.join(CONFIG_FILE))?;
    let tset = artifacts::read_set(&run_dir.join("tset.jsonl"), Role::Tset)?;
    let random = artifacts::read_set(&run_dir.join("random.jsonl"), Role::Random)?;
    let reference_invalid = if cfg.reference_invalid() {
        Some(artifacts::read_set(
            &run_dir.join("reference_invalid.jsonl"),
            Role::ReferenceInvalid,
        )?)
    } else {
        None
    };
    let presets = cfg
        .preset_names()
        .iter()
        .map(|p| {
            Ok(PresetSets {
                preset: p.clone(),
                mvs: artifacts::read_set(&run_dir.join(mvs_file(p)), Role::Mvs)?,
                mis: artifacts::read_set(&run_dir.join(mis_file(p)), Role::Mis)?,
            })
        })
        .collect::<Result<Vec<_>, ArtifactError>>()?;
    Ok((
        cfg,
        RunSets {
            tset,
            random,
            reference_invalid,
            presets,
        },
    ))
}

/// Re-analyses a finished run, optionally under different metrics, and
/// writes the analysis files under `out_dir` (the run directory by
/// default). Candidate sets are never regenerated.
pub fn reanalyze(
    run_dir: &Path,
    metric_names: Option<&[String]>,
    out_dir: Option<&Path>,
) -> Result<(Vec<PresetAnalysis>, Vec<VerdictSummary>), PipelineError> {
    let (cfg, sets) = load_run(run_dir)?;
    let names = metric_names.unwrap_or(cfg.analysis_metric_names());
    let metrics = metrics(&cfg, names)?;
    let analyses = analyze(&sets, &metrics)?;
    let mut w = Writer {
        dir: out_dir.unwrap_or(run_dir),
        written: Vec::new(),
    };
    let summaries = write_analyses(&mut w, &cfg.generation_metric, &analyses)?;
    Ok((analyses, summaries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_date_config() -> RunConfig {
        RunConfig::parse(
            r#"
sut = "date"
seed = 11
tset_size = 4
random_set_size = 20
reference_invalid_size = 20
mutator_presets = ["int", "int_keep_size"]
[switch]
target_switches = 5
"#,
            "inline",
        )
        .unwrap()
    }

    #[test]
    fn in_memory_run_has_all_five_comparisons() {
        let (data, analyses) = run_in_memory(&small_date_config()).unwrap();
        assert_eq!(data.sets.tset.len(), 4);
        assert_eq!(data.step2.len(), 2);
        assert_eq!(analyses.len(), 2);
        for a in &analyses {
            assert_eq!(a.reports.len(), 4);
            for r in &a.reports {
                let kinds: Vec<_> = r.rows.iter().map(|r| r.comparison).collect();
                assert_eq!(kinds, Comparison::ALL);
            }
        }
    }

    #[test]
    fn run_directory_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_date_config();
        let out = run_pipeline(&cfg, dir.path()).unwrap();
        assert_eq!(out.manifest.status, "complete");
        assert_eq!(out.manifest.verdicts.len(), 8);
        for rel in &out.manifest.artifacts {
            assert!(dir.path().join(rel).is_file(), "{rel}");
        }
        let counts = &out.manifest.counts;
        assert_eq!(counts.tset, 4);
        assert_eq!(
            counts.presets[0].mvs,
            out.analyses[0].reports[0].elements.len()
        );

        let (loaded_cfg, sets) = load_run(dir.path()).unwrap();
        assert_eq!(loaded_cfg, cfg);
        assert_eq!(sets.tset.len(), 4);
        let (again, summaries) =
            reanalyze(dir.path(), Some(&["levenshtein".into()]), None).unwrap();
        assert_eq!(summaries.len(), 2);
        assert_eq!(again[0].reports[0], out.analyses[0].reports[1]);
    }

    #[test]
    fn unknown_metric_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let run_dir = dir.path().join("run");
        let mut cfg = small_date_config();
        cfg.analysis_metrics = Some(vec!["cosine".into()]);
        assert!(matches!(
            run_pipeline(&cfg, &run_dir),
            Err(PipelineError::UnknownName { .. })
        ));
        assert!(!run_dir.exists());
    }
}
