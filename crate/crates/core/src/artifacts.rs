//! On-disk formats: JSON-lines candidate sets, walk traces, distance CSVs
//! and verdict JSON.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundaryVerdict, ComparisonReport};
use crate::candidate::{Candidate, Origin, Role, TestSet};
use crate::switchsearch::BoundaryPair;

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ArtifactError + '_ {
    move |source| ArtifactError::Io {
        path: path.to_owned(),
        source,
    }
}

/// One line of a candidate-set file. Which optional fields are present
/// depends on `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub string: String,
    pub valid: bool,
    pub origin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
}

impl From<&Candidate> for CandidateRecord {
    fn from(c: &Candidate) -> Self {
        let mut r = CandidateRecord {
            string: c.text.clone(),
            valid: c.valid,
            origin: c.origin.tag().to_owned(),
            seed: None,
            index: None,
            seed_index: None,
            step_index: None,
            operator: None,
        };
        match &c.origin {
            Origin::Initial { seed, index } | Origin::Step1 { seed, index } => {
                r.seed = Some(*seed);
                r.index = Some(*index);
            }
            Origin::Step2 {
                seed_index,
                step_index,
                operator,
            } => {
                r.seed_index = Some(*seed_index);
                r.step_index = Some(*step_index);
                r.operator = Some(operator.clone());
            }
            Origin::Random { index } | Origin::ReferenceInvalid { index } => r.index = Some(*index),
        }
        r
    }
}

impl TryFrom<CandidateRecord> for Candidate {
    type Error = String;

    fn try_from(r: CandidateRecord) -> Result<Self, String> {
        let missing = |field: &str| format!("`{}` record lacks `{field}`", r.origin);
        let origin = match r.origin.as_str() {
            "initial" | "step1" => {
                let seed = r.seed.ok_or_else(|| missing("seed"))?;
                let index = r.index.ok_or_else(|| missing("index"))?;
                if r.origin == "initial" {
                    Origin::Initial { seed, index }
                } else {
                    Origin::Step1 { seed, index }
                }
            }
            "step2" => Origin::Step2 {
                seed_index: r.seed_index.ok_or_else(|| missing("seed_index"))?,
                step_index: r.step_index.ok_or_else(|| missing("step_index"))?,
                operator: r.operator.clone().ok_or_else(|| missing("operator"))?,
            },
            "random" => Origin::Random {
                index: r.index.ok_or_else(|| missing("index"))?,
            },
            "reference_invalid" => Origin::ReferenceInvalid {
                index: r.index.ok_or_else(|| missing("index"))?,
            },
            other => return Err(format!("unknown origin `{other}`")),
        };
        Ok(Candidate::new(r.string, r.valid, origin))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, ArtifactError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn write_lines<T: Serialize>(
    path: &Path,
    items: impl IntoIterator<Item = T>,
) -> Result<(), ArtifactError> {
    let mut out = create(path)?;
    for item in items {
        let line = serde_json::to_string(&item).expect("records serialize");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

pub fn write_set(path: &Path, set: &TestSet) -> Result<(), ArtifactError> {
    write_lines(path, set.iter().map(CandidateRecord::from))
}

pub fn read_set(path: &Path, role: Role) -> Result<TestSet, ArtifactError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut set = TestSet::new(role);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let format_err = |message: String| ArtifactError::Format {
            path: path.to_owned(),
            line: i + 1,
            message,
        };
        let record: CandidateRecord =
            serde_json::from_str(&line).map_err(|e| format_err(e.to_string()))?;
        let candidate = Candidate::try_from(record).map_err(format_err)?;
        set.insert(candidate);
    }
    Ok(set)
}

/// One step of a walk, as persisted.
#[derive(Debug, Serialize)]
struct TraceRecord<'a> {
    seed_index: usize,
    step_index: usize,
    string: &'a str,
    valid: bool,
    operator: Option<&'static str>,
    parent: Option<usize>,
    /// Set on the mutant that completed a validity switch.
    switch: bool,
}

/// Every walk's full trace, one line per step, seeds in order.
pub fn write_traces(path: &Path, pairs: &[BoundaryPair]) -> Result<(), ArtifactError> {
    let records = pairs.iter().flat_map(|pair| {
        pair.trace
            .iter()
            .enumerate()
            .map(move |(step, entry)| TraceRecord {
                seed_index: pair.seed_index,
                step_index: step,
                string: &entry.text,
                valid: entry.valid,
                operator: entry.operator.map(|op| op.name()),
                parent: entry.parent,
                switch: pair.switches.iter().any(|s| s.to == step),
            })
    });
    write_lines(path, records)
}

/// Per-element distances: `comparison,element_index,element,distance`.
pub fn write_distances_csv(path: &Path, report: &ComparisonReport) -> Result<(), ArtifactError> {
    let csv_err = |source| ArtifactError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["comparison", "element_index", "element", "distance"])
        .map_err(csv_err)?;
    for row in &report.rows {
        for (i, (element, d)) in report.elements.iter().zip(&row.distances).enumerate() {
            w.write_record([
                row.comparison.as_str(),
                &i.to_string(),
                element,
                &d.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Row statistics: `comparison,n,min,q1,median,q3,max,mean`.
pub fn write_summary_csv(path: &Path, report: &ComparisonReport) -> Result<(), ArtifactError> {
    let csv_err = |source| ArtifactError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([
        "comparison",
        "n",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "mean",
    ])
    .map_err(csv_err)?;
    for row in &report.rows {
        let s = &row.stats;
        let mut fields = vec![row.comparison.as_str().to_owned(), s.n.to_string()];
        fields.extend([s.min, s.q1, s.median, s.q3, s.max, s.mean].map(|v| v.to_string()));
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// `{holds, margin, medians: {...}}`.
pub fn write_verdict_json(path: &Path, verdict: &BoundaryVerdict) -> Result<(), ArtifactError> {
    write_json(path, verdict)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), ArtifactError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).expect("values serialize");
    writeln!(out).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), ArtifactError> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes()).map_err(io_err(path))?;
    out.flush().map_err(io_err(path))
}
