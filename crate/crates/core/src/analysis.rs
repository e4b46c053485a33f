//! Comparison of the mutated valid set against every other set of a run.
//!
//! For each element of the MVS the minimum distance to a comparison set is
//! computed; the resulting distributions are summarised and the boundary
//! verdict asks whether the MVS sits strictly closer (by median) to the MIS
//! than to anything else.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::candidate::TestSet;
use crate::distance::{set_min_distances, DistanceError, DistanceMetric};

/// A comparison row, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    MvsVsReferenceInvalid,
    MvsVsRandom,
    MvsVsTset,
    MvsVsMis,
    MvsVsAltMvs,
}

impl Comparison {
    pub const ALL: [Comparison; 5] = [
        Comparison::MvsVsReferenceInvalid,
        Comparison::MvsVsRandom,
        Comparison::MvsVsTset,
        Comparison::MvsVsMis,
        Comparison::MvsVsAltMvs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Comparison::MvsVsReferenceInvalid => "mvs_vs_reference_invalid",
            Comparison::MvsVsRandom => "mvs_vs_random",
            Comparison::MvsVsTset => "mvs_vs_tset",
            Comparison::MvsVsMis => "mvs_vs_mis",
            Comparison::MvsVsAltMvs => "mvs_vs_alt_mvs",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("the mutated valid set is empty")]
    EmptyMvs,
    #[error("comparison set for {0} is empty")]
    EmptySet(Comparison),
    #[error("report has no {0} row")]
    MissingRow(Comparison),
    #[error("report has no row besides mvs_vs_mis")]
    NothingToCompare,
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

/// Five-number summary plus mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile by linear interpolation between closest ranks (R's type 7).
/// `sorted` must be non-empty and ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Stats {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
        Some(Stats {
            n: sorted.len(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            // Rounding can push the mean a hair outside the range.
            mean: mean.clamp(sorted[0], sorted[sorted.len() - 1]),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub comparison: Comparison,
    /// One entry per MVS element, in MVS order.
    pub distances: Vec<f64>,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub metric: String,
    /// The MVS elements the distances refer to.
    pub elements: Vec<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, comparison: Comparison) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.comparison == comparison)
    }

    pub fn medians(&self) -> BTreeMap<Comparison, f64> {
        self.rows
            .iter()
            .map(|r| (r.comparison, r.stats.median))
            .collect()
    }
}

/// One row per provided comparison set, in [`Comparison::ALL`] order. A
/// comparison listed twice keeps its last set.
pub fn compare_sets(
    mvs: &TestSet,
    others: &[(Comparison, &TestSet)],
    metric: &dyn DistanceMetric,
) -> Result<ComparisonReport, AnalysisError> {
    if mvs.is_empty() {
        return Err(AnalysisError::EmptyMvs);
    }
    let by_kind: BTreeMap<Comparison, &TestSet> = others.iter().copied().collect();
    let from: Vec<&str> = mvs.strings().collect();
    let mut rows = Vec::with_capacity(by_kind.len());
    for (comparison, set) in by_kind {
        if set.is_empty() {
            return Err(AnalysisError::EmptySet(comparison));
        }
        let to: Vec<&str> = set.strings().collect();
        let distances = set_min_distances(&from, &to, metric)?;
        let stats = Stats::of(&distances).expect("mvs is non-empty");
        rows.push(ComparisonRow {
            comparison,
            distances,
            stats,
        });
    }
    Ok(ComparisonReport {
        metric: metric.name().to_owned(),
        elements: from.into_iter().map(str::to_owned).collect(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryVerdict {
    pub holds: bool,
    /// Smallest other median minus the MVS-to-MIS median; positive iff the
    /// verdict holds.
    pub margin: f64,
    pub medians: BTreeMap<Comparison, f64>,
}

/// Holds iff the MVS-to-MIS median is strictly below every other row's.
pub fn verdict(report: &ComparisonReport) -> Result<BoundaryVerdict, AnalysisError> {
    let mis = report
        .row(Comparison::MvsVsMis)
        .ok_or(AnalysisError::MissingRow(Comparison::MvsVsMis))?
        .stats
        .median;
    let closest_other = report
        .rows
        .iter()
        .filter(|r| r.comparison != Comparison::MvsVsMis)
        .map(|r| r.stats.median)
        .min_by(f64::total_cmp)
        .ok_or(AnalysisError::NothingToCompare)?;
    Ok(BoundaryVerdict {
        holds: mis < closest_other,
        margin: closest_other - mis,
        medians: report.medians(),
    })
}

/// The same comparisons under each metric in turn.
pub fn cross_metric_analysis(
    mvs: &TestSet,
    others: &[(Comparison, &TestSet)],
    metrics: &[Arc<dyn DistanceMetric>],
) -> Result<Vec<ComparisonReport>, AnalysisError> {
    metrics
        .iter()
        .map(|m| compare_sets(mvs, others, m.as_ref()))
        .collect()
}
