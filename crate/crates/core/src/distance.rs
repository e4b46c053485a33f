//! String distance metrics and their set-level aggregations.
//!
//! Four metrics are provided, from fully domain-agnostic to date specific:
//! normalised compression distance ([`Ncd`]), [`Levenshtein`] edit distance,
//! calendar [`DayDistance`] and most-significant-integer distance
//! ([`Msid`]). All of them are total: any pair of strings yields a finite,
//! non-negative value, because step 2 feeds invalid strings into them.

use std::cell::RefCell;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use flate2::{Compress, Compression, FlushCompress, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calendar::{DateFormat, DateSyntax, MONTH_NAMES};

pub const DEFAULT_INCOMPARABLE_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistanceError {
    #[error("compressor failure: {0}")]
    Compressor(String),
    #[error("{0} set is empty")]
    EmptySet(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    DomainAgnostic,
    EncodingSpecific,
    DomainSpecific,
}

/// A named, symmetric, non-negative function over string pairs.
pub trait DistanceMetric: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn kind(&self) -> MetricKind;
    fn eval(&self, a: &str, b: &str) -> Result<f64, DistanceError>;

    /// For each element of `from`, its minimum distance to the non-empty
    /// `to`. Must agree exactly with repeated [`eval`](Self::eval); metrics
    /// with reusable per-string work override it.
    fn min_distances(&self, from: &[&str], to: &[&str]) -> Result<Vec<f64>, DistanceError> {
        from.par_iter()
            .map(|a| {
                to.iter()
                    .try_fold(f64::INFINITY, |best, b| Ok(best.min(self.eval(a, b)?)))
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Levenshtein

/// Minimal number of single-scalar insertions, deletions and substitutions
/// turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    rapidfuzz::distance::levenshtein::distance(a.chars(), b.chars())
}

/// Nearest neighbour of `a` under edit distance. `to` must be sorted by
/// scalar count; the length difference is a lower bound, so the scan walks
/// outwards from `a`'s length and stops once no closer string is possible.
fn nearest_edit_distance(a: &str, to: &[(usize, Vec<char>)]) -> usize {
    use rapidfuzz::distance::levenshtein::{Args, BatchComparator};

    let scorer = BatchComparator::new(a.chars());
    let len = a.chars().count();
    let split = to.partition_point(|(n, _)| *n < len);
    let (mut lo, mut hi) = (split, split);
    let mut best = usize::MAX;
    while best > 0 {
        let below = lo.checked_sub(1).map(|i| len - to[i].0);
        let above = to.get(hi).map(|(n, _)| n - len);
        let (i, gap) = match (below, above) {
            (Some(b), Some(h)) if b <= h => (lo - 1, b),
            (Some(b), None) => (lo - 1, b),
            (_, Some(h)) => (hi, h),
            (None, None) => break,
        };
        if gap >= best {
            break;
        }
        if i < lo {
            lo = i;
        } else {
            hi += 1;
        }
        let args = Args::default().score_cutoff(best.saturating_sub(1));
        if let Some(d) = scorer.distance_with_args(to[i].1.iter().copied(), &args) {
            best = d;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Levenshtein;

impl DistanceMetric for Levenshtein {
    fn name(&self) -> &'static str {
        "levenshtein"
    }

    fn kind(&self) -> MetricKind {
        MetricKind::EncodingSpecific
    }

    fn eval(&self, a: &str, b: &str) -> Result<f64, DistanceError> {
        Ok(levenshtein(a, b) as f64)
    }

    fn min_distances(&self, from: &[&str], to: &[&str]) -> Result<Vec<f64>, DistanceError> {
        let mut sorted: Vec<(usize, Vec<char>)> = to
            .iter()
            .map(|b| {
                let chars: Vec<char> = b.chars().collect();
                (chars.len(), chars)
            })
            .collect();
        sorted.sort();
        sorted.dedup();
        Ok(from
            .par_iter()
            .map(|a| match nearest_edit_distance(a, &sorted) {
                usize::MAX => f64::INFINITY,
                d => d as f64,
            })
            .collect())
    }
}

// ---------------------------------------------------------------------------
// NCD

/// Deterministic lossless compressor used by [`Ncd`]. Written in config as
/// `zstd-<level>`, `zlib-<level>` or `deflate-<level>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compressor {
    /// Zstandard frame without content size, checksum or dictionary id, so
    /// the length depends on the data alone. Levels 1 to 22.
    Zstd { level: i32 },
    /// RFC 1950 stream (deflate plus 6 bytes of header and checksum).
    Zlib { level: u32 },
    /// Raw RFC 1951 deflate stream.
    Deflate { level: u32 },
}

impl Default for Compressor {
    fn default() -> Self {
        Compressor::Zstd { level: 19 }
    }
}

impl fmt::Display for Compressor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Compressor::Zstd { level } => write!(f, "zstd-{level}"),
            Compressor::Zlib { level } => write!(f, "zlib-{level}"),
            Compressor::Deflate { level } => write!(f, "deflate-{level}"),
        }
    }
}

impl FromStr for Compressor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, level) = s
            .split_once('-')
            .ok_or_else(|| format!("compressor `{s}` must look like zstd-19 or zlib-9"))?;
        let level: u32 = level
            .parse()
            .map_err(|_| format!("compressor level in `{s}` is not a number"))?;
        let range = match family {
            "zstd" => 1..=22,
            "zlib" | "deflate" => 0..=9,
            _ => return Err(format!("unknown compressor family `{family}`")),
        };
        if !range.contains(&level) {
            return Err(format!(
                "{family} level in `{s}` must be {}..={}",
                range.start(),
                range.end()
            ));
        }
        Ok(match family {
            "zstd" => Compressor::Zstd {
                level: level as i32,
            },
            "zlib" => Compressor::Zlib { level },
            _ => Compressor::Deflate { level },
        })
    }
}

impl Serialize for Compressor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Compressor {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

enum Engine {
    Zstd(zstd::bulk::Compressor<'static>),
    Deflate(Compress),
}

impl Engine {
    fn new(c: Compressor) -> std::io::Result<Engine> {
        Ok(match c {
            Compressor::Zstd { level } => {
                let mut z = zstd::bulk::Compressor::new(level)?;
                z.include_contentsize(false)?;
                z.include_checksum(false)?;
                z.include_dictid(false)?;
                Engine::Zstd(z)
            }
            Compressor::Zlib { level } => {
                Engine::Deflate(Compress::new(Compression::new(level), true))
            }
            Compressor::Deflate { level } => {
                Engine::Deflate(Compress::new(Compression::new(level), false))
            }
        })
    }

    fn compressed_len(&mut self, input: &[u8], out: &mut Vec<u8>) -> std::io::Result<usize> {
        out.clear();
        match self {
            Engine::Zstd(z) => {
                out.reserve(zstd::zstd_safe::compress_bound(input.len()));
                z.compress_to_buffer(input, out)
            }
            Engine::Deflate(engine) => {
                engine.reset();
                out.reserve(input.len() + input.len() / 8 + 64);
                loop {
                    let consumed = engine.total_in() as usize;
                    let status = engine
                        .compress_vec(&input[consumed..], out, FlushCompress::Finish)
                        .map_err(std::io::Error::other)?;
                    match status {
                        Status::StreamEnd => break,
                        Status::Ok | Status::BufError => out.reserve(out.capacity().max(64)),
                    }
                }
                Ok(engine.total_out() as usize)
            }
        }
    }
}

/// Per-thread engines plus reusable input and output buffers.
type EngineCache = (Vec<(Compressor, Engine)>, Vec<u8>, Vec<u8>);

thread_local! {
    static ENGINES: RefCell<EngineCache> =
        const { RefCell::new((Vec::new(), Vec::new(), Vec::new())) };
}

impl Compressor {
    /// Byte length of the compressed form of the concatenation of `parts`.
    pub fn compressed_len(&self, parts: &[&[u8]]) -> Result<usize, DistanceError> {
        let failed = |e: std::io::Error| DistanceError::Compressor(format!("{self}: {e}"));
        ENGINES.with(|cell| {
            let (engines, input, out) = &mut *cell.borrow_mut();
            let slot = match engines.iter().position(|(c, _)| c == self) {
                Some(i) => i,
                None => {
                    engines.push((*self, Engine::new(*self).map_err(failed)?));
                    engines.len() - 1
                }
            };
            input.clear();
            for p in parts {
                input.extend_from_slice(p);
            }
            engines[slot].1.compressed_len(input, out).map_err(failed)
        })
    }
}

/// `(C(ab) - min(C(a), C(b))) / max(C(a), C(b))` over UTF-8 bytes.
pub fn ncd(a: &str, b: &str, compressor: Compressor) -> Result<f64, DistanceError> {
    let ca = compressor.compressed_len(&[a.as_bytes()])?;
    let cb = compressor.compressed_len(&[b.as_bytes()])?;
    let cab = compressor.compressed_len(&[a.as_bytes(), b.as_bytes()])?;
    Ok(ncd_from_sizes(ca, cb, cab))
}

fn ncd_from_sizes(ca: usize, cb: usize, cab: usize) -> f64 {
    let hi = ca.max(cb);
    if hi == 0 {
        return 0.0;
    }
    (cab.saturating_sub(ca.min(cb))) as f64 / hi as f64
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Ncd {
    pub compressor: Compressor,
}

impl DistanceMetric for Ncd {
    fn name(&self) -> &'static str {
        "ncd"
    }

    fn kind(&self) -> MetricKind {
        MetricKind::DomainAgnostic
    }

    fn eval(&self, a: &str, b: &str) -> Result<f64, DistanceError> {
        ncd(a, b, self.compressor)
    }

    /// Compresses every string on its own once, leaving one compression per
    /// pair.
    fn min_distances(&self, from: &[&str], to: &[&str]) -> Result<Vec<f64>, DistanceError> {
        let c = self.compressor;
        let to_sizes: Vec<usize> = to
            .par_iter()
            .map(|b| c.compressed_len(&[b.as_bytes()]))
            .collect::<Result<_, _>>()?;
        from.par_iter()
            .map(|a| {
                let ca = c.compressed_len(&[a.as_bytes()])?;
                let mut best = f64::INFINITY;
                for (b, &cb) in to.iter().zip(&to_sizes) {
                    let cab = c.compressed_len(&[a.as_bytes(), b.as_bytes()])?;
                    best = best.min(ncd_from_sizes(ca, cb, cab));
                }
                Ok(best)
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Domain-specific metrics

/// Maximal runs of ASCII digits, in order of appearance.
fn digit_runs(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
}

/// Numeric value of a digit run; runs too long for `f64` saturate.
fn run_value(run: &str) -> f64 {
    let v: f64 = run.parse().unwrap_or(f64::MAX);
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

/// Value of the largest decimal integer token in `s`, if any.
pub fn most_significant_int(s: &str) -> Option<f64> {
    digit_runs(s).map(run_value).reduce(f64::max)
}

/// Absolute difference between the largest integer tokens of `a` and `b`;
/// `penalty` when either has no digits.
pub fn msid(a: &str, b: &str, penalty: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    match (most_significant_int(a), most_significant_int(b)) {
        (Some(x), Some(y)) => (x - y).abs(),
        _ => penalty,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Msid {
    pub penalty: f64,
}

impl Default for Msid {
    fn default() -> Self {
        Msid {
            penalty: DEFAULT_INCOMPARABLE_PENALTY,
        }
    }
}

impl DistanceMetric for Msid {
    fn name(&self) -> &'static str {
        "msid"
    }

    fn kind(&self) -> MetricKind {
        MetricKind::DomainSpecific
    }

    fn eval(&self, a: &str, b: &str) -> Result<f64, DistanceError> {
        Ok(msid(a, b, self.penalty))
    }
}

const DAYS_PER_YEAR: f64 = 365.2425;
const DAYS_PER_MONTH: f64 = DAYS_PER_YEAR / 12.0;

/// Approximate day number of a date-like string whose fields need not form
/// a real calendar date (`2019-02-30`, `2020-13-01`, `2020-01-`). Fields are
/// read from the digit runs in the order of `format`; missing fields count
/// as zero.
fn approximate_day_number(s: &str, format: DateFormat) -> Option<f64> {
    let runs: Vec<f64> = digit_runs(s).take(3).map(run_value).collect();
    if runs.is_empty() {
        return None;
    }
    let field = |i: usize| runs.get(i).copied().unwrap_or(0.0);
    let (year, month, day) = match format {
        DateFormat::Iso => (field(0), field(1), field(2)),
        DateFormat::Us => (field(2), field(0), field(1)),
        DateFormat::DayMonthName => {
            let month = MONTH_NAMES
                .iter()
                .position(|name| s.contains(name))
                .map_or(0.0, |i| i as f64 + 1.0);
            (field(1), month, field(0))
        }
    };
    let n = year * DAYS_PER_YEAR + month * DAYS_PER_MONTH + day;
    n.is_finite().then_some(n)
}

fn exact_day_number(date: chrono::NaiveDate) -> f64 {
    use chrono::Datelike;
    date.num_days_from_ce() as f64
}

/// Distance in days between two date strings.
///
/// When both parse under `syntax` the exact calendar difference is
/// returned. Otherwise both sides fall back to an approximate day number
/// read from their numeric fields; a string without any digit is
/// incomparable and yields `penalty`.
pub fn day_distance(a: &str, b: &str, syntax: &DateSyntax, penalty: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if let (Ok(x), Ok(y)) = (syntax.parse(a), syntax.parse(b)) {
        return (exact_day_number(x) - exact_day_number(y)).abs();
    }
    let format = syntax.formats.first().copied().unwrap_or(DateFormat::Iso);
    let approx = |s: &str| match syntax.parse(s) {
        Ok(date) => {
            use chrono::Datelike;
            Some(
                date.year() as f64 * DAYS_PER_YEAR
                    + date.month() as f64 * DAYS_PER_MONTH
                    + date.day() as f64,
            )
        }
        Err(_) => approximate_day_number(s, format),
    };
    match (approx(a), approx(b)) {
        (Some(x), Some(y)) => (x - y).abs(),
        _ => penalty,
    }
}

#[derive(Debug, Clone)]
pub struct DayDistance {
    pub syntax: DateSyntax,
    pub penalty: f64,
}

impl Default for DayDistance {
    fn default() -> Self {
        DayDistance {
            syntax: DateSyntax::default(),
            penalty: DEFAULT_INCOMPARABLE_PENALTY,
        }
    }
}

impl DistanceMetric for DayDistance {
    fn name(&self) -> &'static str {
        "day"
    }

    fn kind(&self) -> MetricKind {
        MetricKind::DomainSpecific
    }

    fn eval(&self, a: &str, b: &str) -> Result<f64, DistanceError> {
        Ok(day_distance(a, b, &self.syntax, self.penalty))
    }
}

// ---------------------------------------------------------------------------
// Registry

pub const METRIC_NAMES: [&str; 4] = ["ncd", "levenshtein", "day", "msid"];

/// Settings shared by every metric of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSettings {
    pub compressor: Compressor,
    pub incomparable_penalty: f64,
    pub date_syntax: DateSyntax,
}

impl Default for MetricSettings {
    fn default() -> Self {
        MetricSettings {
            compressor: Compressor::default(),
            incomparable_penalty: DEFAULT_INCOMPARABLE_PENALTY,
            date_syntax: DateSyntax::default(),
        }
    }
}

pub fn metric_by_name(name: &str, settings: &MetricSettings) -> Option<Arc<dyn DistanceMetric>> {
    let metric: Arc<dyn DistanceMetric> = match name {
        "ncd" => Arc::new(Ncd {
            compressor: settings.compressor,
        }),
        "levenshtein" => Arc::new(Levenshtein),
        "day" => Arc::new(DayDistance {
            syntax: settings.date_syntax.clone(),
            penalty: settings.incomparable_penalty,
        }),
        "msid" => Arc::new(Msid {
            penalty: settings.incomparable_penalty,
        }),
        _ => return None,
    };
    Some(metric)
}

// ---------------------------------------------------------------------------
// Set aggregation

/// `min over s in set of metric(c, s)`, or `+inf` for an empty set.
pub fn min_dist_to_set<'a, I>(
    candidate: &str,
    set: I,
    metric: &dyn DistanceMetric,
) -> Result<f64, DistanceError>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut best = f64::INFINITY;
    for s in set {
        let d = metric.eval(candidate, s)?;
        if d < best {
            best = d;
        }
    }
    Ok(best)
}

/// For each element of `from`, in order, its minimum distance to `to`.
pub fn set_min_distances(
    from: &[&str],
    to: &[&str],
    metric: &dyn DistanceMetric,
) -> Result<Vec<f64>, DistanceError> {
    if from.is_empty() {
        return Err(DistanceError::EmptySet("source"));
    }
    if to.is_empty() {
        return Err(DistanceError::EmptySet("target"));
    }
    metric.min_distances(from, to)
}
