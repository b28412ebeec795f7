//! Frame width, silence gap and PAPR features.

use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{IqRecording, ProtocolLabel, Span};
use crate::util::json_hash;

pub const FEATURE_NAMES: [&str; 3] = ["frame_width_us", "silence_gap_us", "papr_db"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub frame_width_us: f64,
    pub silence_gap_us: f64,
    pub papr_db: f64,
}

impl FeatureVector {
    pub fn new(frame_width_us: f64, silence_gap_us: f64, papr_db: f64) -> Self {
        Self {
            frame_width_us,
            silence_gap_us,
            papr_db,
        }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.frame_width_us, self.silence_gap_us, self.papr_db]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Coordinates used by a classifier restricted to `set`.
    pub fn point(&self, set: FeatureSet) -> Vec<f64> {
        self.to_array()[..set.dims()].to_vec()
    }
}

/// Which features a classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSet {
    /// Frame width and silence gap.
    TimeOnly,
    /// Frame width, silence gap and PAPR.
    TimePlusPapr,
}

impl FeatureSet {
    pub fn dims(self) -> usize {
        match self {
            Self::TimeOnly => 2,
            Self::TimePlusPapr => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TimeOnly => "time",
            Self::TimePlusPapr => "time+papr",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "time" | "time-only" | "timeonly" | "2" => Ok(Self::TimeOnly),
            "time+papr" | "all" | "time-papr" | "timepluspapr" | "3" => Ok(Self::TimePlusPapr),
            other => Err(Error::Config(format!("unknown feature set `{other}`"))),
        }
    }
}

/// Duration from rising to falling edge, in microseconds.
pub fn frame_width(burst: &impl Span, sample_rate_hz: f64) -> f64 {
    burst.len_samples() as f64 / sample_rate_hz * 1e6
}

/// Silence between the end of `prev` and the start of `cur`, in microseconds.
pub fn silence_gap(prev: &impl Span, cur: &impl Span, sample_rate_hz: f64) -> Result<f64> {
    if prev.end_sample() > cur.start_sample() {
        return Err(Error::OverlappingBursts {
            prev_end: prev.end_sample(),
            cur_start: cur.start_sample(),
        });
    }
    Ok((cur.start_sample() - prev.end_sample()) as f64 / sample_rate_hz * 1e6)
}

/// Peak over mean instantaneous power across the burst, in dB.
pub fn papr(rec: &IqRecording, burst: &impl Span) -> Result<f64> {
    let (start, end) = (burst.start_sample(), burst.end_sample());
    if start >= end || end > rec.len() {
        return Err(Error::InvalidInput(format!(
            "span {start}..{end} is empty or outside a recording of {} samples",
            rec.len()
        )));
    }
    let (peak, sum) = rec.samples()[start..end]
        .iter()
        .map(|s| s.norm_sqr() as f64)
        .fold((0.0f64, 0.0f64), |(m, s), p| (m.max(p), s + p));
    if peak <= 0.0 {
        return Err(Error::ZeroPower { start, end });
    }
    let mean = sum / (end - start) as f64;
    Ok((10.0 * (peak / mean).log10()).max(0.0))
}

/// Features of every burst that has a predecessor, i.e. `bursts[1..]`.
pub fn frame_features<S: Span>(rec: &IqRecording, bursts: &[S]) -> Result<Vec<FeatureVector>> {
    let rate = rec.sample_rate_hz();
    bursts
        .windows(2)
        .map(|w| {
            Ok(FeatureVector::new(
                frame_width(&w[1], rate),
                silence_gap(&w[0], &w[1], rate)?,
                papr(rec, &w[1])?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub features: FeatureVector,
    pub label: ProtocolLabel,
}

/// Unit of the PAPR feature as seen by the classifiers. Datasets always store
/// dB.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaprUnit {
    #[default]
    Db,
    Linear,
}

impl FromStr for PaprUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "db" => Ok(Self::Db),
            "linear" | "lin" => Ok(Self::Linear),
            other => Err(Error::Config(format!("unknown PAPR unit `{other}`"))),
        }
    }
}

/// How raw features are mapped into classifier space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingOptions {
    pub papr_unit: PaprUnit,
    /// When false the z-score step is the identity.
    pub standardize: bool,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self {
            papr_unit: PaprUnit::Db,
            standardize: true,
        }
    }
}

/// Per-feature z-score parameters (population standard deviation), applied
/// after the PAPR unit conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    #[serde(default)]
    pub papr_unit: PaprUnit,
    pub mean: [f64; 3],
    pub stddev: [f64; 3],
}

fn to_unit(v: &FeatureVector, unit: PaprUnit) -> [f64; 3] {
    let mut a = v.to_array();
    if unit == PaprUnit::Linear {
        a[2] = 10f64.powf(a[2] / 10.0);
    }
    a
}

impl Standardization {
    /// Z-score in dB units.
    pub fn fit(rows: &[FeatureVector]) -> Result<Self> {
        Self::fit_with(rows, &ScalingOptions::default())
    }

    /// Mean 0 and unit deviation: only the unit conversion remains.
    pub fn identity(papr_unit: PaprUnit) -> Self {
        Self {
            papr_unit,
            mean: [0.0; 3],
            stddev: [1.0; 3],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mean == [0.0; 3] && self.stddev == [1.0; 3]
    }

    pub fn options(&self) -> ScalingOptions {
        ScalingOptions {
            papr_unit: self.papr_unit,
            standardize: !self.is_identity(),
        }
    }

    pub fn fit_with(rows: &[FeatureVector], opts: &ScalingOptions) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if !opts.standardize {
            return Ok(Self::identity(opts.papr_unit));
        }
        let rows: Vec<[f64; 3]> = rows.iter().map(|r| to_unit(r, opts.papr_unit)).collect();
        let n = rows.len() as f64;
        let mut mean = [0.0; 3];
        for r in &rows {
            for (m, &v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = [0.0; 3];
        for r in &rows {
            for ((s, &v), m) in var.iter_mut().zip(r).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        let mut stddev = [0.0; 3];
        for i in 0..3 {
            stddev[i] = (var[i] / n).sqrt();
            if !(stddev[i] > 0.0 && stddev[i].is_finite()) {
                return Err(Error::ZeroVariance(FEATURE_NAMES[i]));
            }
        }
        Ok(Self {
            papr_unit: opts.papr_unit,
            mean,
            stddev,
        })
    }

    pub fn apply(&self, v: &FeatureVector) -> FeatureVector {
        let a = to_unit(v, self.papr_unit);
        FeatureVector::from_array(std::array::from_fn(|i| {
            (a[i] - self.mean[i]) / self.stddev[i]
        }))
    }

    /// Back to raw features, PAPR in dB.
    pub fn invert(&self, v: &FeatureVector) -> FeatureVector {
        let a = v.to_array();
        let mut raw: [f64; 3] = std::array::from_fn(|i| a[i] * self.stddev[i] + self.mean[i]);
        if self.papr_unit == PaprUnit::Linear {
            raw[2] = 10.0 * raw[2].log10();
        }
        FeatureVector::from_array(raw)
    }

    pub fn hash(&self) -> String {
        json_hash(self)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub rows: Vec<LabeledRow>,
    /// Present once the rows have been standardized with these parameters.
    pub standardization: Option<Standardization>,
}

impl LabeledDataset {
    pub fn new(rows: Vec<LabeledRow>) -> Self {
        Self {
            rows,
            standardization: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for r in &self.rows {
            c[r.label.index()] += 1;
        }
        c
    }

    pub fn features(&self) -> Vec<FeatureVector> {
        self.rows.iter().map(|r| r.features).collect()
    }

    pub fn extend(&mut self, other: LabeledDataset) {
        self.rows.extend(other.rows);
    }
}

/// One row per burst except the first (whose gap is undefined). Bursts whose
/// label is `None` still anchor the next gap but produce no row.
pub fn extract_dataset<S: Span>(
    rec: &IqRecording,
    bursts: &[S],
    labels: &[Option<ProtocolLabel>],
) -> Result<LabeledDataset> {
    if labels.len() != bursts.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} bursts",
            labels.len(),
            bursts.len()
        )));
    }
    let rate = rec.sample_rate_hz();
    let mut rows = Vec::new();
    for (i, label) in labels.iter().enumerate().skip(1) {
        let Some(label) = *label else { continue };
        let features = FeatureVector::new(
            frame_width(&bursts[i], rate),
            silence_gap(&bursts[i - 1], &bursts[i], rate)?,
            papr(rec, &bursts[i])?,
        );
        rows.push(LabeledRow { features, label });
    }
    Ok(LabeledDataset::new(rows))
}

/// Z-scores every feature. Without `stats` they are fitted on `ds` itself.
pub fn standardize(ds: &LabeledDataset, stats: Option<&Standardization>) -> Result<LabeledDataset> {
    if ds.standardization.is_some() {
        return Err(Error::InvalidInput(
            "dataset is already standardized".into(),
        ));
    }
    let stats = match stats {
        Some(s) => *s,
        None => Standardization::fit(&ds.features())?,
    };
    Ok(LabeledDataset {
        rows: ds
            .rows
            .iter()
            .map(|r| LabeledRow {
                features: stats.apply(&r.features),
                label: r.label,
            })
            .collect(),
        standardization: Some(stats),
    })
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    frame_width_us: f64,
    silence_gap_us: f64,
    papr_db: f64,
    label: u8,
}

/// `foo.csv` -> `foo.stats.json`.
pub fn stats_sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("stats.json")
}

/// Writes rows as `frame_width_us,silence_gap_us,papr_db,label`.
pub fn write_csv<W: Write>(ds: &LabeledDataset, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    // Header must appear even for an empty dataset.
    out.write_record(["frame_width_us", "silence_gap_us", "papr_db", "label"])?;
    for r in &ds.rows {
        let f = r.features;
        out.write_record(&[
            f.frame_width_us.to_string(),
            f.silence_gap_us.to_string(),
            f.papr_db.to_string(),
            r.label.code().to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn read_csv<R: Read>(r: R) -> Result<LabeledDataset> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        let row: CsvRow = rec?;
        let label = ProtocolLabel::from_code(row.label)
            .ok_or_else(|| Error::InvalidInput(format!("unknown label code {}", row.label)))?;
        rows.push(LabeledRow {
            features: FeatureVector::new(row.frame_width_us, row.silence_gap_us, row.papr_db),
            label,
        });
    }
    Ok(LabeledDataset::new(rows))
}

/// Writes `ds` to `path`; standardized datasets also get a stats sidecar.
pub fn save_dataset(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(ds, std::io::BufWriter::new(f))?;
    if let Some(stats) = &ds.standardization {
        save_stats(&stats_sidecar_path(path), stats)?;
    }
    Ok(())
}

/// Reads a dataset CSV. A stats sidecar, if present, is attached as the
/// dataset's standardization.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ds = read_csv(std::io::BufReader::new(f))?;
    let side = stats_sidecar_path(path);
    if side.exists() {
        ds.standardization = Some(load_stats(&side)?);
    }
    Ok(ds)
}

#[derive(Serialize, Deserialize)]
struct StatsFile {
    features: [String; 3],
    #[serde(default)]
    papr_unit: PaprUnit,
    mean: [f64; 3],
    stddev: [f64; 3],
    hash: String,
}

pub fn save_stats(path: &Path, stats: &Standardization) -> Result<()> {
    let file = StatsFile {
        features: FEATURE_NAMES.map(str::to_owned),
        papr_unit: stats.papr_unit,
        mean: stats.mean,
        stddev: stats.stddev,
        hash: stats.hash(),
    };
    crate::io::write_json(path, &file)
}

pub fn load_stats(path: &Path) -> Result<Standardization> {
    let file: StatsFile = crate::io::read_json(path)?;
    Ok(Standardization {
        papr_unit: file.papr_unit,
        mean: file.mean,
        stddev: file.stddev,
    })
}
