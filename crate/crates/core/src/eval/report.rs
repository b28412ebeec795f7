use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EvalReport;
use crate::error::{Error, Result};
use crate::util::extended_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    /// One row for the clean evaluation plus one per SNR point.
    Csv,
    /// SNR points only.
    CurveCsv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            "curve-csv" | "curve" => Ok(Self::CurveCsv),
            other => Err(Error::UnknownFormat(other.to_owned())),
        }
    }
}

/// One CSV line: `method,features,snr_db,detected_frames,accuracy,frame_accuracy`.
/// The clean evaluation has `snr_db = inf`, counts classified frames and has
/// no frame accuracy; an empty accuracy means nothing was classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub features: String,
    #[serde(with = "extended_f64")]
    pub snr_db: f64,
    pub detected_frames: usize,
    pub accuracy: Option<f64>,
    pub frame_accuracy: Option<f64>,
}

fn rows(reports: &[EvalReport], with_clean: bool) -> Vec<ReportRow> {
    let mut out = Vec::new();
    for r in reports {
        let features = r.features_used.name().to_owned();
        if with_clean {
            out.push(ReportRow {
                method: r.method.clone(),
                features: features.clone(),
                snr_db: f64::INFINITY,
                detected_frames: r.n_test,
                accuracy: Some(r.accuracy),
                frame_accuracy: None,
            });
        }
        for p in &r.per_snr {
            out.push(ReportRow {
                method: r.method.clone(),
                features: features.clone(),
                snr_db: p.snr_db,
                detected_frames: p.detected_frames,
                accuracy: p.accuracy,
                frame_accuracy: p.frame_accuracy,
            });
        }
    }
    out
}

pub fn emit_report(reports: &[EvalReport], format: ReportFormat) -> Result<Vec<u8>> {
    if reports.is_empty() {
        return Err(Error::Empty("report list"));
    }
    match format {
        ReportFormat::Json => {
            let mut v = serde_json::to_vec_pretty(reports)?;
            v.push(b'\n');
            Ok(v)
        }
        ReportFormat::Csv | ReportFormat::CurveCsv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record([
                "method",
                "features",
                "snr_db",
                "detected_frames",
                "accuracy",
                "frame_accuracy",
            ])?;
            for r in rows(reports, format == ReportFormat::Csv) {
                w.serialize(r)?;
            }
            w.into_inner()
                .map_err(|e| Error::InvalidInput(format!("csv buffer: {e}")))
        }
    }
}

pub fn parse_report_csv(bytes: &[u8]) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(bytes);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}
