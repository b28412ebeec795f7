//! On-disk formats.
//!
//! * IQ: raw interleaved little-endian `f32` pairs `I0 Q0 I1 Q1 ...` in
//!   `<name>.iq`, with a JSON sidecar `<name>.meta.json`.
//! * Truth: JSON array of `{start_sample, end_sample, label, kind}`.
//! * Detections: JSON array of `{start_sample, end_sample, peak_ratio}`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::detect::DetectedBurst;
use crate::error::{Error, Result};
use crate::signal::{BurstTruth, IqRecording};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqMeta {
    pub sample_rate_hz: f64,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl IqMeta {
    pub fn of(rec: &IqRecording) -> Self {
        Self {
            sample_rate_hz: rec.sample_rate_hz(),
            scenario: rec.meta_value("scenario").map(str::to_owned),
            seed: rec.meta_value("seed").and_then(|s| s.parse().ok()),
            config_hash: rec.meta_value("config_hash").map(str::to_owned),
            meta: rec.meta().clone(),
        }
    }
}

/// `foo.iq` -> `foo.meta.json`.
pub fn meta_path(iq_path: &Path) -> PathBuf {
    iq_path.with_extension("meta.json")
}

/// `foo.iq` -> `foo.truth.json`.
pub fn truth_path(iq_path: &Path) -> PathBuf {
    iq_path.with_extension("truth.json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

/// Writes the samples to `path` and the sidecar next to it.
pub fn write_iq(path: &Path, rec: &IqRecording) -> Result<()> {
    let mut w = create(path)?;
    let mut buf = Vec::with_capacity(1 << 16);
    for chunk in rec.samples().chunks(8192) {
        buf.clear();
        for s in chunk {
            buf.extend_from_slice(&s.re.to_le_bytes());
            buf.extend_from_slice(&s.im.to_le_bytes());
        }
        w.write_all(&buf).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    write_json(&meta_path(path), &IqMeta::of(rec))
}

pub fn read_iq(path: &Path) -> Result<IqRecording> {
    let mp = meta_path(path);
    if !mp.exists() {
        return Err(Error::InvalidInput(format!(
            "missing sidecar {} (sample rate unknown)",
            mp.display()
        )));
    }
    let meta: IqMeta = read_json(&mp)?;
    let mut bytes = Vec::new();
    open(path)?
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::InvalidInput(format!(
            "{}: length {} is not a whole number of complex f32 samples",
            path.display(),
            bytes.len()
        )));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex32::new(re, im)
        })
        .collect();
    let mut rec = IqRecording::new(samples, meta.sample_rate_hz)?;
    for (k, v) in meta.meta {
        rec.set_meta(k, v);
    }
    Ok(rec)
}

pub fn write_truth(path: &Path, truth: &BurstTruth) -> Result<()> {
    write_json(path, truth)
}

pub fn read_truth(path: &Path) -> Result<BurstTruth> {
    read_json(path)
}

pub fn write_detections(path: &Path, bursts: &[DetectedBurst]) -> Result<()> {
    write_json(path, bursts)
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectedBurst>> {
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{generate, GeneratorConfig, Scenario};

    #[test]
    fn iq_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bt.iq");
        let cfg = GeneratorConfig::new(Scenario::Bluetooth, 0.01, 4);
        let (rec, truth) = generate(&cfg, 20e6).unwrap();
        write_iq(&path, &rec).unwrap();
        write_truth(&truth_path(&path), &truth).unwrap();

        assert_eq!(
            std::fs::metadata(&path).unwrap().len(),
            rec.len() as u64 * 8
        );
        let back = read_iq(&path).unwrap();
        assert_eq!(back, rec);
        assert_eq!(read_truth(&truth_path(&path)).unwrap(), truth);

        let meta: serde_json::Value = read_json(&meta_path(&path)).unwrap();
        assert_eq!(meta["sample_rate_hz"], 20e6);
        assert_eq!(meta["scenario"], "bluetooth");
        assert_eq!(meta["seed"], 4);
        assert_eq!(meta["config_hash"], cfg.hash());
    }

    #[test]
    fn missing_sidecar_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.iq");
        std::fs::write(&path, [0u8; 16]).unwrap();
        let err = read_iq(&path).unwrap_err();
        assert!(err.to_string().contains("sample rate unknown"));
    }

    #[test]
    fn truth_json_shape() {
        let truth: BurstTruth = serde_json::from_str(
            r#"[{"start_sample":1,"end_sample":5,"label":2,"kind":"bt_ack"}]"#,
        )
        .unwrap();
        assert_eq!(truth.bursts[0].end_sample, 5);
        let text = serde_json::to_string(&truth).unwrap();
        assert_eq!(
            text,
            r#"[{"start_sample":1,"end_sample":5,"label":2,"kind":"bt_ack"}]"#
        );
    }
}
