//! Clean-train, noisy-test robustness sweep.

use serde::{Deserialize, Serialize};

use super::{
    confusion_accuracy, frame_accuracy, label_detections, train_model, Confusion, EvalReport,
    MethodSpec, SnrPoint, TrainedModel,
};
use crate::detect::{detect_bursts, DetectorConfig};
use crate::error::{Error, Result};
use crate::features::{extract_dataset, LabeledDataset};
use crate::signal::{add_awgn, BurstTruth, IqRecording};

pub struct TestRecording {
    pub recording: IqRecording,
    pub truth: BurstTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseStudyConfig {
    pub snr_grid_db: Vec<f64>,
    pub seed: u64,
    pub detector: DetectorConfig,
}

impl Default for NoiseStudyConfig {
    fn default() -> Self {
        Self {
            snr_grid_db: vec![0.0, 2.0, 5.0, 8.0, 10.0, 15.0, 20.0, 30.0],
            seed: 0,
            detector: DetectorConfig::default(),
        }
    }
}

/// Noise seed of test recording `index`. The same draw is reused at every SNR,
/// scaled to the target level, so points differ only in noise power.
fn recording_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64
}

struct Detections {
    detected: usize,
    matched: usize,
    truth: usize,
    /// Raw features of classifiable detections.
    rows: LabeledDataset,
}

fn detect_and_extract(
    rec: &IqRecording,
    truth: &BurstTruth,
    det: &DetectorConfig,
) -> Result<Detections> {
    let dets = detect_bursts(rec, det)?;
    let labels = label_detections(&dets, truth);
    Ok(Detections {
        detected: dets.len(),
        matched: labels.iter().filter(|l| l.is_some()).count(),
        truth: truth.len(),
        rows: extract_dataset(rec, &dets, &labels)?,
    })
}

fn confusion_raw(model: &TrainedModel, rows: &LabeledDataset, c: &mut Confusion) {
    for r in &rows.rows {
        c[r.label.index()][model.predict_raw(&r.features).index()] += 1;
    }
}

/// Trains every method on `train` (raw or standardized), then sweeps the SNR
/// grid. Each report's top-level accuracy is measured on detections in the
/// clean test recordings; `per_snr` holds one point per grid value.
pub fn run_noise_study(
    train: &LabeledDataset,
    methods: &[MethodSpec],
    tests: &[TestRecording],
    cfg: &NoiseStudyConfig,
) -> Result<Vec<EvalReport>> {
    if cfg.snr_grid_db.is_empty() {
        return Err(Error::Empty("SNR grid"));
    }
    if methods.is_empty() {
        return Err(Error::Empty("method list"));
    }
    if tests.is_empty() {
        return Err(Error::Empty("test recording set"));
    }
    cfg.detector.validate()?;
    let models = methods
        .iter()
        .map(|m| train_model(m, train))
        .collect::<Result<Vec<_>>>()?;

    let mut clean = vec![[[0; 3]; 3]; models.len()];
    for t in tests {
        let d = detect_and_extract(&t.recording, &t.truth, &cfg.detector)?;
        for (m, c) in models.iter().zip(clean.iter_mut()) {
            confusion_raw(m, &d.rows, c);
        }
    }

    let mut points: Vec<Vec<SnrPoint>> = vec![Vec::new(); models.len()];
    for &snr in &cfg.snr_grid_db {
        let mut conf = vec![[[0; 3]; 3]; models.len()];
        let (mut detected, mut matched, mut truth) = (0, 0, 0);
        for (i, t) in tests.iter().enumerate() {
            let noisy = add_awgn(&t.recording, snr, recording_seed(cfg.seed, i))?;
            let d = detect_and_extract(&noisy, &t.truth, &cfg.detector)?;
            detected += d.detected;
            matched += d.matched;
            truth += d.truth;
            for (m, c) in models.iter().zip(conf.iter_mut()) {
                confusion_raw(m, &d.rows, c);
            }
        }
        for (p, c) in points.iter_mut().zip(conf) {
            p.push(SnrPoint {
                snr_db: snr,
                detected_frames: detected,
                matched_frames: matched,
                false_alarms: detected - matched,
                truth_frames: truth,
                confusion: c,
                accuracy: confusion_accuracy(&c),
                frame_accuracy: frame_accuracy(&c, truth),
            });
        }
    }

    Ok(models
        .iter()
        .zip(clean)
        .zip(points)
        .map(|((m, c), per_snr)| EvalReport {
            method: m.method().name().to_owned(),
            features_used: m.features(),
            accuracy: confusion_accuracy(&c).unwrap_or(0.0),
            confusion: c,
            n_train: m.n_train,
            n_test: c.iter().flatten().sum(),
            per_snr,
        })
        .collect())
}
