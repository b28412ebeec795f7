//! Labeled training corpus drawn from synthetic recordings.

use serde::{Deserialize, Serialize};

use super::{evaluate, label_detections, train_model, EvalReport, MethodSpec};
use crate::detect::{detect_bursts, DetectorConfig};
use crate::error::{Error, Result};
use crate::features::{extract_dataset, standardize, LabeledDataset, Standardization};
use crate::signal::{
    add_awgn, generate, GeneratorConfig, ProtocolLabel, Scenario, DEFAULT_SAMPLE_RATE_HZ,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Rows kept per class.
    pub frames_per_class: usize,
    pub seed: u64,
    pub sample_rate_hz: f64,
    /// Template for every recording; scenario, duration and seed are set per
    /// recording.
    pub generator: GeneratorConfig,
    pub wifi_recording_s: f64,
    pub bluetooth_recording_s: f64,
    /// Long enough for ten beacon intervals plus one airtime.
    pub beacon_recording_s: f64,
    /// Receiver noise added to every recording before feature extraction;
    /// `None` keeps the recordings noiseless.
    pub capture_snr_db: Option<f64>,
    /// Label truth intervals directly instead of running the detector.
    pub use_truth: bool,
    pub detector: DetectorConfig,
    /// Upper bound on recordings per scenario.
    pub max_recordings: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            frames_per_class: 1000,
            seed: 1,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            generator: GeneratorConfig::default(),
            wifi_recording_s: 0.25,
            bluetooth_recording_s: 1.0,
            beacon_recording_s: 1.03,
            capture_snr_db: None,
            use_truth: false,
            detector: DetectorConfig::default(),
            max_recordings: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub recordings: usize,
    pub detections: usize,
    pub false_alarms: usize,
    pub truth_frames: usize,
    pub class_counts: [usize; 3],
}

fn recording_seed(base: u64, scenario: Scenario, index: usize) -> u64 {
    let tag = match scenario {
        Scenario::WifiExchange => 1,
        Scenario::BeaconOnly => 2,
        Scenario::Bluetooth => 3,
        Scenario::Mixed => 4,
    };
    base.wrapping_mul(1_000_003)
        .wrapping_add(tag * 100_000)
        .wrapping_add(index as u64)
}

/// Generates recordings until every class holds `frames_per_class` rows. Wi-Fi
/// exchanges come first and also contribute their beacons; beacon-only and
/// Bluetooth recordings fill the remaining quota. Rows are raw (not
/// standardized).
pub fn build_corpus(cfg: &CorpusConfig) -> Result<(LabeledDataset, CorpusSummary)> {
    if cfg.frames_per_class == 0 {
        return Err(Error::Config("frames_per_class must be at least 1".into()));
    }
    cfg.detector.validate()?;
    let mut ds = LabeledDataset::default();
    let mut summary = CorpusSummary::default();
    let plan = [
        (
            Scenario::WifiExchange,
            cfg.wifi_recording_s,
            ProtocolLabel::Wifi,
        ),
        (
            Scenario::BeaconOnly,
            cfg.beacon_recording_s,
            ProtocolLabel::WifiBeacon,
        ),
        (
            Scenario::Bluetooth,
            cfg.bluetooth_recording_s,
            ProtocolLabel::Bluetooth,
        ),
    ];
    for (scenario, duration_s, target) in plan {
        let mut index = 0;
        while summary.class_counts[target.index()] < cfg.frames_per_class {
            if index == cfg.max_recordings {
                return Err(Error::Config(format!(
                    "{} {scenario} recordings yield only {} {target} rows",
                    cfg.max_recordings,
                    summary.class_counts[target.index()]
                )));
            }
            let seed = recording_seed(cfg.seed, scenario, index);
            let gen = GeneratorConfig {
                scenario,
                duration_s,
                seed,
                ..cfg.generator.clone()
            };
            index += 1;
            let (mut rec, truth) = generate(&gen, cfg.sample_rate_hz)?;
            if let Some(snr) = cfg.capture_snr_db {
                rec = add_awgn(&rec, snr, !seed)?;
            }
            summary.recordings += 1;
            summary.truth_frames += truth.len();
            let rows = if cfg.use_truth {
                let labels: Vec<_> = truth.iter().map(|b| Some(b.label)).collect();
                extract_dataset(&rec, &truth.bursts, &labels)?
            } else {
                let dets = detect_bursts(&rec, &cfg.detector)?;
                let labels = label_detections(&dets, &truth);
                summary.detections += dets.len();
                summary.false_alarms += labels.iter().filter(|l| l.is_none()).count();
                extract_dataset(&rec, &dets, &labels)?
            };
            for r in rows.rows {
                let c = &mut summary.class_counts[r.label.index()];
                if *c < cfg.frames_per_class {
                    *c += 1;
                    ds.rows.push(r);
                }
            }
        }
    }
    Ok((ds, summary))
}

/// Scales both raw halves with statistics fitted on the training half under
/// each spec's options, trains it and evaluates it on the test half.
pub fn compare_methods(
    train: &LabeledDataset,
    test: &LabeledDataset,
    specs: &[MethodSpec],
) -> Result<Vec<EvalReport>> {
    specs
        .iter()
        .map(|s| {
            let stats = Standardization::fit_with(&train.features(), &s.scaling)?;
            let train = standardize(train, Some(&stats))?;
            let test = standardize(test, Some(&stats))?;
            evaluate(&train_model(s, &train)?, &test)
        })
        .collect()
}
