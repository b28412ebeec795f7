//! Baseband recordings, ground truth and the synthetic traffic generator.

mod channel;
mod generator;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use channel::{add_awgn, burst_region_power, NO_NOISE};
pub use generator::{
    generate, generate_beacon, generate_bluetooth, generate_mixed, generate_wifi_exchange,
    overlap_fraction, GeneratorConfig, Scenario, UsRange,
};

/// Capture rate of the reference receiver.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 20e6;

/// Complex baseband samples with their sample rate and provenance strings.
#[derive(Debug, Clone, PartialEq)]
pub struct IqRecording {
    samples: Vec<Complex32>,
    sample_rate_hz: f64,
    meta: BTreeMap<String, String>,
}

impl IqRecording {
    pub fn new(samples: Vec<Complex32>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::InvalidInput(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            meta: BTreeMap::new(),
        })
    }

    pub fn samples(&self) -> &[Complex32] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.get(key).map(String::as_str)
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.insert(key.into(), value.to_string());
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set_meta(key, value);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Scales every sample by `factor`, keeping metadata.
    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            sample_rate_hz: self.sample_rate_hz,
            meta: self.meta.clone(),
        }
    }

    pub(crate) fn from_parts(
        samples: Vec<Complex32>,
        sample_rate_hz: f64,
        meta: BTreeMap<String, String>,
    ) -> Self {
        Self {
            samples,
            sample_rate_hz,
            meta,
        }
    }

    pub fn into_samples(self) -> Vec<Complex32> {
        self.samples
    }
}

/// Protocol class of a frame. The integer codes are stable on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ProtocolLabel {
    Wifi = 0,
    WifiBeacon = 1,
    Bluetooth = 2,
}

impl ProtocolLabel {
    pub const ALL: [ProtocolLabel; 3] = [Self::Wifi, Self::WifiBeacon, Self::Bluetooth];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Wifi => "wifi",
            Self::WifiBeacon => "beacon",
            Self::Bluetooth => "bluetooth",
        }
    }
}

impl From<ProtocolLabel> for u8 {
    fn from(l: ProtocolLabel) -> u8 {
        l.code()
    }
}

impl TryFrom<u8> for ProtocolLabel {
    type Error = String;

    fn try_from(code: u8) -> std::result::Result<Self, String> {
        Self::from_code(code).ok_or_else(|| format!("unknown label code {code}"))
    }
}

impl fmt::Display for ProtocolLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "wifi" => Ok(Self::Wifi),
            "1" | "beacon" | "wifi-beacon" | "wifi_beacon" => Ok(Self::WifiBeacon),
            "2" | "bluetooth" | "bt" => Ok(Self::Bluetooth),
            other => Err(Error::InvalidInput(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Beacon,
    Rts,
    Cts,
    Data,
    Ack,
    BtData,
    BtAck,
}

/// Half-open sample interval `[start, end)`.
pub trait Span {
    fn start_sample(&self) -> usize;
    fn end_sample(&self) -> usize;

    fn len_samples(&self) -> usize {
        self.end_sample().saturating_sub(self.start_sample())
    }

    fn overlap_samples(&self, other: &impl Span) -> usize {
        let lo = self.start_sample().max(other.start_sample());
        let hi = self.end_sample().min(other.end_sample());
        hi.saturating_sub(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthBurst {
    pub start_sample: usize,
    pub end_sample: usize,
    pub label: ProtocolLabel,
    pub kind: FrameKind,
}

impl Span for TruthBurst {
    fn start_sample(&self) -> usize {
        self.start_sample
    }
    fn end_sample(&self) -> usize {
        self.end_sample
    }
}

/// Ground-truth frame intervals, sorted by start sample.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BurstTruth {
    pub bursts: Vec<TruthBurst>,
}

impl BurstTruth {
    pub fn len(&self) -> usize {
        self.bursts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bursts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &TruthBurst> {
        self.bursts.iter()
    }

    pub fn count_label(&self, label: ProtocolLabel) -> usize {
        self.bursts.iter().filter(|b| b.label == label).count()
    }

    pub fn count_kind(&self, kind: FrameKind) -> usize {
        self.bursts.iter().filter(|b| b.kind == kind).count()
    }
}
