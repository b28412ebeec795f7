//! Synthetic Wi-Fi, beacon and Bluetooth traffic.
//!
//! Only timing and envelope statistics are modelled. Wi-Fi frames are a sum of
//! equal-amplitude subcarriers with per-frame random phases (high PAPR), and
//! Bluetooth frames are constant-envelope with a random-walk phase, similar to
//! GFSK. Silence between frames is exactly zero.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::{Complex32, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BurstTruth, FrameKind, IqRecording, ProtocolLabel, TruthBurst};
use crate::error::{Error, Result};
use crate::util::json_hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// An access point sending only beacons.
    BeaconOnly,
    /// RTS/CTS/Data/ACK download traffic with interleaved beacons.
    WifiExchange,
    /// A master/slave pair exchanging 5-slot data and 1-slot ACK packets.
    Bluetooth,
    /// Independent beacon and Bluetooth streams on the air together.
    Mixed,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::BeaconOnly => "beacon",
            Self::WifiExchange => "wifi",
            Self::Bluetooth => "bluetooth",
            Self::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "beacon" | "beacon_only" => Ok(Self::BeaconOnly),
            "wifi" | "wifi_exchange" | "exchange" => Ok(Self::WifiExchange),
            "bluetooth" | "bt" => Ok(Self::Bluetooth),
            "mixed" | "mix" => Ok(Self::Mixed),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Closed interval of durations in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UsRange {
    pub min: f64,
    pub max: f64,
}

impl UsRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, us: f64) -> bool {
        us >= self.min && us <= self.max
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 {
            return Err(Error::Config(format!(
                "{name}: bounds must be finite and non-negative"
            )));
        }
        if self.min > self.max {
            return Err(Error::Config(format!(
                "{name}: min {} exceeds max {}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Inclusive sample-count bounds whose durations stay inside the range.
    fn sample_bounds(&self, rate: f64) -> (usize, usize) {
        let lo = (self.min * rate * 1e-6 - 1e-9).ceil().max(1.0) as usize;
        let hi = (self.max * rate * 1e-6 + 1e-9).floor() as usize;
        if lo <= hi {
            (lo, hi)
        } else {
            // Narrower than one sample: fall back to the nearest representable width.
            let mid = (0.5 * (self.min + self.max) * rate * 1e-6).round().max(1.0) as usize;
            (mid, mid)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub scenario: Scenario,
    pub duration_s: f64,
    pub seed: u64,
    /// RMS amplitude of a full-band Wi-Fi frame; envelope of a Bluetooth frame.
    pub amplitude: f64,
    /// Silence before the first frame.
    pub lead_in_us: f64,

    pub beacon_interval_us: f64,
    pub beacon_airtime_us: f64,

    pub difs_us: f64,
    pub sifs_us: f64,
    pub rts_us: f64,
    pub cts_us: f64,
    pub ack_us: f64,
    pub wifi_data_frame_us_range: UsRange,
    /// FFT size of the multicarrier model; every tone sits on a bin of it.
    pub wifi_subcarrier_count: usize,
    /// Occupied tones of RTS/CTS/ACK frames. Per-tone power matches data
    /// frames, so narrower control frames are proportionally weaker.
    pub control_subcarrier_count: usize,

    pub bt_data_us_range: UsRange,
    pub bt_ack_us_range: UsRange,
    pub bt_ack_delay_us_range: UsRange,
    /// Silence between an ACK and the next data packet. The default is one
    /// 625 us slot less a typical 1-slot ACK airtime.
    pub bt_idle_gap_us: f64,
    pub bt_symbol_rate_hz: f64,
    pub bt_modulation_index: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::BeaconOnly,
            duration_s: 1.0,
            seed: 0,
            amplitude: 1.0,
            lead_in_us: 100.0,
            beacon_interval_us: 102_400.0,
            beacon_airtime_us: 2_184.0,
            difs_us: 50.0,
            sifs_us: 10.0,
            rts_us: 50.0,
            cts_us: 40.0,
            ack_us: 40.0,
            wifi_data_frame_us_range: UsRange::new(1_000.0, 3_000.0),
            wifi_subcarrier_count: 64,
            control_subcarrier_count: 16,
            bt_data_us_range: UsRange::new(2_500.0, 2_870.0),
            bt_ack_us_range: UsRange::new(126.0, 366.0),
            bt_ack_delay_us_range: UsRange::new(200.0, 600.0),
            bt_idle_gap_us: 375.0,
            bt_symbol_rate_hz: 1e6,
            bt_modulation_index: 0.32,
        }
    }
}

impl GeneratorConfig {
    pub fn new(scenario: Scenario, duration_s: f64, seed: u64) -> Self {
        Self {
            scenario,
            duration_s,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::Config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration_s
            )));
        }
        let total = self.duration_s * sample_rate_hz;
        if total < 1.0 || total > (usize::MAX / 16) as f64 {
            return Err(Error::Config(format!(
                "duration x rate = {total} samples is not addressable"
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::Config("amplitude must be positive".into()));
        }
        let fixed = [
            ("lead_in_us", self.lead_in_us),
            ("difs_us", self.difs_us),
            ("sifs_us", self.sifs_us),
            ("bt_idle_gap_us", self.bt_idle_gap_us),
        ];
        for (name, v) in fixed {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative"
                )));
            }
        }
        let widths = [
            ("beacon_airtime_us", self.beacon_airtime_us),
            ("rts_us", self.rts_us),
            ("cts_us", self.cts_us),
            ("ack_us", self.ack_us),
        ];
        for (name, v) in widths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.beacon_interval_us.is_finite()
            && self.beacon_interval_us > self.beacon_airtime_us)
        {
            return Err(Error::Config(
                "beacon interval must exceed beacon airtime".into(),
            ));
        }
        self.wifi_data_frame_us_range
            .validate("wifi_data_frame_us_range")?;
        self.bt_data_us_range.validate("bt_data_us_range")?;
        self.bt_ack_us_range.validate("bt_ack_us_range")?;
        self.bt_ack_delay_us_range
            .validate("bt_ack_delay_us_range")?;
        if self.wifi_subcarrier_count == 0 {
            return Err(Error::Config(
                "wifi_subcarrier_count must be positive".into(),
            ));
        }
        if self.control_subcarrier_count == 0
            || self.control_subcarrier_count > self.wifi_subcarrier_count
        {
            return Err(Error::Config(
                "control_subcarrier_count must be in 1..=wifi_subcarrier_count".into(),
            ));
        }
        if !(self.bt_symbol_rate_hz.is_finite() && self.bt_symbol_rate_hz > 0.0) {
            return Err(Error::Config("bt_symbol_rate_hz must be positive".into()));
        }
        if !self.bt_modulation_index.is_finite() {
            return Err(Error::Config("bt_modulation_index must be finite".into()));
        }
        Ok(())
    }

    /// Digest of every generation parameter, recorded in recording metadata.
    pub fn hash(&self) -> String {
        json_hash(self)
    }
}

struct Synth<'a> {
    cfg: &'a GeneratorConfig,
    rate: f64,
    rng: ChaCha8Rng,
    samples: Vec<Complex32>,
    truth: Vec<TruthBurst>,
}

impl<'a> Synth<'a> {
    fn new(cfg: &'a GeneratorConfig, rate: f64) -> Result<Self> {
        cfg.validate(rate)?;
        let total = (cfg.duration_s * rate).round() as usize;
        Ok(Self {
            cfg,
            rate,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            samples: vec![Complex32::new(0.0, 0.0); total],
            truth: Vec::new(),
        })
    }

    fn total(&self) -> usize {
        self.samples.len()
    }

    fn samples_of(&self, us: f64) -> usize {
        (us * self.rate * 1e-6).round() as usize
    }

    fn draw(&mut self, range: UsRange) -> usize {
        let (lo, hi) = range.sample_bounds(self.rate);
        self.rng.random_range(lo..=hi)
    }

    fn fits(&self, start: usize, width: usize) -> bool {
        start
            .checked_add(width)
            .is_some_and(|end| end <= self.total())
    }

    /// Adds a multicarrier frame with `active` occupied tones.
    fn ofdm_frame(
        &mut self,
        start: usize,
        width: usize,
        active: usize,
        label: ProtocolLabel,
        kind: FrameKind,
    ) {
        let n = self.cfg.wifi_subcarrier_count;
        let tone_amp = self.cfg.amplitude / (n as f64).sqrt();
        let first = -((active / 2) as i64);
        let tones: Vec<(f64, f64)> = (0..active as i64)
            .map(|i| {
                let k = (first + i) as f64;
                let phase = self.rng.random_range(0.0..2.0 * PI);
                (2.0 * PI * k / n as f64, phase)
            })
            .collect();
        // Tones sit on bins of an n-point grid, so the envelope is n-periodic.
        let period: Vec<Complex32> = (0..n)
            .map(|t| {
                let v: Complex64 = tones
                    .iter()
                    .map(|&(w, ph)| Complex64::from_polar(tone_amp, w * t as f64 + ph))
                    .sum();
                Complex32::new(v.re as f32, v.im as f32)
            })
            .collect();
        for (i, s) in self.samples[start..start + width].iter_mut().enumerate() {
            *s += period[i % n];
        }
        self.push(start, width, label, kind);
    }

    /// Adds a constant-envelope frame whose phase walks by +-pi*h per symbol.
    fn gfsk_frame(&mut self, start: usize, width: usize, kind: FrameKind) {
        let amp = self.cfg.amplitude;
        let samples_per_symbol = self.rate / self.cfg.bt_symbol_rate_hz;
        let step = PI * self.cfg.bt_modulation_index / samples_per_symbol;
        let mut phase = self.rng.random_range(0.0..2.0 * PI);
        let mut symbol = usize::MAX;
        let mut dir = 1.0;
        for i in 0..width {
            let sym = (i as f64 / samples_per_symbol) as usize;
            if sym != symbol {
                symbol = sym;
                dir = if self.rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            let z = Complex64::from_polar(amp, phase);
            self.samples[start + i] += Complex32::new(z.re as f32, z.im as f32);
            phase = (phase + dir * step).rem_euclid(2.0 * PI);
        }
        self.push(start, width, ProtocolLabel::Bluetooth, kind);
    }

    fn push(&mut self, start: usize, width: usize, label: ProtocolLabel, kind: FrameKind) {
        self.truth.push(TruthBurst {
            start_sample: start,
            end_sample: start + width,
            label,
            kind,
        });
    }

    fn finish(self) -> (IqRecording, BurstTruth) {
        let cfg = self.cfg;
        let mut truth = self.truth;
        truth.sort_by_key(|b| (b.start_sample, b.label.code()));
        let mut rec = IqRecording::from_parts(self.samples, self.rate, Default::default());
        rec.set_meta("scenario", cfg.scenario);
        rec.set_meta("seed", cfg.seed);
        rec.set_meta("config_hash", cfg.hash());
        rec.set_meta("burst_count", truth.len());
        (rec, BurstTruth { bursts: truth })
    }
}

fn require(cfg: &GeneratorConfig, scenario: Scenario) -> Result<()> {
    if cfg.scenario != scenario {
        return Err(Error::Config(format!(
            "config scenario is {}, expected {scenario}",
            cfg.scenario
        )));
    }
    Ok(())
}

/// Dispatches on `cfg.scenario`.
pub fn generate(cfg: &GeneratorConfig, sample_rate_hz: f64) -> Result<(IqRecording, BurstTruth)> {
    match cfg.scenario {
        Scenario::BeaconOnly => generate_beacon(cfg, sample_rate_hz),
        Scenario::WifiExchange => generate_wifi_exchange(cfg, sample_rate_hz),
        Scenario::Bluetooth => generate_bluetooth(cfg, sample_rate_hz),
        Scenario::Mixed => generate_mixed(cfg, sample_rate_hz),
    }
}

/// Beacons every `beacon_interval_us`, the first one after the lead-in.
pub fn generate_beacon(
    cfg: &GeneratorConfig,
    sample_rate_hz: f64,
) -> Result<(IqRecording, BurstTruth)> {
    require(cfg, Scenario::BeaconOnly)?;
    let mut s = Synth::new(cfg, sample_rate_hz)?;
    beacon_stream(&mut s);
    let (mut rec, truth) = s.finish();
    rec.set_meta("short_recording", truth.len() <= 1);
    Ok((rec, truth))
}

fn beacon_stream(s: &mut Synth<'_>) {
    let lead = s.samples_of(s.cfg.lead_in_us);
    let airtime = s.samples_of(s.cfg.beacon_airtime_us);
    let n = s.cfg.wifi_subcarrier_count;
    let mut k = 0u64;
    loop {
        let start = lead + s.samples_of(k as f64 * s.cfg.beacon_interval_us);
        if !s.fits(start, airtime) {
            break;
        }
        s.ofdm_frame(
            start,
            airtime,
            n,
            ProtocolLabel::WifiBeacon,
            FrameKind::Beacon,
        );
        k += 1;
    }
}

/// Repeating `[DIFS] RTS [SIFS] CTS [SIFS] Data [SIFS] ACK` cycles. A beacon
/// that falls due before the next cycle could finish is sent first, as soon as
/// the medium has been idle for DIFS.
pub fn generate_wifi_exchange(
    cfg: &GeneratorConfig,
    sample_rate_hz: f64,
) -> Result<(IqRecording, BurstTruth)> {
    require(cfg, Scenario::WifiExchange)?;
    let mut s = Synth::new(cfg, sample_rate_hz)?;

    let lead = s.samples_of(cfg.lead_in_us);
    let difs = s.samples_of(cfg.difs_us);
    let sifs = s.samples_of(cfg.sifs_us);
    let rts = s.samples_of(cfg.rts_us).max(1);
    let cts = s.samples_of(cfg.cts_us).max(1);
    let ack = s.samples_of(cfg.ack_us).max(1);
    let airtime = s.samples_of(cfg.beacon_airtime_us);
    let full = cfg.wifi_subcarrier_count;
    let ctl = cfg.control_subcarrier_count;

    let mut tbtt_index = 0u64;
    let tbtt = |s: &Synth<'_>, k: u64| lead + s.samples_of(k as f64 * cfg.beacon_interval_us);
    // Earliest start of the next transmission (medium idle + DIFS).
    let mut ready = lead;
    let mut pending_data: Option<usize> = None;

    loop {
        let data = match pending_data {
            Some(d) => d,
            None => s.draw(cfg.wifi_data_frame_us_range),
        };
        pending_data = Some(data);
        let cycle = rts + sifs + cts + sifs + data + sifs + ack;
        let next_beacon = tbtt(&s, tbtt_index);

        if next_beacon <= ready + cycle {
            let start = next_beacon.max(ready);
            if !s.fits(start, airtime) {
                break;
            }
            s.ofdm_frame(
                start,
                airtime,
                full,
                ProtocolLabel::WifiBeacon,
                FrameKind::Beacon,
            );
            ready = start + airtime + difs;
            tbtt_index += 1;
            continue;
        }

        if !s.fits(ready, cycle) {
            break;
        }
        let mut t = ready;
        s.ofdm_frame(t, rts, ctl, ProtocolLabel::Wifi, FrameKind::Rts);
        t += rts + sifs;
        s.ofdm_frame(t, cts, ctl, ProtocolLabel::Wifi, FrameKind::Cts);
        t += cts + sifs;
        s.ofdm_frame(t, data, full, ProtocolLabel::Wifi, FrameKind::Data);
        t += data + sifs;
        s.ofdm_frame(t, ack, ctl, ProtocolLabel::Wifi, FrameKind::Ack);
        t += ack;
        ready = t + difs;
        pending_data = None;
    }
    Ok(s.finish())
}

/// Repeating `Data [ack delay] ACK [idle]` cycles of a Bluetooth link.
pub fn generate_bluetooth(
    cfg: &GeneratorConfig,
    sample_rate_hz: f64,
) -> Result<(IqRecording, BurstTruth)> {
    require(cfg, Scenario::Bluetooth)?;
    let mut s = Synth::new(cfg, sample_rate_hz)?;
    bluetooth_stream(&mut s);
    Ok(s.finish())
}

fn bluetooth_stream(s: &mut Synth<'_>) {
    let cfg = s.cfg;
    let idle = s.samples_of(cfg.bt_idle_gap_us);
    let mut t = s.samples_of(cfg.lead_in_us);
    loop {
        let data = s.draw(cfg.bt_data_us_range);
        let delay = s.draw(cfg.bt_ack_delay_us_range);
        let ack = s.draw(cfg.bt_ack_us_range);
        if !s.fits(t, data + delay + ack) {
            break;
        }
        s.gfsk_frame(t, data, FrameKind::BtData);
        t += data + delay;
        s.gfsk_frame(t, ack, FrameKind::BtAck);
        t += ack + idle;
    }
}

/// Sum of the beacon and Bluetooth scenarios generated from the same seed.
/// Frames may overlap; the overlapping fraction is recorded in the metadata.
pub fn generate_mixed(
    cfg: &GeneratorConfig,
    sample_rate_hz: f64,
) -> Result<(IqRecording, BurstTruth)> {
    require(cfg, Scenario::Mixed)?;
    let beacon_cfg = GeneratorConfig {
        scenario: Scenario::BeaconOnly,
        ..cfg.clone()
    };
    let bt_cfg = GeneratorConfig {
        scenario: Scenario::Bluetooth,
        ..cfg.clone()
    };
    let (beacons, beacon_truth) = generate_beacon(&beacon_cfg, sample_rate_hz)?;
    let (bt, bt_truth) = generate_bluetooth(&bt_cfg, sample_rate_hz)?;

    let samples: Vec<Complex32> = beacons
        .samples()
        .iter()
        .zip(bt.samples())
        .map(|(a, b)| a + b)
        .collect();
    let mut bursts = beacon_truth.bursts;
    bursts.extend(bt_truth.bursts);
    bursts.sort_by_key(|b| (b.start_sample, b.label.code()));
    let truth = BurstTruth { bursts };

    let overlapping = overlapping_count(&truth);
    let mut rec = IqRecording::from_parts(samples, sample_rate_hz, Default::default());
    rec.set_meta("scenario", cfg.scenario);
    rec.set_meta("seed", cfg.seed);
    rec.set_meta("config_hash", cfg.hash());
    rec.set_meta("burst_count", truth.len());
    rec.set_meta("overlapping_bursts", overlapping);
    rec.set_meta("overlap_fraction", overlap_fraction(&truth));
    Ok((rec, truth))
}

fn overlapping_count(truth: &BurstTruth) -> usize {
    let b = &truth.bursts;
    // Sorted by start: a burst overlaps an earlier one iff it starts before the
    // furthest end seen so far, and a later one iff its successor starts early.
    let mut reach = 0usize;
    let mut count = 0;
    for (i, cur) in b.iter().enumerate() {
        let hit_before = i > 0 && cur.start_sample < reach;
        let hit_after = b
            .get(i + 1)
            .is_some_and(|n| n.start_sample < cur.end_sample);
        if hit_before || hit_after {
            count += 1;
        }
        reach = reach.max(cur.end_sample);
    }
    count
}

/// Fraction of truth bursts that temporally overlap at least one other burst.
pub fn overlap_fraction(truth: &BurstTruth) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    overlapping_count(truth) as f64 / truth.len() as f64
}
