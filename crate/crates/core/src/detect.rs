//! Blind burst detection with a twin sliding window.
//!
//! The instantaneous power is smoothed with a centered moving average. At every
//! point `k` the detector compares the energy of a leading window
//! `[k + delta, k + delta + L)` with a trailing window `(k - L, k]`. A ratio
//! above `alpha` marks a rising edge, below `1 / alpha` a falling edge. The
//! `delta` gap between the two windows sharpens the ratio across slow ramps.

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{IqRecording, Span};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub alpha: f64,
    pub window_len_rising: usize,
    pub window_len_falling: usize,
    pub gap_delta: usize,
    pub smooth_len: usize,
    pub floor_eps: f64,
    pub min_burst_us: f64,
    pub min_gap_us: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            alpha: 2.7,
            window_len_rising: 64,
            window_len_falling: 64,
            gap_delta: 16,
            smooth_len: 64,
            floor_eps: 1e-9,
            min_burst_us: 20.0,
            min_gap_us: 5.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::Config(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        if self.window_len_rising == 0 || self.window_len_falling == 0 {
            return Err(Error::Config("window lengths must be at least 1".into()));
        }
        if self.smooth_len == 0 {
            return Err(Error::Config("smooth_len must be at least 1".into()));
        }
        if !(self.floor_eps.is_finite() && self.floor_eps > 0.0) {
            return Err(Error::Config("floor_eps must be positive".into()));
        }
        if !(self.min_burst_us >= 0.0 && self.min_gap_us >= 0.0) {
            return Err(Error::Config(
                "debounce durations must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Worst-case edge displacement of a clean detection, in samples.
    pub fn edge_tolerance(&self) -> usize {
        self.smooth_len + self.window_len_rising.max(self.window_len_falling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectedBurst {
    pub start_sample: usize,
    pub end_sample: usize,
    /// Largest energy ratio seen on the rising edge.
    pub peak_ratio: f64,
}

impl Span for DetectedBurst {
    fn start_sample(&self) -> usize {
        self.start_sample
    }
    fn end_sample(&self) -> usize {
        self.end_sample
    }
}

/// Sliding sum that reports exactly zero whenever every value in the window is
/// zero, so cancellation residue never leaks into silent spans.
#[derive(Default)]
struct WindowSum {
    sum: f64,
    nonzero: usize,
}

impl WindowSum {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.nonzero += (v != 0.0) as usize;
    }

    fn remove(&mut self, v: f64) {
        self.sum -= v;
        self.nonzero -= (v != 0.0) as usize;
    }

    fn value(&self) -> f64 {
        if self.nonzero == 0 {
            0.0
        } else {
            self.sum.max(0.0)
        }
    }
}

/// Offsets `(before, after)` of the centered smoothing window.
fn smooth_offsets(smooth_len: usize) -> (usize, usize) {
    let before = (smooth_len - 1) / 2;
    (before, smooth_len - 1 - before)
}

/// Centered moving average of `|x|^2`; windows shrink at the edges.
pub fn smooth_power(rec: &IqRecording, smooth_len: usize) -> Result<Vec<f64>> {
    smooth_samples(rec.samples(), smooth_len)
}

fn smooth_samples(samples: &[Complex32], smooth_len: usize) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::Empty("recording"));
    }
    if smooth_len == 0 || smooth_len > samples.len() {
        return Err(Error::Config(format!(
            "smooth_len must be in 1..={}, got {smooth_len}",
            samples.len()
        )));
    }
    let n = samples.len();
    let power = |i: usize| samples[i].norm_sqr() as f64;
    let (before, after) = smooth_offsets(smooth_len);

    let mut out = Vec::with_capacity(n);
    let mut win = WindowSum::default();
    for i in 0..after.min(n) {
        win.add(power(i));
    }
    for k in 0..n {
        let hi = k + after;
        if hi < n {
            win.add(power(hi));
        }
        if k > before {
            win.remove(power(k - before - 1));
        }
        let lo = k.saturating_sub(before);
        let count = hi.min(n - 1) - lo + 1;
        out.push(win.value() / count as f64);
    }
    Ok(out)
}

/// Leading-window energy over trailing-window energy at `k`, each padded by
/// `floor_eps`.
pub fn energy_ratio(p: &[f64], k: usize, len: usize, delta: usize, floor_eps: f64) -> Result<f64> {
    if len == 0 {
        return Err(Error::Config("window length must be at least 1".into()));
    }
    let lo = len - 1;
    let hi = p.len().checked_sub(delta + len);
    match hi {
        Some(hi) if k >= lo && k <= hi => {
            let trailing: f64 = p[k + 1 - len..=k].iter().sum();
            let leading: f64 = p[k + delta..k + delta + len].iter().sum();
            Ok((leading + floor_eps) / (trailing + floor_eps))
        }
        _ => Err(Error::OutOfRange {
            index: k,
            lo,
            hi: hi.unwrap_or(0),
        }),
    }
}

/// Twin windows for one window length, slid one sample at a time.
struct TwinWindow {
    len: usize,
    trailing: WindowSum,
    leading: WindowSum,
}

impl TwinWindow {
    fn new(p: &[f64], len: usize, delta: usize, k0: usize) -> Self {
        let mut trailing = WindowSum::default();
        let mut leading = WindowSum::default();
        for &v in &p[k0 + 1 - len..=k0] {
            trailing.add(v);
        }
        for &v in &p[k0 + delta..k0 + delta + len] {
            leading.add(v);
        }
        Self {
            len,
            trailing,
            leading,
        }
    }

    /// Moves both windows from `k - 1` to `k`.
    fn advance(&mut self, p: &[f64], k: usize, delta: usize) {
        self.trailing.add(p[k]);
        self.trailing.remove(p[k - self.len]);
        self.leading.add(p[k + delta + self.len - 1]);
        self.leading.remove(p[k + delta - 1]);
    }

    fn ratio(&self, eps: f64) -> f64 {
        (self.leading.value() + eps) / (self.trailing.value() + eps)
    }
}

enum State {
    Idle,
    Burst { start: usize, peak: f64 },
}

/// Extremum tracker over a run of threshold crossings.
struct Run {
    best_k: usize,
    best: f64,
}

/// Segments a recording into frames. Returns bursts sorted and disjoint.
pub fn detect_bursts(rec: &IqRecording, cfg: &DetectorConfig) -> Result<Vec<DetectedBurst>> {
    cfg.validate()?;
    let n = rec.len();
    let lmax = cfg.window_len_rising.max(cfg.window_len_falling);
    let delta = cfg.gap_delta;
    if n <= 2 * lmax + delta || cfg.smooth_len > n {
        return Ok(Vec::new());
    }
    let p = smooth_samples(rec.samples(), cfg.smooth_len)?;
    let (before, after) = smooth_offsets(cfg.smooth_len);

    // Valid k for both window lengths.
    let k_first = lmax - 1;
    let k_last = n - delta - lmax;
    let eps = cfg.floor_eps;
    let rise_thr = cfg.alpha;
    let fall_thr = 1.0 / cfg.alpha;

    let mut rising = TwinWindow::new(&p, cfg.window_len_rising, delta, k_first);
    let mut falling = TwinWindow::new(&p, cfg.window_len_falling, delta, k_first);

    // A clean step at sample s peaks at k = s - after - 1 on the rising side and
    // bottoms out at k = e + before - delta on the falling side.
    let start_of = |k: usize| (k + 1 + after).min(n);
    let end_of = |k: usize| (k + delta).saturating_sub(before).min(n);

    let mut raw: Vec<DetectedBurst> = Vec::new();
    let mut state = State::Idle;
    let mut run: Option<Run> = None;

    for k in k_first..=k_last {
        if k > k_first {
            rising.advance(&p, k, delta);
            falling.advance(&p, k, delta);
        }
        match state {
            State::Idle => {
                let r = rising.ratio(eps);
                if r > rise_thr {
                    match &mut run {
                        Some(cur) if r >= cur.best => {
                            cur.best = r;
                            cur.best_k = k;
                        }
                        Some(_) => {}
                        None => run = Some(Run { best_k: k, best: r }),
                    }
                } else if let Some(done) = run.take() {
                    state = State::Burst {
                        start: start_of(done.best_k),
                        peak: done.best,
                    };
                }
            }
            State::Burst { start, peak } => {
                let r = falling.ratio(eps);
                if r < fall_thr {
                    match &mut run {
                        Some(cur) if r < cur.best => {
                            cur.best = r;
                            cur.best_k = k;
                        }
                        Some(_) => {}
                        None => run = Some(Run { best_k: k, best: r }),
                    }
                } else if let Some(done) = run.take() {
                    raw.push(DetectedBurst {
                        start_sample: start,
                        end_sample: end_of(done.best_k),
                        peak_ratio: peak,
                    });
                    state = State::Idle;
                }
            }
        }
    }
    match state {
        State::Idle => {
            if let Some(done) = run {
                raw.push(DetectedBurst {
                    start_sample: start_of(done.best_k),
                    end_sample: n,
                    peak_ratio: done.best,
                });
            }
        }
        State::Burst { start, peak } => {
            let end = run.map_or(n, |done| end_of(done.best_k));
            raw.push(DetectedBurst {
                start_sample: start,
                end_sample: end,
                peak_ratio: peak,
            });
        }
    }

    let rate = rec.sample_rate_hz();
    let min_gap = (cfg.min_gap_us * 1e-6 * rate).ceil() as usize;
    let min_len = (cfg.min_burst_us * 1e-6 * rate).ceil() as usize;
    Ok(debounce(raw, min_gap, min_len))
}

/// Merges bursts separated by fewer than `min_gap` samples (or overlapping),
/// then drops bursts shorter than `min_len` samples.
fn debounce(raw: Vec<DetectedBurst>, min_gap: usize, min_len: usize) -> Vec<DetectedBurst> {
    let mut merged: Vec<DetectedBurst> = Vec::with_capacity(raw.len());
    for b in raw.into_iter().filter(|b| b.end_sample > b.start_sample) {
        match merged.last_mut() {
            Some(prev) if b.start_sample < prev.end_sample + min_gap => {
                prev.end_sample = prev.end_sample.max(b.end_sample);
                prev.peak_ratio = prev.peak_ratio.max(b.peak_ratio);
            }
            _ => merged.push(b),
        }
    }
    merged.retain(|b| b.len_samples() >= min_len.max(1));
    merged
}
