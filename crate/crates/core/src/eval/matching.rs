//! Pairing detections with ground truth.
//!
//! A detection matches a truth burst when their overlap covers at least half
//! of each. Under that rule a detection matches at most one truth burst on a
//! timeline of disjoint bursts.

use serde::{Deserialize, Serialize};

use crate::detect::DetectedBurst;
use crate::signal::{BurstTruth, ProtocolLabel, Span, TruthBurst};

fn mutual_half(a: &impl Span, b: &impl Span) -> bool {
    let ov = a.overlap_samples(b);
    2 * ov >= a.len_samples() && 2 * ov >= b.len_samples() && ov > 0
}

/// For each detection, the index of the truth burst it matches, if any. When
/// several qualify the largest overlap wins, then the earliest.
pub fn match_detections(dets: &[DetectedBurst], truth: &BurstTruth) -> Vec<Option<usize>> {
    let t = &truth.bursts;
    let longest = t.iter().map(Span::len_samples).max().unwrap_or(0);
    dets.iter()
        .map(|d| {
            // Truth is sorted by start; candidates start before `d` ends and
            // no earlier than `longest` samples before `d` starts.
            let hi = t.partition_point(|b| b.start_sample < d.end_sample);
            let lo = t.partition_point(|b| b.start_sample + longest <= d.start_sample);
            let mut best: Option<(usize, usize)> = None;
            for (i, b) in t.iter().enumerate().take(hi).skip(lo) {
                if mutual_half(d, b) {
                    let ov = d.overlap_samples(b);
                    if best.is_none_or(|(_, o)| ov > o) {
                        best = Some((i, ov));
                    }
                }
            }
            best.map(|(i, _)| i)
        })
        .collect()
}

/// Truth label of each matched detection; `None` marks a false alarm.
pub fn label_detections(dets: &[DetectedBurst], truth: &BurstTruth) -> Vec<Option<ProtocolLabel>> {
    match_detections(dets, truth)
        .into_iter()
        .map(|m| m.map(|i| truth.bursts[i].label))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionScore {
    pub detections: usize,
    pub truth: usize,
    /// Detections matching some truth burst.
    pub matched_detections: usize,
    /// Truth bursts matched by some detection.
    pub matched_truth: usize,
    pub precision: f64,
    pub recall: f64,
    /// Largest start or end offset over matched pairs, in samples.
    pub max_boundary_error: usize,
}

pub fn score_detections(dets: &[DetectedBurst], truth: &BurstTruth) -> DetectionScore {
    let m = match_detections(dets, truth);
    let mut hit = vec![false; truth.len()];
    let mut max_err = 0;
    for (d, ti) in dets.iter().zip(&m) {
        if let Some(i) = *ti {
            hit[i] = true;
            let b: &TruthBurst = &truth.bursts[i];
            max_err = max_err
                .max(d.start_sample.abs_diff(b.start_sample))
                .max(d.end_sample.abs_diff(b.end_sample));
        }
    }
    let matched_detections = m.iter().filter(|x| x.is_some()).count();
    let matched_truth = hit.iter().filter(|&&h| h).count();
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    DetectionScore {
        detections: dets.len(),
        truth: truth.len(),
        matched_detections,
        matched_truth,
        precision: ratio(matched_detections, dets.len()),
        recall: ratio(matched_truth, truth.len()),
        max_boundary_error: max_err,
    }
}
