//! Brute-force k-nearest-neighbor classifier.
//!
//! Deterministic tie rules make prediction a pure function of the stored rows
//! as a multiset:
//! * neighbors are ordered by distance, then by row index;
//! * vote ties go to the label whose neighbors have the smallest summed
//!   distance, then to the smallest label code.
//!
//! Row order only decides which of several equidistant rows enter the
//! neighborhood; their labels and distances then feed the vote. Two rows at the
//! same distance with different labels at the k-th position are the one case
//! where storage order matters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureSet, LabeledDataset, Standardization};
use crate::signal::ProtocolLabel;

pub const DEFAULT_K: usize = 10;

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    Ok(sq_dist(a, b).sqrt())
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub features: FeatureSet,
    pub standardization: Standardization,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<ProtocolLabel>,
}

impl KnnModel {
    /// Stores a standardized dataset projected onto `features`.
    pub fn new(ds: &LabeledDataset, features: FeatureSet, k: usize) -> Result<Self> {
        let standardization = ds
            .standardization
            .ok_or_else(|| Error::InvalidInput("training data must be standardized".into()))?;
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if k > ds.len() {
            return Err(Error::Config(format!(
                "k = {k} exceeds the {} training rows",
                ds.len()
            )));
        }
        Ok(Self {
            k,
            features,
            standardization,
            points: ds.rows.iter().map(|r| r.features.point(features)).collect(),
            labels: ds.rows.iter().map(|r| r.label).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `k` nearest rows as `(row index, distance)`, ascending.
    pub fn k_nearest(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, sq_dist(p, x).sqrt()))
            .collect();
        let by_dist = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
        let k = self.k.min(all.len());
        if k < all.len() {
            all.select_nth_unstable_by(k, by_dist);
            all.truncate(k);
        }
        all.sort_unstable_by(by_dist);
        all
    }

    pub fn predict(&self, x: &[f64]) -> ProtocolLabel {
        let mut votes = [0usize; 3];
        let mut dist = [0.0f64; 3];
        for (i, d) in self.k_nearest(x) {
            let l = self.labels[i].index();
            votes[l] += 1;
            dist[l] += d;
        }
        let mut best = 0;
        for l in 1..3 {
            if votes[l] > votes[best] || (votes[l] == votes[best] && dist[l] < dist[best]) {
                best = l;
            }
        }
        ProtocolLabel::ALL[best]
    }
}
