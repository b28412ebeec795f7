//! Oracles shared by the integration suites. Each is written from the
//! definitions alone and never calls the code it audits.

#![allow(dead_code)]

use ismclass::features::LabeledDataset;
use ismclass::svm::{BinarySvmModel, KernelKind, KernelSpec};
use ismclass::ProtocolLabel;

/// Brute-force nearest-neighbor vote: majority of the k closest rows, ties
/// broken by the smaller summed distance, then by the smaller label code.
/// Distance ties among neighbors go to the lower row index.
pub fn knn_oracle(
    points: &[Vec<f64>],
    labels: &[ProtocolLabel],
    k: usize,
    x: &[f64],
) -> ProtocolLabel {
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (s.sqrt(), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 3];
    let mut sum = [0.0f64; 3];
    for &(dist, i) in &d[..k] {
        let c = labels[i].code() as usize;
        votes[c] += 1;
        sum[c] += dist;
    }
    let best = (0..3)
        .max_by(|&a, &b| {
            votes[a]
                .cmp(&votes[b])
                .then(sum[b].partial_cmp(&sum[a]).unwrap())
                .then(b.cmp(&a))
        })
        .unwrap();
    ProtocolLabel::from_code(best as u8).unwrap()
}

pub fn kernel_oracle(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    match spec.kind {
        KernelKind::Linear => dot,
        KernelKind::Polynomial => (dot + spec.poly_c).powf(spec.poly_p as f64),
        KernelKind::Rbf => {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
            (-d / spec.rbf_c).exp()
        }
    }
}

/// Full multiplier vector recovered from the support set.
pub fn alphas(model: &BinarySvmModel, n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n];
    for (&i, c) in model.support_indices.iter().zip(&model.coeffs) {
        a[i] = c.abs();
    }
    a
}

/// Largest violation of the soft-margin KKT conditions, measured on the
/// functional margin `y f(x)`, plus the dual feasibility residuals.
pub struct KktAudit {
    pub max_violation: f64,
    pub box_violation: f64,
    pub equality_residual: f64,
}

pub fn kkt_audit(model: &BinarySvmModel, rows: &[Vec<f64>], y: &[f64]) -> KktAudit {
    let c = model.c_reg;
    let a = alphas(model, rows.len());
    let eps = 1e-8 * c;
    let mut worst = 0.0f64;
    for (i, x) in rows.iter().enumerate() {
        let f: f64 = (0..rows.len())
            .filter(|&j| a[j] > 0.0)
            .map(|j| a[j] * y[j] * kernel_oracle(&model.kernel, &rows[j], x))
            .sum::<f64>()
            + model.bias;
        let m = y[i] * f;
        let v = if a[i] <= eps {
            (1.0 - m).max(0.0)
        } else if a[i] >= c - eps {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    let box_violation = a
        .iter()
        .map(|&v| (-v).max(v - c).max(0.0))
        .fold(0.0, f64::max);
    let equality_residual = a.iter().zip(y).map(|(a, y)| a * y).sum::<f64>().abs();
    KktAudit {
        max_violation: worst,
        box_violation,
        equality_residual,
    }
}

/// `w = sum_i alpha_i y_i x_i` for a linear model.
pub fn primal_weights(model: &BinarySvmModel) -> Vec<f64> {
    let mut w = vec![0.0; model.dims()];
    for (sv, c) in model.support_vectors.iter().zip(&model.coeffs) {
        for (wi, xi) in w.iter_mut().zip(sv) {
            *wi += c * xi;
        }
    }
    w
}

pub fn targets(ds: &LabeledDataset, label: ProtocolLabel) -> Vec<f64> {
    ds.rows
        .iter()
        .map(|r| if r.label == label { 1.0 } else { -1.0 })
        .collect()
}

/// Median of a non-empty slice.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Standardized truth-labeled corpus with `per_class` rows per class.
pub fn small_corpus(per_class: usize, seed: u64) -> LabeledDataset {
    use ismclass::eval::{build_corpus, CorpusConfig};
    let cfg = CorpusConfig {
        frames_per_class: per_class,
        seed,
        use_truth: true,
        ..Default::default()
    };
    let (ds, _) = build_corpus(&cfg).unwrap();
    ismclass::features::standardize(&ds, None).unwrap()
}
