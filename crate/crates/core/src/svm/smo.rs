//! Soft-margin SVM dual solved by sequential minimal optimization.
//!
//! Dual: minimize `1/2 a'Qa - sum(a)` subject to `0 <= a_i <= C` and
//! `sum(a_i y_i) = 0`, with `Q_ij = y_i y_j k(x_i, x_j)`. Each step picks the
//! maximal violating pair using second-order gain for the second index, so the
//! loop stops exactly when the KKT gap drops below tolerance.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

/// Dense kernel matrix.
pub(crate) struct Gram {
    n: usize,
    k: Vec<f64>,
}

impl Gram {
    pub(crate) fn new(points: &[Vec<f64>], spec: &KernelSpec) -> Self {
        let n = points.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = spec.eval_unchecked(&points[i], &points[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Self { n, k }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    /// `alpha_i * y_i` for each support vector.
    pub coeffs: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c_reg: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl BinarySvmModel {
    /// `sum_i coeffs_i k(sv_i, x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coeffs)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(sv, x))
            .sum::<f64>()
            + self.bias
    }

    pub fn dims(&self) -> usize {
        self.support_vectors.first().map_or(0, Vec::len)
    }
}

/// Trains a binary classifier on `targets` in {-1, +1}. `max_passes` bounds
/// the work at `max_passes * n` pair updates; hitting it returns the current
/// model with `converged = false`.
pub fn train_binary(
    rows: &[Vec<f64>],
    targets: &[f64],
    spec: &KernelSpec,
    c_reg: f64,
    tol: f64,
    max_passes: usize,
) -> Result<BinarySvmModel> {
    check_inputs(rows, targets, spec, c_reg, tol)?;
    let gram = Gram::new(rows, spec);
    Ok(train_with_gram(
        rows, targets, &gram, spec, c_reg, tol, max_passes,
    ))
}

pub(crate) fn check_inputs(
    rows: &[Vec<f64>],
    targets: &[f64],
    spec: &KernelSpec,
    c_reg: f64,
    tol: f64,
) -> Result<()> {
    spec.validate()?;
    if rows.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two training rows".into(),
        ));
    }
    if rows.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    let dims = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != dims) {
        return Err(Error::DimensionMismatch(dims, r.len()));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("training rows must be finite".into()));
    }
    if let Some(t) = targets.iter().find(|&&t| t != 1.0 && t != -1.0) {
        return Err(Error::InvalidInput(format!(
            "targets must be +1 or -1, got {t}"
        )));
    }
    if !(targets.contains(&1.0) && targets.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if !(c_reg.is_finite() && c_reg > 0.0) {
        return Err(Error::Config(format!("C must be positive, got {c_reg}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

pub(crate) fn train_with_gram(
    rows: &[Vec<f64>],
    y: &[f64],
    gram: &Gram,
    spec: &KernelSpec,
    c: f64,
    tol: f64,
    max_passes: usize,
) -> BinarySvmModel {
    let n = rows.len();
    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective: Q a - 1.
    let mut grad = vec![-1.0; n];
    // Half the tolerance leaves room for rounding when the model is audited
    // from scratch.
    let eps = 0.5 * tol;
    let max_iter = max_passes.saturating_mul(n).max(1);

    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let mut g_max = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > g_max {
                    g_max = v;
                    i = t;
                }
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_gain = f64::INFINITY;
        if i != usize::MAX {
            let ki = gram.row(i);
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                if b > 0.0 {
                    let mut a = ki[i] + gram.get(t, t) - 2.0 * ki[t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let gain = -(b * b) / a;
                    if gain < best_gain {
                        best_gain = gain;
                        j = t;
                    }
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || g_max - g_min < eps {
            converged = true;
            break;
        }
        iterations += 1;

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let kij = gram.get(i, j);
        let (kii, kjj) = (gram.get(i, i), gram.get(j, j));
        // Curvature along the pair direction is K_ii + K_jj - 2 K_ij for either
        // sign combination.
        let mut quad = kii + kjj - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        let di = alpha[i] - ai_old;
        let dj = alpha[j] - aj_old;
        let (ri, rj) = (gram.row(i), gram.row(j));
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ri[t] * di + y[j] * rj[t] * dj);
        }
    }

    let bias = compute_bias(gram, y, &alpha, c);
    let sv: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    BinarySvmModel {
        support_vectors: sv.iter().map(|&t| rows[t].clone()).collect(),
        coeffs: sv.iter().map(|&t| alpha[t] * y[t]).collect(),
        support_indices: sv,
        bias,
        kernel: *spec,
        c_reg: c,
        converged,
        iterations,
    }
}

/// Average of `y_i - sum_j a_j y_j K_ij` over free vectors; with none free,
/// the midpoint of the interval the bounded vectors allow.
fn compute_bias(gram: &Gram, y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let active: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    let residual = |i: usize| {
        let row = gram.row(i);
        y[i] - active
            .iter()
            .map(|&j| alpha[j] * y[j] * row[j])
            .sum::<f64>()
    };
    let free: Vec<usize> = (0..n).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| residual(i)).sum::<f64>() / free.len() as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for t in 0..n {
        let r = residual(t);
        let at_zero = alpha[t] <= 0.0;
        if (at_zero && y[t] > 0.0) || (!at_zero && y[t] < 0.0) {
            lower = lower.max(r);
        } else {
            upper = upper.min(r);
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_pair_gives_identity_decision() {
        let rows = vec![vec![-1.0], vec![1.0]];
        let m = train_binary(&rows, &[-1.0, 1.0], &KernelSpec::linear(), 1e3, 1e-3, 100).unwrap();
        assert!(m.converged);
        assert!(m.bias.abs() < 1e-9);
        for x in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            assert!((m.decision_value(&[x]) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn xor_is_separable_with_rbf() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let y = [-1.0, -1.0, 1.0, 1.0];
        let m = train_binary(&rows, &y, &KernelSpec::rbf(1.0), 10.0, 1e-3, 100).unwrap();
        for (r, t) in rows.iter().zip(y) {
            assert!(m.decision_value(r) * t > 0.0);
        }
    }

    #[test]
    fn input_validation() {
        let rows = vec![vec![0.0], vec![1.0]];
        let k = KernelSpec::linear();
        assert!(matches!(
            train_binary(&rows, &[1.0, 1.0], &k, 1.0, 1e-3, 10),
            Err(Error::SingleClass)
        ));
        assert!(train_binary(&rows[..1], &[1.0], &k, 1.0, 1e-3, 10).is_err());
        assert!(train_binary(&rows, &[1.0, 0.0], &k, 1.0, 1e-3, 10).is_err());
        assert!(train_binary(&rows, &[1.0, -1.0], &k, 0.0, 1e-3, 10).is_err());
        let ragged = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(matches!(
            train_binary(&ragged, &[1.0, -1.0], &k, 1.0, 1e-3, 10),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64).cos()])
            .collect();
        let y: Vec<f64> = (0..40)
            .map(|i| if i % 3 == 0 { 1.0 } else { -1.0 })
            .collect();
        let m = train_binary(&rows, &y, &KernelSpec::rbf(0.5), 100.0, 1e-3, 0).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 1);
    }
}
