use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Linear => "linear",
            Self::Polynomial => "poly",
            Self::Rbf => "rbf",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "poly" | "polynomial" => Ok(Self::Polynomial),
            "rbf" | "gaussian" => Ok(Self::Rbf),
            other => Err(Error::Config(format!("unknown kernel `{other}`"))),
        }
    }
}

/// A fully resolved kernel.
///
/// * linear: `a . b`
/// * polynomial: `(a . b + poly_c)^poly_p`
/// * rbf: `exp(-|a - b|^2 / rbf_c)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub poly_c: f64,
    pub poly_p: u32,
    pub rbf_c: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            ..Self::default()
        }
    }

    pub fn polynomial(poly_c: f64, poly_p: u32) -> Self {
        Self {
            kind: KernelKind::Polynomial,
            poly_c,
            poly_p,
            ..Self::default()
        }
    }

    pub fn rbf(rbf_c: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            rbf_c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.poly_p < 1 {
            return Err(Error::Config("polynomial degree must be at least 1".into()));
        }
        if !self.poly_c.is_finite() {
            return Err(Error::Config("polynomial offset must be finite".into()));
        }
        if !(self.rbf_c.is_finite() && self.rbf_c > 0.0) {
            return Err(Error::Config(format!(
                "rbf width must be positive, got {}",
                self.rbf_c
            )));
        }
        Ok(())
    }

    /// Kernel value; assumes equal lengths.
    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(a, b),
            KernelKind::Polynomial => (dot(a, b) + self.poly_c).powi(self.poly_p as i32),
            KernelKind::Rbf => (-sq_dist(a, b) / self.rbf_c).exp(),
        }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            kind: KernelKind::Rbf,
            poly_c: 1.0,
            poly_p: 3,
            rbf_c: 1.0,
        }
    }
}

/// Checked kernel value: the spec must validate and the lengths agree.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    spec.validate()?;
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    Ok(spec.eval_unchecked(a, b))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Twice the median pairwise squared distance; falls back to 1 for degenerate
/// sets.
pub fn median_heuristic(points: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d.push(sq_dist(a, b));
        }
    }
    if d.is_empty() {
        return 1.0;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, f64::total_cmp);
    let m = *m;
    if m > 0.0 && m.is_finite() {
        2.0 * m
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        assert_eq!(
            kernel_eval(&KernelSpec::linear(), &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
        assert_eq!(
            kernel_eval(&KernelSpec::rbf(0.7), &[1.5, -2.0], &[1.5, -2.0]).unwrap(),
            1.0
        );
        let p = KernelSpec::polynomial(1.0, 2);
        assert_eq!(kernel_eval(&p, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 4.0);
        let r = kernel_eval(&KernelSpec::rbf(2.0), &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((r - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            kernel_eval(&KernelSpec::linear(), &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn median_of_collinear_points() {
        // Pairwise squared distances 1, 4, 1 -> median 1.
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        assert_eq!(median_heuristic(&pts), 2.0);
        assert_eq!(median_heuristic(&[vec![3.0]]), 1.0);
    }
}
